#pragma once

#include <functional>
#include <string>

#include <nlohmann/json.hpp>

#include "sirf/experiment.hpp"

namespace sirf {

// Statistics a class preset is fitted to reproduce. Values are in the class's
// own delay-value units.
struct CalibrationTargets {
    double mean_wid = 10.40;
    double mean_uctvn = 2.08;
    double strong_count = 645.0;    // per device at the analysis threshold
    double minsize_xmr5 = 168.0;    // smallest-bitstring statistic at XMR 5
    double pof3_exponent = -6.2;    // probability-of-failure exponent at XMR 3
    double wid_tol = 0.10;
    double uctvn_tol = 0.10;
    double strong_tol = 0.15;
    double minsize_tol = 0.15;
    double pof_tol = 0.5;

    nlohmann::ordered_json to_json() const;
    static CalibrationTargets from_json(const nlohmann::ordered_json& j);
};

CalibrationTargets default_targets(const std::string& preset_name);

// Measured statistics of one evaluation run.
struct CalibrationEval {
    double mean_wid = 0.0;
    double mean_uctvn = 0.0;
    double strong_analysis = 0.0;
    double strong_bitgen = 0.0;
    double carrier_flip_prob = 0.0;  // pre-XMR flip probability per strong bit
    double pof3_exponent = 0.0;      // binomial composition of the flip prob
    double minsize_xmr5 = 0.0;
    double raw_iqr_mean = 0.0;  // mean per-device IQR of raw dvd at enrollment
    std::vector<double> abs_cs;  // pooled |dvd_cs| samples at enrollment

    nlohmann::ordered_json to_json() const;
};

CalibrationEval evaluate_params(const ClassParams& params, uint32_t n_devices, uint32_t n_sets,
                                const SeedConfig& seeds, bool parallel = true);

struct CalibrationOutcome {
    ClassParams params;
    CalibrationEval achieved;
    uint32_t evaluations = 0;
    bool within_targets = false;

    nlohmann::ordered_json to_json() const;
};

using CalibrationLog = std::function<void(const std::string&)>;

// Iterative fit: sigma_wid_ps -> mean WID; sigma_tc_gate -> flip probability
// (POF3); sigma_meas_ps -> residual UC-TVN; bitgen threshold -> XMR-5 yield;
// a bounded WID adjustment centers the strong-bit count.
CalibrationOutcome calibrate_preset(ClassParams start, const CalibrationTargets& targets,
                                    uint64_t seed, bool fast, const CalibrationLog& log = {});

}  // namespace sirf
