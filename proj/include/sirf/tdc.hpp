#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sirf/errors.hpp"
#include "sirf/rng.hpp"

namespace sirf {

struct TdcConfig {
    uint32_t chain_len = 128;     // carry elements in the physical chain
    double element_ps = 15.0;     // nominal per-element delay
    uint32_t n_chains = 1;        // 1, or 3 for the interleaved triple-chain mode
    uint32_t skip_elements = 0;   // leading elements excluded from the codes
    uint32_t n_taps = 64;         // MPS tap points
    double tap_pitch_ps = 300.0;  // nominal delay step between taps
    uint32_t samples_per_put = 16;  // repeated races averaged per measurement
    double mps_base_ps = 4200.0;  // stop-path delay at tap 0

    // Realization texture (device- and corner-dependent effects).
    double pitch_jitter_rel = 0.003;  // per-tap pitch deviation
    double chain_jitter_rel = 0.02;  // per-chain element-delay deviation
    double skew_amp_ps = 0.0;        // capture skew amplitude, mod-3 pattern
    double elem_jitter_rel = 0.015;  // per-device element-delay deviation
    double tc_alpha = 4.0e-4;        // carry/MPS temperature coefficient; hardwired
                                     // cells drift far less than LUT-and-routing paths

    // Usable thermometer bits per chain.
    uint32_t chain_bits() const { return (chain_len - skip_elements) / n_chains; }
    void validate() const;
};

// Concrete per-device, per-corner TDC: everything the race arithmetic needs.
struct TdcRealization {
    TdcConfig cfg;
    double temp_c = 25.0;
    std::array<double, 3> chain_element_ps = {0, 0, 0};  // effective delay per chain
    std::array<double, 3> chain_skew_ps = {0, 0, 0};     // capture skew per chain
    std::vector<double> tap_stop_ps;                     // absolute stop delay per tap
};

TdcRealization make_tdc_realization(const TdcConfig& cfg, uint64_t seed, uint32_t device_id,
                                    double temp_c);

struct ThermometerCode {
    std::vector<uint8_t> bits;  // capture-order bits of one chain
    uint32_t ones = 0;
    uint32_t zeros = 0;
    bool valid() const { return ones >= 1; }
    // run of 1s followed by a run of 0s, no holes
    bool well_formed() const;
};

// Faithful bit-level launch-capture race for one chain.
ThermometerCode race(double path_delay_ps, double stop_delay_ps, const TdcRealization& tdc,
                     uint32_t chain_index);

// Closed-form ones count; bit-identical to race() for the mod-3 skew model.
uint32_t race_ones_fast(double path_delay_ps, double stop_delay_ps, const TdcRealization& tdc,
                        uint32_t chain_index);

// Eq-style pseudo-average of the three chain code values.
inline double tcv_average(double z1, double z2, double z3) { return (z1 + z2 + z3) / 2.0; }

struct CalibrationTable {
    std::vector<double> offset_units;  // per-tap offset, element units, anchored at tap 0
    double pitch_hat_units = 0.0;      // estimated tap pitch in element units
    double temp_c = 25.0;

    std::string to_csv() const;
};

// Sweeps synthetic test paths across the tap range and solves per-tap offsets
// so that one fixed path measured at adjacent taps yields equal delay values.
CalibrationTable calibrate(const TdcRealization& tdc, uint32_t n_test_paths,
                           double path_noise_sigma_ps, Rng& rng);

struct DelayValue {
    double dv = 0.0;         // element units: zeros measure + tap offset
    uint32_t tap = 0;        // tap of the last sample
    double zeros_avg = 0.0;  // averaged zeros measure of the last sample
};

// Full measurement: per sample, sweep taps from 0 upward until every chain
// produces a valid code, then convert. Samples are averaged.
DelayValue sweep_and_measure(double path_delay_ps, double path_noise_sigma_ps,
                             const TdcRealization& tdc, const CalibrationTable& calib, Rng& rng);

// Single-sample measurement at a forced tap (calibration and continuity checks).
DelayValue measure_at_tap(double path_delay_ps, const TdcRealization& tdc,
                          const CalibrationTable& calib, uint32_t tap);

}  // namespace sirf
