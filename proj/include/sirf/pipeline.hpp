#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sirf/fabric.hpp"
#include "sirf/measure.hpp"

namespace sirf {

// Soft data for one device at one corner: one challenge set of 2048 index-
// aligned values per stage. Index k refers to the same rising/falling
// candidate pair on every device and corner.
struct SoftDataSet {
    uint32_t device_id = 0;
    EnvCorner corner;
    std::vector<uint64_t> rising_id;   // provenance: rising candidate per slot
    std::vector<uint64_t> falling_id;  // provenance: falling candidate per slot
    std::vector<double> dvr;
    std::vector<double> dvf;
    std::vector<double> dvd;
    std::vector<double> dvd_c;
    std::vector<double> dvd_cs;

    std::string to_csv() const;
    nlohmann::ordered_json to_json() const;
    static SoftDataSet from_json(const nlohmann::ordered_json& j);
};

// dvd[k] = dvr[k] - dvf[k]; fixed identity-index pairing.
std::vector<double> dv_diffs(const std::vector<double>& dvr, const std::vector<double>& dvf);

// Self-referential standardization: shifts by the run's own mean and rescales
// its robust spread (IQR) to the reference, cancelling chip-global shifts and
// temperature scaling.
std::vector<double> gpev(const std::vector<double>& dvd, double mu_ref, double spread_ref,
                         double epsilon = 1e-12);

struct SpreadFactorTable {
    std::vector<double> mu;  // per-index population median of dvd_c
    std::vector<double> s;   // per-index population range, floored
    double spread_constant = 0.0;  // reference spread: mean of per-index ranges
    uint64_t fingerprint() const;

    std::string to_csv() const;
    nlohmann::ordered_json to_json() const;
    static SpreadFactorTable from_json(const nlohmann::ordered_json& j);
};

SpreadFactorTable fit_spread_factors(const std::vector<const std::vector<double>*>& population,
                                     double epsilon);
std::vector<double> apply_spread_factors(const std::vector<double>& dvd_c,
                                         const SpreadFactorTable& table);

// Least-squares line fit of DV against temperature for one candidate.
struct TempFit {
    double r2 = 0.0;
    double max_resid = 0.0;
};
TempFit fit_dv_vs_temp(const std::vector<double>& dv, const std::vector<double>& temp_c);

struct CompatibilityMask {
    uint64_t first_id = 0;
    uint32_t candidates_per_polarity = 0;
    std::vector<uint8_t> accepted_rising;    // per candidate in the block
    std::vector<uint8_t> accepted_falling;
    std::vector<uint64_t> selected_rising;   // first `need` accepted ids, in id order
    std::vector<uint64_t> selected_falling;
    uint64_t tested() const { return 2 * uint64_t(candidates_per_polarity); }
    uint64_t accepted() const;
};

// Compatibility: per candidate and device, DV must scale linearly with
// temperature (R^2 and residual gates); a candidate is kept only when every
// device in the population passes, so the selection is index-aligned across
// devices. Throws when fewer than `need_per_polarity` candidates survive.
CompatibilityMask select_compatible(const CandidateBlock& block, const PipelineParams& pp,
                                    uint32_t need_per_polarity);
// Same, but returns however many survived (used by the streaming experiment).
CompatibilityMask select_compatible_partial(const CandidateBlock& block,
                                            const PipelineParams& pp);

struct WidUctvnSummary {
    double mean_wid = 0.0;
    double mean_uctvn = 0.0;
    double snr = 0.0;
    double wc_uctvn = 0.0;
    uint32_t n_indices = 0;
    uint32_t n_devices = 0;
    uint32_t n_corners = 0;
};

struct WidUctvnResult {
    std::vector<double> wid;    // per-index range across devices at 25 C
    std::vector<double> uctvn;  // per-index corner range, averaged over devices
    WidUctvnSummary summary;
};

// dvd_cs[device][corner] must be index-aligned; `enrollment_corner` selects
// the 25 C data used for WID.
WidUctvnResult wid_uctvn_snr(const std::vector<std::vector<std::vector<double>>>& dvd_cs,
                             const std::vector<EnvCorner>& corners, uint32_t enrollment_corner);

}  // namespace sirf
