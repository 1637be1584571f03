#include "sirf/tdc.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sirf {

void TdcConfig::validate() const {
    if (n_chains != 1 && n_chains != 3)
        throw ConfigError("tdc: n_chains must be 1 or 3");
    if (chain_len == 0 || element_ps <= 0 || tap_pitch_ps <= 0 || n_taps < 2)
        throw ConfigError("tdc: chain_len, element_ps, tap_pitch_ps, n_taps must be positive");
    if (skip_elements >= chain_len) throw ConfigError("tdc: skip_elements >= chain_len");
    if (double(chain_len) * element_ps < tap_pitch_ps)
        throw ConfigError("tdc: chain span must cover one tap pitch (adjacent taps overlap)");
    if (chain_bits() < 8) throw ConfigError("tdc: fewer than 8 usable bits per chain");
    if (samples_per_put < 1) throw ConfigError("tdc: samples_per_put must be >= 1");
}

TdcRealization make_tdc_realization(const TdcConfig& cfg, uint64_t seed, uint32_t device_id,
                                    double temp_c) {
    cfg.validate();
    TdcRealization r;
    r.cfg = cfg;
    r.temp_c = temp_c;
    double tscale = 1.0 + cfg.tc_alpha * (temp_c - 25.0);

    Rng dev_rng = Rng::stream(seed, 0x7DCCULL, device_id);
    double elem_dev = cfg.element_ps * (1.0 + cfg.elem_jitter_rel * dev_rng.normal());
    elem_dev = std::max(0.2 * cfg.element_ps, elem_dev);

    // mod-3 capture-skew pattern: constant within each stride-3 chain, so the
    // interleaved chains stay monotone while a full-chain reading shows holes.
    const double w[3] = {0.0, 1.0, -1.0};
    for (uint32_t i = 0; i < 3; ++i) {
        double jit = (cfg.n_chains == 3) ? cfg.chain_jitter_rel * dev_rng.normal() : 0.0;
        r.chain_element_ps[i] = elem_dev * (1.0 + jit) * tscale;
        uint32_t phase = (cfg.skip_elements + i) % 3;
        r.chain_skew_ps[i] = (cfg.n_chains == 3) ? cfg.skew_amp_ps * w[phase] * tscale : 0.0;
    }

    r.tap_stop_ps.resize(cfg.n_taps);
    double acc = cfg.mps_base_ps;
    for (uint32_t t = 0; t < cfg.n_taps; ++t) {
        r.tap_stop_ps[t] = acc * tscale;
        double jit = cfg.pitch_jitter_rel * Rng::stream(seed, 0x7A9ULL, device_id, t).normal();
        acc += cfg.tap_pitch_ps * (1.0 + jit);
    }
    return r;
}

bool ThermometerCode::well_formed() const {
    bool seen_zero = false;
    for (uint8_t b : bits) {
        if (b) {
            if (seen_zero) return false;
        } else {
            seen_zero = true;
        }
    }
    return true;
}

ThermometerCode race(double path_delay_ps, double stop_delay_ps, const TdcRealization& tdc,
                     uint32_t chain_index) {
    if (path_delay_ps <= 0 || stop_delay_ps <= 0)
        throw MeasurementRangeError("race: delays must be positive");
    const TdcConfig& cfg = tdc.cfg;
    uint32_t n = cfg.chain_bits();
    ThermometerCode tc;
    tc.bits.resize(n);
    double elem = tdc.chain_element_ps[chain_index];
    // Thermometer FF j of chain `i` sits after physical element skip + i + j*n_chains.
    for (uint32_t j = 0; j < n; ++j) {
        double reach = double(cfg.skip_elements + chain_index + j * cfg.n_chains + 1) * elem;
        bool captured_one = path_delay_ps + reach <= stop_delay_ps + tdc.chain_skew_ps[chain_index];
        tc.bits[j] = captured_one ? 1 : 0;
        tc.ones += captured_one ? 1 : 0;
    }
    tc.zeros = n - tc.ones;
    return tc;
}

uint32_t race_ones_fast(double path_delay_ps, double stop_delay_ps, const TdcRealization& tdc,
                        uint32_t chain_index) {
    const TdcConfig& cfg = tdc.cfg;
    double elem = tdc.chain_element_ps[chain_index];
    double margin = stop_delay_ps + tdc.chain_skew_ps[chain_index] - path_delay_ps;
    double first = double(cfg.skip_elements + chain_index + 1);
    double k = std::floor((margin / elem - first) / double(cfg.n_chains)) + 1.0;
    double n = double(cfg.chain_bits());
    return uint32_t(std::clamp(k, 0.0, n));
}

namespace {

// Averaged zeros measure across chains: plain zeros for a single chain, the
// (z1+z2+z3)/2 pseudo-average in triple-chain mode.
double zeros_measure(double path_ps, double stop_ps, const TdcRealization& tdc, bool& valid) {
    const TdcConfig& cfg = tdc.cfg;
    double n = double(cfg.chain_bits());
    if (cfg.n_chains == 1) {
        uint32_t ones = race_ones_fast(path_ps, stop_ps, tdc, 0);
        valid = ones >= 1;
        return n - double(ones);
    }
    double z[3];
    valid = true;
    for (uint32_t i = 0; i < 3; ++i) {
        uint32_t ones = race_ones_fast(path_ps, stop_ps, tdc, i);
        valid = valid && ones >= 1;
        z[i] = n - double(ones);
    }
    return tcv_average(z[0], z[1], z[2]);
}

// Smallest tap whose stop delay wins the race on every chain. `hint` warm-
// starts the search (the per-sample noise rarely moves the tap).
int find_tap(double path_ps, const TdcRealization& tdc, int hint) {
    const auto& taps = tdc.tap_stop_ps;
    bool valid = false;
    int t = hint;
    if (t < 0) {
        double pitch = tdc.cfg.tap_pitch_ps;
        t = int(std::floor((path_ps - taps[0]) / pitch));
    }
    t = std::clamp(t, 0, int(taps.size()) - 1);
    while (t > 0) {
        zeros_measure(path_ps, taps[t - 1], tdc, valid);
        if (!valid) break;
        --t;
    }
    for (; t < int(taps.size()); ++t) {
        zeros_measure(path_ps, taps[t], tdc, valid);
        if (valid) return t;
    }
    return -1;
}

}  // namespace

DelayValue measure_at_tap(double path_delay_ps, const TdcRealization& tdc,
                          const CalibrationTable& calib, uint32_t tap) {
    bool valid = false;
    double z = zeros_measure(path_delay_ps, tdc.tap_stop_ps[tap], tdc, valid);
    if (!valid) throw MeasurementRangeError("measure_at_tap: race lost at forced tap");
    return DelayValue{z + calib.offset_units[tap], tap, z};
}

DelayValue sweep_and_measure(double path_delay_ps, double path_noise_sigma_ps,
                             const TdcRealization& tdc, const CalibrationTable& calib, Rng& rng) {
    const TdcConfig& cfg = tdc.cfg;
    double acc = 0.0;
    DelayValue out;
    int hint = -1;
    for (uint32_t s = 0; s < cfg.samples_per_put; ++s) {
        double p = path_delay_ps;
        if (path_noise_sigma_ps > 0) p += path_noise_sigma_ps * rng.normal();
        if (p <= 0) p = 1.0;
        int tap = find_tap(p, tdc, hint);
        if (tap < 0)
            throw MeasurementRangeError("sweep: no tap produces a valid thermometer code");
        hint = tap;
        bool valid = false;
        double z = zeros_measure(p, tdc.tap_stop_ps[tap], tdc, valid);
        out.tap = uint32_t(tap);
        out.zeros_avg = z;
        acc += z + calib.offset_units[tap];
    }
    out.dv = acc / double(cfg.samples_per_put);
    return out;
}

CalibrationTable calibrate(const TdcRealization& tdc, uint32_t n_test_paths,
                           double path_noise_sigma_ps, Rng& rng) {
    const TdcConfig& cfg = tdc.cfg;
    if (n_test_paths < 2) throw CalibrationError("need at least two test paths");
    const uint32_t T = cfg.n_taps;
    const double n_bits = double(cfg.chain_bits());

    // Synthetic test paths spread over the tap range, each one placed so it
    // lands mid-chain for a handful of consecutive taps.
    double span = n_bits * double(cfg.n_chains) * tdc.chain_element_ps[0];
    std::vector<double> test_paths(n_test_paths);
    for (uint32_t p = 0; p < n_test_paths; ++p) {
        double frac = double(p) / double(n_test_paths);
        test_paths[p] = tdc.tap_stop_ps[0] + frac * (tdc.tap_stop_ps[T - 1] - tdc.tap_stop_ps[0]) +
                        0.35 * span;
    }

    const uint32_t reps = std::max(4u, cfg.samples_per_put);
    std::vector<double> delta(T - 1, 0.0);
    std::vector<uint32_t> covered(T - 1, 0);
    for (uint32_t t = 0; t + 1 < T; ++t) {
        double acc = 0.0;
        uint32_t cnt = 0;
        for (double base : test_paths) {
            for (uint32_t rep = 0; rep < reps; ++rep) {
                double p = base;
                if (path_noise_sigma_ps > 0) p += path_noise_sigma_ps * rng.normal();
                bool va = false, vb = false;
                double za = zeros_measure(p, tdc.tap_stop_ps[t], tdc, va);
                double zb = zeros_measure(p, tdc.tap_stop_ps[t + 1], tdc, vb);
                // keep only mid-chain readings at both taps
                bool mid_a = va && za > 0.05 * n_bits && za < 0.95 * n_bits;
                bool mid_b = vb && zb > 0.05 * n_bits && zb < 0.95 * n_bits;
                if (mid_a && mid_b) {
                    acc += za - zb;
                    ++cnt;
                }
            }
        }
        if (cnt > 0) {
            delta[t] = acc / double(cnt);
            covered[t] = cnt;
            if (delta[t] <= 0)
                throw CalibrationError("non-monotonic tap table at tap " + std::to_string(t));
        }
    }

    double pitch_acc = 0.0;
    uint32_t pitch_cnt = 0;
    for (uint32_t t = 0; t + 1 < T; ++t) {
        if (covered[t]) {
            pitch_acc += delta[t];
            ++pitch_cnt;
        }
    }
    if (pitch_cnt == 0) throw CalibrationError("test paths cover no adjacent tap pair");

    // Least-squares linear tap model, anchored at tap 0. Accumulating the raw
    // per-pair deltas would random-walk their measurement noise across the
    // table and the error would differ corner to corner; the pooled pitch
    // estimate keeps the offsets stable wherever a path lands.
    CalibrationTable table;
    table.pitch_hat_units = pitch_acc / double(pitch_cnt);
    table.temp_c = tdc.temp_c;
    table.offset_units.assign(T, 0.0);
    for (uint32_t t = 1; t < T; ++t)
        table.offset_units[t] = table.pitch_hat_units * double(t);
    return table;
}

std::string CalibrationTable::to_csv() const {
    std::ostringstream os;
    os << "tap,offset_units\n";
    for (size_t t = 0; t < offset_units.size(); ++t) os << t << "," << offset_units[t] << "\n";
    return os.str();
}

}  // namespace sirf
