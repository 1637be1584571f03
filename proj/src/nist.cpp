#include "sirf/nist.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

namespace sirf {

namespace {

double igamc(double a, double x) { return boost::math::gamma_q(a, x); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

uint64_t ones_count(const Bits& b) {
    uint64_t n = 0;
    for (uint8_t x : b) n += x;
    return n;
}

// Frequencies of all overlapping m-bit patterns with wrap-around.
std::vector<uint32_t> pattern_counts(const Bits& b, uint32_t m) {
    std::vector<uint32_t> counts(size_t(1) << m, 0);
    const size_t n = b.size();
    uint32_t pattern = 0;
    for (uint32_t i = 0; i < m; ++i) pattern = (pattern << 1) | b[i % n];
    const uint32_t mask = uint32_t((size_t(1) << m) - 1);
    for (size_t i = 0; i < n; ++i) {
        counts[pattern]++;
        pattern = ((pattern << 1) | b[(i + m) % n]) & mask;
    }
    return counts;
}

double psi_sq(const Bits& b, uint32_t m) {
    if (m == 0) return 0.0;
    auto counts = pattern_counts(b, m);
    double acc = 0.0;
    for (uint32_t c : counts) acc += double(c) * double(c);
    double n = double(b.size());
    return acc * double(size_t(1) << m) / n - n;
}

double phi_m(const Bits& b, uint32_t m) {
    auto counts = pattern_counts(b, m);
    double n = double(b.size());
    double acc = 0.0;
    for (uint32_t c : counts) {
        if (c == 0) continue;
        double pi = double(c) / n;
        acc += pi * std::log(pi);
    }
    return acc;
}

}  // namespace

double nist_frequency(const Bits& bits) {
    double s = 0.0;
    for (uint8_t b : bits) s += b ? 1.0 : -1.0;
    double s_obs = std::fabs(s) / std::sqrt(double(bits.size()));
    return std::erfc(s_obs / std::sqrt(2.0));
}

double nist_block_frequency(const Bits& bits, uint32_t m) {
    uint32_t n_blocks = uint32_t(bits.size() / m);
    double chi2 = 0.0;
    for (uint32_t i = 0; i < n_blocks; ++i) {
        double ones = 0;
        for (uint32_t k = 0; k < m; ++k) ones += bits[size_t(i) * m + k];
        double pi = ones / double(m);
        chi2 += (pi - 0.5) * (pi - 0.5);
    }
    chi2 *= 4.0 * double(m);
    return igamc(double(n_blocks) / 2.0, chi2 / 2.0);
}

namespace {

double cusum_p(const Bits& bits, bool forward) {
    const int64_t n = int64_t(bits.size());
    int64_t s = 0, z = 0;
    for (int64_t i = 0; i < n; ++i) {
        uint8_t b = bits[forward ? i : n - 1 - i];
        s += b ? 1 : -1;
        z = std::max(z, s < 0 ? -s : s);
    }
    if (z == 0) return 0.0;
    double zn = double(z) / std::sqrt(double(n));
    double nz = double(n) / double(z);
    // loop bounds truncate toward zero, matching the published reference code
    double sum1 = 0.0;
    for (int64_t k = int64_t((-nz + 1) / 4); k <= int64_t((nz - 1) / 4); ++k)
        sum1 += normal_cdf((4 * k + 1) * zn) - normal_cdf((4 * k - 1) * zn);
    double sum2 = 0.0;
    for (int64_t k = int64_t((-nz - 3) / 4); k <= int64_t((nz - 1) / 4); ++k)
        sum2 += normal_cdf((4 * k + 3) * zn) - normal_cdf((4 * k + 1) * zn);
    return 1.0 - sum1 + sum2;
}

}  // namespace

void nist_cumulative_sums(const Bits& bits, double& p_forward, double& p_backward) {
    p_forward = cusum_p(bits, true);
    p_backward = cusum_p(bits, false);
}

double nist_runs(const Bits& bits) {
    const double n = double(bits.size());
    double pi = double(ones_count(bits)) / n;
    if (std::fabs(pi - 0.5) >= 2.0 / std::sqrt(n)) return 0.0;  // frequency pre-test fails
    uint64_t v = 1;
    for (size_t k = 1; k < bits.size(); ++k) v += bits[k] != bits[k - 1];
    double num = std::fabs(double(v) - 2.0 * n * pi * (1.0 - pi));
    double den = 2.0 * std::sqrt(2.0 * n) * pi * (1.0 - pi);
    return std::erfc(num / den);
}

double nist_longest_run(const Bits& bits) {
    const size_t n = bits.size();
    uint32_t m;
    std::vector<double> pi;
    uint32_t v_min, v_max;
    if (n < 6272) {
        m = 8;
        pi = {0.2148, 0.3672, 0.2305, 0.1875};
        v_min = 1;
        v_max = 4;
    } else if (n < 750000) {
        m = 128;
        pi = {0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124};
        v_min = 4;
        v_max = 9;
    } else {
        m = 10000;
        pi = {0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727};
        v_min = 10;
        v_max = 16;
    }
    uint32_t n_blocks = uint32_t(n / m);
    std::vector<double> v(pi.size(), 0.0);
    for (uint32_t i = 0; i < n_blocks; ++i) {
        uint32_t longest = 0, run = 0;
        for (uint32_t k = 0; k < m; ++k) {
            run = bits[size_t(i) * m + k] ? run + 1 : 0;
            longest = std::max(longest, run);
        }
        uint32_t cls = std::clamp(longest, v_min, v_max) - v_min;
        v[cls] += 1.0;
    }
    double chi2 = 0.0;
    for (size_t i = 0; i < pi.size(); ++i) {
        double expect = double(n_blocks) * pi[i];
        chi2 += (v[i] - expect) * (v[i] - expect) / expect;
    }
    return igamc(double(pi.size() - 1) / 2.0, chi2 / 2.0);
}

double nist_approximate_entropy(const Bits& bits, uint32_t m) {
    double apen = phi_m(bits, m) - phi_m(bits, m + 1);
    double chi2 = 2.0 * double(bits.size()) * (std::log(2.0) - apen);
    return igamc(double(size_t(1) << (m - 1)), chi2 / 2.0);
}

void nist_serial(const Bits& bits, uint32_t m, double& p1, double& p2) {
    double psi_m = psi_sq(bits, m);
    double psi_m1 = psi_sq(bits, m - 1);
    double psi_m2 = psi_sq(bits, m - 2);
    double d1 = psi_m - psi_m1;
    double d2 = psi_m - 2.0 * psi_m1 + psi_m2;
    p1 = igamc(double(size_t(1) << (m - 2)), d1 / 2.0);
    p2 = igamc(double(size_t(1) << (m - 3)), d2 / 2.0);
}

std::vector<NistTestResult> nist_battery_single(const Bits& bits, const NistParams& np) {
    std::vector<NistTestResult> out;
    const size_t n = bits.size();
    auto add = [&](const std::string& name, size_t min_len, auto&& run) {
        NistTestResult r;
        r.name = name;
        if (n < min_len) {
            r.skipped = true;
            r.note = "bitstring shorter than " + std::to_string(min_len);
        } else {
            run(r);
            r.pass = !r.p_values.empty();
            for (double p : r.p_values) r.pass = r.pass && p >= np.alpha;
        }
        out.push_back(std::move(r));
    };
    add("frequency", 100, [&](NistTestResult& r) { r.p_values = {nist_frequency(bits)}; });
    add("block_frequency", size_t(np.block_m) * 10, [&](NistTestResult& r) {
        r.p_values = {nist_block_frequency(bits, np.block_m)};
    });
    add("cumulative_sums", 100, [&](NistTestResult& r) {
        double pf, pb;
        nist_cumulative_sums(bits, pf, pb);
        r.p_values = {pf, pb};
    });
    add("runs", 100, [&](NistTestResult& r) { r.p_values = {nist_runs(bits)}; });
    add("longest_run", 128, [&](NistTestResult& r) { r.p_values = {nist_longest_run(bits)}; });
    add("approximate_entropy", size_t(1) << (np.apen_m + 5), [&](NistTestResult& r) {
        r.p_values = {nist_approximate_entropy(bits, np.apen_m)};
    });
    add("serial", size_t(1) << (np.serial_m + 2), [&](NistTestResult& r) {
        double p1, p2;
        nist_serial(bits, np.serial_m, p1, p2);
        r.p_values = {p1, p2};
    });
    return out;
}

NistPopulationResult nist_battery(const std::vector<Bits>& per_device, const NistParams& np) {
    if (per_device.empty()) throw StatsError("nist_battery: empty population");
    NistPopulationResult res;
    res.n_devices = uint32_t(per_device.size());
    uint32_t required = uint32_t(std::ceil(0.92 * double(per_device.size())));

    std::vector<std::vector<NistTestResult>> all;
    all.reserve(per_device.size());
    for (const Bits& bits : per_device) all.push_back(nist_battery_single(bits, np));

    const size_t n_tests = all.front().size();
    res.all_pass = true;
    for (size_t t = 0; t < n_tests; ++t) {
        NistPopulationTest pt;
        pt.name = all.front()[t].name;
        pt.required = required;
        for (const auto& dev : all) {
            if (dev[t].skipped)
                pt.skipped++;
            else if (dev[t].pass)
                pt.passed++;
            else
                pt.failed++;
        }
        pt.verdict = pt.passed >= required;
        res.all_pass = res.all_pass && pt.verdict;
        res.tests.push_back(std::move(pt));
    }
    return res;
}

}  // namespace sirf
