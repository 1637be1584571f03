#include "sirf/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sirf/rng.hpp"
#include "sirf/util.hpp"

namespace sirf {

std::vector<double> dv_diffs(const std::vector<double>& dvr, const std::vector<double>& dvf) {
    if (dvr.size() != dvf.size())
        throw PipelineError("dv_diffs: rising/falling arrays are not index-aligned");
    std::vector<double> dvd(dvr.size());
    for (size_t k = 0; k < dvr.size(); ++k) dvd[k] = dvr[k] - dvf[k];
    return dvd;
}

std::vector<double> gpev(const std::vector<double>& dvd, double mu_ref, double spread_ref,
                         double epsilon) {
    if (dvd.empty()) throw PipelineError("gpev: empty input");
    double mu_dev = mean_of(dvd);
    double spread_dev = iqr_of(dvd);
    if (spread_dev < epsilon)
        throw PipelineError("gpev: degenerate input (robust spread below epsilon)");
    double scale = spread_ref / spread_dev;
    std::vector<double> out(dvd.size());
    for (size_t k = 0; k < dvd.size(); ++k) out[k] = (dvd[k] - mu_dev) * scale + mu_ref;
    return out;
}

SpreadFactorTable fit_spread_factors(const std::vector<const std::vector<double>*>& population,
                                     double epsilon) {
    if (population.size() < 2)
        throw PipelineError("fit_spread_factors: need at least two devices");
    const size_t n = population.front()->size();
    for (const auto* dev : population)
        if (dev->size() != n) throw PipelineError("fit_spread_factors: misaligned population");

    SpreadFactorTable t;
    t.mu.resize(n);
    t.s.resize(n);
    std::vector<double> column(population.size());
    double acc = 0.0;
    for (size_t k = 0; k < n; ++k) {
        for (size_t d = 0; d < population.size(); ++d) column[d] = (*population[d])[k];
        t.mu[k] = median_of(column);
        t.s[k] = std::max(epsilon, range_of(column));
        acc += t.s[k];
    }
    t.spread_constant = acc / double(n);
    return t;
}

std::vector<double> apply_spread_factors(const std::vector<double>& dvd_c,
                                         const SpreadFactorTable& table) {
    if (dvd_c.size() != table.mu.size())
        throw PipelineError("apply_spread_factors: table is not index-aligned");
    std::vector<double> out(dvd_c.size());
    for (size_t k = 0; k < dvd_c.size(); ++k)
        out[k] = (dvd_c[k] - table.mu[k]) * (table.spread_constant / table.s[k]);
    return out;
}

uint64_t SpreadFactorTable::fingerprint() const {
    uint64_t h = 0x5f17c9d2ULL;
    auto mix = [&h](double v) {
        uint64_t bits;
        static_assert(sizeof(bits) == sizeof(v));
        std::memcpy(&bits, &v, sizeof(bits));
        h = hash_combine(h, bits);
    };
    for (double v : mu) mix(v);
    for (double v : s) mix(v);
    mix(spread_constant);
    return h;
}

TempFit fit_dv_vs_temp(const std::vector<double>& dv, const std::vector<double>& temp_c) {
    if (dv.size() != temp_c.size() || dv.size() < 3)
        throw PipelineError("fit_dv_vs_temp: need >= 3 aligned points");
    const size_t n = dv.size();
    double mx = mean_of(temp_c), my = mean_of(dv);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double dx = temp_c[i] - mx, dy = dv[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    TempFit fit;
    if (syy <= 0.0) {
        fit.r2 = 1.0;  // perfectly flat response is perfectly linear
        fit.max_resid = 0.0;
        return fit;
    }
    double slope = sxx > 0 ? sxy / sxx : 0.0;
    double ss_res = 0.0, worst = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double resid = dv[i] - (my + slope * (temp_c[i] - mx));
        ss_res += resid * resid;
        worst = std::max(worst, std::fabs(resid));
    }
    fit.r2 = 1.0 - ss_res / syy;
    fit.max_resid = worst;
    return fit;
}

uint64_t CompatibilityMask::accepted() const {
    uint64_t n = 0;
    for (uint8_t a : accepted_rising) n += a;
    for (uint8_t a : accepted_falling) n += a;
    return n;
}

namespace {

CompatibilityMask select_impl(const CandidateBlock& block, const PipelineParams& pp) {
    CompatibilityMask mask;
    mask.first_id = block.first_id;
    mask.candidates_per_polarity = block.count;
    mask.accepted_rising.assign(block.count, 0);
    mask.accepted_falling.assign(block.count, 0);

    std::vector<double> temps(block.corners.size());
    for (size_t c = 0; c < block.corners.size(); ++c) temps[c] = block.corners[c].temp_c;
    std::vector<double> dv(block.corners.size());

    for (int pol_i = 0; pol_i < 2; ++pol_i) {
        Polarity pol = Polarity(pol_i);
        auto& accepted = pol == Polarity::Rising ? mask.accepted_rising : mask.accepted_falling;
        for (uint32_t i = 0; i < block.count; ++i) {
            bool ok = true;
            for (uint32_t d = 0; d < block.n_devices && ok; ++d) {
                for (size_t c = 0; c < block.corners.size(); ++c)
                    dv[c] = block.at(d, uint32_t(c), pol, i);
                TempFit fit = fit_dv_vs_temp(dv, temps);
                ok = fit.r2 >= pp.r2_min && fit.max_resid <= pp.res_max;
            }
            accepted[i] = ok ? 1 : 0;
            if (ok) {
                auto& sel = pol == Polarity::Rising ? mask.selected_rising : mask.selected_falling;
                sel.push_back(block.first_id + i);
            }
        }
    }
    return mask;
}

}  // namespace

CompatibilityMask select_compatible_partial(const CandidateBlock& block,
                                            const PipelineParams& pp) {
    return select_impl(block, pp);
}

CompatibilityMask select_compatible(const CandidateBlock& block, const PipelineParams& pp,
                                    uint32_t need_per_polarity) {
    CompatibilityMask mask = select_impl(block, pp);
    if (mask.selected_rising.size() < need_per_polarity ||
        mask.selected_falling.size() < need_per_polarity) {
        std::ostringstream os;
        os << "compatibility selection shortfall: need " << need_per_polarity
           << " per polarity, accepted " << mask.selected_rising.size() << " rising / "
           << mask.selected_falling.size() << " falling of " << block.count;
        throw PipelineError(os.str());
    }
    mask.selected_rising.resize(need_per_polarity);
    mask.selected_falling.resize(need_per_polarity);
    return mask;
}

WidUctvnResult wid_uctvn_snr(const std::vector<std::vector<std::vector<double>>>& dvd_cs,
                             const std::vector<EnvCorner>& corners, uint32_t enrollment_corner) {
    const size_t nd = dvd_cs.size();
    if (nd < 2) throw PipelineError("wid_uctvn_snr: need >= 2 devices for WID");
    if (corners.size() < 2)
        throw PipelineError("wid_uctvn_snr: need enrollment plus regeneration corners");
    if (enrollment_corner >= corners.size() ||
        corners[enrollment_corner].temp_c != 25.0)
        throw PipelineError("wid_uctvn_snr: enrollment corner must be 25 C");
    const size_t nc = corners.size();
    for (const auto& dev : dvd_cs)
        if (dev.size() != nc) throw PipelineError("wid_uctvn_snr: missing corner data");
    const size_t n = dvd_cs[0][0].size();

    WidUctvnResult res;
    res.wid.resize(n);
    res.uctvn.resize(n);
    std::vector<double> col(nd), crn(nc);
    for (size_t k = 0; k < n; ++k) {
        for (size_t d = 0; d < nd; ++d) col[d] = dvd_cs[d][enrollment_corner][k];
        res.wid[k] = range_of(col);
        double acc = 0.0;
        for (size_t d = 0; d < nd; ++d) {
            for (size_t c = 0; c < nc; ++c) crn[c] = dvd_cs[d][c][k];
            acc += range_of(crn);
        }
        res.uctvn[k] = acc / double(nd);
    }
    res.summary.mean_wid = mean_of(res.wid);
    res.summary.mean_uctvn = mean_of(res.uctvn);
    res.summary.snr = res.summary.mean_uctvn > 0
                          ? res.summary.mean_wid / res.summary.mean_uctvn
                          : 0.0;
    res.summary.wc_uctvn = res.uctvn.empty() ? 0.0
                                             : *std::max_element(res.uctvn.begin(),
                                                                 res.uctvn.end());
    res.summary.n_indices = uint32_t(n);
    res.summary.n_devices = uint32_t(nd);
    res.summary.n_corners = uint32_t(nc);
    return res;
}

// ---------------------------------------------------------------------------
// Serialization

using ojson = nlohmann::ordered_json;

std::string SoftDataSet::to_csv() const {
    std::ostringstream os;
    os << "slot,rising_id,falling_id,dvr,dvf,dvd,dvd_c,dvd_cs\n";
    for (size_t k = 0; k < dvr.size(); ++k) {
        os << k << "," << rising_id[k] << "," << falling_id[k] << "," << dvr[k] << "," << dvf[k]
           << "," << dvd[k] << "," << dvd_c[k] << "," << dvd_cs[k] << "\n";
    }
    return os.str();
}

ojson SoftDataSet::to_json() const {
    return ojson{{"device_id", device_id},
                 {"corner", {{"temp_c", corner.temp_c}, {"label", corner.label}}},
                 {"rising_id", rising_id},
                 {"falling_id", falling_id},
                 {"dvr", dvr},
                 {"dvf", dvf},
                 {"dvd", dvd},
                 {"dvd_c", dvd_c},
                 {"dvd_cs", dvd_cs}};
}

SoftDataSet SoftDataSet::from_json(const ojson& j) {
    SoftDataSet s;
    s.device_id = j.at("device_id");
    s.corner.temp_c = j.at("corner").at("temp_c");
    s.corner.label = j.at("corner").at("label");
    s.rising_id = j.at("rising_id").get<std::vector<uint64_t>>();
    s.falling_id = j.at("falling_id").get<std::vector<uint64_t>>();
    s.dvr = j.at("dvr").get<std::vector<double>>();
    s.dvf = j.at("dvf").get<std::vector<double>>();
    s.dvd = j.at("dvd").get<std::vector<double>>();
    s.dvd_c = j.at("dvd_c").get<std::vector<double>>();
    s.dvd_cs = j.at("dvd_cs").get<std::vector<double>>();
    return s;
}

std::string SpreadFactorTable::to_csv() const {
    std::ostringstream os;
    os << "slot,mu,s\n";
    for (size_t k = 0; k < mu.size(); ++k) os << k << "," << mu[k] << "," << s[k] << "\n";
    return os.str();
}

ojson SpreadFactorTable::to_json() const {
    return ojson{{"mu", mu}, {"s", s}, {"spread_constant", spread_constant}};
}

SpreadFactorTable SpreadFactorTable::from_json(const ojson& j) {
    SpreadFactorTable t;
    t.mu = j.at("mu").get<std::vector<double>>();
    t.s = j.at("s").get<std::vector<double>>();
    t.spread_constant = j.at("spread_constant");
    return t;
}

}  // namespace sirf
