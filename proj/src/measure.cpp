#include "sirf/measure.hpp"

#include <algorithm>
#include <cmath>

namespace sirf {

Measurer::Measurer(const ClassParams& params, const NetlistGraph& graph,
                   std::vector<DeviceInstance> devices, std::vector<EnvCorner> corners,
                   uint64_t challenge_seed, uint64_t noise_seed)
    : params_(params), graph_(&graph), devices_(std::move(devices)),
      corners_(std::move(corners)), challenge_seed_(challenge_seed), noise_seed_(noise_seed) {
    if (devices_.empty()) throw ConfigError("measurer: empty device population");
    if (corners_.empty()) throw ConfigError("measurer: no corners configured");
    const size_t n = devices_.size() * corners_.size();
    tables_.reserve(n);
    tdc_.reserve(n);
    calib_.reserve(n);
    // Calibration is rerun per corner: the tap table of the MPS chain drifts
    // with temperature and the offsets must absorb it.
    double cal_noise = params_.sigma_meas_ps * 4.0;
    for (uint32_t d = 0; d < devices_.size(); ++d) {
        for (uint32_t c = 0; c < corners_.size(); ++c) {
            tables_.push_back(realized_tables(params_, *graph_, devices_[d], corners_[c]));
            // The one-time enrollment run affords deeper sample averaging.
            TdcConfig cfg = params_.tdc;
            if (corners_[c].is_enrollment())
                cfg.samples_per_put *= std::max(1u, params_.enroll_averaging);
            tdc_.push_back(make_tdc_realization(cfg, params_.graph.seed,
                                                devices_[d].device_id, corners_[c].temp_c));
            Rng rng = Rng::stream(noise_seed_, 0xCA11BULL, d, c);
            calib_.push_back(calibrate(tdc_.back(), 8, cal_noise, rng));
        }
    }
}

double Measurer::measure_one(uint32_t dev, uint32_t corner, Polarity pol, uint64_t candidate_id,
                             Propagator& prop, Challenge& scratch) const {
    challenge_into(*graph_, challenge_seed_, pol, candidate_id, scratch);
    const size_t idx = dev * corners_.size() + corner;
    ArrivalTime arr = prop(tables_[idx], scratch, false);
    double path = arr.picoseconds;
    if (path_is_nonlinear(params_, pol, candidate_id)) {
        path *= 1.0 + path_nonlinear_distortion(params_, devices_[dev], pol, candidate_id,
                                                corners_[corner].temp_c);
    }
    // The race only observes the sum of the per-gate sampling noises, so one
    // equivalent path-level draw per race replaces cone_gates gate draws.
    double sigma_path = params_.sigma_meas_ps * std::sqrt(double(arr.cone_gates));
    Rng rng = Rng::stream(noise_seed_, 0x0D5ULL, dev, corner, uint64_t(pol), candidate_id);
    return sweep_and_measure(path, sigma_path, tdc_[idx], calib_[idx], rng).dv;
}

void Measurer::fill(CandidateBlock& block, bool parallel) const {
    const int64_t nd = int64_t(devices_.size());
    const int64_t nc = int64_t(corners_.size());
    const int64_t total = nd * nc * 2 * block.count;
    const uint32_t count = block.count;
    double* out = block.dv.data();

    auto item = [&](int64_t x, Propagator& prop, Challenge& ch) {
        uint32_t i = uint32_t(x % count);
        int64_t rest = x / count;
        Polarity pol = Polarity(rest % 2);
        rest /= 2;
        uint32_t corner = uint32_t(rest % nc);
        uint32_t dev = uint32_t(rest / nc);
        out[x] = measure_one(dev, corner, pol, block.first_id + i, prop, ch);
    };

    if (parallel) {
#pragma omp parallel
        {
            Propagator prop(*graph_);
            Challenge ch;
#pragma omp for schedule(static)
            for (int64_t x = 0; x < total; ++x) item(x, prop, ch);
        }
    } else {
        Propagator prop(*graph_);
        Challenge ch;
        for (int64_t x = 0; x < total; ++x) item(x, prop, ch);
    }
}

CandidateBlock Measurer::measure_block(uint64_t first_id, uint32_t count, bool parallel) const {
    CandidateBlock block;
    block.first_id = first_id;
    block.count = count;
    block.n_devices = uint32_t(devices_.size());
    block.corners = corners_;
    block.dv.assign(size_t(devices_.size()) * corners_.size() * 2 * count, 0.0);
    fill(block, parallel);
    return block;
}

CandidateBlock Measurer::measure_block_serial(uint64_t first_id, uint32_t count) const {
    return measure_block(first_id, count, false);
}

std::vector<double> Measurer::measure_ids(const std::vector<uint64_t>& ids, Polarity pol,
                                          uint32_t corner, bool parallel) const {
    std::vector<double> out(devices_.size() * ids.size());
    const int64_t total = int64_t(out.size());
    const size_t n = ids.size();
    if (parallel) {
#pragma omp parallel
        {
            Propagator prop(*graph_);
            Challenge ch;
#pragma omp for schedule(static)
            for (int64_t x = 0; x < total; ++x)
                out[x] = measure_one(uint32_t(x / n), corner, pol, ids[x % n], prop, ch);
        }
    } else {
        Propagator prop(*graph_);
        Challenge ch;
        for (int64_t x = 0; x < total; ++x)
            out[x] = measure_one(uint32_t(x / n), corner, pol, ids[x % n], prop, ch);
    }
    return out;
}

}  // namespace sirf
