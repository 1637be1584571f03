#pragma once

#include <cstdint>
#include <vector>

#include "sirf/fabric.hpp"
#include "sirf/netlist.hpp"
#include "sirf/tdc.hpp"

namespace sirf {

// Measured delay values for a contiguous range of candidate challenges,
// for every device, corner and polarity. This is the unit of work the
// measurement kernels fill and the pipeline consumes.
struct CandidateBlock {
    uint64_t first_id = 0;
    uint32_t count = 0;
    uint32_t n_devices = 0;
    std::vector<EnvCorner> corners;
    std::vector<double> dv;  // [((dev * n_corners + corner) * 2 + pol) * count + i]

    size_t slot(uint32_t dev, uint32_t corner, Polarity pol, uint32_t i) const {
        return ((size_t(dev) * corners.size() + corner) * 2 + uint8_t(pol)) * count + i;
    }
    double at(uint32_t dev, uint32_t corner, Polarity pol, uint32_t i) const {
        return dv[slot(dev, corner, pol, i)];
    }
};

// Holds the realized per-corner delay tables, TDC realizations and
// calibration tables for a population, and runs the measurement loops.
//
// Every measurement seeds its own RNG stream from
// (noise_seed, device, corner, polarity, candidate), so results do not depend
// on iteration order: the OpenMP kernel and the serial reference are
// bit-identical.
class Measurer {
  public:
    Measurer(const ClassParams& params, const NetlistGraph& graph,
             std::vector<DeviceInstance> devices, std::vector<EnvCorner> corners,
             uint64_t challenge_seed, uint64_t noise_seed);

    // One DV: netlist propagation, path-level distortions, TDC sweep with
    // sample averaging.
    double measure_one(uint32_t dev, uint32_t corner, Polarity pol, uint64_t candidate_id,
                       Propagator& prop, Challenge& scratch) const;

    CandidateBlock measure_block(uint64_t first_id, uint32_t count, bool parallel) const;
    // Serial reference implementation kept for testing and benchmarking.
    CandidateBlock measure_block_serial(uint64_t first_id, uint32_t count) const;

    // DVs for an explicit candidate list at one corner: [dev * ids.size() + k].
    std::vector<double> measure_ids(const std::vector<uint64_t>& ids, Polarity pol,
                                    uint32_t corner, bool parallel) const;

    const ClassParams& params() const { return params_; }
    const NetlistGraph& graph() const { return *graph_; }
    const std::vector<DeviceInstance>& devices() const { return devices_; }
    const std::vector<EnvCorner>& corners() const { return corners_; }
    uint64_t challenge_seed() const { return challenge_seed_; }
    const CalibrationTable& calibration(uint32_t dev, uint32_t corner) const {
        return calib_[dev * corners_.size() + corner];
    }
    const DeviceGateDelays& tables(uint32_t dev, uint32_t corner) const {
        return tables_[dev * corners_.size() + corner];
    }

  private:
    ClassParams params_;
    const NetlistGraph* graph_;
    std::vector<DeviceInstance> devices_;
    std::vector<EnvCorner> corners_;
    uint64_t challenge_seed_ = 0;
    uint64_t noise_seed_ = 0;
    std::vector<DeviceGateDelays> tables_;
    std::vector<TdcRealization> tdc_;
    std::vector<CalibrationTable> calib_;

    void fill(CandidateBlock& block, bool parallel) const;
};

}  // namespace sirf
