#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sirf/netlist.hpp"
#include "sirf/tdc.hpp"

namespace sirf {

struct EnvCorner {
    double temp_c = 25.0;
    std::string label = "enrollment";
    bool is_enrollment() const { return label == "enrollment"; }
};

// Enrollment at 25 C plus the five regeneration temperatures.
std::vector<EnvCorner> standard_corners();

struct GateMu {
    double rise = 0.0;
    double fall = 0.0;
    double at(Polarity p) const { return p == Polarity::Rising ? rise : fall; }
};

struct PipelineParams {
    double gpev_mu_ref = 0.0;      // target center after compensation
    double gpev_spread_ref = 100.0;  // reference robust spread (IQR), element units
    double sf_epsilon = 1e-9;      // floor for per-index population ranges
    double r2_min = 0.99;          // compatibility: minimum R^2 of DV vs temperature
    double res_max = 1.0;          // compatibility: max |residual|, element units
};

struct KeygenParams {
    double analysis_threshold = 3.0;  // threshold used for the strong-bit census
    double bitgen_threshold = 2.4;    // threshold used when generating key material
};

struct ClassParams {
    std::string name = "custom";
    NetlistParams graph;
    uint32_t sr_stages = 4;  // 4-stage blocks, or 32 for the native primitive

    // Nominal gate delays (ps). Rising and falling edges are intentionally
    // not symmetric; the per-device difference between them is the entropy
    // the pipeline digs out.
    GateMu mu_launch{180, 170};
    GateMu mu_sr{520, 500};
    double sr_tap_step_ps = 90.0;  // extra clk-to-out per selected tap, 4-stage scale
    GateMu mu_xnor{160, 150};
    GateMu mu_mux{140, 132};
    GateMu mu_and{120, 112};
    GateMu mu_rotate{90, 85};
    GateMu mu_outmux{260, 245};
    GateMu wire_unit_ps{55, 52};  // per length-class unit

    // Population statistics.
    double sigma_global = 0.02;     // chip-wide multiplicative spread
    double sigma_wid_ps = 5.0;      // within-die additive spread per gate/polarity
    double tc_alpha = 8.0e-4;       // nominal delay temperature coefficient (1/degC)
    double sigma_tc_device = 0.04;  // device-level relative tc spread
    double sigma_tc_gate = 0.10;    // per-gate relative tc spread (shared rise/fall)
    double sigma_tc_split = 0.02;   // per-gate rise/fall tc mismatch
    double sigma_meas_ps = 2.0;     // per-gate, per-sample measurement noise
    uint32_t enroll_averaging = 4;  // extra sample averaging for the one-time
                                    // enrollment run (regen corners use the
                                    // plain samples_per_put)
    double nl_path_fraction = 0.10; // fraction of paths with nonlinear temp response
    double nl_quad_per_c2 = 2.0e-5; // relative arrival distortion per degC^2

    TdcConfig tdc;
    PipelineParams pipeline;
    KeygenParams keygen;

    GateMu gate_mu(const GateNode& n) const;
    double sr_tap_step_effective() const { return sr_tap_step_ps * double(sr_stages) / 4.0; }

    nlohmann::ordered_json to_json() const;
    static ClassParams from_json(const nlohmann::ordered_json& j);
    void validate() const;
};

// Calibrated presets for the three supported device classes.
ClassParams zynq_preset();
ClassParams cyclone_preset();
ClassParams polarfire_preset();
ClassParams preset_by_name(const std::string& name);
std::vector<std::string> preset_names();

struct DeviceInstance {
    uint32_t device_id = 0;
    double global_shift = 1.0;
    double tc_device = 8.0e-4;          // device temperature coefficient (1/degC)
    std::vector<double> gate_base_ps;   // [node*2 + polarity], delay at 25 C
    std::vector<double> gate_tc;        // [node*2 + polarity], 1/degC

    double base(uint32_t node, Polarity p) const { return gate_base_ps[node * 2 + uint8_t(p)]; }
    double tc(uint32_t node, Polarity p) const { return gate_tc[node * 2 + uint8_t(p)]; }

    nlohmann::ordered_json to_json() const;
    static DeviceInstance from_json(const nlohmann::ordered_json& j);
};

std::vector<DeviceInstance> sample_population(const ClassParams& params,
                                              const NetlistGraph& graph, uint32_t n_devices,
                                              uint64_t seed);

// Fully realized delay tables for one device at one temperature corner.
DeviceGateDelays realized_tables(const ClassParams& params, const NetlistGraph& graph,
                                 const DeviceInstance& dev, const EnvCorner& corner);

// Single-gate realized delay with one measurement-noise draw.
double realized_delay(const ClassParams& params, const NetlistGraph& graph,
                      const DeviceInstance& dev, uint32_t gate_id, Polarity pol,
                      const EnvCorner& corner, Rng& noise);

// Class-common nonlinear temperature response of a measured path: the flag is a
// property of the path's layout, shared by all devices of the class.
bool path_is_nonlinear(const ClassParams& params, Polarity pol, uint64_t candidate_id);
// Relative arrival distortion for a nonlinear path at temperature `temp_c`.
double path_nonlinear_distortion(const ClassParams& params, const DeviceInstance& dev,
                                 Polarity pol, uint64_t candidate_id, double temp_c);

}  // namespace sirf
