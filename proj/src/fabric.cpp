#include "sirf/fabric.hpp"

#include <algorithm>
#include <cmath>

namespace sirf {

std::vector<EnvCorner> standard_corners() {
    return {{25.0, "enrollment"}, {-40.0, "regen_m40"}, {0.0, "regen_0"},
            {25.0, "regen_25"},   {50.0, "regen_50"},   {85.0, "regen_85"}};
}

GateMu ClassParams::gate_mu(const GateNode& n) const {
    switch (n.kind) {
        case GateKind::Launch: return mu_launch;
        case GateKind::SrStage: {
            double step = sr_tap_step_effective() * double(n.tap);
            return GateMu{mu_sr.rise + step, mu_sr.fall + step};
        }
        case GateKind::Xnor: return mu_xnor;
        case GateKind::Mux: return mu_mux;
        case GateKind::AndRecon: return mu_and;
        case GateKind::Rotate: return mu_rotate;
        case GateKind::OutMux: return mu_outmux;
    }
    return GateMu{};
}

void ClassParams::validate() const {
    if (sigma_global < 0 || sigma_wid_ps < 0 || sigma_meas_ps < 0 || sigma_tc_gate < 0 ||
        sigma_tc_split < 0 || sigma_tc_device < 0)
        throw ConfigError("class '" + name + "': sigmas must be >= 0");
    for (const GateMu* m : {&mu_launch, &mu_sr, &mu_xnor, &mu_mux, &mu_and, &mu_rotate,
                            &mu_outmux, &wire_unit_ps})
        if (m->rise <= 0 || m->fall <= 0)
            throw ConfigError("class '" + name + "': nominal delays must be > 0");
    if (nl_path_fraction < 0 || nl_path_fraction > 1)
        throw ConfigError("class '" + name + "': nl_path_fraction must be in [0,1]");
    tdc.validate();
}

std::vector<DeviceInstance> sample_population(const ClassParams& params,
                                              const NetlistGraph& graph, uint32_t n_devices,
                                              uint64_t seed) {
    if (n_devices < 1) throw ConfigError("population needs at least one device");
    params.validate();
    std::vector<DeviceInstance> pop;
    pop.reserve(n_devices);
    for (uint32_t d = 0; d < n_devices; ++d) {
        Rng rng = Rng::stream(seed, 0xFAB01ULL, d);
        DeviceInstance dev;
        dev.device_id = d;
        dev.global_shift = std::max(0.5, 1.0 + params.sigma_global * rng.normal());
        dev.tc_device = params.tc_alpha * (1.0 + params.sigma_tc_device * rng.normal());
        dev.gate_base_ps.resize(graph.nodes.size() * 2);
        dev.gate_tc.resize(graph.nodes.size() * 2);
        for (const GateNode& n : graph.nodes) {
            GateMu mu = params.gate_mu(n);
            double eta = params.sigma_tc_gate * rng.normal();
            double zeta = params.sigma_tc_split * rng.normal();
            for (Polarity p : {Polarity::Falling, Polarity::Rising}) {
                double factor = p == Polarity::Rising ? n.rise_factor : n.fall_factor;
                double wid = params.sigma_wid_ps * rng.normal();
                double base = mu.at(p) * factor * dev.global_shift + wid;
                dev.gate_base_ps[n.id * 2 + uint8_t(p)] = std::max(1.0, base);
                double split = (p == Polarity::Rising ? 0.5 : -0.5) * zeta;
                dev.gate_tc[n.id * 2 + uint8_t(p)] = dev.tc_device * (1.0 + eta + split);
            }
        }
        pop.push_back(std::move(dev));
    }
    return pop;
}

DeviceGateDelays realized_tables(const ClassParams& params, const NetlistGraph& graph,
                                 const DeviceInstance& dev, const EnvCorner& corner) {
    DeviceGateDelays t;
    t.node_ps.resize(graph.nodes.size() * 2);
    t.edge_ps.resize(graph.edges.size() * 2);
    double dT = corner.temp_c - 25.0;
    for (const GateNode& n : graph.nodes) {
        for (Polarity p : {Polarity::Falling, Polarity::Rising}) {
            double v = dev.base(n.id, p) * (1.0 + dev.tc(n.id, p) * dT);
            t.node(n.id, p) = std::max(0.5, v);
        }
    }
    double edge_t = (1.0 + dev.tc_device * dT) * dev.global_shift;
    for (const WireEdge& e : graph.edges) {
        double len = kLengthClassScale[e.length_class];
        t.edge(e.id, Polarity::Rising) =
            std::max(0.1, params.wire_unit_ps.rise * len * e.rise_factor * edge_t);
        t.edge(e.id, Polarity::Falling) =
            std::max(0.1, params.wire_unit_ps.fall * len * e.fall_factor * edge_t);
    }
    return t;
}

double realized_delay(const ClassParams& params, const NetlistGraph& graph,
                      const DeviceInstance& dev, uint32_t gate_id, Polarity pol,
                      const EnvCorner& corner, Rng& noise) {
    if (gate_id >= graph.nodes.size())
        throw ConfigError("realized_delay: gate id outside device table");
    double dT = corner.temp_c - 25.0;
    double v = dev.base(gate_id, pol) * (1.0 + dev.tc(gate_id, pol) * dT);
    if (params.sigma_meas_ps > 0) v += params.sigma_meas_ps * noise.normal();
    return v;
}

bool path_is_nonlinear(const ClassParams& params, Polarity pol, uint64_t candidate_id) {
    if (params.nl_path_fraction <= 0) return false;
    Rng r = Rng::stream(params.graph.seed, 0x41AB5ULL, uint64_t(pol), candidate_id);
    return r.next_double() < params.nl_path_fraction;
}

double path_nonlinear_distortion(const ClassParams& params, const DeviceInstance& dev,
                                 Polarity pol, uint64_t candidate_id, double temp_c) {
    Rng r = Rng::stream(params.graph.seed, 0x41AB6ULL, uint64_t(pol), candidate_id);
    double magnitude = params.nl_quad_per_c2 * r.uniform(0.5, 1.6);
    double sign = r.bernoulli(0.5) ? 1.0 : -1.0;
    Rng rd = Rng::stream(params.graph.seed, 0x41AB7ULL, uint64_t(pol), candidate_id,
                         dev.device_id);
    double dev_scale = 1.0 + 0.2 * rd.normal();
    double dT = temp_c - 25.0;
    return sign * magnitude * dev_scale * dT * dT;
}

// ---------------------------------------------------------------------------
// JSON

using ojson = nlohmann::ordered_json;

namespace {

ojson mu_json(const GateMu& m) { return ojson{{"rise", m.rise}, {"fall", m.fall}}; }
GateMu mu_from(const ojson& j) { return GateMu{j.at("rise"), j.at("fall")}; }

}  // namespace

ojson ClassParams::to_json() const {
    ojson j;
    j["name"] = name;
    j["graph"] = {{"rows", graph.rows},
                  {"cols", graph.cols},
                  {"seed", graph.seed},
                  {"sr_taps", graph.sr_taps},
                  {"recon_per_row", graph.recon_per_row},
                  {"instance_sigma", graph.instance_sigma},
                  {"wire_sigma", graph.wire_sigma}};
    j["sr_stages"] = sr_stages;
    j["mu_launch"] = mu_json(mu_launch);
    j["mu_sr"] = mu_json(mu_sr);
    j["sr_tap_step_ps"] = sr_tap_step_ps;
    j["mu_xnor"] = mu_json(mu_xnor);
    j["mu_mux"] = mu_json(mu_mux);
    j["mu_and"] = mu_json(mu_and);
    j["mu_rotate"] = mu_json(mu_rotate);
    j["mu_outmux"] = mu_json(mu_outmux);
    j["wire_unit_ps"] = mu_json(wire_unit_ps);
    j["sigma_global"] = sigma_global;
    j["sigma_wid_ps"] = sigma_wid_ps;
    j["tc_alpha"] = tc_alpha;
    j["sigma_tc_device"] = sigma_tc_device;
    j["sigma_tc_gate"] = sigma_tc_gate;
    j["sigma_tc_split"] = sigma_tc_split;
    j["sigma_meas_ps"] = sigma_meas_ps;
    j["enroll_averaging"] = enroll_averaging;
    j["nl_path_fraction"] = nl_path_fraction;
    j["nl_quad_per_c2"] = nl_quad_per_c2;
    j["tdc"] = {{"chain_len", tdc.chain_len},
                {"element_ps", tdc.element_ps},
                {"n_chains", tdc.n_chains},
                {"skip_elements", tdc.skip_elements},
                {"n_taps", tdc.n_taps},
                {"tap_pitch_ps", tdc.tap_pitch_ps},
                {"samples_per_put", tdc.samples_per_put},
                {"mps_base_ps", tdc.mps_base_ps},
                {"pitch_jitter_rel", tdc.pitch_jitter_rel},
                {"chain_jitter_rel", tdc.chain_jitter_rel},
                {"skew_amp_ps", tdc.skew_amp_ps},
                {"elem_jitter_rel", tdc.elem_jitter_rel},
                {"tc_alpha", tdc.tc_alpha}};
    j["pipeline"] = {{"gpev_mu_ref", pipeline.gpev_mu_ref},
                     {"gpev_spread_ref", pipeline.gpev_spread_ref},
                     {"sf_epsilon", pipeline.sf_epsilon},
                     {"r2_min", pipeline.r2_min},
                     {"res_max", pipeline.res_max}};
    j["keygen"] = {{"analysis_threshold", keygen.analysis_threshold},
                   {"bitgen_threshold", keygen.bitgen_threshold}};
    return j;
}

ClassParams ClassParams::from_json(const ojson& j) {
    ClassParams p;
    p.name = j.at("name");
    const auto& jg = j.at("graph");
    p.graph.rows = jg.at("rows");
    p.graph.cols = jg.at("cols");
    p.graph.seed = jg.at("seed");
    p.graph.sr_taps = jg.at("sr_taps");
    p.graph.recon_per_row = jg.at("recon_per_row");
    p.graph.instance_sigma = jg.at("instance_sigma");
    p.graph.wire_sigma = jg.at("wire_sigma");
    p.sr_stages = j.at("sr_stages");
    p.mu_launch = mu_from(j.at("mu_launch"));
    p.mu_sr = mu_from(j.at("mu_sr"));
    p.sr_tap_step_ps = j.at("sr_tap_step_ps");
    p.mu_xnor = mu_from(j.at("mu_xnor"));
    p.mu_mux = mu_from(j.at("mu_mux"));
    p.mu_and = mu_from(j.at("mu_and"));
    p.mu_rotate = mu_from(j.at("mu_rotate"));
    p.mu_outmux = mu_from(j.at("mu_outmux"));
    p.wire_unit_ps = mu_from(j.at("wire_unit_ps"));
    p.sigma_global = j.at("sigma_global");
    p.sigma_wid_ps = j.at("sigma_wid_ps");
    p.tc_alpha = j.at("tc_alpha");
    p.sigma_tc_device = j.at("sigma_tc_device");
    p.sigma_tc_gate = j.at("sigma_tc_gate");
    p.sigma_tc_split = j.at("sigma_tc_split");
    p.sigma_meas_ps = j.at("sigma_meas_ps");
    p.enroll_averaging = j.value("enroll_averaging", 4u);
    p.nl_path_fraction = j.at("nl_path_fraction");
    p.nl_quad_per_c2 = j.at("nl_quad_per_c2");
    const auto& jt = j.at("tdc");
    p.tdc.chain_len = jt.at("chain_len");
    p.tdc.element_ps = jt.at("element_ps");
    p.tdc.n_chains = jt.at("n_chains");
    p.tdc.skip_elements = jt.at("skip_elements");
    p.tdc.n_taps = jt.at("n_taps");
    p.tdc.tap_pitch_ps = jt.at("tap_pitch_ps");
    p.tdc.samples_per_put = jt.at("samples_per_put");
    p.tdc.mps_base_ps = jt.at("mps_base_ps");
    p.tdc.pitch_jitter_rel = jt.at("pitch_jitter_rel");
    p.tdc.chain_jitter_rel = jt.at("chain_jitter_rel");
    p.tdc.skew_amp_ps = jt.at("skew_amp_ps");
    p.tdc.elem_jitter_rel = jt.at("elem_jitter_rel");
    p.tdc.tc_alpha = jt.at("tc_alpha");
    const auto& jp = j.at("pipeline");
    p.pipeline.gpev_mu_ref = jp.at("gpev_mu_ref");
    p.pipeline.gpev_spread_ref = jp.at("gpev_spread_ref");
    p.pipeline.sf_epsilon = jp.at("sf_epsilon");
    p.pipeline.r2_min = jp.at("r2_min");
    p.pipeline.res_max = jp.at("res_max");
    const auto& jk = j.at("keygen");
    p.keygen.analysis_threshold = jk.at("analysis_threshold");
    p.keygen.bitgen_threshold = jk.at("bitgen_threshold");
    p.validate();
    return p;
}

ojson DeviceInstance::to_json() const {
    return ojson{{"device_id", device_id},
                 {"global_shift", global_shift},
                 {"tc_device", tc_device},
                 {"gate_base_ps", gate_base_ps},
                 {"gate_tc", gate_tc}};
}

DeviceInstance DeviceInstance::from_json(const ojson& j) {
    DeviceInstance d;
    d.device_id = j.at("device_id");
    d.global_shift = j.at("global_shift");
    d.tc_device = j.at("tc_device");
    d.gate_base_ps = j.at("gate_base_ps").get<std::vector<double>>();
    d.gate_tc = j.at("gate_tc").get<std::vector<double>>();
    return d;
}

// ---------------------------------------------------------------------------
// Presets. Structural numbers are chosen so netlist paths land in the 5-20 ns
// band the TDC sweep covers; the statistical knobs come from the calibration
// procedure run by `sirf calibrate-preset` (see docs/calibration.md).

ClassParams zynq_preset() {
    ClassParams p;
    p.name = "zynq7010";
    p.graph.seed = 11;
    p.sr_stages = 32;
    p.sr_tap_step_ps = 70.0;  // effective 560 per tap with 32 stages
    p.sigma_global = 0.030;
    p.sigma_wid_ps = 5.0;
    p.sigma_tc_gate = 0.12;
    p.sigma_tc_split = 0.02;
    p.sigma_meas_ps = 2.2;
    p.tdc.chain_len = 128;
    p.tdc.element_ps = 15.0;
    p.tdc.n_chains = 1;
    p.tdc.skip_elements = 0;
    p.tdc.samples_per_put = 16;
    p.tdc.mps_base_ps = 3000.0;
    p.tdc.skew_amp_ps = 0.0;
    p.pipeline.gpev_spread_ref = 110.0;
    p.pipeline.r2_min = 0.99;
    p.pipeline.res_max = 1.2;
    p.keygen.analysis_threshold = 3.0;
    p.keygen.bitgen_threshold = 2.4;
    return p;
}

ClassParams cyclone_preset() {
    ClassParams p;
    p.name = "cyclonev";
    p.graph.seed = 22;
    p.sr_stages = 4;
    p.sr_tap_step_ps = 420.0;
    p.sigma_global = 0.012;
    p.sigma_wid_ps = 4.0;
    p.sigma_tc_gate = 0.16;
    p.sigma_tc_split = 0.02;
    p.sigma_meas_ps = 7.5;
    p.tdc.chain_len = 256;
    p.tdc.element_ps = 12.0;
    p.tdc.n_chains = 1;
    p.tdc.skip_elements = 0;
    p.tdc.samples_per_put = 16;
    p.tdc.mps_base_ps = 3000.0;
    p.tdc.skew_amp_ps = 0.0;
    p.pipeline.gpev_spread_ref = 130.0;
    p.pipeline.r2_min = 0.97;
    p.pipeline.res_max = 4.0;
    p.keygen.analysis_threshold = 5.0;
    p.keygen.bitgen_threshold = 2.7;
    return p;
}

ClassParams polarfire_preset() {
    ClassParams p;
    p.name = "polarfire";
    p.graph.seed = 33;
    p.sr_stages = 4;
    p.sr_tap_step_ps = 420.0;
    p.sigma_global = 0.005;
    p.sigma_wid_ps = 4.5;
    p.sigma_tc_gate = 0.20;
    p.sigma_tc_split = 0.02;
    p.sigma_meas_ps = 4.5;
    p.tdc.chain_len = 391;
    p.tdc.element_ps = 10.0;
    p.tdc.n_chains = 3;
    p.tdc.skip_elements = 5;
    p.tdc.samples_per_put = 5;
    p.tdc.mps_base_ps = 3000.0;
    p.tdc.skew_amp_ps = 12.0;
    p.pipeline.gpev_spread_ref = 90.0;
    p.pipeline.r2_min = 0.96;
    p.pipeline.res_max = 2.6;
    p.keygen.analysis_threshold = 4.0;
    p.keygen.bitgen_threshold = 3.5;
    return p;
}

ClassParams preset_by_name(const std::string& name) {
    if (name == "zynq7010" || name == "zynq") return zynq_preset();
    if (name == "cyclonev" || name == "cyclone") return cyclone_preset();
    if (name == "polarfire") return polarfire_preset();
    throw ConfigError("unknown device-class preset '" + name + "'");
}

std::vector<std::string> preset_names() { return {"zynq7010", "cyclonev", "polarfire"}; }

}  // namespace sirf
