#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sirf/errors.hpp"

namespace sirf {

enum class Polarity : uint8_t { Falling = 0, Rising = 1 };

inline Polarity flip(Polarity p) {
    return p == Polarity::Rising ? Polarity::Falling : Polarity::Rising;
}

enum class GateKind : uint8_t {
    Launch = 0,   // launch FF driving a column
    SrStage,      // one selectable tap of a shift-register block
    Xnor,         // polarity fixer at a block boundary
    Mux,          // 4-to-1 path-select MUX
    AndRecon,     // reconvergence gate (rising: max, falling: min)
    Rotate,       // wrap-around wire port at the module edge
    OutMux        // final 32-to-1 (4*cols) output MUX
};

const char* gate_kind_name(GateKind k);

struct GateNode {
    uint32_t id = 0;
    GateKind kind = GateKind::Launch;
    uint16_t row = 0;  // row for block gates, stage for interconnect gates
    uint16_t col = 0;
    uint8_t tap = 0;  // SrStage only
    // Per-instance unitless delay factors, drawn at build time. They model
    // instance-specific placement/routing of an unconstrained implementation
    // and are common to every device of a class.
    double rise_factor = 1.0;
    double fall_factor = 1.0;
};

struct WireEdge {
    uint32_t id = 0;
    uint32_t from = 0;
    uint32_t to = 0;
    // 0 intra-block, 1 vertical, 2 neighbor column, 3 two-column hop, 4 rotate wrap
    uint8_t length_class = 0;
    uint32_t rotate_node = UINT32_MAX;  // Rotate gate spliced into this wire, if any
    double rise_factor = 1.0;
    double fall_factor = 1.0;
};

// Relative wire length per length class.
constexpr double kLengthClassScale[5] = {0.35, 1.0, 1.4, 2.1, 3.0};

struct NetlistParams {
    uint32_t rows = 3;
    uint32_t cols = 8;
    uint64_t seed = 1;
    uint32_t sr_taps = 4;         // selectable paths per shift-register block
    uint32_t recon_per_row = 4;   // AND-reconvergence instances per interconnect stage
    double instance_sigma = 0.04; // per-instance gate factor spread
    double wire_sigma = 0.06;     // per-edge factor spread
};

struct Challenge {
    std::vector<uint8_t> sr_select;    // [rows], tap per row (SRChlng)
    std::vector<uint8_t> mux_select;   // [rows*cols], stage-major 2-bit selects (MChlng)
    std::vector<Polarity> direction;   // [rows], transition direction per row (TDChlng)
    uint16_t out_select = 0;           // output MUX input, [0, 4*cols)
};

struct ArrivalTime {
    double picoseconds = 0.0;
    Polarity polarity = Polarity::Rising;
    uint32_t cone_gates = 0;  // gate instances on the evaluated cone
};

// Fully realized per-device, per-corner delay tables, indexed [id*2 + polarity].
struct DeviceGateDelays {
    std::vector<double> node_ps;
    std::vector<double> edge_ps;

    double node(uint32_t id, Polarity p) const { return node_ps[id * 2 + uint8_t(p)]; }
    double edge(uint32_t id, Polarity p) const { return edge_ps[id * 2 + uint8_t(p)]; }
    double& node(uint32_t id, Polarity p) { return node_ps[id * 2 + uint8_t(p)]; }
    double& edge(uint32_t id, Polarity p) { return edge_ps[id * 2 + uint8_t(p)]; }
};

class NetlistGraph {
  public:
    NetlistParams params;
    std::vector<GateNode> nodes;
    std::vector<WireEdge> edges;

    // Structured lookup tables (indices into nodes/edges).
    std::vector<uint32_t> launch_node;   // [cols]
    std::vector<uint32_t> xnor_node;     // [rows*cols]
    std::vector<uint32_t> sr_node;       // [rows*cols*sr_taps]
    std::vector<uint32_t> mux_node;      // [rows*cols*2], A/B interleaved
    std::vector<uint32_t> and_node;      // [rows*cols]
    std::vector<uint16_t> mux_src_col;   // [rows*cols*2*4], source column per select
    std::vector<uint32_t> block_in_edge; // [rows*cols]
    std::vector<uint32_t> sr_in_edge;    // [rows*cols]
    std::vector<uint32_t> mux_in_edge;   // [rows*cols*2*4]
    std::vector<uint32_t> and_in_edge;   // [rows*cols*2]
    std::vector<uint32_t> out_edge;      // [4*cols]
    uint32_t out_mux_node = 0;

    uint32_t rows() const { return params.rows; }
    uint32_t cols() const { return params.cols; }
    uint32_t output_count() const { return 4 * params.cols; }

    uint32_t block_index(uint32_t r, uint32_t c) const { return r * params.cols + c; }
    uint32_t sr_id(uint32_t r, uint32_t c, uint32_t tap) const {
        return sr_node[(r * params.cols + c) * params.sr_taps + tap];
    }
    uint32_t mux_id(uint32_t s, uint32_t c, uint32_t which) const {
        return mux_node[(s * params.cols + c) * 2 + which];
    }

    void validate_challenge(const Challenge& ch) const;

    nlohmann::ordered_json to_json() const;
    static NetlistGraph from_json(const nlohmann::ordered_json& j);
    std::string to_json_string() const;
};

NetlistGraph build_netlist(const NetlistParams& params);
NetlistGraph build_netlist(uint32_t rows, uint32_t cols, uint64_t seed);

// Reusable evaluator: owns the per-call scratch so the measurement kernels do
// not allocate. One instance per thread.
class Propagator {
  public:
    explicit Propagator(const NetlistGraph& graph);
    ArrivalTime operator()(const DeviceGateDelays& delays, const Challenge& challenge,
                           bool validate = true);

  private:
    const NetlistGraph& g_;
    std::vector<double> block_time_;
    std::vector<uint8_t> block_done_;
};

ArrivalTime propagate(const NetlistGraph& graph, const DeviceGateDelays& delays,
                      const Challenge& challenge);

// Full event-set simulation used to check the single-transition guarantee.
struct GlitchViolation {
    uint32_t node_id = 0;
    std::string description;
};

struct GlitchReport {
    uint64_t challenges_checked = 0;
    uint64_t nets_checked = 0;
    std::vector<GlitchViolation> violations;
    bool clean() const { return violations.empty(); }
};

// Test hook: flips the configuration of the listed XNOR gates, which mixes
// transition polarities inside a row and must surface as violations.
struct GlitchInjection {
    std::vector<uint32_t> flipped_xnor_nodes;
};

GlitchReport verify_glitch_free(const NetlistGraph& graph,
                                const std::vector<Challenge>& challenges,
                                const GlitchInjection* injection = nullptr);

// Deterministic challenge for a candidate id. The emitted transition at the
// output MUX always has polarity `pol`.
Challenge challenge_for(const NetlistGraph& graph, uint64_t seed, Polarity pol,
                        uint64_t candidate_id);
void challenge_into(const NetlistGraph& graph, uint64_t seed, Polarity pol,
                    uint64_t candidate_id, Challenge& out);

}  // namespace sirf
