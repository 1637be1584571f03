#include "sirf/netlist.hpp"

#include <algorithm>
#include <array>
#include <optional>

#include "sirf/rng.hpp"

namespace sirf {

const char* gate_kind_name(GateKind k) {
    switch (k) {
        case GateKind::Launch: return "launch";
        case GateKind::SrStage: return "sr_stage";
        case GateKind::Xnor: return "xnor";
        case GateKind::Mux: return "mux";
        case GateKind::AndRecon: return "and";
        case GateKind::Rotate: return "rotate";
        case GateKind::OutMux: return "out_mux";
    }
    return "?";
}

namespace {

GateKind gate_kind_from_name(const std::string& s) {
    for (int k = 0; k <= int(GateKind::OutMux); ++k) {
        if (s == gate_kind_name(GateKind(k))) return GateKind(k);
    }
    throw ConfigError("unknown gate kind '" + s + "'");
}

bool is_pow2(uint32_t x) { return x != 0 && (x & (x - 1)) == 0; }

}  // namespace

void NetlistGraph::validate_challenge(const Challenge& ch) const {
    const uint32_t r = params.rows, c = params.cols;
    if (ch.sr_select.size() != r || ch.direction.size() != r || ch.mux_select.size() != r * c)
        throw StructuralError("challenge field sizes do not match graph geometry");
    for (auto t : ch.sr_select)
        if (t >= params.sr_taps) throw StructuralError("sr_select out of range");
    for (auto m : ch.mux_select)
        if (m >= 4) throw StructuralError("mux_select out of range");
    if (ch.out_select >= output_count()) throw StructuralError("out_select out of range");
}

NetlistGraph build_netlist(uint32_t rows, uint32_t cols, uint64_t seed) {
    NetlistParams p;
    p.rows = rows;
    p.cols = cols;
    p.seed = seed;
    return build_netlist(p);
}

NetlistGraph build_netlist(const NetlistParams& p) {
    if (p.rows < 1 || p.rows > 8) throw ConfigError("rows must be in [1, 8]");
    if (p.cols < 2 || p.cols > 64 || !is_pow2(p.cols))
        throw ConfigError("cols must be a power of two in [2, 64]");
    if (p.sr_taps < 1 || p.sr_taps > 4) throw ConfigError("sr_taps must be in [1, 4]");

    NetlistGraph g;
    g.params = p;
    Rng rng(hash_combine(p.seed, 0x5193f001ULL));

    auto add_node = [&](GateKind kind, uint16_t row, uint16_t col, uint8_t tap) {
        GateNode n;
        n.id = uint32_t(g.nodes.size());
        n.kind = kind;
        n.row = row;
        n.col = col;
        n.tap = tap;
        n.rise_factor = std::max(0.5, 1.0 + p.instance_sigma * rng.normal());
        n.fall_factor = std::max(0.5, 1.0 + p.instance_sigma * rng.normal());
        g.nodes.push_back(n);
        return n.id;
    };
    auto add_edge = [&](uint32_t from, uint32_t to, uint8_t length_class, uint32_t rot) {
        WireEdge e;
        e.id = uint32_t(g.edges.size());
        e.from = from;
        e.to = to;
        e.length_class = length_class;
        e.rotate_node = rot;
        double sigma = p.wire_sigma * kLengthClassScale[length_class];
        e.rise_factor = std::max(0.3, 1.0 + sigma * rng.normal());
        e.fall_factor = std::max(0.3, 1.0 + sigma * rng.normal());
        g.edges.push_back(e);
        return e.id;
    };

    const uint32_t R = p.rows, C = p.cols, T = p.sr_taps;
    g.launch_node.resize(C);
    g.xnor_node.resize(R * C);
    g.sr_node.resize(R * C * T);
    g.mux_node.resize(R * C * 2);
    g.and_node.resize(R * C);
    g.mux_src_col.resize(R * C * 2 * 4);
    g.block_in_edge.resize(R * C);
    g.sr_in_edge.resize(R * C);
    g.mux_in_edge.resize(R * C * 2 * 4);
    g.and_in_edge.resize(R * C * 2);
    g.out_edge.resize(4 * C);

    for (uint32_t c = 0; c < C; ++c) g.launch_node[c] = add_node(GateKind::Launch, 0, c, 0);

    // Blocks: XNOR polarity fixer feeding a shift-register with selectable taps.
    for (uint32_t r = 0; r < R; ++r) {
        for (uint32_t c = 0; c < C; ++c) {
            uint32_t b = r * C + c;
            g.xnor_node[b] = add_node(GateKind::Xnor, r, c, 0);
            for (uint32_t t = 0; t < T; ++t)
                g.sr_node[b * T + t] = add_node(GateKind::SrStage, r, c, uint8_t(t));
            g.sr_in_edge[b] = add_edge(g.xnor_node[b], g.sr_node[b * T], 0, UINT32_MAX);
        }
    }

    // Interconnect stages. Stage s takes the shift-register outputs of row s;
    // stages 0..R-2 drive the blocks of row s+1, stage R-1 drives the output
    // MUX inputs. Reconvergent-fanout columns wire both MUXes to the same
    // source so the selected signal reconverges at the AND gate over two
    // distinct wires.
    for (uint32_t s = 0; s < R; ++s) {
        // one reconvergence instance per column pair, seed picks the column
        std::vector<bool> recon(C, false);
        uint32_t pairs = std::min(p.recon_per_row, C / 2);
        for (uint32_t q = 0; q < pairs; ++q) {
            uint32_t col = 2 * q + uint32_t(rng.next_below(2));
            recon[col] = true;
        }
        for (uint32_t c = 0; c < C; ++c) {
            uint32_t sc = s * C + c;
            uint32_t mA = add_node(GateKind::Mux, s, c, 0);
            uint32_t mB = add_node(GateKind::Mux, s, c, 1);
            g.mux_node[sc * 2 + 0] = mA;
            g.mux_node[sc * 2 + 1] = mB;
            for (uint32_t which = 0; which < 2; ++which) {
                for (uint32_t i = 0; i < 4; ++i) {
                    uint32_t slot = (sc * 2 + which) * 4 + i;
                    int off;
                    if (which == 1 && recon[c]) {
                        off = int(g.mux_src_col[(sc * 2) * 4 + i]) - int(c);
                        // recover the raw offset including wrap direction
                        if (off > 2) off -= int(C);
                        if (off < -2) off += int(C);
                    } else {
                        off = int(rng.next_below(5)) - 2;
                    }
                    int raw = int(c) + off;
                    bool wrap = raw < 0 || raw >= int(C);
                    uint32_t src = uint32_t((raw + int(C)) % int(C));
                    g.mux_src_col[slot] = uint16_t(src);
                    uint8_t len_class = wrap ? 4 : uint8_t(off == 0 ? 1 : (std::abs(off) == 1 ? 2 : 3));
                    uint32_t rot = UINT32_MAX;
                    if (wrap) rot = add_node(GateKind::Rotate, s, c, 0);
                    // logical source is the SR block (r=s, col=src); the tap is
                    // resolved by the challenge at evaluation time
                    g.mux_in_edge[slot] =
                        add_edge(g.sr_id(s, src, 0), which == 0 ? mA : mB, len_class, rot);
                }
            }
            uint32_t a = add_node(GateKind::AndRecon, s, c, 0);
            g.and_node[sc] = a;
            g.and_in_edge[sc * 2 + 0] = add_edge(mA, a, 0, UINT32_MAX);
            g.and_in_edge[sc * 2 + 1] = add_edge(mB, a, 0, UINT32_MAX);
        }
    }

    // Block input wiring: row 0 from the launch FFs, deeper rows from the
    // AND gate of the previous interconnect stage.
    for (uint32_t r = 0; r < R; ++r) {
        for (uint32_t c = 0; c < C; ++c) {
            uint32_t b = r * C + c;
            uint32_t src = (r == 0) ? g.launch_node[c] : g.and_node[(r - 1) * C + c];
            g.block_in_edge[b] = add_edge(src, g.xnor_node[b], 1, UINT32_MAX);
        }
    }

    // Output MUX: four taps per column of the final stage.
    g.out_mux_node = add_node(GateKind::OutMux, uint16_t(R), 0, 0);
    for (uint32_t c = 0; c < C; ++c) {
        uint32_t sc = (R - 1) * C + c;
        std::array<uint32_t, 4> src = {g.sr_id(R - 1, c, 0), g.mux_node[sc * 2 + 0],
                                       g.mux_node[sc * 2 + 1], g.and_node[sc]};
        for (uint32_t i = 0; i < 4; ++i)
            g.out_edge[c * 4 + i] = add_edge(src[i], g.out_mux_node, i == 0 ? 2 : 1, UINT32_MAX);
    }
    return g;
}

namespace {

// Evaluation context for one propagate call.
struct Eval {
    const NetlistGraph& g;
    const DeviceGateDelays& d;
    const Challenge& ch;
    double* block_time;  // SR output arrival per block
    uint8_t* block_done;
    uint32_t gates = 0;

    Eval(const NetlistGraph& graph, const DeviceGateDelays& delays, const Challenge& c,
         double* bt, uint8_t* bd)
        : g(graph), d(delays), ch(c), block_time(bt), block_done(bd) {}

    double edge_cost(uint32_t edge_id, Polarity pol) {
        const WireEdge& e = g.edges[edge_id];
        double t = d.edge(edge_id, pol);
        if (e.rotate_node != UINT32_MAX) {
            t += d.node(e.rotate_node, pol);
            ++gates;
        }
        return t;
    }

    double block(uint32_t r, uint32_t c);
    double mux(uint32_t s, uint32_t c, uint32_t which);
    double and_gate(uint32_t s, uint32_t c);
};

double Eval::block(uint32_t r, uint32_t c) {
    uint32_t b = g.block_index(r, c);
    if (block_done[b]) return block_time[b];
    double t_in = (r == 0) ? d.node(g.launch_node[c], Polarity::Rising) : and_gate(r - 1, c);
    if (r == 0) ++gates;
    Polarity in_pol = (r == 0) ? Polarity::Rising : ch.direction[r - 1];
    double t = t_in + edge_cost(g.block_in_edge[b], in_pol);
    // XNOR delay keyed by incoming polarity: the inverting configuration
    // differs from the pass-through one.
    t += d.node(g.xnor_node[b], in_pol);
    ++gates;
    Polarity out_pol = ch.direction[r];
    t += edge_cost(g.sr_in_edge[b], Polarity::Rising);  // conditioned clock edge
    t += d.node(g.sr_id(r, c, ch.sr_select[r]), out_pol);
    ++gates;
    block_time[b] = t;
    block_done[b] = 1;
    return t;
}

double Eval::mux(uint32_t s, uint32_t c, uint32_t which) {
    uint32_t sc = s * g.cols() + c;
    uint32_t sel = ch.mux_select[sc];
    uint32_t slot = (sc * 2 + which) * 4 + sel;
    uint32_t src_col = g.mux_src_col[slot];
    Polarity pol = ch.direction[s];
    double t = block(s, src_col) + edge_cost(g.mux_in_edge[slot], pol);
    t += d.node(g.mux_id(s, c, which), pol);
    ++gates;
    return t;
}

double Eval::and_gate(uint32_t s, uint32_t c) {
    Polarity pol = ch.direction[s];
    double ta = mux(s, c, 0) + edge_cost(g.and_in_edge[(s * g.cols() + c) * 2 + 0], pol);
    double tb = mux(s, c, 1) + edge_cost(g.and_in_edge[(s * g.cols() + c) * 2 + 1], pol);
    // Rising edges: the AND output switches when the last input arrives.
    // Falling edges: the first falling input drops the output.
    double t = (pol == Polarity::Rising) ? std::max(ta, tb) : std::min(ta, tb);
    t += d.node(g.and_node[s * g.cols() + c], pol);
    ++gates;
    return t;
}

}  // namespace

Propagator::Propagator(const NetlistGraph& graph)
    : g_(graph), block_time_(graph.rows() * graph.cols(), 0.0),
      block_done_(graph.rows() * graph.cols(), 0) {}

ArrivalTime Propagator::operator()(const DeviceGateDelays& delays, const Challenge& challenge,
                                   bool validate) {
    if (validate) {
        g_.validate_challenge(challenge);
        if (delays.node_ps.size() != g_.nodes.size() * 2 ||
            delays.edge_ps.size() != g_.edges.size() * 2)
            throw StructuralError("delay tables do not cover the graph");
    }
    std::fill(block_done_.begin(), block_done_.end(), 0);
    Eval ev(g_, delays, challenge, block_time_.data(), block_done_.data());
    uint32_t R = g_.rows();
    uint32_t c = challenge.out_select / 4;
    uint32_t kind = challenge.out_select % 4;
    Polarity pol = challenge.direction[R - 1];

    double t = 0.0;
    switch (kind) {
        case 0: t = ev.block(R - 1, c); break;
        case 1: t = ev.mux(R - 1, c, 0); break;
        case 2: t = ev.mux(R - 1, c, 1); break;
        case 3: t = ev.and_gate(R - 1, c); break;
    }
    t += ev.edge_cost(g_.out_edge[challenge.out_select], pol);
    t += delays.node(g_.out_mux_node, pol);
    ev.gates += 1;

    if (!(t > 0.0))
        throw StructuralError("output unreachable under challenge (non-positive arrival)");
    return ArrivalTime{t, pol, ev.gates};
}

ArrivalTime propagate(const NetlistGraph& graph, const DeviceGateDelays& delays,
                      const Challenge& challenge) {
    Propagator prop(graph);
    return prop(delays, challenge);
}

// ---------------------------------------------------------------------------
// Glitch-freedom check: full event simulation with switch counting.

namespace {

struct NetEvent {
    int count = 0;  // number of observed transitions
    Polarity pol = Polarity::Rising;
    bool dead = false;
};

}  // namespace

GlitchReport verify_glitch_free(const NetlistGraph& g, const std::vector<Challenge>& challenges,
                                const GlitchInjection* injection) {
    GlitchReport report;
    std::vector<bool> flipped(g.nodes.size(), false);
    if (injection)
        for (uint32_t id : injection->flipped_xnor_nodes) flipped[id] = true;

    const uint32_t R = g.rows(), C = g.cols();
    for (const Challenge& ch : challenges) {
        g.validate_challenge(ch);
        report.challenges_checked++;
        // One event record per block output, mux output, and gate output.
        std::vector<NetEvent> block_out(R * C), mux_out(R * C * 2), and_out(R * C);

        for (uint32_t r = 0; r < R; ++r) {
            for (uint32_t c = 0; c < C; ++c) {
                uint32_t b = r * C + c;
                NetEvent in;
                if (r == 0) {
                    in.count = 1;
                    in.pol = Polarity::Rising;
                } else {
                    in = and_out[(r - 1) * C + c];
                }
                NetEvent& out = block_out[b];
                if (in.dead || in.count == 0) {
                    out.dead = true;
                    report.violations.push_back({g.xnor_node[b], "dead net at block input"});
                    continue;
                }
                if (in.count > 1) {
                    out.dead = true;
                    report.violations.push_back({g.xnor_node[b], "glitched block input"});
                    continue;
                }
                // XNOR conditions the SR clock: configured to deliver a rising
                // edge from the row's programmed incoming polarity.
                Polarity expected = (r == 0) ? Polarity::Rising : ch.direction[r - 1];
                Polarity after = (in.pol == expected) ? Polarity::Rising : Polarity::Falling;
                if (flipped[g.xnor_node[b]]) after = flip(after);
                if (after != Polarity::Rising) {
                    out.dead = true;
                    report.violations.push_back(
                        {g.xnor_node[b], "falling clock edge at shift register (polarity mix)"});
                    continue;
                }
                out.count = 1;
                out.pol = ch.direction[r];
            }
            // interconnect stage r
            for (uint32_t c = 0; c < C; ++c) {
                uint32_t sc = r * C + c;
                for (uint32_t which = 0; which < 2; ++which) {
                    uint32_t slot = (sc * 2 + which) * 4 + ch.mux_select[sc];
                    NetEvent& out = mux_out[sc * 2 + which];
                    out = block_out[r * C + g.mux_src_col[slot]];
                    report.nets_checked++;
                }
                NetEvent a = mux_out[sc * 2 + 0], b = mux_out[sc * 2 + 1];
                NetEvent& out = and_out[sc];
                report.nets_checked++;
                if (a.dead || b.dead) {
                    out.dead = true;
                    continue;  // root cause already reported
                }
                if (a.pol != b.pol) {
                    // A rising and a falling edge through an AND gate produce a
                    // pulse: two transitions on the output net.
                    out.count = 2;
                    out.pol = a.pol;
                    report.violations.push_back(
                        {g.and_node[sc], "mixed polarities reconverge: output switches twice"});
                    continue;
                }
                out.count = std::max(a.count, b.count);
                out.pol = a.pol;
            }
        }
        report.nets_checked += R * C;
    }
    return report;
}

void challenge_into(const NetlistGraph& g, uint64_t seed, Polarity pol, uint64_t candidate_id,
                    Challenge& ch) {
    Rng rng = Rng::stream(seed, 0xC4A11E46EULL, uint64_t(pol), candidate_id);
    const uint32_t R = g.rows(), C = g.cols();
    ch.sr_select.resize(R);
    ch.direction.resize(R);
    ch.mux_select.resize(R * C);
    for (uint32_t r = 0; r < R; ++r) {
        ch.sr_select[r] = uint8_t(rng.next_below(g.params.sr_taps));
        ch.direction[r] = rng.bernoulli(0.5) ? Polarity::Rising : Polarity::Falling;
    }
    for (auto& m : ch.mux_select) m = uint8_t(rng.next_below(4));
    ch.out_select = uint16_t(rng.next_below(g.output_count()));
    // The polarity emerging at the output MUX is the last row's direction;
    // flip the row directions when they do not deliver the requested one.
    // Rising and falling candidates with the same id are independent draws:
    // the pipeline pairs them by selection order, and the differing path
    // lengths inside each pair are the bias SpreadFactors removes.
    if (ch.direction[R - 1] != pol)
        for (auto& d : ch.direction) d = flip(d);
}

Challenge challenge_for(const NetlistGraph& g, uint64_t seed, Polarity pol,
                        uint64_t candidate_id) {
    Challenge ch;
    challenge_into(g, seed, pol, candidate_id, ch);
    return ch;
}

// ---------------------------------------------------------------------------
// JSON serialization

using ojson = nlohmann::ordered_json;

ojson NetlistGraph::to_json() const {
    ojson j;
    j["schema"] = "sirf-netlist-v1";
    j["params"] = {{"rows", params.rows},
                   {"cols", params.cols},
                   {"seed", params.seed},
                   {"sr_taps", params.sr_taps},
                   {"recon_per_row", params.recon_per_row},
                   {"instance_sigma", params.instance_sigma},
                   {"wire_sigma", params.wire_sigma}};
    ojson jnodes = ojson::array();
    for (const auto& n : nodes) {
        jnodes.push_back(ojson{{"id", n.id},
                               {"kind", gate_kind_name(n.kind)},
                               {"row", n.row},
                               {"col", n.col},
                               {"tap", n.tap},
                               {"rise", n.rise_factor},
                               {"fall", n.fall_factor}});
    }
    j["nodes"] = std::move(jnodes);
    ojson jedges = ojson::array();
    for (const auto& e : edges) {
        ojson je = {{"id", e.id},           {"from", e.from},
                    {"to", e.to},           {"length_class", e.length_class},
                    {"rise", e.rise_factor}, {"fall", e.fall_factor}};
        if (e.rotate_node != UINT32_MAX) je["rotate_node"] = e.rotate_node;
        jedges.push_back(std::move(je));
    }
    j["edges"] = std::move(jedges);
    j["tables"] = {{"launch_node", launch_node},   {"xnor_node", xnor_node},
                   {"sr_node", sr_node},           {"mux_node", mux_node},
                   {"and_node", and_node},         {"mux_src_col", mux_src_col},
                   {"block_in_edge", block_in_edge}, {"sr_in_edge", sr_in_edge},
                   {"mux_in_edge", mux_in_edge},   {"and_in_edge", and_in_edge},
                   {"out_edge", out_edge},         {"out_mux_node", out_mux_node}};
    return j;
}

std::string NetlistGraph::to_json_string() const { return to_json().dump(2); }

NetlistGraph NetlistGraph::from_json(const ojson& j) {
    if (j.value("schema", "") != std::string("sirf-netlist-v1"))
        throw ConfigError("unrecognized netlist schema");
    NetlistGraph g;
    const auto& jp = j.at("params");
    g.params.rows = jp.at("rows");
    g.params.cols = jp.at("cols");
    g.params.seed = jp.at("seed");
    g.params.sr_taps = jp.at("sr_taps");
    g.params.recon_per_row = jp.at("recon_per_row");
    g.params.instance_sigma = jp.at("instance_sigma");
    g.params.wire_sigma = jp.at("wire_sigma");
    for (const auto& jn : j.at("nodes")) {
        GateNode n;
        n.id = jn.at("id");
        n.kind = gate_kind_from_name(jn.at("kind"));
        n.row = jn.at("row");
        n.col = jn.at("col");
        n.tap = jn.at("tap");
        n.rise_factor = jn.at("rise");
        n.fall_factor = jn.at("fall");
        g.nodes.push_back(n);
    }
    for (const auto& je : j.at("edges")) {
        WireEdge e;
        e.id = je.at("id");
        e.from = je.at("from");
        e.to = je.at("to");
        e.length_class = je.at("length_class");
        e.rotate_node = je.value("rotate_node", UINT32_MAX);
        e.rise_factor = je.at("rise");
        e.fall_factor = je.at("fall");
        g.edges.push_back(e);
    }
    const auto& jt = j.at("tables");
    g.launch_node = jt.at("launch_node").get<std::vector<uint32_t>>();
    g.xnor_node = jt.at("xnor_node").get<std::vector<uint32_t>>();
    g.sr_node = jt.at("sr_node").get<std::vector<uint32_t>>();
    g.mux_node = jt.at("mux_node").get<std::vector<uint32_t>>();
    g.and_node = jt.at("and_node").get<std::vector<uint32_t>>();
    g.mux_src_col = jt.at("mux_src_col").get<std::vector<uint16_t>>();
    g.block_in_edge = jt.at("block_in_edge").get<std::vector<uint32_t>>();
    g.sr_in_edge = jt.at("sr_in_edge").get<std::vector<uint32_t>>();
    g.mux_in_edge = jt.at("mux_in_edge").get<std::vector<uint32_t>>();
    g.and_in_edge = jt.at("and_in_edge").get<std::vector<uint32_t>>();
    g.out_edge = jt.at("out_edge").get<std::vector<uint32_t>>();
    g.out_mux_node = jt.at("out_mux_node");
    return g;
}

}  // namespace sirf
