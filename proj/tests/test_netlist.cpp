#include <doctest.h>

#include <algorithm>
#include <set>

#include "sirf/netlist.hpp"
#include "sirf/rng.hpp"

using namespace sirf;

namespace {

// Uniform tables make hand-computed arrival times easy.
DeviceGateDelays uniform_delays(const NetlistGraph& g, double node_ps, double edge_ps) {
    DeviceGateDelays d;
    d.node_ps.assign(g.nodes.size() * 2, node_ps);
    d.edge_ps.assign(g.edges.size() * 2, edge_ps);
    return d;
}

Challenge basic_challenge(const NetlistGraph& g, Polarity pol, uint64_t id) {
    return challenge_for(g, 42, pol, id);
}

// Tiny waveform oracle for a 2-input AND: simulates the gate output level
// over time given one transition per input, and reports the switch instant.
// Rising pair: inputs start 0/0, output rises once both have risen.
// Falling pair: inputs start 1/1, output falls with the first faller.
double and_gate_oracle(double t1, double t2, Polarity pol, double gate_delay) {
    double switch_at = pol == Polarity::Rising ? std::max(t1, t2) : std::min(t1, t2);
    return switch_at + gate_delay;
}

}  // namespace

TEST_CASE("build rejects unsupported geometry") {
    CHECK_THROWS_AS(build_netlist(0, 8, 1), ConfigError);
    CHECK_THROWS_AS(build_netlist(3, 3, 1), ConfigError);  // not a power of two
    CHECK_THROWS_AS(build_netlist(3, 1, 1), ConfigError);
    CHECK_THROWS_AS(build_netlist(9, 8, 1), ConfigError);
}

TEST_CASE("3x8 graph has 32 output MUX inputs and is deterministic") {
    NetlistGraph g1 = build_netlist(3, 8, 1);
    CHECK(g1.output_count() == 32);
    CHECK(g1.rows() == 3);
    CHECK(g1.cols() == 8);

    NetlistGraph g2 = build_netlist(3, 8, 1);
    CHECK(g1.to_json_string() == g2.to_json_string());

    NetlistGraph g3 = build_netlist(3, 8, 2);
    CHECK(g1.to_json_string() != g3.to_json_string());
}

TEST_CASE("minimal 1x2 graph: acyclic, all outputs reachable") {
    NetlistGraph g = build_netlist(1, 2, 0);
    CHECK(g.output_count() == 8);
    DeviceGateDelays d = uniform_delays(g, 10.0, 1.0);
    for (uint32_t out = 0; out < g.output_count(); ++out) {
        Challenge ch = basic_challenge(g, Polarity::Rising, out);
        ch.out_select = uint16_t(out);
        ArrivalTime t = propagate(g, d, ch);
        CHECK(t.picoseconds > 0.0);
    }
}

TEST_CASE("json round trip preserves evaluation") {
    NetlistGraph g = build_netlist(3, 8, 7);
    NetlistGraph g2 = NetlistGraph::from_json(g.to_json());
    DeviceGateDelays d = uniform_delays(g, 12.0, 2.0);
    for (uint64_t id = 0; id < 32; ++id) {
        Challenge ch = basic_challenge(g, Polarity::Rising, id);
        CHECK(propagate(g, d, ch).picoseconds ==
              doctest::Approx(propagate(g2, d, ch).picoseconds));
    }
}

TEST_CASE("AND reconvergence semantics: max for rising, min for falling") {
    // Drive a one-row graph where both MUX branches of an AND select sources
    // with distinct arrival times, and compare against the waveform oracle.
    NetlistGraph g = build_netlist(1, 2, 3);
    DeviceGateDelays d = uniform_delays(g, 10.0, 1.0);
    // Make column 0's SR much slower than column 1's for tap 0.
    d.node(g.sr_id(0, 0, 0), Polarity::Rising) = 40.0;
    d.node(g.sr_id(0, 1, 0), Polarity::Rising) = 10.0;
    d.node(g.sr_id(0, 0, 0), Polarity::Falling) = 40.0;
    d.node(g.sr_id(0, 1, 0), Polarity::Falling) = 10.0;

    for (Polarity pol : {Polarity::Rising, Polarity::Falling}) {
        for (uint32_t col = 0; col < 2; ++col) {
            Challenge ch;
            ch.sr_select = {0};
            ch.direction = {pol};
            ch.mux_select = {0, 0};
            ch.out_select = uint16_t(col * 4 + 3);  // AND output of this column
            ArrivalTime out = propagate(g, d, ch);

            // Recompute the two branch arrivals by probing the MUX outputs.
            Challenge cha = ch;
            cha.out_select = uint16_t(col * 4 + 1);
            Challenge chb = ch;
            chb.out_select = uint16_t(col * 4 + 2);
            double ta = propagate(g, d, cha).picoseconds;
            double tb = propagate(g, d, chb).picoseconds;

            // Remove the shared out-mux tail to compare at the AND input.
            double tail_a = d.edge(g.out_edge[cha.out_select], pol) +
                            d.node(g.out_mux_node, pol);
            double tail_out = d.edge(g.out_edge[ch.out_select], pol) +
                              d.node(g.out_mux_node, pol);
            uint32_t sc = 0 * g.cols() + col;
            double in_a = ta - tail_a + d.edge(g.and_in_edge[sc * 2 + 0], pol);
            double in_b = tb - tail_a + d.edge(g.and_in_edge[sc * 2 + 1], pol);
            double expected = and_gate_oracle(in_a, in_b, pol,
                                              d.node(g.and_node[sc], pol)) +
                              tail_out;
            CHECK(out.picoseconds == doctest::Approx(expected).epsilon(1e-12));
        }
    }
}

TEST_CASE("AND gate example values") {
    // rising inputs at 100 and 130 ps through a 20 ps gate -> 150 ps
    CHECK(and_gate_oracle(100.0, 130.0, Polarity::Rising, 20.0) == doctest::Approx(150.0));
    // falling inputs at 100 and 130 ps through a 20 ps gate -> 120 ps
    CHECK(and_gate_oracle(100.0, 130.0, Polarity::Falling, 20.0) == doctest::Approx(120.0));
}

TEST_CASE("non-branching chain sums its stage delays") {
    // Output kind 0 of a 1-row graph: launch -> wire -> xnor -> wire -> sr ->
    // wire -> outmux. With all node delays 10 and edge delays 0 the result is
    // the plain sum of the stages.
    NetlistGraph g = build_netlist(1, 2, 5);
    DeviceGateDelays d = uniform_delays(g, 10.0, 0.0);
    Challenge ch;
    ch.sr_select = {0};
    ch.direction = {Polarity::Rising};
    ch.mux_select = {0, 0};
    ch.out_select = 0;  // direct SR output of column 0
    ArrivalTime t = propagate(g, d, ch);
    // launch + xnor + sr + outmux
    CHECK(t.picoseconds == doctest::Approx(40.0));
    CHECK(t.polarity == Polarity::Rising);
}

TEST_CASE("challenge completeness: every output reachable on the 3x8 graph") {
    NetlistGraph g = build_netlist(3, 8, 1);
    DeviceGateDelays d = uniform_delays(g, 10.0, 1.0);
    for (uint32_t out = 0; out < 32; ++out) {
        Challenge ch = basic_challenge(g, Polarity::Rising, out);
        ch.out_select = uint16_t(out);
        CHECK(propagate(g, d, ch).picoseconds > 0.0);
    }
}

TEST_CASE("monotonicity: raising one gate delay never lowers a rising arrival") {
    NetlistGraph g = build_netlist(3, 8, 11);
    Rng rng(404);
    DeviceGateDelays d = uniform_delays(g, 15.0, 2.0);
    for (auto& v : d.node_ps) v = 10.0 + 10.0 * rng.next_double();

    for (int trial = 0; trial < 200; ++trial) {
        Challenge ch = basic_challenge(g, Polarity::Rising, uint64_t(trial));
        double base = propagate(g, d, ch).picoseconds;
        uint32_t node = uint32_t(rng.next_below(g.nodes.size()));
        DeviceGateDelays d2 = d;
        d2.node(node, Polarity::Rising) += 25.0;
        double bumped = propagate(g, d2, ch).picoseconds;
        CHECK(bumped >= base - 1e-12);
        DeviceGateDelays d3 = d;
        d3.node(node, Polarity::Rising) = std::max(0.5, d.node(node, Polarity::Rising) - 5.0);
        double lowered = propagate(g, d3, ch).picoseconds;
        CHECK(lowered <= base + 1e-12);
    }
}

TEST_CASE("reconvergence dominance: slow branch hides fast-branch perturbations") {
    NetlistGraph g = build_netlist(1, 2, 3);
    DeviceGateDelays d = uniform_delays(g, 10.0, 1.0);
    Challenge ch;
    ch.sr_select = {0};
    ch.direction = {Polarity::Rising};
    ch.mux_select = {0, 0};
    ch.out_select = 3;  // AND output, column 0

    uint32_t sc = 0;
    // Branch A (mux 0) selects some source column; make branch B's wire far
    // slower than any perturbation applied to branch A.
    d.edge(g.mux_in_edge[(sc * 2 + 1) * 4 + ch.mux_select[0]], Polarity::Rising) = 500.0;
    double base = propagate(g, d, ch).picoseconds;

    DeviceGateDelays d2 = d;
    d2.edge(g.mux_in_edge[(sc * 2 + 0) * 4 + ch.mux_select[0]], Polarity::Rising) += 30.0;
    d2.node(g.mux_id(0, 0, 0), Polarity::Rising) += 15.0;
    CHECK(propagate(g, d2, ch).picoseconds == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("propagate is deterministic") {
    NetlistGraph g = build_netlist(3, 8, 1);
    DeviceGateDelays d = uniform_delays(g, 13.0, 1.5);
    Challenge ch = basic_challenge(g, Polarity::Falling, 77);
    double a = propagate(g, d, ch).picoseconds;
    double b = propagate(g, d, ch).picoseconds;
    CHECK(a == b);
}

TEST_CASE("glitch-free verification") {
    NetlistGraph g = build_netlist(3, 8, 9);

    SUBCASE("valid graph, 100 random challenges: no violations") {
        std::vector<Challenge> chs;
        for (uint64_t i = 0; i < 100; ++i) chs.push_back(basic_challenge(g, Polarity::Rising, i));
        GlitchReport rep = verify_glitch_free(g, chs);
        CHECK(rep.clean());
        CHECK(rep.challenges_checked == 100);
    }

    SUBCASE("flipped XNOR mixes polarities and is detected") {
        std::vector<Challenge> chs;
        for (uint64_t i = 0; i < 20; ++i) chs.push_back(basic_challenge(g, Polarity::Rising, i));
        GlitchInjection inject;
        inject.flipped_xnor_nodes.push_back(g.xnor_node[1 * g.cols() + 3]);
        GlitchReport rep = verify_glitch_free(g, chs, &inject);
        CHECK(!rep.clean());
    }

    SUBCASE("single-row graph, every select: no violations") {
        NetlistGraph g1 = build_netlist(1, 2, 0);
        std::vector<Challenge> chs;
        for (uint8_t tap = 0; tap < 4; ++tap) {
            Challenge ch;
            ch.sr_select = {tap};
            ch.direction = {Polarity::Rising};
            ch.mux_select = {1, 2};
            ch.out_select = 0;
            chs.push_back(ch);
        }
        CHECK(verify_glitch_free(g1, chs).clean());
    }
}

TEST_CASE("challenge generator honors requested output polarity") {
    NetlistGraph g = build_netlist(3, 8, 1);
    for (uint64_t id = 0; id < 50; ++id) {
        Challenge r = challenge_for(g, 7, Polarity::Rising, id);
        CHECK(r.direction.back() == Polarity::Rising);
        Challenge f = challenge_for(g, 7, Polarity::Falling, id);
        CHECK(f.direction.back() == Polarity::Falling);
        // regenerating the same id gives the same challenge
        Challenge r2 = challenge_for(g, 7, Polarity::Rising, id);
        CHECK(r.sr_select == r2.sr_select);
        CHECK(r.mux_select == r2.mux_select);
        CHECK(r.out_select == r2.out_select);
    }
}

TEST_CASE("challenge validation rejects malformed fields") {
    NetlistGraph g = build_netlist(3, 8, 1);
    DeviceGateDelays d = uniform_delays(g, 10.0, 1.0);
    Challenge ch = basic_challenge(g, Polarity::Rising, 0);
    Challenge bad = ch;
    bad.out_select = 32;
    CHECK_THROWS_AS(propagate(g, d, bad), StructuralError);
    bad = ch;
    bad.sr_select[0] = 4;
    CHECK_THROWS_AS(propagate(g, d, bad), StructuralError);
    bad = ch;
    bad.mux_select[5] = 7;
    CHECK_THROWS_AS(propagate(g, d, bad), StructuralError);
}
