#include <doctest.h>

#include <cmath>

#include "sirf/measure.hpp"

using namespace sirf;

namespace {

Measurer make_measurer(const ClassParams& p, const NetlistGraph& g, uint32_t n_devices) {
    auto pop = sample_population(p, g, n_devices, 7);
    return Measurer(p, g, std::move(pop), standard_corners(), 2, 3);
}

}  // namespace

TEST_CASE("parallel kernel is bit-identical to the serial reference") {
    ClassParams p = zynq_preset();
    NetlistGraph g = build_netlist(p.graph);
    Measurer m = make_measurer(p, g, 4);

    CandidateBlock par = m.measure_block(0, 96, true);
    CandidateBlock ser = m.measure_block_serial(0, 96);
    REQUIRE(par.dv.size() == ser.dv.size());
    for (size_t i = 0; i < par.dv.size(); ++i) CHECK(par.dv[i] == ser.dv[i]);
}

TEST_CASE("measurements are independent of block partitioning") {
    ClassParams p = cyclone_preset();
    NetlistGraph g = build_netlist(p.graph);
    Measurer m = make_measurer(p, g, 2);

    CandidateBlock whole = m.measure_block(0, 64, true);
    CandidateBlock first = m.measure_block(0, 32, true);
    CandidateBlock second = m.measure_block(32, 32, true);
    for (uint32_t i = 0; i < 32; ++i) {
        CHECK(whole.at(1, 2, Polarity::Rising, i) == first.at(1, 2, Polarity::Rising, i));
        CHECK(whole.at(1, 2, Polarity::Rising, 32 + i) == second.at(1, 2, Polarity::Rising, i));
        CHECK(whole.at(0, 4, Polarity::Falling, 32 + i) == second.at(0, 4, Polarity::Falling, i));
    }
}

TEST_CASE("same seeds give identical measurements across instances") {
    ClassParams p = polarfire_preset();
    NetlistGraph g = build_netlist(p.graph);
    Measurer m1 = make_measurer(p, g, 3);
    Measurer m2 = make_measurer(p, g, 3);
    CandidateBlock a = m1.measure_block(100, 40, true);
    CandidateBlock b = m2.measure_block(100, 40, false);
    CHECK(a.dv == b.dv);
}

TEST_CASE("measure_ids matches the block kernel") {
    ClassParams p = zynq_preset();
    NetlistGraph g = build_netlist(p.graph);
    Measurer m = make_measurer(p, g, 3);
    CandidateBlock block = m.measure_block(10, 8, true);
    std::vector<uint64_t> ids = {10, 11, 12, 13, 14, 15, 16, 17};
    std::vector<double> vals = m.measure_ids(ids, Polarity::Falling, 3, true);
    for (uint32_t d = 0; d < 3; ++d)
        for (uint32_t k = 0; k < 8; ++k)
            CHECK(vals[d * 8 + k] == block.at(d, 3, Polarity::Falling, k));
}

TEST_CASE("temperature: paths slow down in ps, DVs barely move in element units") {
    ClassParams p = zynq_preset();
    p.sigma_meas_ps = 0.0;
    p.nl_path_fraction = 0.0;
    NetlistGraph g = build_netlist(p.graph);
    Measurer m = make_measurer(p, g, 2);
    Propagator prop(g);
    Challenge ch;
    // corner order: enrollment(25), -40, 0, 25, 50, 85
    double cold_ps = 0, nom_ps = 0, hot_ps = 0;
    for (uint64_t id = 0; id < 64; ++id) {
        challenge_into(g, m.challenge_seed(), Polarity::Rising, id, ch);
        cold_ps += prop(m.tables(0, 1), ch).picoseconds;
        nom_ps += prop(m.tables(0, 0), ch).picoseconds;
        hot_ps += prop(m.tables(0, 5), ch).picoseconds;
    }
    CHECK(cold_ps < nom_ps);
    CHECK(nom_ps < hot_ps);

    // Per-corner recalibration absorbs the TDC's own drift: what remains in
    // the DV is the fabric-versus-carry-chain coefficient contrast, a known
    // fraction of the raw delay swing.
    double contrast = (p.tc_alpha - p.tdc.tc_alpha) / p.tc_alpha;
    CandidateBlock block = m.measure_block(0, 64, true);
    for (uint32_t i = 0; i < 64; ++i) {
        double nom = block.at(0, 0, Polarity::Rising, i);
        double hot = block.at(0, 5, Polarity::Rising, i);
        double raw_swing = (hot_ps - nom_ps) / 64.0 / p.tdc.element_ps;
        CHECK(std::fabs(hot - nom) < (contrast + 0.35) * raw_swing);
        CHECK(std::fabs(hot - nom) > (contrast - 0.35) * raw_swing);
    }
}

TEST_CASE("duplicate 25 C corners differ only by measurement noise") {
    ClassParams p = zynq_preset();
    p.sigma_meas_ps = 0.0;
    NetlistGraph g = build_netlist(p.graph);
    Measurer m = make_measurer(p, g, 2);
    CandidateBlock block = m.measure_block(0, 32, true);
    for (uint32_t i = 0; i < 32; ++i)
        CHECK(block.at(0, 0, Polarity::Rising, i) ==
              doctest::Approx(block.at(0, 3, Polarity::Rising, i)).epsilon(1e-12));
}
