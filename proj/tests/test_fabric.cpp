#include <doctest.h>

#include <cmath>

#include "sirf/fabric.hpp"
#include "sirf/util.hpp"

using namespace sirf;

namespace {

ClassParams small_params() {
    ClassParams p = zynq_preset();
    p.graph.rows = 2;
    p.graph.cols = 4;
    return p;
}

}  // namespace

TEST_CASE("population generation is reproducible") {
    ClassParams p = small_params();
    NetlistGraph g = build_netlist(p.graph);
    auto a = sample_population(p, g, 25, 7);
    auto b = sample_population(p, g, 25, 7);
    REQUIRE(a.size() == 25);
    for (size_t d = 0; d < a.size(); ++d) {
        CHECK(a[d].global_shift == b[d].global_shift);
        CHECK(a[d].gate_base_ps == b[d].gate_base_ps);
        CHECK(a[d].gate_tc == b[d].gate_tc);
    }
    auto c = sample_population(p, g, 25, 8);
    CHECK(a[0].gate_base_ps != c[0].gate_base_ps);
}

TEST_CASE("degenerate variance: all devices identical") {
    ClassParams p = small_params();
    p.sigma_global = 0.0;
    p.sigma_wid_ps = 0.0;
    p.sigma_tc_device = 0.0;
    p.sigma_tc_gate = 0.0;
    p.sigma_tc_split = 0.0;
    NetlistGraph g = build_netlist(p.graph);
    auto pop = sample_population(p, g, 5, 3);
    for (size_t d = 1; d < pop.size(); ++d) {
        CHECK(pop[d].gate_base_ps == pop[0].gate_base_ps);
        CHECK(pop[d].global_shift == doctest::Approx(1.0));
    }
}

TEST_CASE("within-die spread matches its parameter (law of large numbers)") {
    ClassParams p = small_params();
    p.sigma_global = 0.0;
    p.sigma_wid_ps = 5.0;
    NetlistGraph g = build_netlist(p.graph);
    auto pop = sample_population(p, g, 1000, 11);
    uint32_t gate = g.sr_id(0, 0, 0);
    std::vector<double> values;
    for (const auto& dev : pop) values.push_back(dev.base(gate, Polarity::Rising));
    CHECK(stddev_of(values) == doctest::Approx(5.0).epsilon(0.05));
}

TEST_CASE("population mean of global_shift stays near 1") {
    ClassParams p = small_params();
    NetlistGraph g = build_netlist(p.graph);
    auto pop = sample_population(p, g, 400, 5);
    double acc = 0;
    for (const auto& d : pop) acc += d.global_shift;
    double mean = acc / double(pop.size());
    CHECK(std::fabs(mean - 1.0) <= 3.0 * p.sigma_global / std::sqrt(400.0));
}

TEST_CASE("realized_delay: linear temperature scaling") {
    ClassParams p = small_params();
    p.sigma_global = 0.0;
    p.sigma_wid_ps = 0.0;
    p.sigma_tc_device = 0.0;
    p.sigma_tc_gate = 0.0;
    p.sigma_tc_split = 0.0;
    p.sigma_meas_ps = 0.0;
    p.tc_alpha = 0.001;
    p.graph.instance_sigma = 0.0;
    p.mu_xnor = GateMu{100.0, 100.0};
    NetlistGraph g = build_netlist(p.graph);
    auto pop = sample_population(p, g, 1, 1);
    uint32_t gate = g.xnor_node[0];
    Rng rng(1);

    SUBCASE("base 100 ps, tc 0.001/C, T=85, no noise -> 106 ps") {
        double d = realized_delay(p, g, pop[0], gate, Polarity::Rising, {85.0, "regen_85"}, rng);
        CHECK(d == doctest::Approx(106.0));
    }
    SUBCASE("T=25: base delay unchanged") {
        double d = realized_delay(p, g, pop[0], gate, Polarity::Rising, {25.0, "enrollment"}, rng);
        CHECK(d == doctest::Approx(100.0));
    }
    SUBCASE("noise sigma 2 ps: sample deviation within 5% over 1e4 draws") {
        p.sigma_meas_ps = 2.0;
        std::vector<double> vals;
        for (int i = 0; i < 10000; ++i)
            vals.push_back(
                realized_delay(p, g, pop[0], gate, Polarity::Rising, {25.0, "enrollment"}, rng));
        CHECK(stddev_of(vals) == doctest::Approx(2.0).epsilon(0.05));
    }
}

TEST_CASE("separability: no noise and fixed corner means time-invariant tables") {
    ClassParams p = small_params();
    p.sigma_meas_ps = 0.0;
    NetlistGraph g = build_netlist(p.graph);
    auto pop = sample_population(p, g, 2, 9);
    EnvCorner hot{85.0, "regen_85"};
    DeviceGateDelays t1 = realized_tables(p, g, pop[1], hot);
    DeviceGateDelays t2 = realized_tables(p, g, pop[1], hot);
    CHECK(t1.node_ps == t2.node_ps);
    CHECK(t1.edge_ps == t2.edge_ps);
}

TEST_CASE("temperature monotonicity for positive-tc gates") {
    ClassParams p = small_params();
    NetlistGraph g = build_netlist(p.graph);
    auto pop = sample_population(p, g, 8, 13);
    DeviceGateDelays cold = realized_tables(p, g, pop[3], {-40.0, "regen_m40"});
    DeviceGateDelays nom = realized_tables(p, g, pop[3], {25.0, "enrollment"});
    DeviceGateDelays hot = realized_tables(p, g, pop[3], {85.0, "regen_85"});
    for (const GateNode& n : g.nodes) {
        for (Polarity pol : {Polarity::Falling, Polarity::Rising}) {
            if (pop[3].tc(n.id, pol) <= 0) continue;
            CHECK(hot.node(n.id, pol) > nom.node(n.id, pol));
            CHECK(nom.node(n.id, pol) > cold.node(n.id, pol));
        }
    }
}

TEST_CASE("class params json round trip") {
    for (const auto& name : preset_names()) {
        ClassParams p = preset_by_name(name);
        ClassParams q = ClassParams::from_json(p.to_json());
        CHECK(q.to_json().dump() == p.to_json().dump());
    }
}

TEST_CASE("device instance json round trip") {
    ClassParams p = small_params();
    NetlistGraph g = build_netlist(p.graph);
    auto pop = sample_population(p, g, 2, 21);
    DeviceInstance d = DeviceInstance::from_json(pop[1].to_json());
    CHECK(d.gate_base_ps == pop[1].gate_base_ps);
    CHECK(d.global_shift == pop[1].global_shift);
}

TEST_CASE("nonlinear path flags are class-common and near the configured fraction") {
    ClassParams p = zynq_preset();
    p.nl_path_fraction = 0.10;
    uint64_t flagged = 0, total = 20000;
    for (uint64_t id = 0; id < total; ++id)
        flagged += path_is_nonlinear(p, Polarity::Rising, id);
    double frac = double(flagged) / double(total);
    CHECK(frac == doctest::Approx(0.10).epsilon(0.1));

    // distortion grows quadratically with the temperature excursion
    NetlistGraph g = build_netlist(p.graph);
    auto pop = sample_population(p, g, 1, 2);
    uint64_t id = 0;
    while (!path_is_nonlinear(p, Polarity::Rising, id)) ++id;
    double d85 = path_nonlinear_distortion(p, pop[0], Polarity::Rising, id, 85.0);
    double d50 = path_nonlinear_distortion(p, pop[0], Polarity::Rising, id, 50.0);
    CHECK(std::fabs(d85) > std::fabs(d50));
    double r = d85 / d50;
    CHECK(r == doctest::Approx(60.0 * 60.0 / (25.0 * 25.0)));
    CHECK(path_nonlinear_distortion(p, pop[0], Polarity::Rising, id, 25.0) == 0.0);
}

TEST_CASE("invalid class params rejected") {
    ClassParams p = small_params();
    p.sigma_wid_ps = -1.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = small_params();
    p.mu_mux.rise = 0.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = small_params();
    p.nl_path_fraction = 1.5;
    CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("standard corners: enrollment at 25 plus five regeneration temperatures") {
    auto corners = standard_corners();
    REQUIRE(corners.size() == 6);
    CHECK(corners[0].is_enrollment());
    CHECK(corners[0].temp_c == 25.0);
    std::vector<double> temps;
    for (size_t i = 1; i < corners.size(); ++i) temps.push_back(corners[i].temp_c);
    CHECK(temps == std::vector<double>{-40.0, 0.0, 25.0, 50.0, 85.0});
}
