#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "support.hpp"
#include "thermiq/error.hpp"
#include "thermiq/floorplan.hpp"
#include "thermiq/thermal.hpp"

using namespace thermiq;

namespace {

constexpr double kAmb = 318.15;

ThermalNetwork one_node(double g, double c) {
    return ThermalNetwork::from_parts({}, {g}, {c}, {BlockCells{"n", 0, 0, {{0, 1.0}}}}, kAmb);
}

// n0 -- g01 -- n1 -- g_amb -- ambient
ThermalNetwork two_node(double g01, double g_amb, double c0, double c1) {
    return ThermalNetwork::from_parts({{0, 1, g01}}, {0.0, g_amb}, {c0, c1},
                                      {BlockCells{"hot", 0, 0, {{0, 1.0}}}, BlockCells{"cold", 0, 1, {{1, 1.0}}}},
                                      kAmb);
}

ThermalNetwork small_stack_network(bool air) {
    StackConfig c;
    c.kind = StackKind::Stacked3D;
    c.cores = 4;
    c.mem_layers = 2;
    c.mem_banks_x = c.mem_banks_y = 2;
    c.bank_width = c.bank_height = 4e-3;
    auto stacks = build_stack(c);
    stacks[0].air_cooled = air;
    return ThermalNetwork::build(stacks, 4, 4, AmbientSpec{kAmb, 0.25, 20.0});
}

}  // namespace

TEST(Thermal, SeriesResistancesSteadyState) {
    // 2 W through 0.5 K/W then 0.25 K/W
    const auto net = two_node(2.0, 4.0, 1.0, 1.0);
    const std::vector<double> p{2.0, 0.0};
    const auto s = steady_state(net, p, {});
    EXPECT_NEAR(s.temperatures[1], kAmb + 0.5, 1e-9);
    EXPECT_NEAR(s.temperatures[0], kAmb + 1.5, 1e-9);
}

TEST(Thermal, TransientApproachesAnalyticDecay) {
    // R = 2 K/W, C = 0.5 J/K -> tau = 1 s
    const auto net = one_node(0.5, 0.5);
    TransientSolver solver(net, 1e-3, 10);
    ThermalState s = ambient_state(net);
    const std::vector<double> p{1.0};
    for (int e = 0; e < 2000; ++e) s = solver.step(s, p, {}).state;
    EXPECT_NEAR(s.temperatures[0] - kAmb, 2.0 * (1.0 - std::exp(-2.0)), 2.0 * 1e-3);
    EXPECT_NEAR(s.time, 2.0, 1e-9);
}

TEST(Thermal, NoPowerStaysAtAmbient) {
    const auto net = small_stack_network(false);
    const std::vector<double> p(net.blocks().size(), 0.0);
    const auto r = transient_step(net, ambient_state(net), p, {}, 1e-3, 4);
    for (double t : r.temperatures) EXPECT_DOUBLE_EQ(t, kAmb);
}

TEST(Thermal, BuiltNetworkIsAValidMMatrix) {
    const auto net = small_stack_network(false);
    EXPECT_NO_THROW(net.validate());
    for (const auto& e : net.edges()) EXPECT_GT(e.g, 0.0);
    for (double c : net.capacitance()) EXPECT_GT(c, 0.0);
    // one convective path per stack
    EXPECT_NEAR(std::accumulate(net.ambient_coupling().begin(), net.ambient_coupling().end(), 0.0), 4.0, 1e-12);
    // block cell fractions cover each block exactly
    for (const auto& b : net.blocks()) {
        double sum = 0;
        for (const auto& [node, frac] : b.cells) sum += frac;
        EXPECT_NEAR(sum, 1.0, 1e-12) << b.name;
    }
}

TEST(Thermal, AirCoolingRaisesSteadyTemperature) {
    const auto forced = small_stack_network(false);
    const auto air = small_stack_network(true);
    std::vector<double> p(forced.blocks().size(), 0.5);
    const double tf = block_temperature(forced, steady_state(forced, p, {}), "C_0").max;
    const double ta = block_temperature(air, steady_state(air, p, {}), "C_0").max;
    EXPECT_GT(ta, tf);
    // uniform spreading: the sink rise alone is P * R
    const double total = 0.5 * p.size();
    EXPECT_GT(ta - kAmb, total * 0.25 * 20.0);
}

TEST(Thermal, FarthestLayerIsHottestUnderUniformPower) {
    const auto net = small_stack_network(false);
    std::vector<double> p(net.blocks().size(), 0.0);
    for (std::size_t b = 0; b < p.size(); ++b)
        if (net.blocks()[b].name.rfind("MEM", 0) == 0) p[b] = 0.4;
    const auto bt = block_temperatures(net, steady_state(net, p, {}));
    EXPECT_GT(bt[net.block_index("MEM0_0")].max, bt[net.block_index("MEM1_0")].max);
    EXPECT_GT(bt[net.block_index("MEM1_0")].max, bt[net.block_index("C_0")].max);
}

TEST(Thermal, NodePowersConserveBlockPower) {
    const auto net = small_stack_network(false);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    std::vector<double> p(net.blocks().size());
    for (auto& v : p) v = u(rng);
    const auto np = node_powers(net, p);
    EXPECT_NEAR(std::accumulate(np.begin(), np.end(), 0.0), std::accumulate(p.begin(), p.end(), 0.0), 1e-12);
}

TEST(Thermal, SteadyAndLongTransientAgree) {
    const auto net = two_node(3.0, 1.0, 0.01, 0.02);
    const std::vector<double> p{1.0, 0.5};
    const std::vector<LeakageFit> leak{LeakageFit{0.2, 0.01, 343.15}, LeakageFit{}};
    const auto ss = steady_state(net, p, leak);
    ThermalState s = ambient_state(net);
    TransientSolver solver(net, 0.01, 4);
    for (int e = 0; e < 2000; ++e) s = solver.step(s, p, leak).state;
    EXPECT_NEAR(s.temperatures[0], ss.temperatures[0], 1e-3);
    EXPECT_NEAR(s.temperatures[1], ss.temperatures[1], 1e-3);
}

TEST(Thermal, StepReportsInjectedPower) {
    const auto net = two_node(3.0, 1.0, 0.1, 0.1);
    const std::vector<double> p{1.0, 0.5};
    const std::vector<LeakageFit> leak{LeakageFit{0.2, 0.01, 343.15}, LeakageFit{0.1, 0.02, 343.15}};
    TransientSolver solver(net, 1e-3, 5);
    const auto r = solver.step(ambient_state(net), p, leak);
    ASSERT_EQ(r.static_power.size(), 2u);
    // averaged over substeps that each start warmer than the last
    EXPECT_GT(r.static_power[0], leak[0].at(kAmb));
    EXPECT_LT(r.static_power[0], leak[0].at(r.state.temperatures[0]));
    EXPECT_NEAR(r.injected_power, 1.5 + r.static_power[0] + r.static_power[1], 1e-12);
}

TEST(Thermal, RunawayIsDetected) {
    const auto net = one_node(1.0, 1.0);
    const std::vector<double> p{20.0};
    const std::vector<LeakageFit> leak{LeakageFit{20.0, 0.05, 343.15}};
    EXPECT_THROW(steady_state(net, p, leak), ThermalRunaway);
    TransientSolver solver(net, 0.1, 10);
    ThermalState s = ambient_state(net);
    EXPECT_THROW(
        {
            for (int e = 0; e < 1000; ++e) s = solver.step(s, p, leak).state;
        },
        ThermalRunaway);
}

TEST(Thermal, ValidationRejectsBrokenNetworks) {
    EXPECT_THROW(ThermalNetwork::from_parts({{0, 1, -1.0}}, {0, 1}, {1, 1}, {}, kAmb), ValidationError);
    EXPECT_THROW(ThermalNetwork::from_parts({}, {0.0}, {1.0}, {}, kAmb), ValidationError);  // floating node
    EXPECT_THROW(ThermalNetwork::from_parts({}, {1.0}, {0.0}, {}, kAmb), ValidationError);
    EXPECT_THROW(ThermalNetwork::from_parts({{0, 5, 1.0}}, {1, 1}, {1, 1}, {}, kAmb), ValidationError);
}

TEST(Thermal, BlockLookupAndDump) {
    const auto net = two_node(3.0, 1.0, 0.1, 0.2);
    EXPECT_EQ(net.block_index("cold"), 1);
    EXPECT_THROW(net.block_index("warm"), InvalidArgument);
    const auto d = net.dump();
    EXPECT_NE(d.find("G 0 1 -3.000000000e+00"), std::string::npos);
    EXPECT_NE(d.find("G 1 1 4.000000000e+00"), std::string::npos);
    EXPECT_NE(d.find("C 1 2.000000000e-01"), std::string::npos);
}

TEST(Thermal, NonFiniteTemperatureNamesTheNode) {
    const auto net = two_node(1.0, 1.0, 1.0, 1.0);
    const std::vector<double> p{std::nan(""), 0.0};
    try {
        transient_step(net, ambient_state(net), p, {}, 1e-3, 2);
        FAIL() << "expected an error";
    } catch (const NumericalError& e) {
        EXPECT_NE(std::string(e.what()).find(net.node_label(0)), std::string::npos) << e.what();
    } catch (const InvalidArgument&) {
        // rejected at the input boundary before stepping
    }
}

TEST(Thermal, BlockMeanAndMaxOverCells) {
    const auto net = ThermalNetwork::from_parts({{0, 1, 1.0}}, {1.0, 1.0}, {1.0, 1.0},
                                                {BlockCells{"b", 0, 0, {{0, 0.5}, {1, 0.5}}}}, kAmb);
    ThermalState s;
    s.temperatures = {350.0, 352.0};
    const auto bt = block_temperature(net, s, "b");
    EXPECT_DOUBLE_EQ(bt.mean, 351.0);
    EXPECT_DOUBLE_EQ(bt.max, 352.0);
}

TEST(Thermal, SteadyStateBalancesInjectedPower) {
    const auto net = small_stack_network(false);
    std::vector<double> p(net.blocks().size());
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (double& x : p) x = u(rng);
    const auto s = steady_state(net, p, {});
    double out = 0.0;
    for (int i = 0; i < net.node_count(); ++i)
        out += net.ambient_coupling()[i] * (s.temperatures[i] - kAmb);
    const double in = std::accumulate(p.begin(), p.end(), 0.0);
    EXPECT_NEAR(out, in, 1e-6 * in);
}

TEST(Thermal, SubstepRefinementConverges) {
    const auto net = small_stack_network(false);
    std::vector<double> p(net.blocks().size(), 0.0);
    for (std::size_t b = 0; b < p.size(); ++b)
        if (net.blocks()[b].name.rfind("C_", 0) == 0) p[b] = 8.0;
    std::vector<LeakageFit> leak(p.size(), LeakageFit{0.3, 0.017, 343.15});
    TransientSolver coarse(net, 1e-3, 32);
    TransientSolver fine(net, 1e-3, 64);
    ThermalState a = ambient_state(net), b = a;
    for (int e = 0; e < 50; ++e) {
        a = coarse.step(a, p, leak).state;
        b = fine.step(b, p, leak).state;
    }
    const auto ta = block_temperatures(net, a), tb = block_temperatures(net, b);
    for (std::size_t i = 0; i < ta.size(); ++i) EXPECT_LT(std::abs(ta[i].max - tb[i].max), 0.01);
}

TEST(Thermal, GridRefinementChangesPeakRiseLittle) {
    StackConfig c;
    c.kind = StackKind::Stacked3D;
    c.cores = 4;
    c.mem_layers = 4;
    c.mem_banks_x = c.mem_banks_y = 4;
    c.bank_width = c.bank_height = 2e-3;
    const auto stacks = build_stack(c);
    const AmbientSpec amb{kAmb, 0.25, 20.0};
    auto peak_rise = [&](int n) {
        const auto net = ThermalNetwork::build(stacks, n, n, amb);
        std::vector<double> p(net.blocks().size(), 0.1);
        for (std::size_t b = 0; b < p.size(); ++b)
            if (net.blocks()[b].name.rfind("C_", 0) == 0) p[b] = 6.0;
        const auto s = steady_state(net, p, {});
        double peak = 0.0;
        for (const auto& bt : block_temperatures(net, s)) peak = std::max(peak, bt.max - kAmb);
        return peak;
    };
    const double r8 = peak_rise(8), r16 = peak_rise(16);
    EXPECT_LT(std::abs(r8 - r16) / r16, 0.05) << r8 << " vs " << r16;
}

TEST(Thermal, NodeCountIsGridLayersTimesCellsPlusPackage) {
    StackConfig c;
    c.kind = StackKind::Stacked3D;
    c.cores = 4;
    c.mem_layers = 8;
    c.mem_banks_x = c.mem_banks_y = 4;
    c.bank_width = c.bank_height = 2e-3;
    const auto net = ThermalNetwork::build(build_stack(c), 8, 8, AmbientSpec{});
    int grid_layers = 0;
    for (int l = 0; l < 64; ++l)
        if (!net.layer_nodes(0, l).empty()) ++grid_layers;
    // nine active layers, each with an interface layer above it
    EXPECT_EQ(grid_layers, 18);
    EXPECT_EQ(net.node_count(), grid_layers * 64 + 2);
}

TEST(Thermal, SpreaderLayerFoldsIntoThePackageNode) {
    const auto s = load_stack(testsupport::scenario("3dstack/3dstack.lcf"));
    ASSERT_EQ(s.layers.size(), 9u);
    const auto net = ThermalNetwork::build({s}, 8, 8, AmbientSpec{});
    EXPECT_EQ(net.node_count(), 8 * 64 + 2);
}
