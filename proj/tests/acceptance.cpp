// Acceptance checks. One PASS/FAIL line per criterion; exit status is the
// number of failures.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "support.hpp"
#include "thermiq/engine.hpp"
#include "thermiq/error.hpp"
#include "thermiq/heatview.hpp"
#include "thermiq/perf.hpp"
#include "thermiq/simcontrol.hpp"
#include "thermiq/thermal.hpp"
#include "thermiq/trace.hpp"

namespace fs = std::filesystem;
using namespace thermiq;
using testsupport::scenario;
using testsupport::TempDir;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

ThermalNetwork single_node(double g_amb, double cap, double ambient) {
    return ThermalNetwork::from_parts({}, {g_amb}, {cap}, {BlockCells{"n", 0, 0, {{0, 1.0}}}}, ambient);
}

// Case-study run shared by 5, 6, 7 and 13.
const fs::path& case_study_run() {
    static TempDir dir("case_study");
    static bool done = false;
    if (!done) {
        run(SimConfig::load(scenario("case_study.cfg")), dir.path() / "run");
        done = true;
    }
    static const fs::path p = dir.path() / "run";
    return p;
}

std::vector<int> levels_row(const CsvTable& perf, std::size_t row, int cores) {
    std::vector<int> out;
    for (int c = 0; c < cores; ++c)
        out.push_back(static_cast<int>(perf.rows[row][perf.column(fmt::format("core{}_level", c))]));
    return out;
}

// Per-row maximum over the columns whose name passes `pick`.
std::vector<double> peak_of(const CsvTable& t, const std::function<bool(const std::string&)>& pick) {
    std::vector<int> cols;
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        if (pick(t.columns[i])) cols.push_back(static_cast<int>(i));
    std::vector<double> out;
    for (const auto& r : t.rows) {
        double m = -1e300;
        for (int c : cols) m = std::max(m, r[c]);
        out.push_back(m);
    }
    return out;
}

bool is_mem0(const std::string& n) { return n.rfind("MEM0_", 0) == 0; }
bool is_core(const std::string& n) { return n.rfind("MEM", 0) != 0 && n != "LOGIC"; }

// ---------------------------------------------------------------------------

Outcome ac1() {
    const auto t0 = Clock::now();
    const double amb = 318.15;
    const auto net = single_node(1.0, 1.0, amb);
    TransientSolver solver(net, 1e-3, 10);
    ThermalState s = ambient_state(net);
    const std::vector<double> p{1.0};
    double worst = 0.0;
    const std::map<int, double> probes{{100, 0.1}, {1000, 1.0}, {3000, 3.0}};
    for (int e = 1; e <= 3000; ++e) {
        s = solver.step(s, p, {}).state;
        if (auto it = probes.find(e); it != probes.end()) {
            const double exact = 1.0 - std::exp(-it->second);
            worst = std::max(worst, std::abs((s.temperatures[0] - amb) - exact) / exact);
        }
    }
    const double ss = steady_state(net, p, {}).temperatures[0];
    const double ss_err = std::abs(ss - (amb + 1.0));
    const double secs = seconds_since(t0);
    return {worst < 0.01 && ss_err < 1e-4 && secs < 1.0,
            fmt::format("max rel err {:.2e}, steady err {:.2e} K, {:.3f} s", worst, ss_err, secs)};
}

// Lower root of x = R (P + p0 exp(beta (amb + x - tref))), or nullopt.
std::optional<double> bisection_fixed_point(double r, double p, double p0, double beta, double amb, double tref) {
    auto f = [&](double x) { return x - r * (p + p0 * std::exp(beta * (amb + x - tref))); };
    // f is concave; its maximum sits where r p0 beta e^{...} = 1
    const double xstar = std::log(1.0 / (r * p0 * beta)) / beta - amb + tref;
    double hi = std::max(xstar, 0.0);
    if (f(hi) < 0.0) return std::nullopt;
    double lo = 0.0;
    if (f(lo) >= 0.0) return lo;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

Outcome ac2() {
    const auto t0 = Clock::now();
    const double amb = 318.15, tref = 343.15;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ur(0.2, 2.0), up(0.0, 40.0), up0(0.1, 30.0), ub(0.005, 0.06);
    int solved = 0, runaway = 0, bad = 0;
    double worst = 0.0;
    SteadyOptions opt;
    opt.max_iterations = 20000;
    opt.tolerance = 1e-7;
    for (int k = 0; k < 200; ++k) {
        const double r = ur(rng), p = up(rng), p0 = up0(rng), beta = ub(rng);
        const auto oracle = bisection_fixed_point(r, p, p0, beta, amb, tref);
        // the guard treats rises beyond its limit as runaway; stay below it
        if (oracle && *oracle > 150.0) continue;
        const auto net = single_node(1.0 / r, 1.0, amb);
        const std::vector<double> pw{p};
        const std::vector<LeakageFit> leak{LeakageFit{p0, beta, tref}};
        try {
            const double t = steady_state(net, pw, leak, opt).temperatures[0];
            if (!oracle) {
                ++bad;
                continue;
            }
            worst = std::max(worst, std::abs(t - (amb + *oracle)));
            ++solved;
        } catch (const ThermalRunaway&) {
            if (oracle) ++bad;
            else ++runaway;
        }
    }
    // no fixed point: at the tangent rise (25 K) the right-hand side is already 40 K
    bool forced = !bisection_fixed_point(1.0, 20.0, 20.0, 0.05, amb, tref);
    try {
        steady_state(single_node(1.0, 1.0, amb), std::vector<double>{20.0},
                     std::vector<LeakageFit>{LeakageFit{20.0, 0.05, tref}});
        forced = false;
    } catch (const ThermalRunaway&) {
    }
    const double secs = seconds_since(t0);
    return {bad == 0 && forced && worst < 1e-3 && solved > 20 && runaway > 20 && secs < 1.0,
            fmt::format("{} solved (max err {:.2e} K), {} runaway, {} mismatched, forced runaway {}, {:.3f} s",
                        solved, worst, runaway, bad, forced ? "raised" : "missed", secs)};
}

Outcome ac3() {
    const SimConfig cfg = SimConfig::load(scenario("case_study.cfg"));
    const System sys(cfg);
    // full channel bandwidth spread over the banks of each channel, all reads
    const double dt = 1e-3;
    const int bpc = sys.memory().banks_per_channel;
    const double per_bank = cfg.memory.per_channel_bandwidth / cfg.memory.access_size * dt / bpc;
    EpochPerfResult perf;
    perf.dt = dt;
    perf.cores.resize(sys.core_count());
    perf.bank_reads.assign(static_cast<std::size_t>(sys.memory().channels) * bpc, per_bank);
    perf.bank_writes.assign(perf.bank_reads.size(), 0.0);
    const std::vector<int> levels(sys.core_count(), cfg.core_power.max_level());
    const auto dyn = sys.dynamic_power(perf, levels);
    const auto leak = sys.leakage(levels);
    const auto bank = sys.memory_layer_blocks(0).front();
    const double s = leak[bank].at(343.15);
    const double d = dyn[bank];
    const double frac = s / (s + d);
    return {std::abs(frac - 0.40) <= 0.01, fmt::format("static share {:.4f} (static {:.4g} W, dynamic {:.4g} W)", frac, s, d)};
}

// Mean per-block power over a run, plus the last level row.
struct MeanPower {
    std::vector<double> dynamic;
    std::vector<int> levels;
};

MeanPower mean_power(const fs::path& dir, int cores) {
    const auto dyn = read_csv(dir / "power_dyn.csv");
    MeanPower m;
    m.dynamic.assign(dyn.columns.size(), 0.0);
    for (const auto& r : dyn.rows)
        for (std::size_t i = 0; i < r.size(); ++i) m.dynamic[i] += r[i] / dyn.rows.size();
    const auto perf = read_csv(dir / "perf.csv");
    m.levels = levels_row(perf, perf.rows.size() - 1, cores);
    return m;
}

Outcome ac4() {
    const auto t0 = Clock::now();
    TempDir dir("ext3d");
    const SimConfig cfg = SimConfig::load(scenario("ext3d.cfg"));
    run(cfg, dir / "run");
    const System sys(cfg);
    const auto mp = mean_power(dir / "run", sys.core_count());
    const auto& net = sys.network();
    const auto ss = steady_state(net, mp.dynamic, sys.leakage(mp.levels));
    const auto bt = block_temperatures(net, ss);
    const int mem_stack = net.blocks()[net.block_index(kLogicBlock)].component;
    std::map<int, double> layer_peak;  // layer index -> peak, farthest from the sink first
    for (std::size_t b = 0; b < net.blocks().size(); ++b) {
        const auto& bc = net.blocks()[b];
        if (bc.component != mem_stack) continue;
        auto [it, fresh] = layer_peak.emplace(bc.layer, bt[b].max);
        if (!fresh) it->second = std::max(it->second, bt[b].max);
    }
    bool ok = layer_peak.size() >= 3;
    std::string trail;
    double prev = 1e300;
    for (const auto& [layer, t] : layer_peak) {
        ok = ok && t < prev;
        prev = t;
        trail += fmt::format(" L{}={:.3f}", layer, t - 273.15);
    }
    const double secs = seconds_since(t0);
    return {ok && secs < 10.0, fmt::format("peaks C:{}, {:.2f} s", trail, secs)};
}

Outcome ac5() {
    const auto t0 = Clock::now();
    const auto& dir = case_study_run();
    const double secs = seconds_since(t0);
    const auto temp = read_csv(dir / "temp_max.csv");
    int in_mem0 = 0;
    for (const auto& r : temp.rows) {
        const auto hot = std::max_element(r.begin(), r.end()) - r.begin();
        if (is_mem0(temp.columns[hot])) ++in_mem0;
    }
    const double share = static_cast<double>(in_mem0) / temp.rows.size();
    return {temp.rows.size() == 300 && share >= 0.95 && secs < 60.0,
            fmt::format("{} of {} epochs in memory layer 0 ({:.1f}%), run {:.2f} s", in_mem0, temp.rows.size(),
                        100.0 * share, secs)};
}

// Throttle transitions read off the level trace: (first throttled row, first restored row).
struct Throttle {
    std::size_t on = 0;
    std::size_t off = 0;  // rows.size() when still throttled at the end
};

Outcome ac6() {
    const auto& dir = case_study_run();
    const SimConfig cfg = SimConfig::load(scenario("case_study.cfg"));
    const auto perf = read_csv(dir / "perf.csv");
    const auto temp = read_csv(dir / "temp_max.csv");
    const int cores = 4;
    const auto hot = peak_of(temp, [](const std::string&) { return true; });

    // independent hysteresis replay: row e's decision takes effect in row e+1
    bool throttled = false;
    std::vector<char> expect_throttled(hot.size(), 0);
    for (std::size_t e = 0; e + 1 < hot.size(); ++e) {
        if (!throttled && hot[e] > cfg.dtm.trigger_temp) throttled = true;
        else if (throttled && hot[e] < cfg.dtm.resume_temp) throttled = false;
        expect_throttled[e + 1] = throttled;
    }

    int cycles = 0, off_crossing = 0, restore_mismatch = 0, state_mismatch = 0;
    std::vector<int> before;
    for (std::size_t e = 0; e < perf.rows.size(); ++e) {
        const auto lv = levels_row(perf, e, cores);
        const bool low = std::all_of(lv.begin(), lv.end(), [&](int l) { return l == cfg.dtm.min_level; });
        if (low != static_cast<bool>(expect_throttled[e])) ++state_mismatch;
        if (e == 0) continue;
        const auto prev = levels_row(perf, e - 1, cores);
        if (lv == prev) continue;
        const bool crossed = expect_throttled[e] != expect_throttled[e - 1];
        if (!crossed) ++off_crossing;
        if (expect_throttled[e] && !expect_throttled[e - 1]) before = prev;
        if (!expect_throttled[e] && expect_throttled[e - 1]) {
            ++cycles;
            if (lv != before) ++restore_mismatch;
        }
    }
    return {cycles >= 3 && off_crossing == 0 && restore_mismatch == 0 && state_mismatch == 0,
            fmt::format("{} throttle/restore cycles, {} level changes off a crossing, {} bad restores, "
                        "{} rows disagreeing with the hysteresis replay",
                        cycles, off_crossing, restore_mismatch, state_mismatch)};
}

Outcome ac7() {
    const auto& dir = case_study_run();
    const auto perf = read_csv(dir / "perf.csv");
    const auto temp = read_csv(dir / "temp_max.csv");
    const auto core = peak_of(temp, is_core);
    const auto mem0 = peak_of(temp, is_mem0);
    const int top = static_cast<int>(perf.rows[0][perf.column("core0_level")]);
    // first epochs of every throttled stretch
    std::vector<std::size_t> starts;
    for (std::size_t e = 1; e < perf.rows.size(); ++e) {
        const int l = static_cast<int>(perf.rows[e][perf.column("core0_level")]);
        const int p = static_cast<int>(perf.rows[e - 1][perf.column("core0_level")]);
        if (l < p && p == top) starts.push_back(e);
    }
    auto lag = [](const std::vector<double>& peak, std::size_t t0) -> long {
        for (std::size_t j = t0; j < peak.size(); ++j)
            if (peak[j] < peak[j - 1]) return static_cast<long>(j - t0) + 1;
        return -1;
    };
    bool ok = !starts.empty();
    std::string trail;
    for (auto t0 : starts) {
        const long lc = lag(core, t0), lm = lag(mem0, t0);
        ok = ok && lc == 1 && lm >= 2;
        trail += fmt::format(" [t={} core {} mem0 {}]", t0 + 1, lc, lm);
    }
    return {ok, fmt::format("lags in epochs:{}", trail)};
}

Outcome ac8() {
    const SimConfig base = SimConfig::load(scenario("coupling.cfg"));
    TempDir dir("coupling");
    std::vector<double> gaps;
    std::string trail;
    bool higher = true;
    for (int w = 0; w < 4; ++w) {
        SimConfig cfg = base;
        cfg.workload = load_workload(scenario(fmt::format("coupling_w{}.wl", w)));
        double peak[2] = {0.0, 0.0};
        for (int on = 0; on < 2; ++on) {
            const SimConfig c = force_memory_power(cfg, on == 1);
            const fs::path out = dir / fmt::format("w{}_{}", w, on);
            run(c, out);
            const System sys(c);
            const auto mp = mean_power(out, sys.core_count());
            const auto ss = steady_state(sys.network(), mp.dynamic, sys.leakage(mp.levels));
            const auto bt = block_temperatures(sys.network(), ss);
            for (int k = 0; k < sys.core_count(); ++k)
                for (int b : sys.core_blocks(k)) peak[on] = std::max(peak[on], bt[b].max);
        }
        higher = higher && peak[1] > peak[0];
        gaps.push_back(peak[1] - peak[0]);
        trail += fmt::format(" w{}={:.3f}K", w, gaps.back());
    }
    const bool nondecreasing = std::is_sorted(gaps.begin(), gaps.end());
    return {higher && nondecreasing, fmt::format("steady core-peak gap on-off:{}", trail)};
}

double mean_ips(const fs::path& dir, int core) {
    const auto s = read_csv(dir / "perf.csv").series(fmt::format("core{}_ips", core));
    return std::accumulate(s.begin(), s.end(), 0.0) / s.size();
}

Outcome ac9() {
    TempDir dir("contention");
    SimConfig pair = SimConfig::load(scenario("contention.cfg"));
    SimConfig solo = pair;
    solo.workload = load_workload(scenario("contention_solo.wl"));
    run(pair, dir / "pair");
    run(solo, dir / "solo");
    const double s = mean_ips(dir / "solo", 0);
    const double p0 = mean_ips(dir / "pair", 0), p1 = mean_ips(dir / "pair", 1);
    const double red = 1.0 - p0 / s;
    return {p0 < s && p1 < s && std::abs(red - 0.16) <= 0.02,
            fmt::format("solo {:.4g} IPS, pair {:.4g}/{:.4g} IPS, reduction {:.2f}%", s, p0, p1, 100.0 * red)};
}

Outcome ac10() {
    TempDir dir("dvfs");
    auto ratio = [&](const std::string& tag, double mpki) {
        Config c;
        c.set("governor", "static");
        c.set("system.kind", "2d-ext");
        c.set("system.cores", "1");
        c.set("system.mem_layers", "1");
        c.set("system.banks", "2x2");
        c.set("power.vf_table", "1@0.8, 4@1.2");
        c.set("dtm.enabled", "no");
        c.set("sim.max_time_ms", "10");
        double ips[2];
        for (int level = 0; level < 2; ++level) {
            Config cl = c;
            cl.set("sim.initial_level", std::to_string(level));
            SimConfig cfg = SimConfig::from_config(cl);
            cfg.workload = parse_workload(fmt::format("app a\nphase 1e12 1.0 {} 0.7 1.0\ntask a\n", mpki));
            const fs::path out = dir / fmt::format("{}_{}", tag, level);
            run(cfg, out);
            ips[level] = mean_ips(out, 0);
        }
        return ips[1] / ips[0];
    };
    const double compute = ratio("compute", 0.0);
    const double memory = ratio("memory", 30.0);
    return {std::abs(compute - 4.0) <= 1e-6 && memory < 4.0,
            fmt::format("compute-bound {:.9f}, memory-bound {:.4f}", compute, memory)};
}

// Random connected network with positive conductances and a sink coupling.
ThermalNetwork random_network(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> ug(0.05, 5.0), uc(0.01, 2.0);
    std::vector<Conductance> edges;
    for (int i = 1; i < n; ++i) edges.push_back({static_cast<int>(rng() % i), i, ug(rng)});
    for (int k = 0; k < n; ++k) {
        const int a = static_cast<int>(rng() % n), b = static_cast<int>(rng() % n);
        if (a != b) edges.push_back({std::min(a, b), std::max(a, b), ug(rng)});
    }
    std::vector<double> amb(n, 0.0), cap(n);
    for (int i = 0; i < n; ++i) cap[i] = uc(rng);
    amb[rng() % n] = ug(rng);
    if (rng() % 2) amb[rng() % n] += ug(rng);
    std::vector<BlockCells> blocks;
    for (int i = 0; i < n; ++i) blocks.push_back({fmt::format("b{}", i), 0, 0, {{i, 1.0}}});
    return ThermalNetwork::from_parts(std::move(edges), std::move(amb), std::move(cap), std::move(blocks), 318.15);
}

Outcome ac11() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> up(0.0, 3.0);
    double worst_energy = 0.0, worst_inject = 0.0;
    int mono_fail = 0, contention_fail = 0;

    for (int k = 0; k < 50; ++k) {
        const int n = 3 + static_cast<int>(rng() % 10);
        const auto net = random_network(rng, n);
        std::vector<double> p1(n), p2(n);
        for (int i = 0; i < n; ++i) {
            p1[i] = up(rng);
            p2[i] = p1[i] + (rng() % 3 == 0 ? 0.0 : up(rng));
        }
        std::vector<LeakageFit> leak(n);
        for (int i = 0; i < n; ++i) leak[i] = LeakageFit{0.05 * up(rng), 0.01, 343.15};

        // energy balance over one backward Euler step without leakage
        const double h = 1e-3;
        TransientSolver solver(net, h, 1);
        const ThermalState s0 = ambient_state(net);
        const auto r = solver.step(s0, p1, {});
        double stored = 0.0, out = 0.0, in = 0.0;
        for (int i = 0; i < n; ++i) {
            stored += net.capacitance()[i] * (r.state.temperatures[i] - s0.temperatures[i]);
            out += h * net.ambient_coupling()[i] * (r.state.temperatures[i] - net.ambient_temperature());
            in += h * p1[i];
        }
        worst_energy = std::max(worst_energy, std::abs(in - out - stored) / in);

        // injected power equals dynamic plus the reported static power
        TransientSolver sub(net, h, 4);
        const auto rl = sub.step(r.state, p1, leak);
        const double expect = std::accumulate(p1.begin(), p1.end(), 0.0) +
                              std::accumulate(rl.static_power.begin(), rl.static_power.end(), 0.0);
        worst_inject = std::max(worst_inject, std::abs(rl.injected_power - expect) / expect);

        // more power anywhere never cools any node
        const auto a = steady_state(net, p1, {}), b = steady_state(net, p2, {});
        const auto ta = solver.step(s0, p1, {}).state, tb = solver.step(s0, p2, {}).state;
        for (int i = 0; i < n; ++i) {
            if (b.temperatures[i] < a.temperatures[i] - 1e-9) ++mono_fail;
            if (tb.temperatures[i] < ta.temperatures[i] - 1e-12) ++mono_fail;
        }
    }

    // more co-runners or more misses never raise per-thread progress
    MemConfig mem;
    mem.channels = 1;
    auto app_for = [](double mpki) {
        auto a = std::make_shared<AppSpec>();
        a->name = "m";
        a->phases.push_back(Phase{1e12, 1.0, mpki, 0.7, 1.0});
        return a;
    };
    for (double mpki : {1.0, 10.0, 40.0, 120.0}) {
        double prev = 1e300;
        for (int threads = 1; threads <= 4; ++threads) {
            std::vector<CoreRunState> st(threads);
            for (int i = 0; i < threads; ++i) {
                st[i].core_id = i;
                st[i].app = app_for(mpki);
                st[i].frequency_ghz = 3.6;
                st[i].channels = {0};
            }
            const double got = epoch_execute(st, mem, 1e-3).cores[0].instructions;
            if (got > prev) ++contention_fail;
            prev = got;
        }
    }
    for (int threads : {1, 3}) {
        double prev = 1e300;
        for (double mpki = 0.0; mpki <= 200.0; mpki += 10.0) {
            std::vector<CoreRunState> st(threads);
            for (int i = 0; i < threads; ++i) {
                st[i].core_id = i;
                st[i].app = app_for(mpki);
                st[i].frequency_ghz = 2.0;
                st[i].channels = {0};
            }
            const double got = epoch_execute(st, mem, 1e-3).cores[0].instructions;
            if (got > prev) ++contention_fail;
            prev = got;
        }
    }
    const double secs = seconds_since(t0);
    return {worst_energy <= 1e-6 && worst_inject <= 1e-9 && mono_fail == 0 && contention_fail == 0 && secs < 30.0,
            fmt::format("energy {:.1e}, injection {:.1e}, monotonicity violations {}, contention violations {}, {:.2f} s",
                        worst_energy, worst_inject, mono_fail, contention_fail, secs)};
}

Outcome ac12() {
    TempDir dir("smoke");
    SmokeOptions opt;
    opt.work_dir = dir / "work";
    const auto t0 = Clock::now();
    const auto cases = run_smoke_suite(opt);
    const double secs = seconds_since(t0);
    int failed = 0;
    std::string names;
    for (const auto& c : cases)
        if (!c.passed) {
            ++failed;
            names += " " + c.name + ": " + c.message;
        }
    return {cases.size() == 16 && failed == 0 && secs < 300.0,
            fmt::format("{} cases, {} failed, {:.1f} s{}", cases.size(), failed, secs, names)};
}

Outcome ac13() {
    const auto& dir = case_study_run();
    TempDir out("frames");
    RenderConfig rc;
    rc.sampling_every = 25;
    const auto a = render_run(dir, rc, out / "a");
    const auto b = render_run(dir, rc, out / "b");
    int differing = 0, files = 0;
    for (const auto& e : fs::directory_iterator(out / "a")) {
        ++files;
        const fs::path other = out / "b" / e.path().filename();
        if (!fs::exists(other) || testsupport::slurp(e.path()) != testsupport::slurp(other)) ++differing;
    }
    const bool same_count = files == static_cast<int>(std::distance(fs::directory_iterator(out / "b"), {}));

    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> ut(250.0, 450.0);
    int violations = 0;
    const auto& cm = colormap();
    for (int i = 0; i < 10000; ++i) {
        double t1 = ut(rng), t2 = ut(rng);
        if (t1 > t2) std::swap(t1, t2);
        const int i1 = color_index(t1, 300.0, 400.0), i2 = color_index(t2, 300.0, 400.0);
        // hotter never maps lower on the ramp, whose red channel rises and blue falls
        if (i1 > i2 || cm[i1].r > cm[i2].r || cm[i1].b < cm[i2].b) ++violations;
    }
    return {a.frames > 0 && a.frames == b.frames && same_count && differing == 0 && violations == 0,
            fmt::format("{} frames, {} files differ, {} colormap violations in 10000 pairs", a.frames, differing,
                        violations)};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"AC1 analytic RC oracle", ac1},
        {"AC2 leakage fixed point", ac2},
        {"AC3 memory leakage calibration", ac3},
        {"AC4 3D-ext layer gradient", ac4},
        {"AC5 hotspot in memory layer 0", ac5},
        {"AC6 DTM oscillation and hysteresis", ac6},
        {"AC7 hotspot lag", ac7},
        {"AC8 2.5D thermal coupling", ac8},
        {"AC9 memory contention", ac9},
        {"AC10 DVFS sensitivity", ac10},
        {"AC11 conservation and monotonicity", ac11},
        {"AC12 smoke suite", ac12},
        {"AC13 heatview determinism", ac13},
    };
    int failures = 0;
    for (const auto& [name, fn] : criteria) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failures;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    }
    std::cout << fmt::format("{} of {} criteria passed\n", criteria.size() - failures, criteria.size());
    return failures;
}
