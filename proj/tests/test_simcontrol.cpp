#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>

#include <fmt/format.h>

#include "support.hpp"
#include "thermiq/engine.hpp"
#include "thermiq/error.hpp"
#include "thermiq/simcontrol.hpp"

using namespace thermiq;
using testsupport::TempDir;
using testsupport::write_text;

namespace {

const char* kBase = R"(workload = w.wl
governor = ondemand
[system]
kind = 3d-stacked
cores = 2
core_size = 3e-3x3e-3
banks = 2x2
bank_size = 1.5e-3x1.5e-3
mem_layers = 2
[thermal]
grid = 4x4
[memory]
channels = 2
[dtm]
enabled = no
[sim]
max_time_ms = 8
)";

void write_inputs(const TempDir& d) {
    write_text(d / "base.cfg", kBase);
    write_text(d / "w.wl", "app a\nphase 1e12 1 5 0.7 0.9\ntask a x2\n");
    write_text(d / "m.wl", "app m\nphase 1e12 1 40 0.7 0.5\ntask m x2\n");
}

}  // namespace

TEST(BatchSpec, MatrixIsACartesianProduct) {
    TempDir d("spec");
    const auto s = BatchSpec::parse(
        "base = base.cfg\nout = runs\njobs = 3\n[matrix]\ndtm.enabled = yes, no\nworkload = w.wl, m.wl\n"
        "[run extra]\nsim.max_time_ms = 2\n",
        "b.cfg", d.path());
    EXPECT_EQ(s.jobs, 3);
    EXPECT_EQ(s.base, d / "base.cfg");
    ASSERT_EQ(s.runs.size(), 5u);
    std::vector<std::string> names;
    for (const auto& r : s.runs) names.push_back(r.name);
    EXPECT_NE(std::find(names.begin(), names.end(), "dtm.enabled=no_workload=m"), names.end());
    EXPECT_NE(std::find(names.begin(), names.end(), "extra"), names.end());
    // path values become absolute against the batch file
    for (const auto& r : s.runs)
        for (const auto& [k, v] : r.overrides)
            if (k == "workload") EXPECT_TRUE(std::filesystem::path(v).is_absolute());
}

TEST(BatchSpec, RejectsUnknownKeysAndDuplicates) {
    EXPECT_THROW(BatchSpec::parse("base = b.cfg\n[matrix]\nsim.speed = 1, 2\n", "b.cfg", "/tmp"), ConfigError);
    EXPECT_THROW(BatchSpec::parse("base = b.cfg\n[run x]\nsim.max_time_ms = 1\n[run x]\nseed = 2\n", "b.cfg", "/tmp"),
                 Error);
    EXPECT_THROW(BatchSpec::parse("out = r\n", "b.cfg", "/tmp"), ConfigError);
}

TEST(Batch, RunsIsolateFailuresAndWriteSummaries) {
    TempDir d("batch");
    write_inputs(d);
    write_text(d / "b.cfg",
               "base = base.cfg\nout = runs\njobs = 2\n[matrix]\nworkload = w.wl, m.wl\n"
               "[run broken]\nmemory.channels = 0\n");
    const auto runs = run_batch(BatchSpec::load(d / "b.cfg"));
    ASSERT_EQ(runs.size(), 3u);
    int failed = 0;
    for (const auto& r : runs) {
        if (r.status == "failed") {
            ++failed;
            EXPECT_EQ(r.name, "broken");
            EXPECT_TRUE(std::filesystem::exists(d / "runs" / r.name / "error.txt"));
        } else {
            EXPECT_EQ(r.epochs, 8);
            EXPECT_TRUE(std::filesystem::exists(d / "runs" / r.name / "summary.txt"));
        }
    }
    EXPECT_EQ(failed, 1);
    EXPECT_TRUE(std::filesystem::exists(d / "runs" / "summary.csv"));
    EXPECT_TRUE(std::filesystem::exists(d / "runs" / "report.txt"));
    // existing folders are refused without force
    EXPECT_THROW(run_batch(BatchSpec::load(d / "b.cfg")), Error);
    EXPECT_NO_THROW(run_batch(BatchSpec::load(d / "b.cfg"), BatchOptions{1, true}));
}

TEST(Batch, ParallelMatchesSerial) {
    TempDir d("par");
    write_inputs(d);
    write_text(d / "s.cfg", "base = base.cfg\nout = serial\n[matrix]\nworkload = w.wl, m.wl\ndtm.enabled = yes, no\n");
    write_text(d / "p.cfg", "base = base.cfg\nout = par\n[matrix]\nworkload = w.wl, m.wl\ndtm.enabled = yes, no\n");
    run_batch(BatchSpec::load(d / "s.cfg"), BatchOptions{1, false});
    run_batch(BatchSpec::load(d / "p.cfg"), BatchOptions{4, false});
    EXPECT_EQ(testsupport::slurp(d / "serial" / "summary.csv"), testsupport::slurp(d / "par" / "summary.csv"));
    for (const auto& e : std::filesystem::directory_iterator(d / "serial"))
        if (e.is_directory())
            EXPECT_EQ(testsupport::slurp(e.path() / "temp_max.csv"),
                      testsupport::slurp(d / "par" / e.path().filename() / "temp_max.csv"));
}

TEST(Metrics, IndependentRecomputation) {
    TempDir d("metrics");
    write_inputs(d);
    const auto cfg = SimConfig::load(d / "base.cfg");
    run(cfg, d / "r");
    const auto m = collect_metrics(d / "r");
    const auto dyn = read_csv(d / "r" / "power_dyn.csv"), st = read_csv(d / "r" / "power_static.csv");
    double energy = 0;
    for (std::size_t e = 0; e < dyn.rows.size(); ++e)
        for (std::size_t b = 0; b < dyn.columns.size(); ++b) energy += (dyn.rows[e][b] + st.rows[e][b]) * 1e-3;
    EXPECT_NEAR(m.energy_j, energy, 1e-9 * energy);
    const auto temp = read_csv(d / "r" / "temp_max.csv");
    double core_peak = 0;
    for (const auto& name : {"C_0", "C_1"})
        for (double t : temp.series(name)) core_peak = std::max(core_peak, t);
    EXPECT_DOUBLE_EQ(m.peak_core_k, core_peak);
}

TEST(Metrics, DamagedRunsRaiseIntegrityErrors) {
    TempDir d("damaged");
    write_inputs(d);
    const auto cfg = SimConfig::load(d / "base.cfg");
    run(cfg, d / "r");
    auto corrupt = [&](const std::string& file, const std::function<std::string(std::string)>& f) {
        const auto dir = d / ("c_" + file);
        std::filesystem::copy(d / "r", dir);
        write_text(dir / file, f(testsupport::slurp(dir / file)));
        return dir;
    };
    // truncated mid-line
    EXPECT_THROW(collect_metrics(corrupt("temp_max.csv", [](std::string s) { return s.substr(0, s.size() - 7); })),
                 IntegrityError);
    // one row short
    EXPECT_THROW(collect_metrics(corrupt("perf.csv",
                                         [](std::string s) {
                                             s.pop_back();
                                             return s.substr(0, s.rfind('\n') + 1);
                                         })),
                 IntegrityError);
    // block columns disagree with the metadata
    EXPECT_THROW(collect_metrics(corrupt("power_dyn.csv",
                                         [](std::string s) {
                                             s.replace(s.find("C_0"), 3, "C_9");
                                             return s;
                                         })),
                 IntegrityError);
    std::filesystem::remove(corrupt("run.meta", [](std::string s) { return s; }) / "run.meta");
    EXPECT_THROW(collect_metrics(d / "c_run.meta"), IntegrityError);
}

TEST(Smoke, FilterSelectsByTagsAndFaultIsReported) {
    TempDir d("smoke");
    SmokeOptions opt;
    opt.work_dir = d / "w";
    opt.filter = {"3d-stacked", "dtm-on"};
    opt.fault_case = "3d-stacked/dtm-on/cl2";
    const auto cases = run_smoke_suite(opt);
    ASSERT_EQ(cases.size(), 2u);
    for (const auto& c : cases) {
        if (c.name == "3d-stacked/dtm-on/cl2") {
            EXPECT_FALSE(c.passed);
            EXPECT_NE(c.message.find("conductance"), std::string::npos) << c.message;
        } else {
            EXPECT_TRUE(c.passed) << c.message;
        }
    }
    EXPECT_NE(format_smoke_report(cases).find("FAIL"), std::string::npos);
}

TEST(Metrics, ConstantPowerIntegratesToEnergy) {
    TempDir d("energy");
    auto cfg = SimConfig::load([&] {
        write_inputs(d);
        return d / "base.cfg";
    }());
    cfg.workload = Workload{};
    cfg.max_time = 0.1;
    run(cfg, d / "r");
    const auto empty = collect_metrics(d / "r");
    EXPECT_TRUE(empty.response_times.empty());
    EXPECT_NEAR(empty.peak_core_k, cfg.ambient.ambient_temperature, 1e-6);
    EXPECT_NEAR(empty.peak_memory_k, cfg.ambient.ambient_temperature, 1e-6);
    EXPECT_EQ(empty.epochs, 100);

    auto rewrite = [&](const std::string& file, double first) {
        const auto t = read_csv(d / "r" / file);
        std::string out = "time_ms";
        for (const auto& c : t.columns) out += "," + c;
        out += "\n";
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            out += fmt::format("{}", t.time_ms[r]);
            for (std::size_t c = 0; c < t.columns.size(); ++c) out += c == 0 ? fmt::format(",{}", first) : ",0";
            out += "\n";
        }
        write_text(d / "r" / file, out);
    };
    rewrite("power_dyn.csv", 0.75);
    rewrite("power_static.csv", 0.25);
    EXPECT_NEAR(collect_metrics(d / "r").energy_j, 0.1, 1e-9);
}
