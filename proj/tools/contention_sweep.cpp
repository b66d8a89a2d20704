// Brute-force sweep behind the shipped contention calibration app: one
// memory channel, two identical memory-bound threads against a solo run.
// Prints the per-thread instruction loss for each memory intensity.
#include <cmath>
#include <iostream>
#include <memory>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "thermiq/perf.hpp"

using namespace thermiq;

namespace {

double retired(int threads, double mpki, const MemConfig& mem, double ghz) {
    auto app = std::make_shared<AppSpec>();
    app->name = "probe";
    app->phases.push_back(Phase{1e12, 1.0, mpki, 0.7, 1.0});
    std::vector<CoreRunState> states(threads);
    for (int i = 0; i < threads; ++i) {
        states[i].core_id = i;
        states[i].app = app;
        states[i].frequency_ghz = ghz;
        states[i].channels = {0};
    }
    return epoch_execute(states, mem, 1e-3).cores[0].instructions;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"contention calibration sweep"};
    MemConfig mem;
    mem.channels = 1;
    mem.banks_per_channel = 4;
    mem.access_latency = 45e-9;
    mem.mlp = 4.0;
    double ghz = 3.6, lo = 40.0, hi = 160.0, step = 1.0, target = 0.16;
    app.add_option("--latency-ns", mem.access_latency, "uncontended latency")->transform([](std::string s) {
        return std::to_string(std::stod(s) * 1e-9);
    });
    app.add_option("--mlp", mem.mlp, "memory-level parallelism");
    app.add_option("--ghz", ghz, "core frequency, GHz");
    app.add_option("--from", lo, "first mpki");
    app.add_option("--to", hi, "last mpki");
    app.add_option("--step", step, "mpki increment");
    app.add_option("--target", target, "per-instance reduction to match");
    CLI11_PARSE(app, argc, argv);

    double best = lo, best_err = 1e9;
    std::cout << "mpki,solo_instr,pair_instr,reduction\n";
    for (double m = lo; m <= hi + 1e-9; m += step) {
        const double solo = retired(1, m, mem, ghz);
        const double pair = retired(2, m, mem, ghz);
        const double red = 1.0 - pair / solo;
        std::cout << fmt::format("{},{},{},{:.4f}\n", m, solo, pair, red);
        if (std::abs(red - target) < best_err) {
            best_err = std::abs(red - target);
            best = m;
        }
    }
    std::cerr << fmt::format("closest to {:.2f}: mpki {}\n", target, best);
}
