#pragma once

#include <memory>
#include <span>
#include <vector>

#include "thermiq/workload.hpp"

namespace thermiq {

struct MemConfig {
    int channels = 4;
    double per_channel_bandwidth = 7.6e9;  // bytes/s
    double access_latency = 50e-9;         // s, uncontended
    double access_size = 64.0;             // bytes
    int banks_per_channel = 4;
    double mlp = 1.0;  // overlapping misses; divides the exposed latency

    void validate() const;
};

/// Execution cursor of one core. A null app means idle.
struct CoreRunState {
    int core_id = 0;
    std::shared_ptr<const AppSpec> app;
    int task_id = -1;
    std::size_t phase = 0;
    double retired_in_phase = 0.0;
    double frequency_ghz = 1.0;
    int vf_level = 0;
    std::vector<int> channels;
    double carry_cycles = 0.0;  // truncated remainder credited to the next epoch
    bool finished = false;
    double completion_time = -1.0;  // s

    bool busy() const { return app && !finished; }
};

struct CorePerf {
    double instructions = 0.0;
    double budget_cycles = 0.0;  // f * dt
    double compute_cycles = 0.0;
    double stall_cycles = 0.0;
    double idle_cycles = 0.0;
    double carry_in = 0.0;
    double carry_out = 0.0;
    double accesses = 0.0;
    double activity = 0.0;  // activity-weighted compute share of the budget
    double utilization = 0.0;
    double latency_scale = 1.0;  // contention multiplier applied in pass 2
    // cursor after the epoch
    std::size_t end_phase = 0;
    double end_retired = 0.0;
    bool completed = false;            // finished during this epoch
    double completion_offset = -1.0;   // s from epoch start
};

struct EpochPerfResult {
    double dt = 0.0;
    std::vector<CorePerf> cores;      // same order as the input states
    std::vector<double> bank_reads;   // index channel * banks_per_channel + bank
    std::vector<double> bank_writes;
    std::vector<double> channel_demand;  // bytes/s requested in pass 1
    std::vector<double> channel_served;  // bytes/s after contention
};

/// Two-pass interval model: uncontended demand first, then per-channel
/// latency scaling by max(1, rho) and a second execution pass.
EpochPerfResult epoch_execute(std::span<const CoreRunState> states, const MemConfig& mem, double dt);

/// Applies one core's epoch outcome. `epoch_start` dates the completion.
CoreRunState advance(const CoreRunState& state, const CorePerf& result, double epoch_start);

/// compute_cycles / (f dt), 0 for idle cores.
double utilization(const EpochPerfResult& result, int core_index);

}  // namespace thermiq
