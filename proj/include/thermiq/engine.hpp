#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "thermiq/config.hpp"
#include "thermiq/floorplan.hpp"
#include "thermiq/mgmt.hpp"
#include "thermiq/perf.hpp"
#include "thermiq/power.hpp"
#include "thermiq/thermal.hpp"
#include "thermiq/trace.hpp"
#include "thermiq/workload.hpp"

namespace thermiq {

enum class InitMode { Ambient, Uniform, Warmed };

struct InitialTemperature {
    InitMode mode = InitMode::Ambient;
    double temperature = 0.0;  // K; uniform value or warmed peak
};

struct SimConfig {
    Config source;  // effective settings, paths made absolute

    StackConfig stack;
    std::vector<std::filesystem::path> stack_files;  // overrides `stack` when set
    int grid_rows = 8;
    int grid_cols = 8;
    AmbientSpec ambient;
    PackageSpec package;
    int substeps = 4;

    double epoch_dt = 1e-3;  // s
    double max_time = 0.1;   // s
    InitialTemperature init;
    std::uint64_t seed = 1;

    CorePowerParams core_power;
    MemPowerParams mem_power;
    double mem_leak_fraction = 0.40;
    double mem_leak_at = 343.15;  // K
    double mem_leak_beta = 0.02;  // 1/K
    std::optional<double> mem_dyn_ref;  // W per bank; derived from bandwidth when unset
    bool memory_power = true;

    MemConfig memory;

    std::string governor = "ondemand";
    OndemandParams ondemand;
    int initial_level = -1;  // -1 = highest
    DtmConfig dtm;
    bool dtm_core_scope = false;  // sample core blocks only
    std::vector<int> priority_list;
    std::optional<std::string> arrivals;

    Workload workload;

    static SimConfig from_config(const Config& cfg);
    static SimConfig load(const std::filesystem::path& path);
};

/// Every key `from_config` understands.
const std::vector<std::string>& known_config_keys();

SimConfig force_memory_power(SimConfig cfg, bool enabled);

struct BlockInfo {
    BlockGroup group = BlockGroup::Core;
    int core = -1;          // owning core
    double core_share = 0;  // share of the core's dynamic power (area or component fraction)
    double area_share = 0;  // share of the core's silicon area
    int mem_layer = -1;
    int bank_slot = -1;  // index into the perf bank arrays
};

/// Stacks, thermal network and the block bookkeeping that ties perf and
/// power results to network blocks.
class System {
public:
    explicit System(const SimConfig& cfg);

    const std::vector<Stack>& stacks() const { return stacks_; }
    const ThermalNetwork& network() const { return net_; }
    const std::vector<BlockInfo>& blocks() const { return info_; }
    int core_count() const { return cores_; }
    const MemConfig& memory() const { return memory_; }
    const LeakageFit& memory_fit() const { return mem_fit_; }
    double memory_dyn_ref() const { return dyn_ref_; }

    std::vector<int> core_blocks(int core) const;
    std::vector<int> memory_layer_blocks(int mem_layer) const;

    /// Per-block dynamic power for one epoch at the given levels. An
    /// inactive memory (no task running anywhere) draws nothing.
    std::vector<double> dynamic_power(const EpochPerfResult& perf, std::span<const int> levels,
                                      bool memory_active = true) const;
    /// Idle cores are power-gated; empty `core_active` means all active.
    std::vector<LeakageFit> leakage(std::span<const int> levels, std::span<const char> core_active = {},
                                    bool memory_active = true) const;

private:
    SimConfig cfg_;
    std::vector<Stack> stacks_;
    ThermalNetwork net_;
    std::vector<BlockInfo> info_;
    int cores_ = 0;
    MemConfig memory_;
    LeakageFit mem_fit_;
    double dyn_ref_ = 0.0;
};

/// Steady field of a uniform preheat over all dissipating cells, scaled so
/// the hottest node sits at `peak`.
ThermalState warm_start(const ThermalNetwork& net, double peak);

struct RunOptions {
    bool dump_network = false;
};

struct RunResult {
    long epochs = 0;
    bool completed = false;  // every task finished before max_time
    std::filesystem::path dir;
};

/// Runs the epoch loop and writes traces, metadata and a config snapshot
/// into `out_dir`.
RunResult run(const SimConfig& cfg, const std::filesystem::path& out_dir, const RunOptions& opt = {});

}  // namespace thermiq
