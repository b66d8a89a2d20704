#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace thermiq {

struct DtmConfig {
    bool enabled = true;
    double trigger_temp = 353.15;  // K
    double resume_temp = 351.15;   // K
    int min_level = 0;

    void validate() const;
};

struct GovernorState {
    std::vector<int> levels;
    std::vector<int> saved;  // pre-throttle levels, valid while throttled
    bool throttled = false;
};

struct OndemandParams {
    double up_threshold = 0.80;
    double down_threshold = 0.20;
};

/// Jump to max above `up`, one step down below `down`. No-op while throttled.
std::vector<int> ondemand_update(std::span<const double> utilizations, const GovernorState& state,
                                 int max_level, const OndemandParams& params = {});

GovernorState dtm_update(double max_temp, const GovernorState& gov, const DtmConfig& cfg);

/// First free core in priority order, nullopt when every core is busy.
std::optional<int> map_task(std::span<const char> free_cores, std::span<const int> priority_list);

enum class ArrivalMode { Uniform, Poisson, Explicit };

struct ArrivalProcess {
    ArrivalMode mode = ArrivalMode::Explicit;
    double period = 0.0;  // s
    double rate = 0.0;    // 1/s
    std::uint64_t seed = 0;
    std::vector<double> times;  // s
    int task_count = 1;         // task templates, cycled through in order

    void validate() const;
};

struct Arrival {
    double time = 0.0;
    int task = 0;  // index into the task templates
};

std::vector<Arrival> generate_arrivals(const ArrivalProcess& proc, double horizon);

/// `uniform:<ms>`, `poisson:<rate>:<seed>`, `explicit:<file>` (one time in ms
/// per line). Relative files resolve against `base_dir`.
ArrivalProcess parse_arrivals(std::string_view spec, const std::filesystem::path& base_dir = {});

// Pluggable decision function ------------------------------------------------

struct PolicyInput {
    long epoch = 0;
    std::span<const double> utilization;        // per core
    std::span<const double> block_temperature;  // per block max, K
    const GovernorState* governor = nullptr;
    int max_level = 0;
};

struct PolicyDecision {
    std::vector<int> levels;
    std::optional<std::vector<int>> priority_list;  // replaces the mapping order
};

using Policy = std::function<PolicyDecision(const PolicyInput&)>;

/// Registers a policy under `custom:<name>`. Thread-safe.
void register_policy(const std::string& name, Policy policy);

/// `ondemand`, `static` or `custom:<name>`.
Policy make_policy(std::string_view spec, const OndemandParams& ondemand = {});

}  // namespace thermiq
