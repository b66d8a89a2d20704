#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace thermiq {

struct Phase {
    double instructions = 0.0;
    double cpi_base = 1.0;            // cycles / instruction without memory stalls
    double mem_per_kilo_instr = 0.0;  // memory accesses per 1000 instructions
    double read_fraction = 1.0;
    double activity = 1.0;  // switching activity while computing

    void validate() const;
};

struct AppSpec {
    std::string name;
    std::vector<Phase> phases;

    double total_instructions() const;
    void validate() const;
};

/// One thread instance of an app. Empty `channels` means all channels.
struct TaskSpec {
    std::string app;
    double arrival = 0.0;  // s
    std::vector<int> channels;
};

struct Workload {
    std::vector<AppSpec> apps;
    std::vector<TaskSpec> tasks;

    const AppSpec& app(std::string_view name) const;
    void validate() const;
};

/// Line format:
///   app <name>
///   phase <instructions> <cpi> <mpki> <read_fraction> <activity>
///   task <app> [x<count>] [at=<ms>] [channels=<a,b,...>]
/// `phase` lines attach to the most recent `app`.
Workload parse_workload(std::string_view text, const std::string& source = "<workload>");
Workload load_workload(const std::filesystem::path& path);

std::string serialize_workload(const Workload& w);

}  // namespace thermiq
