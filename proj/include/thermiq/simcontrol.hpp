#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace thermiq {

struct RunSummary {
    std::string name;
    std::string status;  // completed | timeout | failed
    long epochs = 0;
    double peak_core_k = 0.0;
    double peak_memory_k = 0.0;  // memory banks and logic layer
    double energy_j = 0.0;
    int throttle_cycles = 0;
    std::vector<double> response_times;  // s, in completion order
    std::string error;
};

/// Metrics from the trace files of one run directory alone. Throws
/// IntegrityError when traces are missing, truncated or misaligned.
RunSummary collect_metrics(const std::filesystem::path& run_dir);

std::string format_summary(const RunSummary& s);
std::string summaries_csv(const std::vector<RunSummary>& runs);

struct BatchRun {
    std::string name;
    std::vector<std::pair<std::string, std::string>> overrides;
};

/// Text format:
///   base = sim.cfg
///   out = runs/
///   jobs = 2
///   [matrix]              # cartesian product, comma-separated values
///   dtm.enabled = yes, no
///   [run <name>]          # explicit run, any number
///   sim.max_time_ms = 50
struct BatchSpec {
    std::filesystem::path base;
    std::filesystem::path out_root;
    int jobs = 1;
    std::vector<BatchRun> runs;

    static BatchSpec parse(std::string_view text, const std::string& source, const std::filesystem::path& base_dir);
    static BatchSpec load(const std::filesystem::path& path);
};

struct BatchOptions {
    int jobs = 0;  // 0 = take the batch file's value
    bool force = false;
};

/// One folder per run under out_root plus `summary.csv` and `report.txt`.
/// Existing run folders are refused unless `force`.
std::vector<RunSummary> run_batch(const BatchSpec& spec, const BatchOptions& opt = {});

struct SmokeCase {
    std::string name;
    std::vector<std::string> tags;
    bool passed = false;
    std::string message;
    double seconds = 0.0;
};

struct SmokeOptions {
    std::vector<std::string> filter;  // a case runs when it carries every tag
    std::string fault_case;           // case name that gets a negative conductance
    std::filesystem::path work_dir = "smoke_out";
};

/// Stack kinds x DTM on/off x one or two core layers, each run twice and
/// compared byte for byte.
std::vector<SmokeCase> run_smoke_suite(const SmokeOptions& opt);
std::string format_smoke_report(const std::vector<SmokeCase>& cases);

}  // namespace thermiq
