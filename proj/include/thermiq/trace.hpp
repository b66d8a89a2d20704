#pragma once

#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace thermiq {

/// Buffered CSV trace: `time_ms` followed by one column per entry.
class TraceWriter {
public:
    TraceWriter() = default;
    TraceWriter(const std::filesystem::path& path, const std::vector<std::string>& columns);
    ~TraceWriter();
    TraceWriter(TraceWriter&&) = default;
    TraceWriter& operator=(TraceWriter&&) = default;

    void row(double time_ms, std::span<const double> values);
    void flush();

private:
    std::filesystem::path path_;
    std::size_t width_ = 0;
    std::string buffer_;
};

struct CsvTable {
    std::vector<std::string> columns;  // excluding time_ms
    std::vector<double> time_ms;
    std::vector<std::vector<double>> rows;

    /// Throws IntegrityError for unknown columns.
    int column(const std::string& name) const;
    std::vector<double> series(const std::string& name) const;
};

/// Throws IntegrityError on ragged rows, bad numbers or a missing header.
CsvTable read_csv(const std::filesystem::path& path);

enum class BlockGroup { Core, Memory, Logic };
std::string_view to_string(BlockGroup g);

struct RunMeta {
    struct StackRef {
        std::string id;
        std::string lcf;  // relative to the run directory
    };
    struct BlockRef {
        std::string name;
        int stack = 0;
        int layer = 0;
        BlockGroup group = BlockGroup::Core;
    };

    double epoch_ms = 1.0;
    double ambient_k = 318.15;
    int grid_rows = 0;
    int grid_cols = 0;
    int cores = 0;
    long epochs = 0;
    std::string status;  // completed | timeout
    std::vector<StackRef> stacks;
    std::vector<BlockRef> blocks;
};

std::string serialize_meta(const RunMeta& m);
RunMeta read_meta(const std::filesystem::path& path);

}  // namespace thermiq
