#include "thermiq/trace.hpp"

#include <fmt/format.h>

#include "text_util.hpp"
#include "thermiq/error.hpp"

namespace thermiq {

TraceWriter::TraceWriter(const std::filesystem::path& path, const std::vector<std::string>& columns)
    : path_(path), width_(columns.size()) {
    std::ofstream out(path_, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot create " + path_.string());
    out << "time_ms";
    for (const auto& c : columns) out << ',' << c;
    out << '\n';
}

TraceWriter::~TraceWriter() {
    try {
        flush();
    } catch (...) {
    }
}

void TraceWriter::row(double time_ms, std::span<const double> values) {
    if (values.size() != width_)
        throw InternalError(fmt::format("{}: row has {} values, expected {}", path_.string(), values.size(), width_));
    buffer_ += fmt::format("{}", time_ms);
    for (double v : values) buffer_ += fmt::format(",{}", v);
    buffer_ += '\n';
}

void TraceWriter::flush() {
    if (buffer_.empty() || path_.empty()) return;
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    out.write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
    if (!out) throw Error("write failed for " + path_.string());
    buffer_.clear();
}

int CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return static_cast<int>(i);
    throw IntegrityError(fmt::format("trace has no column '{}'", name));
}

std::vector<double> CsvTable::series(const std::string& name) const {
    const int c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[c]);
    return out;
}

CsvTable read_csv(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw IntegrityError("missing trace " + path.string());
    const std::string text = detail::read_file(path);
    if (!text.empty() && text.back() != '\n') throw IntegrityError(path.string() + ": truncated last line");
    CsvTable t;
    int lineno = 0;
    for (auto line : detail::split_lines(text)) {
        ++lineno;
        if (line.empty()) continue;
        auto f = detail::split(line, ',');
        if (lineno == 1) {
            if (f.empty() || f[0] != "time_ms") throw IntegrityError(path.string() + ": missing time_ms header");
            for (std::size_t i = 1; i < f.size(); ++i) t.columns.emplace_back(f[i]);
            continue;
        }
        if (f.size() != t.columns.size() + 1)
            throw IntegrityError(fmt::format("{}:{}: {} fields, expected {}", path.string(), lineno, f.size(),
                                             t.columns.size() + 1));
        double v = 0.0;
        if (!detail::try_parse_double(f[0], v)) throw IntegrityError(fmt::format("{}:{}: bad time", path.string(), lineno));
        t.time_ms.push_back(v);
        std::vector<double> row(t.columns.size());
        for (std::size_t i = 1; i < f.size(); ++i)
            if (!detail::try_parse_double(f[i], row[i - 1]))
                throw IntegrityError(fmt::format("{}:{}: bad value '{}'", path.string(), lineno, f[i]));
        t.rows.push_back(std::move(row));
    }
    if (lineno == 0) throw IntegrityError(path.string() + ": empty trace");
    return t;
}

std::string_view to_string(BlockGroup g) {
    switch (g) {
    case BlockGroup::Core: return "core";
    case BlockGroup::Memory: return "memory";
    case BlockGroup::Logic: return "logic";
    }
    return "?";
}

std::string serialize_meta(const RunMeta& m) {
    std::string out;
    out += fmt::format("epoch_ms {}\nambient_k {}\ngrid {} {}\ncores {}\nepochs {}\nstatus {}\n", m.epoch_ms,
                       m.ambient_k, m.grid_rows, m.grid_cols, m.cores, m.epochs, m.status);
    for (const auto& s : m.stacks) out += fmt::format("stack {} {}\n", s.id, s.lcf);
    for (const auto& b : m.blocks)
        out += fmt::format("block {} {} {} {}\n", b.name, b.stack, b.layer, to_string(b.group));
    return out;
}

RunMeta read_meta(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw IntegrityError("missing run metadata " + path.string());
    RunMeta m;
    const std::string src = path.string();
    int lineno = 0;
    auto fail = [&](const std::string& what) { throw IntegrityError(fmt::format("{}:{}: {}", src, lineno, what)); };
    auto num = [&](std::string_view s) {
        double v = 0.0;
        if (!detail::try_parse_double(s, v)) fail(fmt::format("bad number '{}'", s));
        return v;
    };
    const std::string text = detail::read_file(path);
    for (auto line : detail::split_lines(text)) {
        ++lineno;
        auto f = detail::split_ws(line);
        if (f.empty()) continue;
        const auto& k = f[0];
        if (k == "epoch_ms" && f.size() == 2) m.epoch_ms = num(f[1]);
        else if (k == "ambient_k" && f.size() == 2) m.ambient_k = num(f[1]);
        else if (k == "grid" && f.size() == 3) {
            m.grid_rows = static_cast<int>(num(f[1]));
            m.grid_cols = static_cast<int>(num(f[2]));
        } else if (k == "cores" && f.size() == 2) m.cores = static_cast<int>(num(f[1]));
        else if (k == "epochs" && f.size() == 2) m.epochs = static_cast<long>(num(f[1]));
        else if (k == "status" && f.size() == 2) m.status = std::string(f[1]);
        else if (k == "stack" && f.size() == 3) m.stacks.push_back({std::string(f[1]), std::string(f[2])});
        else if (k == "block" && f.size() == 5) {
            RunMeta::BlockRef b{std::string(f[1]), static_cast<int>(num(f[2])), static_cast<int>(num(f[3])),
                                BlockGroup::Core};
            if (f[4] == "memory") b.group = BlockGroup::Memory;
            else if (f[4] == "logic") b.group = BlockGroup::Logic;
            else if (f[4] != "core") fail("unknown block group");
            m.blocks.push_back(std::move(b));
        } else fail("unrecognised line");
    }
    return m;
}

}  // namespace thermiq
