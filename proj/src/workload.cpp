#include "thermiq/workload.hpp"

#include <cmath>
#include <set>

#include <fmt/format.h>

#include "text_util.hpp"
#include "thermiq/error.hpp"

namespace thermiq {

void Phase::validate() const {
    if (!(instructions > 0.0)) throw ValidationError("phase instructions must be > 0");
    if (!(cpi_base > 0.0)) throw ValidationError("phase cpi must be > 0");
    if (!(mem_per_kilo_instr >= 0.0)) throw ValidationError("phase mpki must be >= 0");
    if (!(read_fraction >= 0.0 && read_fraction <= 1.0)) throw ValidationError("read fraction must lie in [0, 1]");
    if (!(activity >= 0.0 && activity <= 1.0)) throw ValidationError("activity must lie in [0, 1]");
}

double AppSpec::total_instructions() const {
    double n = 0.0;
    for (const auto& p : phases) n += p.instructions;
    return n;
}

void AppSpec::validate() const {
    if (name.empty()) throw ValidationError("app without a name");
    if (phases.empty()) throw ValidationError(fmt::format("app '{}' has no phases", name));
    for (const auto& p : phases) {
        try {
            p.validate();
        } catch (const ValidationError& e) {
            throw ValidationError(fmt::format("app '{}': {}", name, e.what()));
        }
    }
}

const AppSpec& Workload::app(std::string_view name) const {
    for (const auto& a : apps)
        if (a.name == name) return a;
    throw ValidationError(fmt::format("unknown app '{}'", name));
}

void Workload::validate() const {
    std::set<std::string> names;
    for (const auto& a : apps) {
        a.validate();
        if (!names.insert(a.name).second) throw ValidationError(fmt::format("duplicate app '{}'", a.name));
    }
    for (const auto& t : tasks) {
        app(t.app);
        if (!(t.arrival >= 0.0)) throw ValidationError("task arrival must be >= 0");
        for (int c : t.channels)
            if (c < 0) throw ValidationError("negative channel id");
    }
}

Workload parse_workload(std::string_view text, const std::string& source) {
    Workload w;
    int lineno = 0;
    for (auto raw : detail::split_lines(text)) {
        ++lineno;
        auto line = raw;
        if (auto h = line.find('#'); h != std::string_view::npos) line = line.substr(0, h);
        auto f = detail::split_ws(line);
        if (f.empty()) continue;
        if (f[0] == "app") {
            if (f.size() != 2) throw ParseError(source, lineno, "expected 'app <name>'");
            w.apps.push_back(AppSpec{std::string(f[1]), {}});
        } else if (f[0] == "phase") {
            if (w.apps.empty()) throw ParseError(source, lineno, "phase before any app");
            if (f.size() != 6)
                throw ParseError(source, lineno, "expected 'phase <instr> <cpi> <mpki> <read_fraction> <activity>'");
            Phase p;
            p.instructions = detail::parse_double(f[1], source, lineno);
            p.cpi_base = detail::parse_double(f[2], source, lineno);
            p.mem_per_kilo_instr = detail::parse_double(f[3], source, lineno);
            p.read_fraction = detail::parse_double(f[4], source, lineno);
            p.activity = detail::parse_double(f[5], source, lineno);
            try {
                p.validate();
            } catch (const ValidationError& e) {
                throw ParseError(source, lineno, e.what());
            }
            w.apps.back().phases.push_back(p);
        } else if (f[0] == "task") {
            if (f.size() < 2) throw ParseError(source, lineno, "expected 'task <app> ...'");
            TaskSpec t;
            t.app = std::string(f[1]);
            int count = 1;
            for (std::size_t i = 2; i < f.size(); ++i) {
                auto tok = f[i];
                if (tok.size() > 1 && tok[0] == 'x') {
                    double c = detail::parse_double(tok.substr(1), source, lineno);
                    if (c < 1 || c != std::floor(c)) throw ParseError(source, lineno, "bad task count");
                    count = static_cast<int>(c);
                } else if (tok.substr(0, 3) == "at=") {
                    t.arrival = detail::parse_double(tok.substr(3), source, lineno) * 1e-3;
                } else if (tok.substr(0, 9) == "channels=") {
                    for (auto c : detail::split(tok.substr(9), ','))
                        t.channels.push_back(static_cast<int>(detail::parse_double(c, source, lineno)));
                } else {
                    throw ParseError(source, lineno, fmt::format("unknown task option '{}'", tok));
                }
            }
            for (int k = 0; k < count; ++k) w.tasks.push_back(t);
        } else {
            throw ParseError(source, lineno, fmt::format("unknown directive '{}'", f[0]));
        }
    }
    try {
        w.validate();
    } catch (const ValidationError& e) {
        throw ParseError(source, 0, e.what());
    }
    return w;
}

Workload load_workload(const std::filesystem::path& path) {
    return parse_workload(detail::read_file(path), path.string());
}

std::string serialize_workload(const Workload& w) {
    std::string out;
    for (const auto& a : w.apps) {
        out += fmt::format("app {}\n", a.name);
        for (const auto& p : a.phases)
            out += fmt::format("phase {} {} {} {} {}\n", p.instructions, p.cpi_base, p.mem_per_kilo_instr,
                               p.read_fraction, p.activity);
    }
    for (const auto& t : w.tasks) {
        out += fmt::format("task {} at={}", t.app, t.arrival * 1e3);
        if (!t.channels.empty()) out += fmt::format(" channels={}", fmt::join(t.channels, ","));
        out += "\n";
    }
    return out;
}

}  // namespace thermiq
