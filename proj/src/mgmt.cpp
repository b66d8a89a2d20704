#include "thermiq/mgmt.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <random>

#include <fmt/format.h>

#include "text_util.hpp"
#include "thermiq/error.hpp"

namespace thermiq {

void DtmConfig::validate() const {
    if (!(resume_temp < trigger_temp)) throw ConfigError("DTM resume temperature must be below the trigger");
    if (min_level < 0) throw ConfigError("DTM minimum level must be >= 0");
}

std::vector<int> ondemand_update(std::span<const double> util, const GovernorState& state, int max_level,
                                 const OndemandParams& p) {
    std::vector<int> levels = state.levels;
    if (state.throttled) return levels;
    for (std::size_t i = 0; i < levels.size() && i < util.size(); ++i) {
        if (util[i] > p.up_threshold)
            levels[i] = max_level;
        else if (util[i] < p.down_threshold)
            levels[i] = std::max(0, levels[i] - 1);
    }
    return levels;
}

GovernorState dtm_update(double max_temp, const GovernorState& gov, const DtmConfig& cfg) {
    GovernorState g = gov;
    if (!cfg.enabled) return g;
    if (!g.throttled && max_temp > cfg.trigger_temp) {
        g.saved = g.levels;
        std::fill(g.levels.begin(), g.levels.end(), cfg.min_level);
        g.throttled = true;
    } else if (g.throttled && max_temp < cfg.resume_temp) {
        g.levels = g.saved;
        g.saved.clear();
        g.throttled = false;
    }
    return g;
}

std::optional<int> map_task(std::span<const char> free_cores, std::span<const int> priority_list) {
    for (int c : priority_list)
        if (c >= 0 && c < static_cast<int>(free_cores.size()) && free_cores[c]) return c;
    return std::nullopt;
}

void ArrivalProcess::validate() const {
    if (task_count < 1) throw ConfigError("arrival process has no tasks");
    switch (mode) {
    case ArrivalMode::Uniform:
        if (!(period > 0.0)) throw ConfigError("uniform arrival period must be > 0");
        break;
    case ArrivalMode::Poisson:
        if (!(rate > 0.0)) throw ConfigError("poisson arrival rate must be > 0");
        break;
    case ArrivalMode::Explicit:
        for (std::size_t i = 0; i < times.size(); ++i) {
            if (!(times[i] >= 0.0)) throw ConfigError("arrival times must be >= 0");
            if (i > 0 && times[i] < times[i - 1]) throw ConfigError("arrival times must be nondecreasing");
        }
        break;
    }
}

std::vector<Arrival> generate_arrivals(const ArrivalProcess& proc, double horizon) {
    if (!(horizon > 0.0)) throw InvalidArgument("arrival horizon must be > 0");
    proc.validate();
    std::vector<Arrival> out;
    switch (proc.mode) {
    case ArrivalMode::Uniform:
        for (long k = 0;; ++k) {
            const double t = k * proc.period;
            if (t >= horizon) break;
            out.push_back({t, static_cast<int>(k % proc.task_count)});
        }
        break;
    case ArrivalMode::Poisson: {
        std::mt19937_64 rng(proc.seed);
        std::exponential_distribution<double> gap(proc.rate);
        double t = 0.0;
        for (long k = 0;; ++k) {
            t += gap(rng);
            if (t >= horizon) break;
            out.push_back({t, static_cast<int>(k % proc.task_count)});
        }
        break;
    }
    case ArrivalMode::Explicit:
        for (std::size_t k = 0; k < proc.times.size(); ++k)
            out.push_back({proc.times[k], static_cast<int>(k % proc.task_count)});
        break;
    }
    return out;
}

ArrivalProcess parse_arrivals(std::string_view spec, const std::filesystem::path& base_dir) {
    auto parts = detail::split(spec, ':');
    ArrivalProcess p;
    auto num = [&](std::string_view s) {
        double v = 0.0;
        if (!detail::try_parse_double(s, v)) throw ConfigError(fmt::format("bad number '{}' in arrivals", s));
        return v;
    };
    if (parts[0] == "uniform" && parts.size() == 2) {
        p.mode = ArrivalMode::Uniform;
        p.period = num(parts[1]) * 1e-3;
    } else if (parts[0] == "poisson" && parts.size() == 3) {
        p.mode = ArrivalMode::Poisson;
        p.rate = num(parts[1]);
        const double seed = num(parts[2]);
        if (seed < 0) throw ConfigError("poisson seed must be >= 0");
        p.seed = static_cast<std::uint64_t>(seed);
    } else if (parts[0] == "explicit" && parts.size() == 2) {
        p.mode = ArrivalMode::Explicit;
        std::filesystem::path file(parts[1]);
        if (file.is_relative() && !base_dir.empty()) file = base_dir / file;
        const std::string text = detail::read_file(file);
        int lineno = 0;
        for (auto line : detail::split_lines(text)) {
            ++lineno;
            if (auto h = line.find('#'); h != std::string_view::npos) line = line.substr(0, h);
            line = detail::trim(line);
            if (line.empty()) continue;
            p.times.push_back(detail::parse_double(line, file.string(), lineno) * 1e-3);
        }
    } else {
        throw ConfigError(fmt::format("unrecognised arrivals '{}'", spec));
    }
    p.validate();
    return p;
}

namespace {

std::mutex registry_mutex;

std::map<std::string, Policy>& registry() {
    static std::map<std::string, Policy> r;
    return r;
}

}  // namespace

void register_policy(const std::string& name, Policy policy) {
    if (name.empty() || !policy) throw InvalidArgument("policy needs a name and a function");
    std::lock_guard lock(registry_mutex);
    registry()[name] = std::move(policy);
}

Policy make_policy(std::string_view spec, const OndemandParams& ondemand) {
    if (spec == "ondemand") {
        return [ondemand](const PolicyInput& in) {
            return PolicyDecision{ondemand_update(in.utilization, *in.governor, in.max_level, ondemand), {}};
        };
    }
    if (spec == "static") return [](const PolicyInput& in) { return PolicyDecision{in.governor->levels, {}}; };
    if (spec.substr(0, 7) == "custom:") {
        std::lock_guard lock(registry_mutex);
        auto it = registry().find(std::string(spec.substr(7)));
        if (it == registry().end()) throw ConfigError(fmt::format("no policy registered as '{}'", spec.substr(7)));
        return it->second;
    }
    throw ConfigError(fmt::format("unknown governor '{}'", spec));
}

}  // namespace thermiq
