#include "thermiq/perf.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "thermiq/error.hpp"

namespace thermiq {

void MemConfig::validate() const {
    if (channels < 1) throw ConfigError("memory needs at least one channel");
    if (!(per_channel_bandwidth > 0.0)) throw ConfigError("channel bandwidth must be > 0");
    if (!(access_latency > 0.0)) throw ConfigError("access latency must be > 0");
    if (!(access_size > 0.0)) throw ConfigError("access size must be > 0");
    if (banks_per_channel < 1) throw ConfigError("banks per channel must be >= 1");
    if (!(mlp > 0.0)) throw ConfigError("mlp must be > 0");
}

namespace {

struct Walk {
    double instructions = 0, compute = 0, stall = 0, accesses = 0, reads = 0, active = 0;
    double remaining = 0;  // unused cycles at the end
    std::size_t phase = 0;
    double retired = 0;
    bool finished = false;
};

// Runs the core through its phases with `lat_cycles` per memory access.
Walk walk(const CoreRunState& s, double budget, double lat_cycles) {
    Walk w;
    w.phase = s.phase;
    w.retired = s.retired_in_phase;
    double r = budget;
    const auto& phases = s.app->phases;
    while (w.phase < phases.size()) {
        const Phase& p = phases[w.phase];
        const double mem = p.mem_per_kilo_instr / 1000.0;
        const double cpi = p.cpi_base + mem * lat_cycles;
        const double left = p.instructions - w.retired;
        double take;
        bool phase_done = false;
        if (left * cpi <= r) {
            take = left;
            phase_done = true;
        } else {
            take = std::floor(r / cpi);
        }
        r -= take * cpi;
        w.instructions += take;
        w.compute += take * p.cpi_base;
        w.stall += take * mem * lat_cycles;
        w.accesses += take * mem;
        w.reads += take * mem * p.read_fraction;
        w.active += take * p.cpi_base * p.activity;
        if (!phase_done) {
            w.retired += take;
            break;
        }
        ++w.phase;
        w.retired = 0;
    }
    w.finished = w.phase >= phases.size();
    w.remaining = std::max(0.0, r);
    return w;
}

}  // namespace

EpochPerfResult epoch_execute(std::span<const CoreRunState> states, const MemConfig& mem, double dt) {
    if (!(dt > 0.0)) throw InvalidArgument("epoch length must be > 0");
    mem.validate();
    const int nch = mem.channels;
    EpochPerfResult res;
    res.dt = dt;
    res.cores.resize(states.size());
    res.bank_reads.assign(static_cast<std::size_t>(nch) * mem.banks_per_channel, 0.0);
    res.bank_writes.assign(res.bank_reads.size(), 0.0);
    res.channel_demand.assign(nch, 0.0);
    res.channel_served.assign(nch, 0.0);

    std::vector<double> budget(states.size(), 0.0), base_lat(states.size(), 0.0);
    for (std::size_t i = 0; i < states.size(); ++i) {
        const auto& s = states[i];
        if (!(s.frequency_ghz > 0.0)) throw InvalidArgument(fmt::format("core {} has no frequency", s.core_id));
        for (int c : s.channels)
            if (c < 0 || c >= nch)
                throw ConfigError(fmt::format("core {} is bound to channel {} of {}", s.core_id, c, nch));
        const double f = s.frequency_ghz * 1e9;
        res.cores[i].budget_cycles = f * dt;
        base_lat[i] = mem.access_latency * f / mem.mlp;
        budget[i] = f * dt + (s.busy() ? s.carry_cycles : 0.0);
    }

    // pass 1: uncontended demand
    std::vector<Walk> first(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
        const auto& s = states[i];
        if (!s.busy()) continue;
        first[i] = walk(s, budget[i], base_lat[i]);
        if (first[i].accesses > 0.0 && s.channels.empty())
            throw ConfigError(fmt::format("core {} has memory traffic but no channels", s.core_id));
        for (int c : s.channels)
            res.channel_demand[c] += first[i].accesses / s.channels.size() * mem.access_size / dt;
    }
    std::vector<double> scale(nch, 1.0);
    for (int c = 0; c < nch; ++c) scale[c] = std::max(1.0, res.channel_demand[c] / mem.per_channel_bandwidth);

    // pass 2: saturated channels stretch every access routed through them
    for (std::size_t i = 0; i < states.size(); ++i) {
        const auto& s = states[i];
        CorePerf& out = res.cores[i];
        if (!s.busy()) {
            out.idle_cycles = out.budget_cycles;
            out.end_phase = s.phase;
            out.end_retired = s.retired_in_phase;
            continue;
        }
        double m = 1.0;
        if (!s.channels.empty()) {
            m = 0.0;
            for (int c : s.channels) m += scale[c];
            m /= s.channels.size();
        }
        const Walk w = m == 1.0 ? first[i] : walk(s, budget[i], base_lat[i] * m);
        out.latency_scale = m;
        out.carry_in = s.carry_cycles;
        out.instructions = w.instructions;
        out.compute_cycles = w.compute;
        out.stall_cycles = w.stall;
        out.accesses = w.accesses;
        out.end_phase = w.phase;
        out.end_retired = w.retired;
        if (w.finished) {
            out.idle_cycles = w.remaining;
            out.completed = true;
            const double used = budget[i] - w.remaining - s.carry_cycles;
            out.completion_offset = std::max(0.0, used) / (s.frequency_ghz * 1e9);
        } else {
            out.carry_out = w.remaining;
        }
        out.utilization = std::clamp(w.compute / out.budget_cycles, 0.0, 1.0);
        out.activity = std::clamp(w.active / out.budget_cycles, 0.0, 1.0);

        if (w.accesses > 0.0) {
            const double share = w.accesses / s.channels.size();
            const double rd = w.reads / s.channels.size();
            for (int c : s.channels) {
                res.channel_served[c] += share * mem.access_size / dt;
                for (int b = 0; b < mem.banks_per_channel; ++b) {
                    const auto k = static_cast<std::size_t>(c) * mem.banks_per_channel + b;
                    res.bank_reads[k] += rd / mem.banks_per_channel;
                    res.bank_writes[k] += (share - rd) / mem.banks_per_channel;
                }
            }
        }
    }
    return res;
}

CoreRunState advance(const CoreRunState& state, const CorePerf& r, double epoch_start) {
    CoreRunState s = state;
    if (!s.busy()) {
        s.carry_cycles = 0.0;
        return s;
    }
    s.phase = r.end_phase;
    s.retired_in_phase = r.end_retired;
    s.carry_cycles = r.carry_out;
    if (r.completed) {
        s.finished = true;
        s.carry_cycles = 0.0;
        s.completion_time = epoch_start + r.completion_offset;
    }
    return s;
}

double utilization(const EpochPerfResult& result, int core_index) {
    if (core_index < 0 || core_index >= static_cast<int>(result.cores.size()))
        throw InvalidArgument(fmt::format("no core {}", core_index));
    const auto& c = result.cores[core_index];
    if (c.budget_cycles <= 0.0) return 0.0;
    return std::clamp(c.compute_cycles / c.budget_cycles, 0.0, 1.0);
}

}  // namespace thermiq
