#include "thermiq/engine.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <memory>
#include <set>

#include <fmt/format.h>

#include "text_util.hpp"
#include "thermiq/error.hpp"

namespace thermiq {

namespace {

constexpr double kKelvin = 273.15;

const std::vector<std::string> kKeys = {
    "workload", "governor", "arrivals", "priority_list", "seed",
    "system.kind", "system.cores", "system.core_size", "system.core_layers", "system.banks",
    "system.bank_size", "system.mem_layers", "system.gap", "system.core_template", "system.stacks",
    "materials.silicon_conductivity", "materials.silicon_capacity", "materials.die_thickness",
    "materials.tim_conductivity", "materials.tim_capacity", "materials.tim_thickness",
    "materials.bond_conductivity", "materials.bond_capacity", "materials.bond_thickness",
    "materials.interposer_thickness", "materials.spreader_conductivity", "materials.spreader_capacity",
    "materials.spreader_thickness",
    "thermal.grid", "thermal.ambient_c", "thermal.sink_resistance", "thermal.aircooled_multiplier",
    "thermal.spreader_side", "thermal.sink_side", "thermal.sink_thickness", "thermal.sink_conductivity",
    "thermal.sink_capacity", "thermal.sink_extra_capacitance", "thermal.substeps",
    "power.c_dyn", "power.vf_table", "power.core_leak_p0", "power.core_leak_beta", "power.leak_ref_c",
    "power.components", "power.e_read", "power.e_write", "power.mem_leak_fraction", "power.mem_leak_at_c",
    "power.mem_leak_beta", "power.mem_dyn_ref", "power.logic_power", "power.memory_power",
    "memory.channels", "memory.bandwidth", "memory.latency_ns", "memory.access_size", "memory.mlp",
    "ondemand.up_threshold", "ondemand.down_threshold",
    "dtm.enabled", "dtm.trigger_c", "dtm.resume_c", "dtm.min_level", "dtm.scope",
    "sim.epoch_ms", "sim.max_time_ms", "sim.init", "sim.initial_level",
};

std::pair<double, double> parse_pair(const Config& c, const std::string& key, std::pair<double, double> fallback) {
    auto v = c.find(key);
    if (!v) return fallback;
    auto parts = detail::split(*v, 'x');
    double a = 0, b = 0;
    if (parts.size() != 2 || !detail::try_parse_double(parts[0], a) || !detail::try_parse_double(parts[1], b))
        throw ConfigError(fmt::format("'{}' expects AxB, got '{}'", key, *v));
    return {a, b};
}

std::vector<std::string_view> list(std::string_view v) {
    std::vector<std::string_view> out;
    for (auto p : detail::split(v, ','))
        if (!p.empty()) out.push_back(p);
    return out;
}

double number(std::string_view s, const std::string& key) {
    double v = 0;
    if (!detail::try_parse_double(s, v)) throw ConfigError(fmt::format("'{}': bad number '{}'", key, s));
    return v;
}

// Suffix index after the last '_', or -1.
int suffix_index(const std::string& name) {
    auto us = name.rfind('_');
    if (us == std::string::npos || us + 1 >= name.size()) return -1;
    int v = 0;
    for (std::size_t i = us + 1; i < name.size(); ++i) {
        if (name[i] < '0' || name[i] > '9') return -1;
        v = v * 10 + (name[i] - '0');
    }
    return v;
}

// MEM<l>_<i> -> (l, i)
std::optional<std::pair<int, int>> bank_id(const std::string& name) {
    if (name.rfind("MEM", 0) != 0) return std::nullopt;
    auto us = name.find('_');
    if (us == std::string::npos || us == 3) return std::nullopt;
    int l = 0;
    for (std::size_t i = 3; i < us; ++i) {
        if (name[i] < '0' || name[i] > '9') return std::nullopt;
        l = l * 10 + (name[i] - '0');
    }
    const int b = suffix_index(name);
    if (b < 0) return std::nullopt;
    return std::make_pair(l, b);
}

}  // namespace

const std::vector<std::string>& known_config_keys() { return kKeys; }

SimConfig SimConfig::from_config(const Config& c) {
    const std::set<std::string> known(kKeys.begin(), kKeys.end());
    for (const auto& [key, e] : c.entries())
        if (!known.count(key))
            throw ConfigError(e.line ? fmt::format("{}:{}: unknown key '{}'", c.source(), e.line, key)
                                     : fmt::format("{}: unknown key '{}'", c.source(), key));

    SimConfig s;
    s.source = c;

    // system
    auto& st = s.stack;
    if (auto k = c.find("system.kind")) {
        try {
            st.kind = parse_stack_kind(*k);
        } catch (const Error& e) {
            throw ConfigError(e.what());
        }
    }
    st.cores = c.get_int("system.cores", st.cores);
    std::tie(st.core_width, st.core_height) = parse_pair(c, "system.core_size", {st.core_width, st.core_height});
    st.core_layers = c.get_int("system.core_layers", st.core_layers);
    auto banks = parse_pair(c, "system.banks", {st.mem_banks_y, st.mem_banks_x});
    st.mem_banks_y = static_cast<int>(banks.first);
    st.mem_banks_x = static_cast<int>(banks.second);
    std::tie(st.bank_width, st.bank_height) = parse_pair(c, "system.bank_size", {st.bank_width, st.bank_height});
    st.mem_layers = c.get_int("system.mem_layers", st.mem_layers);
    st.gap_2_5d = c.get_double("system.gap", st.gap_2_5d);
    if (auto p = c.get_path("system.core_template")) {
        st.core_template = load_floorplan(*p);
        s.source.set("system.core_template", std::filesystem::absolute(*p).string());
    }
    if (auto v = c.find("system.stacks")) {
        std::vector<std::string> abs;
        for (auto f : list(*v)) {
            std::filesystem::path p(f);
            if (p.is_relative() && !c.base_dir().empty()) p = c.base_dir() / p;
            s.stack_files.push_back(p);
            abs.push_back(std::filesystem::absolute(p).string());
        }
        s.source.set("system.stacks", fmt::format("{}", fmt::join(abs, ", ")));
    }

    auto& m = st.materials;
    m.silicon_conductivity = c.get_double("materials.silicon_conductivity", m.silicon_conductivity);
    m.silicon_capacity = c.get_double("materials.silicon_capacity", m.silicon_capacity);
    m.die_thickness = c.get_double("materials.die_thickness", m.die_thickness);
    m.tim_conductivity = c.get_double("materials.tim_conductivity", m.tim_conductivity);
    m.tim_capacity = c.get_double("materials.tim_capacity", m.tim_capacity);
    m.tim_thickness = c.get_double("materials.tim_thickness", m.tim_thickness);
    m.bond_conductivity = c.get_double("materials.bond_conductivity", m.bond_conductivity);
    m.bond_capacity = c.get_double("materials.bond_capacity", m.bond_capacity);
    m.bond_thickness = c.get_double("materials.bond_thickness", m.bond_thickness);
    m.interposer_thickness = c.get_double("materials.interposer_thickness", m.interposer_thickness);
    m.spreader_conductivity = c.get_double("materials.spreader_conductivity", m.spreader_conductivity);
    m.spreader_capacity = c.get_double("materials.spreader_capacity", m.spreader_capacity);
    m.spreader_thickness = c.get_double("materials.spreader_thickness", m.spreader_thickness);

    // thermal
    auto grid = parse_pair(c, "thermal.grid", {s.grid_rows, s.grid_cols});
    s.grid_rows = static_cast<int>(grid.first);
    s.grid_cols = static_cast<int>(grid.second);
    s.ambient.ambient_temperature = c.get_double("thermal.ambient_c", 45.0) + kKelvin;
    s.ambient.sink_to_ambient_resistance = c.get_double("thermal.sink_resistance", s.ambient.sink_to_ambient_resistance);
    s.ambient.convection_multiplier_aircooled =
        c.get_double("thermal.aircooled_multiplier", s.ambient.convection_multiplier_aircooled);
    auto& pk = s.package;
    pk.spreader_side = c.get_double("thermal.spreader_side", pk.spreader_side);
    pk.sink_side = c.get_double("thermal.sink_side", pk.sink_side);
    pk.sink_thickness = c.get_double("thermal.sink_thickness", pk.sink_thickness);
    pk.sink_conductivity = c.get_double("thermal.sink_conductivity", pk.sink_conductivity);
    pk.sink_capacity = c.get_double("thermal.sink_capacity", pk.sink_capacity);
    pk.sink_extra_capacitance = c.get_double("thermal.sink_extra_capacitance", pk.sink_extra_capacitance);
    s.substeps = c.get_int("thermal.substeps", s.substeps);

    // power
    auto& cp = s.core_power;
    cp.c_dyn = c.get_double("power.c_dyn", cp.c_dyn);
    cp.vf_table = default_vf_table();
    if (auto v = c.find("power.vf_table")) {
        cp.vf_table.clear();
        for (auto e : list(*v)) {
            auto at = detail::split(e, '@');
            if (at.size() != 2) throw ConfigError(fmt::format("power.vf_table: expected GHz@V, got '{}'", e));
            cp.vf_table.push_back({number(at[1], "power.vf_table"), number(at[0], "power.vf_table")});
        }
    }
    const double leak_ref = c.get_double("power.leak_ref_c", 70.0) + kKelvin;
    cp.leak = {c.get_double("power.core_leak_p0", 1.5), c.get_double("power.core_leak_beta", 0.017), leak_ref};
    if (auto v = c.find("power.components")) {
        for (auto e : list(*v)) {
            auto kv = detail::split(e, ':');
            if (kv.size() != 2) throw ConfigError(fmt::format("power.components: expected name:fraction, got '{}'", e));
            cp.component_fractions[std::string(kv[0])] = number(kv[1], "power.components");
        }
    }
    auto& mp = s.mem_power;
    mp.e_read = c.get_double("power.e_read", mp.e_read);
    mp.e_write = c.get_double("power.e_write", mp.e_write);
    mp.logic_layer_power = c.get_double("power.logic_power", mp.logic_layer_power);
    s.mem_leak_fraction = c.get_double("power.mem_leak_fraction", s.mem_leak_fraction);
    s.mem_leak_at = c.get_double("power.mem_leak_at_c", 70.0) + kKelvin;
    s.mem_leak_beta = c.get_double("power.mem_leak_beta", s.mem_leak_beta);
    if (c.has("power.mem_dyn_ref")) s.mem_dyn_ref = c.get_double("power.mem_dyn_ref", 0.0);
    mp.leak.t_ref = leak_ref;
    s.memory_power = c.get_bool("power.memory_power", true);
    try {
        cp.validate();
        mp.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }

    // memory
    s.memory.channels = c.get_int("memory.channels", s.memory.channels);
    s.memory.per_channel_bandwidth = c.get_double("memory.bandwidth", s.memory.per_channel_bandwidth);
    s.memory.access_latency = c.get_double("memory.latency_ns", s.memory.access_latency * 1e9) * 1e-9;
    s.memory.access_size = c.get_double("memory.access_size", s.memory.access_size);
    s.memory.mlp = c.get_double("memory.mlp", s.memory.mlp);

    // management
    s.governor = c.get_string("governor", s.governor);
    s.ondemand.up_threshold = c.get_double("ondemand.up_threshold", s.ondemand.up_threshold);
    s.ondemand.down_threshold = c.get_double("ondemand.down_threshold", s.ondemand.down_threshold);
    s.dtm.enabled = c.get_bool("dtm.enabled", s.dtm.enabled);
    s.dtm.trigger_temp = c.get_double("dtm.trigger_c", 80.0) + kKelvin;
    s.dtm.resume_temp = c.get_double("dtm.resume_c", 78.0) + kKelvin;
    s.dtm.min_level = c.get_int("dtm.min_level", s.dtm.min_level);
    const std::string scope = c.get_string("dtm.scope", "global");
    if (scope != "global" && scope != "core") throw ConfigError("dtm.scope must be global or core");
    s.dtm_core_scope = scope == "core";
    s.dtm.validate();
    if (s.dtm.min_level > cp.max_level()) throw ConfigError("dtm.min_level exceeds the V/f table");
    if (auto v = c.find("priority_list"))
        for (auto e : list(*v)) s.priority_list.push_back(static_cast<int>(number(e, "priority_list")));
    if (auto v = c.find("arrivals")) {
        s.arrivals = *v;
        if (v->rfind("explicit:", 0) == 0) {
            std::filesystem::path p(v->substr(9));
            if (p.is_relative() && !c.base_dir().empty()) p = c.base_dir() / p;
            s.arrivals = "explicit:" + std::filesystem::absolute(p).string();
            s.source.set("arrivals", *s.arrivals);
        }
        parse_arrivals(*s.arrivals);
    }

    // simulation
    s.epoch_dt = c.get_double("sim.epoch_ms", 1.0) * 1e-3;
    s.max_time = c.get_double("sim.max_time_ms", 100.0) * 1e-3;
    if (!(s.epoch_dt > 0.0)) throw ConfigError("sim.epoch_ms must be > 0");
    if (!(s.max_time > 0.0)) throw ConfigError("sim.max_time_ms must be > 0");
    if (s.substeps < 1) throw ConfigError("thermal.substeps must be >= 1");
    s.initial_level = c.get_int("sim.initial_level", -1);
    if (s.initial_level > cp.max_level()) throw ConfigError("sim.initial_level exceeds the V/f table");
    const std::string init = c.get_string("sim.init", "ambient");
    if (init == "ambient") {
        s.init = {InitMode::Ambient, 0.0};
    } else if (init.rfind("uniform:", 0) == 0) {
        s.init = {InitMode::Uniform, number(init.substr(8), "sim.init") + kKelvin};
    } else if (init.rfind("warmed:", 0) == 0) {
        s.init = {InitMode::Warmed, number(init.substr(7), "sim.init") + kKelvin};
    } else {
        throw ConfigError(fmt::format("sim.init: expected ambient, uniform:<C> or warmed:<C>, got '{}'", init));
    }
    const double seed = c.get_double("seed", 1.0);
    if (seed < 0) throw ConfigError("seed must be >= 0");
    s.seed = static_cast<std::uint64_t>(seed);

    if (auto p = c.get_path("workload")) {
        s.workload = load_workload(*p);
        s.source.set("workload", std::filesystem::absolute(*p).string());
    }
    return s;
}

SimConfig SimConfig::load(const std::filesystem::path& path) { return from_config(Config::load(path)); }

SimConfig force_memory_power(SimConfig cfg, bool enabled) {
    cfg.memory_power = enabled;
    cfg.source.set("power.memory_power", enabled ? "yes" : "no");
    return cfg;
}

// ---------------------------------------------------------------------------

System::System(const SimConfig& cfg) : cfg_(cfg) {
    if (cfg.stack_files.empty()) {
        stacks_ = build_stack(cfg.stack);
    } else {
        for (const auto& f : cfg.stack_files) stacks_.push_back(load_stack(f));
    }
    net_ = ThermalNetwork::build(stacks_, cfg.grid_rows, cfg.grid_cols, cfg.ambient, cfg.package);

    const auto& blocks = net_.blocks();
    info_.resize(blocks.size());
    std::map<int, double> core_area;
    std::vector<double> area(blocks.size(), 0.0);
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const auto& name = blocks[i].name;
        // block area from its layer floorplan
        for (const auto& l : stacks_[blocks[i].component].layers)
            if (l.index == blocks[i].layer && l.floorplan)
                if (auto* b = l.floorplan->find(name)) area[i] = b->area();
        if (name == kLogicBlock) {
            info_[i].group = BlockGroup::Logic;
        } else if (auto id = bank_id(name)) {
            info_[i].group = BlockGroup::Memory;
            info_[i].mem_layer = id->first;
        } else {
            const int core = suffix_index(name);
            if (core < 0) throw ConfigError(fmt::format("block '{}' has no core index suffix", name));
            info_[i].core = core;
            core_area[core] += area[i];
            cores_ = std::max(cores_, core + 1);
        }
    }
    for (int c = 0; c < cores_; ++c)
        if (!core_area.count(c)) throw ConfigError(fmt::format("core {} has no blocks", c));

    const auto& fractions = cfg.core_power.component_fractions;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        auto& bi = info_[i];
        if (bi.group != BlockGroup::Core) continue;
        bi.area_share = area[i] / core_area[bi.core];
        if (fractions.empty()) {
            bi.core_share = bi.area_share;
        } else {
            const auto& name = blocks[i].name;
            auto it = fractions.find(name.substr(0, name.rfind('_')));
            if (it == fractions.end())
                throw ConfigError(fmt::format("no power fraction for core component '{}'", name));
            bi.core_share = it->second;
        }
    }

    // channel c owns bank i of every memory layer when i % channels == c
    memory_ = cfg.memory;
    const int nch = memory_.channels;
    if (nch < 1) throw ConfigError("memory needs at least one channel");
    std::vector<int> per_channel(nch, 0);
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (info_[i].group != BlockGroup::Memory) continue;
        const int ch = bank_id(blocks[i].name)->second % nch;
        info_[i].bank_slot = ch;  // channel for now, slot assigned below
        ++per_channel[ch];
    }
    const int bpc = per_channel.empty() ? 0 : per_channel[0];
    for (int n : per_channel)
        if (n != bpc) throw ConfigError("memory banks do not divide evenly over the channels");
    memory_.banks_per_channel = std::max(1, bpc);
    std::vector<int> next(nch, 0);
    for (auto& bi : info_)
        if (bi.group == BlockGroup::Memory) {
            const int ch = bi.bank_slot;
            bi.bank_slot = ch * memory_.banks_per_channel + next[ch]++;
        }
    memory_.validate();

    dyn_ref_ = cfg.mem_dyn_ref.value_or(cfg.mem_power.e_read * (memory_.per_channel_bandwidth / memory_.access_size) /
                                        memory_.banks_per_channel);
    try {
        mem_fit_ = calibrate_memory_leakage(cfg.mem_leak_fraction, cfg.mem_leak_at, dyn_ref_, cfg.mem_leak_beta,
                                            cfg.mem_power.leak.t_ref);
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
}

std::vector<int> System::core_blocks(int core) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < info_.size(); ++i)
        if (info_[i].group == BlockGroup::Core && info_[i].core == core) out.push_back(static_cast<int>(i));
    return out;
}

std::vector<int> System::memory_layer_blocks(int mem_layer) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < info_.size(); ++i)
        if (info_[i].group == BlockGroup::Memory && info_[i].mem_layer == mem_layer) out.push_back(static_cast<int>(i));
    return out;
}

std::vector<double> System::dynamic_power(const EpochPerfResult& perf, std::span<const int> levels,
                                          bool memory_active) const {
    std::vector<double> p(info_.size(), 0.0);
    std::vector<double> core_p(cores_, 0.0);
    for (int c = 0; c < cores_ && c < static_cast<int>(perf.cores.size()); ++c)
        core_p[c] = core_dynamic_power(perf.cores[c].activity, levels[c], cfg_.core_power);
    for (std::size_t i = 0; i < info_.size(); ++i) {
        const auto& bi = info_[i];
        switch (bi.group) {
        case BlockGroup::Core:
            p[i] = core_p[bi.core] * bi.core_share;
            break;
        case BlockGroup::Memory:
            if (cfg_.memory_power && memory_active && bi.bank_slot < static_cast<int>(perf.bank_reads.size()))
                p[i] = mem_bank_power(perf.bank_reads[bi.bank_slot], perf.bank_writes[bi.bank_slot], perf.dt,
                                      cfg_.mem_power);
            break;
        case BlockGroup::Logic:
            if (cfg_.memory_power && memory_active) p[i] = cfg_.mem_power.logic_layer_power;
            break;
        }
    }
    return p;
}

std::vector<LeakageFit> System::leakage(std::span<const int> levels, std::span<const char> core_active,
                                        bool memory_active) const {
    std::vector<LeakageFit> fits(info_.size());
    for (std::size_t i = 0; i < info_.size(); ++i) {
        const auto& bi = info_[i];
        if (bi.group == BlockGroup::Core) {
            if (!core_active.empty() && !core_active[bi.core]) continue;
            fits[i] = core_leakage_fit(levels[bi.core], cfg_.core_power);
            fits[i].p0 *= bi.area_share;
        } else if (bi.group == BlockGroup::Memory && cfg_.memory_power && memory_active) {
            fits[i] = mem_fit_;
        }
    }
    return fits;
}

// ---------------------------------------------------------------------------

ThermalState warm_start(const ThermalNetwork& net, double peak) {
    const double amb = net.ambient_temperature();
    if (!(peak >= amb)) throw InvalidArgument(fmt::format("warm-start peak {} K is below ambient {} K", peak, amb));
    ThermalState s = ambient_state(net);
    if (peak == amb) return s;
    std::vector<double> np(net.node_count(), 0.0);
    for (const auto& b : net.blocks())
        for (auto [node, frac] : b.cells) np[node] = 1.0;
    const auto rise = steady_rise(net, np);
    const double mx = *std::max_element(rise.begin(), rise.end());
    if (!(mx > 0.0)) throw InvalidArgument("network has no dissipating cells to preheat");
    const double scale = (peak - amb) / mx;
    for (int i = 0; i < net.node_count(); ++i) s.temperatures[i] = amb + scale * rise[i];
    return s;
}

// ---------------------------------------------------------------------------

namespace {

struct TaskInstance {
    int id = 0;
    int tmpl = 0;
    double arrival = 0.0;
};

class EventLog {
public:
    explicit EventLog(std::filesystem::path path) : path_(std::move(path)) {
        std::ofstream(path_, std::ios::binary | std::ios::trunc);
    }
    ~EventLog() {
        try {
            flush();
        } catch (...) {
        }
    }
    template <typename... Args>
    void add(double time_ms, fmt::format_string<Args...> f, Args&&... args) {
        buf_ += fmt::format("{} ", time_ms);
        buf_ += fmt::format(f, std::forward<Args>(args)...);
        buf_ += '\n';
    }
    void flush() {
        if (buf_.empty()) return;
        std::ofstream out(path_, std::ios::binary | std::ios::app);
        out << buf_;
        buf_.clear();
    }

private:
    std::filesystem::path path_;
    std::string buf_;
};

}  // namespace

RunResult run(const SimConfig& cfg, const std::filesystem::path& out_dir, const RunOptions& opt) {
    namespace fs = std::filesystem;
    const System sys(cfg);
    const ThermalNetwork& net = sys.network();
    const int ncores = sys.core_count();
    const int nblocks = static_cast<int>(net.blocks().size());
    const int max_level = cfg.core_power.max_level();

    std::vector<int> priority = cfg.priority_list;
    if (priority.empty())
        for (int c = 0; c < ncores; ++c) priority.push_back(c);
    {
        auto sorted = priority;
        std::sort(sorted.begin(), sorted.end());
        bool ok = sorted.size() == static_cast<std::size_t>(ncores);
        for (int c = 0; ok && c < ncores; ++c) ok = sorted[c] == c;
        if (!ok) throw ConfigError(fmt::format("priority_list must be a permutation of 0..{}", ncores - 1));
    }

    std::vector<std::shared_ptr<const AppSpec>> apps;
    for (const auto& t : cfg.workload.tasks) {
        apps.push_back(std::make_shared<const AppSpec>(cfg.workload.app(t.app)));
        for (int ch : t.channels)
            if (ch >= sys.memory().channels)
                throw ConfigError(fmt::format("task of '{}' uses channel {} of {}", t.app, ch, sys.memory().channels));
    }

    // arrival sequence
    std::vector<TaskInstance> arrivals;
    if (!cfg.workload.tasks.empty()) {
        if (cfg.arrivals) {
            ArrivalProcess proc = parse_arrivals(*cfg.arrivals);
            proc.task_count = static_cast<int>(cfg.workload.tasks.size());
            for (const auto& a : generate_arrivals(proc, cfg.max_time))
                arrivals.push_back({static_cast<int>(arrivals.size()), a.task, a.time});
        } else {
            for (std::size_t k = 0; k < cfg.workload.tasks.size(); ++k)
                arrivals.push_back({static_cast<int>(k), static_cast<int>(k), cfg.workload.tasks[k].arrival});
            std::stable_sort(arrivals.begin(), arrivals.end(),
                             [](const TaskInstance& a, const TaskInstance& b) { return a.arrival < b.arrival; });
        }
    }

    fs::create_directories(out_dir);
    RunMeta meta;
    meta.epoch_ms = cfg.epoch_dt * 1e3;
    meta.ambient_k = net.ambient_temperature();
    meta.grid_rows = net.grid_rows();
    meta.grid_cols = net.grid_cols();
    meta.cores = ncores;
    for (const auto& st : sys.stacks()) {
        const auto lcf = write_stack(st, out_dir);
        meta.stacks.push_back({st.id, lcf.filename().string()});
    }
    for (int b = 0; b < nblocks; ++b)
        meta.blocks.push_back({net.blocks()[b].name, net.blocks()[b].component, net.blocks()[b].layer,
                               sys.blocks()[b].group});
    detail::write_file(out_dir / "config.cfg", cfg.source.serialize());
    detail::write_file(out_dir / "workload.wl", serialize_workload(cfg.workload));
    if (opt.dump_network) detail::write_file(out_dir / "network.txt", net.dump());

    std::vector<std::string> block_cols;
    for (const auto& b : net.blocks()) block_cols.push_back(b.name);
    std::vector<std::string> perf_cols;
    for (int c = 0; c < ncores; ++c)
        for (const char* k : {"ips", "util", "level", "freq_ghz"}) perf_cols.push_back(fmt::format("core{}_{}", c, k));
    TraceWriter perf_tr(out_dir / "perf.csv", perf_cols);
    TraceWriter dyn_tr(out_dir / "power_dyn.csv", block_cols);
    TraceWriter stat_tr(out_dir / "power_static.csv", block_cols);
    TraceWriter tmax_tr(out_dir / "temp_max.csv", block_cols);
    TraceWriter tmean_tr(out_dir / "temp_mean.csv", block_cols);
    EventLog events(out_dir / "events.log");

    ThermalState state;
    switch (cfg.init.mode) {
    case InitMode::Ambient:
        state = ambient_state(net);
        break;
    case InitMode::Uniform:
        state = ambient_state(net);
        std::fill(state.temperatures.begin(), state.temperatures.end(), cfg.init.temperature);
        break;
    case InitMode::Warmed:
        state = warm_start(net, cfg.init.temperature);
        break;
    }
    const TransientSolver solver(net, cfg.epoch_dt, cfg.substeps);
    const Policy policy = make_policy(cfg.governor, cfg.ondemand);

    GovernorState gov;
    gov.levels.assign(ncores, cfg.initial_level < 0 ? max_level : cfg.initial_level);
    std::vector<CoreRunState> cores(ncores);
    for (int c = 0; c < ncores; ++c) cores[c].core_id = c;
    std::vector<double> arrival_of(arrivals.size(), 0.0);
    std::deque<TaskInstance> pending;
    std::size_t next_arrival = 0;
    int running = 0;

    const long max_epochs = std::max(1L, std::lround(cfg.max_time / cfg.epoch_dt));
    const double dt_ms = cfg.epoch_dt * 1e3;
    RunResult result;
    result.dir = out_dir;

    long e = 0;
    for (; e < max_epochs; ++e) {
        const double t0 = e * cfg.epoch_dt;
        const double t0_ms = e * dt_ms;
        const double t1_ms = (e + 1) * dt_ms;

        // arrivals and mapping for this epoch
        while (next_arrival < arrivals.size() && arrivals[next_arrival].arrival <= t0 + 1e-12) {
            const auto& a = arrivals[next_arrival++];
            events.add(t0_ms, "arrive task={} app={} arrival_ms={}", a.id, cfg.workload.tasks[a.tmpl].app,
                       a.arrival * 1e3);
            pending.push_back(a);
        }
        while (!pending.empty()) {
            std::vector<char> free(ncores);
            for (int c = 0; c < ncores; ++c) free[c] = !cores[c].busy();
            auto core = map_task(free, priority);
            if (!core) break;
            const auto a = pending.front();
            pending.pop_front();
            CoreRunState& cs = cores[*core];
            cs = CoreRunState{};
            cs.core_id = *core;
            cs.app = apps[a.tmpl];
            cs.task_id = a.id;
            cs.channels = cfg.workload.tasks[a.tmpl].channels;
            if (cs.channels.empty())
                for (int ch = 0; ch < sys.memory().channels; ++ch) cs.channels.push_back(ch);
            arrival_of[a.id] = a.arrival;
            ++running;
            events.add(t0_ms, "map task={} core={}", a.id, *core);
        }

        for (int c = 0; c < ncores; ++c) {
            cores[c].vf_level = gov.levels[c];
            cores[c].frequency_ghz = cfg.core_power.vf_table[gov.levels[c]].frequency;
        }

        const EpochPerfResult perf = epoch_execute(cores, sys.memory(), cfg.epoch_dt);
        std::vector<char> active(ncores);
        for (int c = 0; c < ncores; ++c) active[c] = cores[c].busy();
        const std::vector<double> dyn = sys.dynamic_power(perf, gov.levels, running > 0);
        const std::vector<LeakageFit> fits = sys.leakage(gov.levels, active, running > 0);

        StepResult step;
        try {
            step = solver.step(state, dyn, fits);
        } catch (const ThermalRunaway& ex) {
            events.flush();
            throw ThermalRunaway(fmt::format("epoch {}: {}", e, ex.what()));
        } catch (const NumericalError& ex) {
            events.flush();
            throw NumericalError(fmt::format("epoch {}: {}", e, ex.what()));
        }
        state = std::move(step.state);

        double traced = 0.0;
        for (int b = 0; b < nblocks; ++b) traced += dyn[b] + step.static_power[b];
        if (std::abs(traced - step.injected_power) > 1e-9 * std::max(1.0, std::abs(step.injected_power)))
            throw InternalError(fmt::format("epoch {}: traced power {} W != injected {} W", e, traced,
                                            step.injected_power));

        const auto temps = block_temperatures(net, state);
        std::vector<double> tmax(nblocks), tmean(nblocks);
        for (int b = 0; b < nblocks; ++b) {
            tmax[b] = temps[b].max;
            tmean[b] = temps[b].mean;
        }

        std::vector<double> prow;
        std::vector<double> util(ncores);
        for (int c = 0; c < ncores; ++c) {
            util[c] = utilization(perf, c);
            prow.push_back(perf.cores[c].instructions / cfg.epoch_dt);
            prow.push_back(util[c]);
            prow.push_back(gov.levels[c]);
            prow.push_back(cores[c].frequency_ghz);
        }
        perf_tr.row(t1_ms, prow);
        dyn_tr.row(t1_ms, dyn);
        stat_tr.row(t1_ms, step.static_power);
        tmax_tr.row(t1_ms, tmax);
        tmean_tr.row(t1_ms, tmean);

        for (int c = 0; c < ncores; ++c) {
            const bool was_busy = cores[c].busy();
            cores[c] = advance(cores[c], perf.cores[c], t0);
            if (was_busy && !cores[c].busy()) {
                --running;
                const int id = cores[c].task_id;
                events.add(t1_ms, "complete task={} core={} arrival_ms={} finish_ms={}", id, c, arrival_of[id] * 1e3,
                           cores[c].completion_time * 1e3);
            }
        }

        // management acts on the next epoch
        double hot = -1.0;
        for (int b = 0; b < nblocks; ++b)
            if (!cfg.dtm_core_scope || sys.blocks()[b].group == BlockGroup::Core) hot = std::max(hot, tmax[b]);
        const bool was_throttled = gov.throttled;
        gov = dtm_update(hot, gov, cfg.dtm);
        if (gov.throttled != was_throttled)
            events.add(t1_ms, "{} temp_k={}", gov.throttled ? "throttle_on" : "throttle_off", hot);
        else if (!gov.throttled) {
            PolicyInput in{e, util, tmax, &gov, max_level};
            PolicyDecision d = policy(in);
            if (d.levels.size() != static_cast<std::size_t>(ncores))
                throw ConfigError(fmt::format("policy returned {} levels for {} cores", d.levels.size(), ncores));
            for (auto& l : d.levels) l = std::clamp(l, 0, max_level);
            gov.levels = std::move(d.levels);
            if (d.priority_list) priority = *d.priority_list;
        }

        if ((e + 1) % 100 == 0) {
            perf_tr.flush();
            dyn_tr.flush();
            stat_tr.flush();
            tmax_tr.flush();
            tmean_tr.flush();
            events.flush();
        }
        if (!arrivals.empty() && next_arrival == arrivals.size() && pending.empty() && running == 0) {
            result.completed = true;
            ++e;
            break;
        }
    }
    result.epochs = e;
    events.add(e * dt_ms, "end status={}", result.completed ? "completed" : "timeout");
    perf_tr.flush();
    dyn_tr.flush();
    stat_tr.flush();
    tmax_tr.flush();
    tmean_tr.flush();
    events.flush();

    meta.epochs = result.epochs;
    meta.status = result.completed ? "completed" : "timeout";
    detail::write_file(out_dir / "run.meta", serialize_meta(meta));
    return result;
}

}  // namespace thermiq
