#include "thermiq/simcontrol.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <set>
#include <thread>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "text_util.hpp"
#include "thermiq/config.hpp"
#include "thermiq/engine.hpp"
#include "thermiq/error.hpp"
#include "thermiq/trace.hpp"

namespace thermiq {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Metrics

namespace {

// value of `key=` on an events.log line
std::optional<double> event_field(std::string_view line, std::string_view key) {
    for (auto tok : detail::split_ws(line)) {
        if (tok.size() > key.size() && tok.substr(0, key.size()) == key && tok[key.size()] == '=') {
            double v = 0.0;
            if (detail::try_parse_double(tok.substr(key.size() + 1), v)) return v;
        }
    }
    return std::nullopt;
}

}  // namespace

RunSummary collect_metrics(const fs::path& dir) {
    const RunMeta meta = read_meta(dir / "run.meta");
    RunSummary s;
    s.name = dir.filename().string();
    s.status = meta.status;
    s.epochs = meta.epochs;

    const CsvTable perf = read_csv(dir / "perf.csv");
    const CsvTable dyn = read_csv(dir / "power_dyn.csv");
    const CsvTable stat = read_csv(dir / "power_static.csv");
    const CsvTable tmax = read_csv(dir / "temp_max.csv");
    const CsvTable tmean = read_csv(dir / "temp_mean.csv");

    std::vector<std::string> names;
    for (const auto& b : meta.blocks) names.push_back(b.name);
    for (const auto* t : {&dyn, &stat, &tmax, &tmean}) {
        if (t->columns != names) throw IntegrityError(fmt::format("{}: trace columns do not match run.meta", dir.string()));
        if (static_cast<long>(t->rows.size()) != meta.epochs || t->time_ms != perf.time_ms)
            throw IntegrityError(fmt::format("{}: traces are misaligned ({} rows, {} epochs)", dir.string(),
                                             t->rows.size(), meta.epochs));
    }
    if (static_cast<long>(perf.rows.size()) != meta.epochs)
        throw IntegrityError(fmt::format("{}: perf trace has {} rows, expected {}", dir.string(), perf.rows.size(),
                                         meta.epochs));

    s.peak_core_k = s.peak_memory_k = meta.ambient_k;
    const double dt = meta.epoch_ms * 1e-3;
    for (std::size_t r = 0; r < tmax.rows.size(); ++r) {
        for (std::size_t b = 0; b < names.size(); ++b) {
            double& peak = meta.blocks[b].group == BlockGroup::Core ? s.peak_core_k : s.peak_memory_k;
            peak = std::max(peak, tmax.rows[r][b]);
            s.energy_j += (dyn.rows[r][b] + stat.rows[r][b]) * dt;
        }
    }

    const fs::path ev = dir / "events.log";
    if (!fs::exists(ev)) throw IntegrityError("missing " + ev.string());
    const std::string ev_text = detail::read_file(ev);
    for (auto line : detail::split_lines(ev_text)) {
        auto f = detail::split_ws(line);
        if (f.size() < 2) continue;
        if (f[1] == "throttle_off") ++s.throttle_cycles;
        if (f[1] == "complete") {
            auto a = event_field(line, "arrival_ms");
            auto c = event_field(line, "finish_ms");
            if (!a || !c) throw IntegrityError(fmt::format("{}: malformed completion event", ev.string()));
            s.response_times.push_back((*c - *a) * 1e-3);
        }
    }
    return s;
}

std::string format_summary(const RunSummary& s) {
    std::string out;
    out += fmt::format("name {}\nstatus {}\nepochs {}\n", s.name, s.status, s.epochs);
    out += fmt::format("peak_core_k {:.4f}\npeak_memory_k {:.4f}\nenergy_j {:.6g}\n", s.peak_core_k, s.peak_memory_k,
                       s.energy_j);
    out += fmt::format("throttle_cycles {}\n", s.throttle_cycles);
    out += "response_times_s";
    for (double r : s.response_times) out += fmt::format(" {:.6g}", r);
    out += "\n";
    if (!s.error.empty()) out += fmt::format("error {}\n", s.error);
    return out;
}

std::string summaries_csv(const std::vector<RunSummary>& runs) {
    std::string out = "run,status,epochs,peak_core_k,peak_memory_k,energy_j,throttle_cycles,mean_response_s\n";
    for (const auto& s : runs) {
        double mean = 0.0;
        for (double r : s.response_times) mean += r;
        if (!s.response_times.empty()) mean /= s.response_times.size();
        out += fmt::format("{},{},{},{:.4f},{:.4f},{:.6g},{},{:.6g}\n", s.name, s.status, s.epochs, s.peak_core_k,
                           s.peak_memory_k, s.energy_j, s.throttle_cycles, mean);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Batch

namespace {

const std::set<std::string> kPathKeys = {"workload", "system.core_template"};

std::string resolve_value(const std::string& key, const std::string& value, const fs::path& base_dir) {
    if (base_dir.empty()) return value;
    if (kPathKeys.count(key)) {
        fs::path p(value);
        return fs::absolute(p.is_relative() ? base_dir / p : p).lexically_normal().string();
    }
    if (key == "system.stacks") {
        std::vector<std::string> parts;
        for (auto item : detail::split(value, ',')) {
            fs::path p(std::string(detail::trim(item)));
            parts.push_back(fs::absolute(p.is_relative() ? base_dir / p : p).lexically_normal().string());
        }
        return fmt::format("{}", fmt::join(parts, ", "));
    }
    if (key == "arrivals" && value.rfind("explicit:", 0) == 0) {
        fs::path p(value.substr(9));
        return "explicit:" + fs::absolute(p.is_relative() ? base_dir / p : p).lexically_normal().string();
    }
    return value;
}

std::string label(const std::string& key, const std::string& value) {
    std::string v = value;
    if (kPathKeys.count(key)) v = fs::path(value).stem().string();
    std::string out = fmt::format("{}={}", key, v);
    for (char& ch : out)
        if (ch == '/' || ch == ' ' || ch == ':' || ch == ',') ch = '-';
    return out;
}

}  // namespace

BatchSpec BatchSpec::parse(std::string_view text, const std::string& source, const fs::path& base_dir) {
    const Config c = Config::parse(text, source, base_dir);
    const auto& known = known_config_keys();
    auto check_key = [&](const std::string& key, int line) {
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ConfigError(fmt::format("{}:{}: override of unknown key '{}'", source, line, key));
    };

    BatchSpec spec;
    std::vector<std::pair<std::string, std::vector<std::string>>> matrix;
    std::map<std::string, BatchRun> explicit_runs;
    std::vector<std::string> explicit_order;
    for (const auto& [key, e] : c.entries()) {
        if (key == "base") {
            spec.base = *c.get_path("base");
        } else if (key == "out") {
            spec.out_root = *c.get_path("out");
        } else if (key == "jobs") {
            spec.jobs = c.get_int("jobs", 1);
        } else if (key.rfind("matrix.", 0) == 0) {
            const std::string k = key.substr(7);
            check_key(k, e.line);
            std::vector<std::string> values;
            for (auto v : detail::split(e.value, ','))
                if (!v.empty()) values.push_back(resolve_value(k, std::string(v), base_dir));
            if (values.empty()) throw ConfigError(fmt::format("{}:{}: matrix key without values", source, e.line));
            matrix.emplace_back(k, std::move(values));
        } else if (key.rfind("run ", 0) == 0) {
            const auto dot = key.find('.');
            if (dot == std::string::npos) throw ConfigError(fmt::format("{}:{}: bad run entry", source, e.line));
            const std::string name(detail::trim(std::string_view(key).substr(4, dot - 4)));
            const std::string k = key.substr(dot + 1);
            check_key(k, e.line);
            if (!explicit_runs.count(name)) explicit_order.push_back(name);
            auto& r = explicit_runs[name];
            r.name = name;
            r.overrides.emplace_back(k, resolve_value(k, e.value, base_dir));
        } else {
            throw ConfigError(fmt::format("{}:{}: unknown batch key '{}'", source, e.line, key));
        }
    }
    if (spec.base.empty()) throw ConfigError(source + ": batch spec needs 'base'");
    if (spec.out_root.empty()) throw ConfigError(source + ": batch spec needs 'out'");
    if (spec.jobs < 1) throw ConfigError(source + ": jobs must be >= 1");

    if (!matrix.empty()) {
        std::vector<std::size_t> idx(matrix.size(), 0);
        while (true) {
            BatchRun r;
            std::vector<std::string> parts;
            for (std::size_t k = 0; k < matrix.size(); ++k) {
                r.overrides.emplace_back(matrix[k].first, matrix[k].second[idx[k]]);
                parts.push_back(label(matrix[k].first, matrix[k].second[idx[k]]));
            }
            r.name = fmt::format("{}", fmt::join(parts, "_"));
            spec.runs.push_back(std::move(r));
            std::size_t k = matrix.size();
            while (k > 0) {
                --k;
                if (++idx[k] < matrix[k].second.size()) break;
                idx[k] = 0;
                if (k == 0) goto done;
            }
        }
    done:;
    }
    for (const auto& n : explicit_order) spec.runs.push_back(explicit_runs[n]);
    if (spec.runs.empty()) spec.runs.push_back(BatchRun{"base", {}});

    std::set<std::string> names;
    for (const auto& r : spec.runs)
        if (!names.insert(r.name).second) throw ConfigError(fmt::format("{}: duplicate run name '{}'", source, r.name));
    return spec;
}

BatchSpec BatchSpec::load(const fs::path& path) {
    return parse(detail::read_file(path), path.string(), path.parent_path());
}

std::vector<RunSummary> run_batch(const BatchSpec& spec, const BatchOptions& opt) {
    const int jobs = opt.jobs > 0 ? opt.jobs : spec.jobs;
    fs::create_directories(spec.out_root);
    for (const auto& r : spec.runs) {
        const fs::path d = spec.out_root / r.name;
        if (fs::exists(d)) {
            if (!opt.force) throw Error(fmt::format("run folder {} exists; use --force to replace it", d.string()));
            fs::remove_all(d);
        }
    }

    std::vector<RunSummary> out(spec.runs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < spec.runs.size(); i = next++) {
            const BatchRun& r = spec.runs[i];
            const fs::path dir = spec.out_root / r.name;
            RunSummary s;
            try {
                Config c = Config::load(spec.base);
                for (const auto& [k, v] : r.overrides) c.set(k, v);
                run(SimConfig::from_config(c), dir);
                s = collect_metrics(dir);
            } catch (const std::exception& e) {
                s = RunSummary{};
                s.status = "failed";
                s.error = e.what();
                fs::create_directories(dir);
                detail::write_file(dir / "error.txt", std::string(e.what()) + "\n");
            }
            s.name = r.name;
            detail::write_file(dir / "summary.txt", format_summary(s));
            out[i] = std::move(s);
        }
    };
    std::vector<std::thread> pool;
    for (int j = 1; j < std::min<int>(jobs, static_cast<int>(spec.runs.size())); ++j) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    detail::write_file(spec.out_root / "summary.csv", summaries_csv(out));
    std::string report;
    for (const auto& s : out) report += format_summary(s) + "\n";
    detail::write_file(spec.out_root / "report.txt", report);
    return out;
}

// ---------------------------------------------------------------------------
// Smoke suite

namespace {

constexpr const char* kSmokeWorkload = R"(# micro workload: one compute-leaning and one memory-leaning app
app spin
phase 3e7 1.0 0.5 0.7 0.9
app stream
phase 8e6 0.8 20 0.6 0.5
task spin x2
task stream x2
)";

Config smoke_config(const std::string& kind, bool dtm, int core_layers, const fs::path& workload) {
    Config c;
    c.set("workload", workload.string());
    c.set("governor", "ondemand");
    c.set("system.kind", kind);
    c.set("system.cores", "2");
    c.set("system.core_size", "3e-3x3e-3");
    c.set("system.core_layers", std::to_string(core_layers));
    c.set("system.banks", "2x2");
    c.set("system.bank_size", "1.5e-3x1.5e-3");
    c.set("system.mem_layers", kind == "2d-ext" ? "1" : "2");
    c.set("thermal.grid", "4x4");
    c.set("memory.channels", "2");
    c.set("dtm.enabled", dtm ? "yes" : "no");
    c.set("dtm.trigger_c", "47");
    c.set("dtm.resume_c", "46.5");
    c.set("sim.max_time_ms", "20");
    c.set("sim.init", "uniform:46");
    return c;
}

bool same_tree(const fs::path& a, const fs::path& b, std::string& diff) {
    std::set<std::string> names;
    for (const auto& e : fs::directory_iterator(a)) names.insert(e.path().filename().string());
    for (const auto& e : fs::directory_iterator(b)) names.insert(e.path().filename().string());
    for (const auto& n : names) {
        if (!fs::exists(a / n) || !fs::exists(b / n)) {
            diff = n + " missing in one run";
            return false;
        }
        if (detail::read_file(a / n) != detail::read_file(b / n)) {
            diff = n + " differs between reruns";
            return false;
        }
    }
    return true;
}

void check_run(const fs::path& dir) {
    const RunSummary s = collect_metrics(dir);
    const RunMeta meta = read_meta(dir / "run.meta");
    if (s.epochs < 1) throw ValidationError("no epochs simulated");
    if (!(s.energy_j > 0.0)) throw ValidationError("no energy dissipated");
    const CsvTable t = read_csv(dir / "temp_max.csv");
    for (const auto& row : t.rows)
        for (double v : row)
            if (!(v >= meta.ambient_k - 1e-9)) throw ValidationError("temperature below ambient");
    const CsvTable perf = read_csv(dir / "perf.csv");
    for (const auto& row : perf.rows)
        for (std::size_t k = 1; k < row.size(); k += 4)
            if (row[k] < 0.0 || row[k] > 1.0) throw ValidationError("utilization outside [0, 1]");
}

}  // namespace

std::vector<SmokeCase> run_smoke_suite(const SmokeOptions& opt) {
    fs::create_directories(opt.work_dir);
    const fs::path wl = fs::absolute(opt.work_dir / "micro.wl");
    detail::write_file(wl, kSmokeWorkload);

    std::vector<SmokeCase> out;
    for (const std::string kind : {"2d-ext", "3d-ext", "2.5d", "3d-stacked"}) {
        for (bool dtm : {true, false}) {
            for (int cl : {1, 2}) {
                SmokeCase sc;
                sc.name = fmt::format("{}/dtm-{}/cl{}", kind, dtm ? "on" : "off", cl);
                sc.tags = {kind, dtm ? "dtm-on" : "dtm-off", fmt::format("cl{}", cl)};
                bool selected = true;
                for (const auto& f : opt.filter)
                    if (std::find(sc.tags.begin(), sc.tags.end(), f) == sc.tags.end()) selected = false;
                if (!selected) continue;

                std::string dirname = sc.name;
                std::replace(dirname.begin(), dirname.end(), '/', '_');
                const fs::path dir = opt.work_dir / dirname;
                fs::remove_all(dir);
                fs::create_directories(dir);
                const auto start = std::chrono::steady_clock::now();
                try {
                    const SimConfig cfg = SimConfig::from_config(smoke_config(kind, dtm, cl, wl));
                    bool rejected = false;
                    if (kind == "2d-ext" && cl > 1) {
                        // a single-layer 2D die cannot hold two core layers
                        try {
                            build_stack(cfg.stack);
                        } catch (const InvalidArgument& e) {
                            rejected = true;
                            sc.message = fmt::format("rejected as expected: {}", e.what());
                        }
                        if (!rejected) throw ValidationError("multi-layer 2d-ext configuration was accepted");
                    }
                    if (!rejected) {
                        if (opt.fault_case == sc.name) {
                            const System sys(cfg);
                            auto edges = sys.network().edges();
                            edges.front().g = -edges.front().g;
                            ThermalNetwork::from_parts(edges, sys.network().ambient_coupling(),
                                                       sys.network().capacitance(), sys.network().blocks(),
                                                       sys.network().ambient_temperature());
                        }
                        run(cfg, dir / "a");
                        run(cfg, dir / "b");
                        std::string diff;
                        if (!same_tree(dir / "a", dir / "b", diff)) throw ValidationError(diff);
                        check_run(dir / "a");
                        sc.message = "ok";
                    }
                    sc.passed = true;
                } catch (const std::exception& e) {
                    sc.passed = false;
                    sc.message = e.what();
                    detail::write_file(dir / "error.log", std::string(e.what()) + "\n");
                }
                sc.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
                out.push_back(std::move(sc));
            }
        }
    }
    return out;
}

std::string format_smoke_report(const std::vector<SmokeCase>& cases) {
    std::string out;
    int passed = 0;
    for (const auto& c : cases) {
        out += fmt::format("{} {:<24} {:6.2f}s  {}\n", c.passed ? "PASS" : "FAIL", c.name, c.seconds, c.message);
        passed += c.passed;
    }
    out += fmt::format("{}/{} cases passed\n", passed, cases.size());
    return out;
}

}  // namespace thermiq
