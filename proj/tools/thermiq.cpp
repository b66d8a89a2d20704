// thermiq command-line front end.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "thermiq/engine.hpp"
#include "thermiq/error.hpp"
#include "thermiq/floorplan.hpp"
#include "thermiq/heatview.hpp"
#include "thermiq/simcontrol.hpp"

namespace fs = std::filesystem;
using namespace thermiq;

namespace {

std::pair<double, double> parse_dims(const std::string& s, const std::string& what) {
    auto x = s.find('x');
    try {
        if (x == std::string::npos) throw std::invalid_argument(s);
        return {std::stod(s.substr(0, x)), std::stod(s.substr(x + 1))};
    } catch (const std::exception&) {
        throw InvalidArgument(fmt::format("{} expects AxB, got '{}'", what, s));
    }
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        auto comma = s.find(',', start);
        auto item = s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        if (!item.empty()) out.push_back(item);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"thermiq: interval thermal co-simulation of processor-memory stacks"};
    app.require_subcommand(1);

    // floorplan
    auto* fp = app.add_subcommand("floorplan", "Generate floorplans and layer files for a stack configuration");
    std::string kind, core_size = "4e-3x4e-3", banks = "4x4", bank_size = "2e-3x2e-3", core_template, fp_out;
    int cores = 4, mem_layers = 8, core_layers = 1;
    double gap = 1e-3;
    fp->add_option("--kind", kind, "2d-ext, 3d-ext, 2.5d or 3d-stacked")->required();
    fp->add_option("--cores", cores, "cores per core layer")->required();
    fp->add_option("--core-size", core_size, "core width x height in meters, e.g. 4e-3x4e-3");
    fp->add_option("--banks", banks, "memory banks per layer as RxC");
    fp->add_option("--bank-size", bank_size, "bank width x height in meters");
    fp->add_option("--mem-layers", mem_layers, "memory layers");
    fp->add_option("--core-layers", core_layers, "core layers");
    fp->add_option("--gap", gap, "core-to-memory spacing for 2.5d, meters");
    fp->add_option("--core-template", core_template, "per-core .flp replicated for every core");
    fp->add_option("--out", fp_out, "output directory")->required();

    // run
    auto* rn = app.add_subcommand("run", "Run one simulation");
    std::string run_cfg, run_out;
    bool dump = false;
    rn->add_option("--config", run_cfg, "simulation config")->required();
    rn->add_option("--out", run_out, "output directory (default: run_<config stem>)");
    rn->add_flag("--dump-network", dump, "write the G and C matrices to network.txt");

    // batch
    auto* bt = app.add_subcommand("batch", "Run a batch of simulations");
    std::string batch_spec;
    int jobs = 0;
    bool force = false;
    bt->add_option("--spec", batch_spec, "batch spec file")->required();
    bt->add_option("-j,--jobs", jobs, "parallel runs (default: spec value)");
    bt->add_flag("--force", force, "replace existing run folders");

    // metrics
    auto* mt = app.add_subcommand("metrics", "Summarize the traces of a run directory");
    std::string metrics_dir;
    mt->add_option("run_dir", metrics_dir, "run directory")->required();

    // smoke
    auto* sm = app.add_subcommand("smoke", "Run the smoke-test matrix");
    std::string filter, work = "smoke_out", fault;
    sm->add_option("--filter", filter, "comma-separated tags, e.g. 2.5d,dtm-on");
    sm->add_option("--work", work, "scratch directory");
    sm->add_option("--inject-fault", fault, "case name that gets a negative conductance");

    // heatview
    auto* hv = app.add_subcommand("heatview", "Render temperature frames of a run");
    std::string hv_run, hv_out, layers;
    int every = 1, px = 16;
    double tmin = 0.0, tmax = 0.0;
    hv->add_option("--run", hv_run, "run directory")->required();
    hv->add_option("--every", every, "render one of every N epochs");
    auto* tmin_opt = hv->add_option("--tmin", tmin, "colour scale minimum, Celsius");
    auto* tmax_opt = hv->add_option("--tmax", tmax, "colour scale maximum, Celsius");
    hv->add_option("--layers", layers, "layer indices or stack:layer, comma-separated");
    hv->add_option("--pixels", px, "pixels per millimetre");
    hv->add_option("--out", hv_out, "frame directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*fp) {
            StackConfig sc;
            sc.kind = parse_stack_kind(kind);
            sc.cores = cores;
            std::tie(sc.core_width, sc.core_height) = parse_dims(core_size, "--core-size");
            auto b = parse_dims(banks, "--banks");
            sc.mem_banks_y = static_cast<int>(b.first);
            sc.mem_banks_x = static_cast<int>(b.second);
            std::tie(sc.bank_width, sc.bank_height) = parse_dims(bank_size, "--bank-size");
            sc.mem_layers = mem_layers;
            sc.core_layers = core_layers;
            sc.gap_2_5d = gap;
            if (!core_template.empty()) sc.core_template = load_floorplan(core_template);
            fs::create_directories(fp_out);
            for (const auto& st : build_stack(sc)) {
                const auto path = write_stack(st, fp_out);
                std::cout << fmt::format("{}: {} layers, {} active\n", path.string(), st.layers.size(),
                                         st.active_layers().size());
            }
        } else if (*rn) {
            const SimConfig cfg = SimConfig::load(run_cfg);
            const fs::path out = run_out.empty() ? fs::path("run_" + fs::path(run_cfg).stem().string()) : fs::path(run_out);
            const RunResult r = run(cfg, out, RunOptions{dump});
            std::cout << fmt::format("{} epochs, {}; traces in {}\n", r.epochs, r.completed ? "completed" : "timeout",
                                     out.string());
        } else if (*bt) {
            const auto runs = run_batch(BatchSpec::load(batch_spec), BatchOptions{jobs, force});
            std::cout << summaries_csv(runs);
            for (const auto& r : runs)
                if (r.status == "failed") return 1;
        } else if (*mt) {
            std::cout << format_summary(collect_metrics(metrics_dir));
        } else if (*sm) {
            SmokeOptions opt;
            opt.filter = split_list(filter);
            opt.work_dir = work;
            opt.fault_case = fault;
            const auto cases = run_smoke_suite(opt);
            std::cout << format_smoke_report(cases);
            for (const auto& c : cases)
                if (!c.passed) return 1;
        } else if (*hv) {
            RenderConfig rc;
            if (tmin_opt->count()) rc.t_min = tmin + 273.15;
            if (tmax_opt->count()) rc.t_max = tmax + 273.15;
            rc.sampling_every = every;
            rc.cell_pixels = px;
            rc.layers = split_list(layers);
            const auto s = render_run(hv_run, rc, hv_out);
            std::cout << fmt::format("{} frames, scale {:.2f}..{:.2f} K{}\n", s.frames, s.t_min, s.t_max,
                                     s.auto_scaled ? " (auto)" : "");
        }
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
