#include "thermiq/floorplan.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "thermiq/error.hpp"
#include "text_util.hpp"

namespace thermiq {

namespace {

constexpr double kAreaTolerance = 1e-12;
// relative slack for "inside the bounding box" checks on generated coordinates
constexpr double kEdgeTolerance = 1e-12;

Floorplan rename_with_offset(Floorplan fp, int offset) {
    for (auto& b : fp.blocks) {
        auto pos = b.name.rfind('_');
        int local = std::stoi(b.name.substr(pos + 1));
        b.name = b.name.substr(0, pos + 1) + std::to_string(local + offset);
    }
    return fp;
}

Floorplan shifted(Floorplan fp, double dx, double dy) {
    for (auto& b : fp.blocks) {
        b.x += dx;
        b.y += dy;
    }
    return fp;
}

LayerSpec make_layer(LayerKind kind, double thickness, double k, double c,
                     std::optional<Floorplan> fp = std::nullopt) {
    LayerSpec l;
    l.kind = kind;
    l.thickness = thickness;
    l.conductivity = k;
    l.volumetric_heat_capacity = c;
    l.dissipates_power = fp.has_value() && !fp->blocks.empty() && kind != LayerKind::Tim &&
                         kind != LayerKind::Interposer && kind != LayerKind::Spreader;
    l.floorplan = std::move(fp);
    return l;
}

struct LayerFactory {
    const Materials& m;

    LayerSpec die(LayerKind kind, Floorplan fp) const {
        return make_layer(kind, m.die_thickness, m.silicon_conductivity, m.silicon_capacity,
                          std::move(fp));
    }
    LayerSpec bond() const {
        return make_layer(LayerKind::Tim, m.bond_thickness, m.bond_conductivity, m.bond_capacity);
    }
    LayerSpec tim() const {
        return make_layer(LayerKind::Tim, m.tim_thickness, m.tim_conductivity, m.tim_capacity);
    }
    LayerSpec spreader() const {
        return make_layer(LayerKind::Spreader, m.spreader_thickness, m.spreader_conductivity,
                          m.spreader_capacity);
    }
    LayerSpec interposer() const {
        return make_layer(LayerKind::Interposer, m.interposer_thickness, m.silicon_conductivity,
                          m.silicon_capacity);
    }
};

void finalize(Stack& s, double die_w, double die_h) {
    for (std::size_t i = 0; i < s.layers.size(); ++i) {
        auto& l = s.layers[i];
        l.index = static_cast<int>(i);
        if (l.floorplan) {
            l.floorplan->width = die_w;
            l.floorplan->height = die_h;
            l.floorplan->validate();
        }
        l.validate();
    }
}

}  // namespace

double overlap_area(const Block& a, const Block& b) {
    double w = std::min(a.right(), b.right()) - std::max(a.x, b.x);
    double h = std::min(a.top(), b.top()) - std::max(a.y, b.y);
    if (w <= 0.0 || h <= 0.0) return 0.0;
    return w * h;
}

const Block* Floorplan::find(std::string_view name) const {
    for (const auto& b : blocks)
        if (b.name == name) return &b;
    return nullptr;
}

double Floorplan::block_area() const {
    double a = 0.0;
    for (const auto& b : blocks) a += b.area();
    return a;
}

void Floorplan::validate() const {
    if (!(width > 0.0) || !(height > 0.0))
        throw ValidationError("floorplan bounding box must be positive");
    std::set<std::string_view> names;
    const double tol_w = width * kEdgeTolerance;
    const double tol_h = height * kEdgeTolerance;
    for (const auto& b : blocks) {
        if (b.name.empty()) throw ValidationError("block with empty name");
        if (!(b.width > 0.0) || !(b.height > 0.0))
            throw ValidationError(fmt::format("block '{}' has non-positive extent", b.name));
        if (b.x < 0.0 || b.y < 0.0)
            throw ValidationError(fmt::format("block '{}' has negative position", b.name));
        if (b.right() > width + tol_w || b.top() > height + tol_h)
            throw ValidationError(fmt::format("block '{}' lies outside the die", b.name));
        if (!names.insert(b.name).second)
            throw ValidationError(fmt::format("duplicate block name '{}'", b.name));
    }
    for (std::size_t i = 0; i < blocks.size(); ++i)
        for (std::size_t j = i + 1; j < blocks.size(); ++j)
            if (overlap_area(blocks[i], blocks[j]) > kAreaTolerance)
                throw ValidationError(fmt::format("blocks '{}' and '{}' overlap", blocks[i].name,
                                                  blocks[j].name));
}

Floorplan generate_grid_floorplan(int rows, int cols, double cell_w, double cell_h,
                                  const std::string& prefix) {
    if (rows < 1 || cols < 1) throw InvalidArgument("grid floorplan needs rows, cols >= 1");
    if (!(cell_w > 0.0) || !(cell_h > 0.0))
        throw InvalidArgument("grid floorplan cell dimensions must be positive");
    Floorplan fp;
    fp.width = cols * cell_w;
    fp.height = rows * cell_h;
    fp.blocks.reserve(static_cast<std::size_t>(rows) * cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            fp.blocks.push_back({fmt::format("{}_{}", prefix, r * cols + c), c * cell_w,
                                 r * cell_h, cell_w, cell_h});
    return fp;
}

Floorplan replicate_core_template(const Floorplan& tmpl, int rows, int cols) {
    if (tmpl.blocks.empty()) throw InvalidArgument("core template is empty");
    if (rows < 1 || cols < 1) throw InvalidArgument("template replication needs rows, cols >= 1");
    try {
        tmpl.validate();
    } catch (const ValidationError& e) {
        throw InvalidArgument(std::string("invalid core template: ") + e.what());
    }
    Floorplan fp;
    fp.width = cols * tmpl.width;
    fp.height = rows * tmpl.height;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const int k = r * cols + c;
            for (const auto& b : tmpl.blocks)
                fp.blocks.push_back({fmt::format("{}_{}", b.name, k), b.x + c * tmpl.width,
                                     b.y + r * tmpl.height, b.width, b.height});
        }
    }
    return fp;
}

std::string_view to_string(LayerKind kind) {
    switch (kind) {
    case LayerKind::ActiveCore: return "ACTIVE_CORE";
    case LayerKind::ActiveMemory: return "ACTIVE_MEMORY";
    case LayerKind::LogicCoreLayer: return "LOGIC_CORE_LAYER";
    case LayerKind::Tim: return "TIM";
    case LayerKind::Interposer: return "INTERPOSER";
    case LayerKind::Spreader: return "SPREADER";
    }
    return "?";
}

LayerKind parse_layer_kind(std::string_view text) {
    for (auto k : {LayerKind::ActiveCore, LayerKind::ActiveMemory, LayerKind::LogicCoreLayer,
                   LayerKind::Tim, LayerKind::Interposer, LayerKind::Spreader})
        if (to_string(k) == text) return k;
    throw InvalidArgument(fmt::format("unknown layer kind '{}'", text));
}

void LayerSpec::validate() const {
    if (!(thickness > 0.0)) throw ValidationError(fmt::format("layer {}: thickness must be > 0", index));
    if (!(conductivity > 0.0))
        throw ValidationError(fmt::format("layer {}: conductivity must be > 0", index));
    if (!(volumetric_heat_capacity > 0.0))
        throw ValidationError(fmt::format("layer {}: heat capacity must be > 0", index));
    const bool active = kind == LayerKind::ActiveCore || kind == LayerKind::ActiveMemory ||
                        kind == LayerKind::LogicCoreLayer;
    if (dissipates_power && !active)
        throw ValidationError(
            fmt::format("layer {}: {} layers cannot dissipate power", index, to_string(kind)));
    if (dissipates_power && !floorplan)
        throw ValidationError(fmt::format("layer {}: dissipating layer needs a floorplan", index));
    if (floorplan) floorplan->validate();
}

std::string_view to_string(StackKind kind) {
    switch (kind) {
    case StackKind::Ext2D: return "2d-ext";
    case StackKind::Ext3D: return "3d-ext";
    case StackKind::Interposed25D: return "2.5d";
    case StackKind::Stacked3D: return "3d-stacked";
    }
    return "?";
}

StackKind parse_stack_kind(std::string_view text) {
    for (auto k : {StackKind::Ext2D, StackKind::Ext3D, StackKind::Interposed25D, StackKind::Stacked3D})
        if (to_string(k) == text) return k;
    throw InvalidArgument(fmt::format("unknown stack kind '{}'", text));
}

void StackConfig::validate() const {
    if (cores < 1) throw InvalidArgument("need at least one core");
    if (core_layers < 1) throw InvalidArgument("need at least one core layer");
    if (mem_layers < 1) throw InvalidArgument("need at least one memory layer");
    if (mem_banks_x < 1 || mem_banks_y < 1) throw InvalidArgument("bank grid must be >= 1x1");
    if (!core_template && (!(core_width > 0.0) || !(core_height > 0.0)))
        throw InvalidArgument("core dimensions must be positive");
    if (!(bank_width > 0.0) || !(bank_height > 0.0))
        throw InvalidArgument("bank dimensions must be positive");
    if (gap_2_5d < 0.0) throw InvalidArgument("2.5D gap must be >= 0");
    if (kind == StackKind::Ext2D && core_layers > 1)
        throw InvalidArgument("2d-ext supports a single core layer only");
    if (kind == StackKind::Ext2D && mem_layers > 1)
        throw InvalidArgument("2d-ext memory is a single DRAM layer");
}

std::vector<const LayerSpec*> Stack::active_layers() const {
    std::vector<const LayerSpec*> out;
    for (const auto& l : layers)
        if (l.dissipates_power) out.push_back(&l);
    return out;
}

std::pair<int, int> core_grid_shape(int n) {
    int rows = static_cast<int>(std::floor(std::sqrt(static_cast<double>(n))));
    while (rows > 1 && n % rows != 0) --rows;
    return {rows, n / rows};
}

std::string core_block_name(int core) { return fmt::format("C_{}", core); }
std::string bank_block_name(int mem_layer, int bank) { return fmt::format("MEM{}_{}", mem_layer, bank); }

std::vector<Stack> build_stack(const StackConfig& cfg) {
    cfg.validate();
    const LayerFactory f{cfg.materials};
    const auto [crows, ccols] = core_grid_shape(cfg.cores);

    auto core_layer_fp = [&](int layer) {
        Floorplan fp = cfg.core_template
                           ? replicate_core_template(*cfg.core_template, crows, ccols)
                           : generate_grid_floorplan(crows, ccols, cfg.core_width, cfg.core_height, "C");
        return rename_with_offset(std::move(fp), layer * cfg.cores);
    };
    auto mem_layer_fp = [&](int layer) {
        return generate_grid_floorplan(cfg.mem_banks_y, cfg.mem_banks_x, cfg.bank_width,
                                       cfg.bank_height, fmt::format("MEM{}", layer));
    };
    const Floorplan core0 = core_layer_fp(0);
    const double core_w = core0.width, core_h = core0.height;
    const double mem_w = cfg.mem_banks_x * cfg.bank_width;
    const double mem_h = cfg.mem_banks_y * cfg.bank_height;
    auto logic_fp = [&] {
        Floorplan fp;
        fp.width = mem_w;
        fp.height = mem_h;
        fp.blocks.push_back({std::string(kLogicBlock), 0.0, 0.0, mem_w, mem_h});
        return fp;
    };

    auto core_stack = [&] {
        Stack s{"core", {}, false};
        for (int j = 0; j < cfg.core_layers; ++j) {
            if (j > 0) s.layers.push_back(f.bond());
            s.layers.push_back(f.die(LayerKind::ActiveCore, core_layer_fp(j)));
        }
        s.layers.push_back(f.tim());
        s.layers.push_back(f.spreader());
        finalize(s, core_w, core_h);
        return s;
    };

    std::vector<Stack> out;
    switch (cfg.kind) {
    case StackKind::Ext2D: {
        out.push_back(core_stack());
        Stack mem{"mem", {}, true};
        mem.layers.push_back(f.die(LayerKind::ActiveMemory, mem_layer_fp(0)));
        finalize(mem, mem_w, mem_h);
        out.push_back(std::move(mem));
        break;
    }
    case StackKind::Ext3D: {
        out.push_back(core_stack());
        Stack mem{"mem", {}, false};
        mem.layers.push_back(f.die(LayerKind::LogicCoreLayer, logic_fp()));
        for (int l = 0; l < cfg.mem_layers; ++l) {
            mem.layers.push_back(f.bond());
            mem.layers.push_back(f.die(LayerKind::ActiveMemory, mem_layer_fp(l)));
        }
        mem.layers.push_back(f.tim());
        mem.layers.push_back(f.spreader());
        finalize(mem, mem_w, mem_h);
        out.push_back(std::move(mem));
        break;
    }
    case StackKind::Interposed25D: {
        // Core die at the origin, memory cube to its right; the layers above
        // the interposer hold both sides.
        Stack s{"package", {}, false};
        s.layers.push_back(f.interposer());
        const double mem_x = core_w + cfg.gap_2_5d;
        const int levels = std::max(cfg.core_layers, cfg.mem_layers + 1);
        for (int j = 0; j < levels; ++j) {
            if (j > 0) s.layers.push_back(f.bond());
            Floorplan fp;
            LayerKind kind = LayerKind::ActiveMemory;
            if (j < cfg.core_layers) {
                fp = core_layer_fp(j);
                kind = LayerKind::ActiveCore;
            }
            if (j <= cfg.mem_layers) {
                Floorplan side = shifted(j == 0 ? logic_fp() : mem_layer_fp(j - 1), mem_x, 0.0);
                if (j >= cfg.core_layers) kind = j == 0 ? LayerKind::LogicCoreLayer : LayerKind::ActiveMemory;
                fp.blocks.insert(fp.blocks.end(), side.blocks.begin(), side.blocks.end());
            }
            s.layers.push_back(f.die(kind, std::move(fp)));
        }
        s.layers.push_back(f.tim());
        s.layers.push_back(f.spreader());
        finalize(s, mem_x + mem_w, std::max(core_h, mem_h));
        out.push_back(std::move(s));
        break;
    }
    case StackKind::Stacked3D: {
        Stack s{"package", {}, false};
        for (int l = 0; l < cfg.mem_layers; ++l) {
            if (l > 0) s.layers.push_back(f.bond());
            s.layers.push_back(f.die(LayerKind::ActiveMemory, mem_layer_fp(l)));
        }
        for (int j = 0; j < cfg.core_layers; ++j) {
            s.layers.push_back(f.bond());
            s.layers.push_back(f.die(LayerKind::ActiveCore, core_layer_fp(j)));
        }
        s.layers.push_back(f.tim());
        s.layers.push_back(f.spreader());
        finalize(s, std::max(core_w, mem_w), std::max(core_h, mem_h));
        out.push_back(std::move(s));
        break;
    }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Text formats

std::string serialize_floorplan(const Floorplan& fp) {
    std::string out = "# name\twidth\theight\tx\ty (meters)\n";
    out += fmt::format("# bounding {} {}\n", fp.width, fp.height);
    for (const auto& b : fp.blocks)
        out += fmt::format("{}\t{}\t{}\t{}\t{}\n", b.name, b.width, b.height, b.x, b.y);
    return out;
}

Floorplan parse_floorplan(std::string_view text, const std::string& source) {
    Floorplan fp;
    std::optional<std::pair<double, double>> bounding;
    int lineno = 0;
    for (auto line : detail::split_lines(text)) {
        ++lineno;
        auto trimmed = detail::trim(line);
        if (trimmed.empty()) continue;
        if (trimmed.front() == '#') {
            // "# bounding W H" preserves an explicit die size across a round trip
            auto f = detail::split_ws(trimmed.substr(1));
            if (f.size() == 3 && f[0] == "bounding")
                bounding = {detail::parse_double(f[1], source, lineno),
                            detail::parse_double(f[2], source, lineno)};
            continue;
        }
        auto f = detail::split_ws(trimmed);
        if (f.size() != 5)
            throw ParseError(source, lineno,
                             fmt::format("expected 5 fields (name width height x y), got {}", f.size()));
        Block b;
        b.name = std::string(f[0]);
        b.width = detail::parse_double(f[1], source, lineno);
        b.height = detail::parse_double(f[2], source, lineno);
        b.x = detail::parse_double(f[3], source, lineno);
        b.y = detail::parse_double(f[4], source, lineno);
        fp.blocks.push_back(std::move(b));
    }
    if (bounding) {
        fp.width = bounding->first;
        fp.height = bounding->second;
    } else {
        for (const auto& b : fp.blocks) {
            fp.width = std::max(fp.width, b.right());
            fp.height = std::max(fp.height, b.top());
        }
    }
    fp.validate();
    return fp;
}

Floorplan load_floorplan(const std::filesystem::path& path) {
    return parse_floorplan(detail::read_file(path), path.string());
}

std::string serialize_layers(const std::vector<LayerSpec>& layers,
                             const std::vector<std::string>& floorplan_names) {
    std::string out;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto& l = layers[i];
        if (i) out += '\n';
        out += fmt::format("layer {}\n", l.index);
        out += fmt::format("kind {}\n", to_string(l.kind));
        out += fmt::format("thickness {}\n", l.thickness);
        out += fmt::format("conductivity {}\n", l.conductivity);
        out += fmt::format("capacity {}\n", l.volumetric_heat_capacity);
        out += fmt::format("floorplan {}\n", l.floorplan ? floorplan_names.at(i) : "uniform");
        out += fmt::format("power {}\n", l.dissipates_power ? "yes" : "no");
    }
    return out;
}

std::vector<LayerSpec> parse_layers(std::string_view text, const std::filesystem::path& base_dir,
                                    const std::string& source) {
    std::vector<LayerSpec> layers;
    int lineno = 0;
    for (auto line : detail::split_lines(text)) {
        ++lineno;
        auto trimmed = detail::trim(line);
        if (trimmed.empty() || trimmed.front() == '#') continue;
        auto f = detail::split_ws(trimmed);
        if (f.size() != 2) throw ParseError(source, lineno, "expected '<key> <value>'");
        const auto key = f[0];
        const auto value = f[1];
        if (key == "aircooled") continue;  // stack-level directive, see load_stack
        if (key == "layer") {
            LayerSpec l;
            l.index = static_cast<int>(detail::parse_double(value, source, lineno));
            if (l.index != static_cast<int>(layers.size()))
                throw ParseError(source, lineno,
                                 fmt::format("layer index {} out of order (expected {})", l.index,
                                             layers.size()));
            layers.push_back(std::move(l));
            continue;
        }
        if (layers.empty()) throw ParseError(source, lineno, "property before first 'layer' record");
        auto& l = layers.back();
        try {
            if (key == "kind") l.kind = parse_layer_kind(value);
            else if (key == "thickness") l.thickness = detail::parse_double(value, source, lineno);
            else if (key == "conductivity") l.conductivity = detail::parse_double(value, source, lineno);
            else if (key == "capacity")
                l.volumetric_heat_capacity = detail::parse_double(value, source, lineno);
            else if (key == "floorplan") {
                if (value == "uniform") l.floorplan.reset();
                else {
                    std::filesystem::path p(value);
                    if (p.is_relative()) p = base_dir / p;
                    l.floorplan = load_floorplan(p);
                }
            } else if (key == "power") {
                if (value != "yes" && value != "no")
                    throw ParseError(source, lineno, "power must be yes or no");
                l.dissipates_power = value == "yes";
            } else {
                throw ParseError(source, lineno, fmt::format("unknown key '{}'", key));
            }
        } catch (const InvalidArgument& e) {
            throw ParseError(source, lineno, e.what());
        }
    }
    for (const auto& l : layers) l.validate();
    return layers;
}

std::vector<LayerSpec> load_layers(const std::filesystem::path& path) {
    return parse_layers(detail::read_file(path), path.parent_path(), path.string());
}

std::filesystem::path write_stack(const Stack& stack, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> names(stack.layers.size());
    for (std::size_t i = 0; i < stack.layers.size(); ++i) {
        const auto& l = stack.layers[i];
        if (!l.floorplan) continue;
        names[i] = fmt::format("{}_L{}.flp", stack.id, l.index);
        detail::write_file(dir / names[i], serialize_floorplan(*l.floorplan));
    }
    auto path = dir / (stack.id + ".lcf");
    std::string text = stack.air_cooled ? "aircooled yes\n\n" : "";
    text += serialize_layers(stack.layers, names);
    detail::write_file(path, text);
    return path;
}

Stack load_stack(const std::filesystem::path& lcf_path) {
    const auto text = detail::read_file(lcf_path);
    Stack s;
    s.id = lcf_path.stem().string();
    s.layers = parse_layers(text, lcf_path.parent_path(), lcf_path.string());
    for (auto line : detail::split_lines(text)) {
        auto f = detail::split_ws(detail::trim(line));
        if (f.size() == 2 && f[0] == "aircooled") s.air_cooled = f[1] == "yes";
    }
    return s;
}

}  // namespace thermiq
