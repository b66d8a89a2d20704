#include "thermiq/heatview.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "text_util.hpp"
#include "thermiq/error.hpp"
#include "thermiq/trace.hpp"

namespace thermiq {

namespace fs = std::filesystem;

const std::array<Rgb, 256>& colormap() {
    static const std::array<Rgb, 256> table = [] {
        std::array<Rgb, 256> t{};
        for (int i = 0; i < 256; ++i) {
            const int g = (255 - std::abs(2 * i - 255)) / 2;
            t[i] = Rgb{static_cast<std::uint8_t>(i), static_cast<std::uint8_t>(g), static_cast<std::uint8_t>(255 - i)};
        }
        return t;
    }();
    return table;
}

int color_index(double t, double t_min, double t_max) {
    if (!(t_max > t_min)) throw InvalidArgument("colour scale needs t_min < t_max");
    const double x = (std::clamp(t, t_min, t_max) - t_min) / (t_max - t_min);
    return std::min(255, static_cast<int>(std::floor(x * 256.0)));
}

void RenderConfig::validate() const {
    if (t_min && t_max && !(*t_min < *t_max)) throw InvalidArgument("t_min must be below t_max");
    if (sampling_every < 1) throw InvalidArgument("sampling interval must be >= 1");
    if (cell_pixels < 1) throw InvalidArgument("cell_pixels must be >= 1");
    if (!(fps > 0.0)) throw InvalidArgument("fps must be > 0");
}

Rgb Image::at(int x, int y) const {
    const auto i = (static_cast<std::size_t>(y) * width + x) * 3;
    return {rgb[i], rgb[i + 1], rgb[i + 2]};
}

std::string Image::to_ppm() const {
    std::string out = fmt::format("P6\n{} {}\n255\n", width, height);
    out.append(reinterpret_cast<const char*>(rgb.data()), rgb.size());
    return out;
}

namespace {

constexpr int kMargin = 2;
constexpr int kGap = 4;
constexpr int kLabel = 9;
constexpr Rgb kBackground{32, 32, 32};
constexpr Rgb kBorder{0, 0, 0};
constexpr Rgb kText{255, 255, 255};

// 3x5 glyphs, five rows of three bits
const std::map<char, std::array<int, 5>>& glyphs() {
    static const std::map<char, std::array<int, 5>> g = {
        {'0', {7, 5, 5, 5, 7}}, {'1', {2, 6, 2, 2, 7}}, {'2', {7, 1, 7, 4, 7}}, {'3', {7, 1, 7, 1, 7}},
        {'4', {5, 5, 7, 1, 1}}, {'5', {7, 4, 7, 1, 7}}, {'6', {7, 4, 7, 5, 7}}, {'7', {7, 1, 1, 1, 1}},
        {'8', {7, 5, 7, 5, 7}}, {'9', {7, 5, 7, 1, 7}}, {'A', {2, 5, 7, 5, 5}}, {'B', {6, 5, 6, 5, 6}},
        {'C', {3, 4, 4, 4, 3}}, {'D', {6, 5, 5, 5, 6}}, {'E', {7, 4, 6, 4, 7}}, {'F', {7, 4, 6, 4, 4}},
        {'G', {3, 4, 5, 5, 3}}, {'H', {5, 5, 7, 5, 5}}, {'I', {7, 2, 2, 2, 7}}, {'J', {1, 1, 1, 5, 2}},
        {'K', {5, 5, 6, 5, 5}}, {'L', {4, 4, 4, 4, 7}}, {'M', {5, 7, 7, 5, 5}}, {'N', {6, 5, 5, 5, 5}},
        {'O', {2, 5, 5, 5, 2}}, {'P', {6, 5, 6, 4, 4}}, {'Q', {2, 5, 5, 6, 3}}, {'R', {6, 5, 6, 5, 5}},
        {'S', {3, 4, 2, 1, 6}}, {'T', {7, 2, 2, 2, 2}}, {'U', {5, 5, 5, 5, 7}}, {'V', {5, 5, 5, 5, 2}},
        {'W', {5, 5, 7, 7, 5}}, {'X', {5, 5, 2, 5, 5}}, {'Y', {5, 5, 2, 2, 2}}, {'Z', {7, 1, 2, 4, 7}},
        {':', {0, 2, 0, 2, 0}}, {'-', {0, 0, 7, 0, 0}}, {'_', {0, 0, 0, 0, 7}}, {'/', {1, 1, 2, 4, 4}},
        {'.', {0, 0, 0, 0, 2}},
    };
    return g;
}

class Canvas {
public:
    Canvas(int w, int h) {
        img_.width = w;
        img_.height = h;
        img_.rgb.resize(static_cast<std::size_t>(w) * h * 3);
        fill(0, 0, w, h, kBackground);
    }
    void set(int x, int y, Rgb c) {
        if (x < 0 || y < 0 || x >= img_.width || y >= img_.height) return;
        const auto i = (static_cast<std::size_t>(y) * img_.width + x) * 3;
        img_.rgb[i] = c.r;
        img_.rgb[i + 1] = c.g;
        img_.rgb[i + 2] = c.b;
    }
    void fill(int x0, int y0, int x1, int y1, Rgb c) {
        for (int y = y0; y < y1; ++y)
            for (int x = x0; x < x1; ++x) set(x, y, c);
    }
    void outline(int x0, int y0, int x1, int y1, Rgb c) {
        for (int x = x0; x < x1; ++x) {
            set(x, y0, c);
            set(x, y1 - 1, c);
        }
        for (int y = y0; y < y1; ++y) {
            set(x0, y, c);
            set(x1 - 1, y, c);
        }
    }
    void text(int x, int y, int max_x, const std::string& s) {
        for (char raw : s) {
            if (x + 3 > max_x) break;
            const char ch = static_cast<char>(std::toupper(static_cast<unsigned char>(raw)));
            auto it = glyphs().find(ch);
            if (it != glyphs().end())
                for (int r = 0; r < 5; ++r)
                    for (int c = 0; c < 3; ++c)
                        if (it->second[r] & (4 >> c)) set(x + c, y + r, kText);
            x += 4;
        }
    }
    Image take() { return std::move(img_); }

private:
    Image img_;
};

struct Layout {
    std::vector<int> x;  // panel origins
    std::vector<int> w, h;
    int width = 0, height = 0;
};

Layout layout(std::span<const LayerPanel> panels, int px_per_mm) {
    Layout l;
    int x = kMargin, hmax = 0;
    for (const auto& p : panels) {
        if (!p.floorplan) throw InvalidArgument("panel without a floorplan");
        const int w = std::max(1, static_cast<int>(std::lround(p.floorplan->width * 1e3 * px_per_mm)));
        const int h = std::max(1, static_cast<int>(std::lround(p.floorplan->height * 1e3 * px_per_mm)));
        l.x.push_back(x);
        l.w.push_back(w);
        l.h.push_back(h);
        x += w + kGap;
        hmax = std::max(hmax, h);
    }
    l.width = panels.empty() ? 2 * kMargin : x - kGap + kMargin;
    l.height = kMargin + kLabel + hmax + kMargin;
    return l;
}

PixelRect rect_in(const Layout& l, int panel, const Block& b, int px_per_mm) {
    const double s = 1e3 * px_per_mm;
    const int top = kMargin + kLabel;
    PixelRect r;
    r.x0 = l.x[panel] + static_cast<int>(std::lround(b.x * s));
    r.x1 = l.x[panel] + static_cast<int>(std::lround(b.right() * s));
    // die y grows upwards, image rows grow downwards
    r.y0 = top + l.h[panel] - static_cast<int>(std::lround(b.top() * s));
    r.y1 = top + l.h[panel] - static_cast<int>(std::lround(b.y * s));
    return r;
}

}  // namespace

Image render_frame(std::span<const LayerPanel> panels, double t_min, double t_max, int cell_pixels) {
    if (!(t_max > t_min)) throw InvalidArgument("colour scale needs t_min < t_max");
    const Layout l = layout(panels, cell_pixels);
    Canvas cv(l.width, l.height);
    for (std::size_t p = 0; p < panels.size(); ++p) {
        const auto& panel = panels[p];
        const auto& blocks = panel.floorplan->blocks;
        if (panel.temperatures.size() != blocks.size())
            throw InvalidArgument(fmt::format("panel '{}' has {} temperatures for {} blocks", panel.label,
                                              panel.temperatures.size(), blocks.size()));
        cv.text(l.x[p], kMargin + 1, l.x[p] + l.w[p], panel.label);
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            const double t = panel.temperatures[b];
            if (!std::isfinite(t)) throw InvalidArgument(fmt::format("block '{}' has no temperature", blocks[b].name));
            const PixelRect r = rect_in(l, static_cast<int>(p), blocks[b], cell_pixels);
            cv.fill(r.x0, r.y0, r.x1, r.y1, colormap()[color_index(t, t_min, t_max)]);
            cv.outline(r.x0, r.y0, r.x1, r.y1, kBorder);
        }
    }
    return cv.take();
}

PixelRect block_rect(std::span<const LayerPanel> panels, int panel, int block, int cell_pixels) {
    const Layout l = layout(panels, cell_pixels);
    return rect_in(l, panel, panels[panel].floorplan->blocks.at(block), cell_pixels);
}

RenderSummary render_run(const fs::path& run_dir, const RenderConfig& cfg, const fs::path& out_dir) {
    cfg.validate();
    const RunMeta meta = read_meta(run_dir / "run.meta");
    const CsvTable temps = read_csv(run_dir / "temp_max.csv");
    std::vector<std::string> names;
    for (const auto& b : meta.blocks) names.push_back(b.name);
    if (temps.columns != names) throw IntegrityError("temperature trace does not match the run's block list");

    std::vector<Stack> stacks;
    for (const auto& s : meta.stacks) stacks.push_back(load_stack(run_dir / s.lcf));

    auto wanted = [&](const Stack& st, const LayerSpec& l) {
        if (cfg.layers.empty()) return true;
        for (const auto& sel : cfg.layers) {
            if (sel == std::to_string(l.index) || sel == fmt::format("{}:{}", st.id, l.index)) return true;
        }
        return false;
    };

    std::map<std::string, int> column;
    for (std::size_t i = 0; i < names.size(); ++i) column[names[i]] = static_cast<int>(i);
    struct PanelSource {
        LayerPanel panel;
        std::vector<int> cols;
    };
    std::vector<PanelSource> sources;
    std::map<std::string, int> seen;
    for (const auto& st : stacks) {
        for (const auto& l : st.layers) {
            if (!l.dissipates_power || !l.floorplan) continue;
            PanelSource ps;
            for (const auto& b : l.floorplan->blocks) {
                auto it = column.find(b.name);
                if (it == column.end())
                    throw IntegrityError(fmt::format("block '{}' of {} L{} has no temperature column", b.name, st.id,
                                                     l.index));
                ps.cols.push_back(it->second);
                ++seen[b.name];
            }
            if (!wanted(st, l)) continue;
            ps.panel.label = fmt::format("{} L{} {}", st.id, l.index, to_string(l.kind));
            ps.panel.floorplan = &*l.floorplan;
            sources.push_back(std::move(ps));
        }
    }
    for (const auto& n : names)
        if (seen[n] != 1) throw IntegrityError(fmt::format("block '{}' does not belong to exactly one layer", n));

    RenderSummary sum;
    if (cfg.t_min && cfg.t_max) {
        sum.t_min = *cfg.t_min;
        sum.t_max = *cfg.t_max;
    } else {
        double lo = 1e300, hi = -1e300;
        for (const auto& row : temps.rows)
            for (double v : row) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        if (temps.rows.empty()) lo = hi = meta.ambient_k;
        sum.t_min = cfg.t_min.value_or(lo);
        sum.t_max = cfg.t_max.value_or(hi);
        if (!(sum.t_max > sum.t_min)) sum.t_max = sum.t_min + 1.0;
        sum.auto_scaled = true;
    }

    fs::create_directories(out_dir);
    std::string manifest = fmt::format("# frames in display order; feed to an external encoder\nfps {}\n", cfg.fps);
    manifest += fmt::format("tmin_k {}\ntmax_k {}\nauto_scale {}\n", sum.t_min, sum.t_max, sum.auto_scaled ? "yes" : "no");
    for (std::size_t e = 0; e < temps.rows.size(); e += cfg.sampling_every) {
        std::vector<LayerPanel> panels;
        for (const auto& src : sources) {
            LayerPanel p = src.panel;
            for (int c : src.cols) p.temperatures.push_back(temps.rows[e][c]);
            panels.push_back(std::move(p));
        }
        const Image img = render_frame(panels, sum.t_min, sum.t_max, cfg.cell_pixels);
        const std::string file = fmt::format("frame_{:06d}.ppm", e);
        detail::write_file(out_dir / file, img.to_ppm());
        manifest += fmt::format("frame {} {}\n", file, temps.time_ms[e]);
        ++sum.frames;
    }
    detail::write_file(out_dir / "manifest.txt", manifest);
    return sum;
}

}  // namespace thermiq
