#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "thermiq/floorplan.hpp"

namespace thermiq {

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb&) const = default;
};

/// Fixed 256-entry ramp, index 0 = coldest (blue), 255 = hottest (red).
const std::array<Rgb, 256>& colormap();

/// Index of clamp(t, t_min, t_max) on the ramp; nondecreasing in t.
int color_index(double t, double t_min, double t_max);

struct RenderConfig {
    std::optional<double> t_min;  // K; unset = global trace minimum
    std::optional<double> t_max;  // K; unset = global trace maximum
    int sampling_every = 1;
    std::vector<std::string> layers;  // "<layer>" or "<stack>:<layer>"; empty = all
    int cell_pixels = 16;             // pixels per millimetre of die
    double fps = 10.0;

    void validate() const;
};

struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;  // row-major, 3 bytes per pixel

    Rgb at(int x, int y) const;
    std::string to_ppm() const;  // binary P6
};

/// One panel: a layer floorplan with a temperature per block (same order).
struct LayerPanel {
    std::string label;
    const Floorplan* floorplan = nullptr;
    std::vector<double> temperatures;  // K
};

/// Pixel rectangle of a block inside a rendered frame.
struct PixelRect {
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // half-open
};

/// Panels side by side, each topped by a label strip. Block rectangles are
/// filled with their colour and outlined with a one-pixel border.
Image render_frame(std::span<const LayerPanel> panels, double t_min, double t_max, int cell_pixels);

/// Where `block` of panel `panel` lands; matches render_frame's layout.
PixelRect block_rect(std::span<const LayerPanel> panels, int panel, int block, int cell_pixels);

struct RenderSummary {
    int frames = 0;
    double t_min = 0.0;
    double t_max = 0.0;
    bool auto_scaled = false;
};

/// Renders `frame_<epoch>.ppm` for every sampled epoch of a run directory
/// plus `manifest.txt`.
RenderSummary render_run(const std::filesystem::path& run_dir, const RenderConfig& cfg,
                         const std::filesystem::path& out_dir);

}  // namespace thermiq
