#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace thermiq {

/// Rectangular floorplan unit. All lengths in meters.
struct Block {
    std::string name;
    double x = 0.0;
    double y = 0.0;
    double width = 0.0;
    double height = 0.0;

    double area() const { return width * height; }
    double right() const { return x + width; }
    double top() const { return y + height; }

    bool operator==(const Block&) const = default;
};

/// Area of the intersection of two blocks (0 when disjoint).
double overlap_area(const Block& a, const Block& b);

/// Ordered set of blocks on one die. Block order is the column order used by
/// every trace file.
struct Floorplan {
    std::vector<Block> blocks;
    double width = 0.0;
    double height = 0.0;

    const Block* find(std::string_view name) const;
    double block_area() const;

    /// Throws ValidationError on non-positive extents, duplicate names,
    /// overlapping blocks or blocks outside the bounding box.
    void validate() const;

    bool operator==(const Floorplan&) const = default;
};

Floorplan generate_grid_floorplan(int rows, int cols, double cell_w, double cell_h,
                                  const std::string& prefix);

/// Tiles `tmpl` rows x cols times. Copy k (row-major) is offset by the template
/// bounding box and its sub-blocks are renamed `<name>_<k>`.
Floorplan replicate_core_template(const Floorplan& tmpl, int rows, int cols);

enum class LayerKind { ActiveCore, ActiveMemory, LogicCoreLayer, Tim, Interposer, Spreader };

std::string_view to_string(LayerKind kind);
LayerKind parse_layer_kind(std::string_view text);

struct LayerSpec {
    int index = 0;  // 0 = farthest from the heat sink
    LayerKind kind = LayerKind::Tim;
    double thickness = 0.0;                 // m
    double conductivity = 0.0;              // W/(m K)
    double volumetric_heat_capacity = 0.0;  // J/(m^3 K)
    std::optional<Floorplan> floorplan;     // nullopt = uniform
    bool dissipates_power = false;

    void validate() const;
    bool operator==(const LayerSpec&) const = default;
};

/// Material and package defaults. None of these are published values; they
/// are standard compact-thermal-model numbers and are all overridable.
struct Materials {
    double silicon_conductivity = 120.0;
    double silicon_capacity = 1.75e6;
    double die_thickness = 1.0e-4;
    double tim_conductivity = 4.0;
    double tim_capacity = 4.0e6;
    double tim_thickness = 2.0e-5;
    // die-to-die bonding layer between stacked dies
    double bond_conductivity = 4.0;
    double bond_capacity = 4.0e6;
    double bond_thickness = 2.0e-5;
    double interposer_thickness = 2.0e-4;
    double spreader_conductivity = 400.0;
    double spreader_capacity = 3.55e6;
    double spreader_thickness = 1.0e-3;
};

enum class StackKind { Ext2D, Ext3D, Interposed25D, Stacked3D };

std::string_view to_string(StackKind kind);
StackKind parse_stack_kind(std::string_view text);

struct StackConfig {
    StackKind kind = StackKind::Stacked3D;
    int cores = 4;  // per core layer
    double core_width = 4e-3;
    double core_height = 4e-3;
    int core_layers = 1;
    int mem_banks_x = 4;
    int mem_banks_y = 4;
    int mem_layers = 8;
    double bank_width = 2e-3;
    double bank_height = 2e-3;
    double gap_2_5d = 1e-3;
    std::optional<Floorplan> core_template;
    Materials materials;

    void validate() const;
};

/// One independent thermal stack. Layers are ordered by index.
struct Stack {
    std::string id;
    std::vector<LayerSpec> layers;
    bool air_cooled = false;

    /// Power-dissipating layers in index order.
    std::vector<const LayerSpec*> active_layers() const;
};

std::vector<Stack> build_stack(const StackConfig& cfg);

/// Rows x cols arrangement used for `n` cores (as square as possible, cols >= rows).
std::pair<int, int> core_grid_shape(int n);

// Block naming used by the generator and understood by the engine.
std::string core_block_name(int core);
std::string bank_block_name(int mem_layer, int bank);
inline constexpr std::string_view kLogicBlock = "LOGIC";

// Text formats -----------------------------------------------------------

std::string serialize_floorplan(const Floorplan& fp);
/// `source` names the input in error messages.
Floorplan parse_floorplan(std::string_view text, const std::string& source = "<flp>");
Floorplan load_floorplan(const std::filesystem::path& path);

/// Floorplan references in the layer file are written as `floorplan_names[i]`
/// (or `uniform`).
std::string serialize_layers(const std::vector<LayerSpec>& layers,
                             const std::vector<std::string>& floorplan_names);
/// Relative floorplan paths resolve against `base_dir`.
std::vector<LayerSpec> parse_layers(std::string_view text, const std::filesystem::path& base_dir,
                                    const std::string& source = "<lcf>");
std::vector<LayerSpec> load_layers(const std::filesystem::path& path);

/// Writes `<id>.lcf` plus one `<id>_L<index>.flp` per floorplan-bearing layer.
/// Returns the written layer file path.
std::filesystem::path write_stack(const Stack& stack, const std::filesystem::path& dir);
Stack load_stack(const std::filesystem::path& lcf_path);

}  // namespace thermiq
