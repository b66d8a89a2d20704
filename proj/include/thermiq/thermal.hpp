#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "thermiq/floorplan.hpp"

namespace thermiq {

/// Convective boundary. Air-cooled stacks multiply the sink resistance.
struct AmbientSpec {
    double ambient_temperature = 318.15;      // K
    double sink_to_ambient_resistance = 0.1;  // K/W
    double convection_multiplier_aircooled = 20.0;
};

/// Geometry of the lumped spreader and sink nodes. The spreader material
/// comes from the stack's SPREADER layer when it has one.
struct PackageSpec {
    double spreader_side = 0.03;  // m
    double sink_side = 0.06;
    double sink_thickness = 6.9e-3;
    double sink_conductivity = 400.0;
    double sink_capacity = 3.55e6;        // J/(m^3 K)
    double sink_extra_capacitance = 0.0;  // J/K, lumped convective mass
};

/// Static power p0 * exp(beta * (T - t_ref)).
struct LeakageFit {
    double p0 = 0.0;    // W
    double beta = 0.0;  // 1/K
    double t_ref = 343.15;

    double at(double temperature) const;
};

struct BlockCells {
    std::string name;
    int component = 0;  // stack index
    int layer = 0;      // layer index within the stack
    std::vector<std::pair<int, double>> cells;  // (node, area fraction)
};

struct Conductance {
    int a = 0;
    int b = 0;
    double g = 0.0;  // W/K
};

/// Grid RC network over one or more independent stacks, in temperature rise
/// over ambient. Row sums of the Laplacian equal each node's ambient coupling.
class ThermalNetwork {
public:
    static ThermalNetwork build(const std::vector<Stack>& stacks, int grid_rows, int grid_cols,
                                const AmbientSpec& ambient, const PackageSpec& package = {});

    /// Network from explicit parts; used for lumped models and tests.
    static ThermalNetwork from_parts(std::vector<Conductance> edges, std::vector<double> ambient_coupling,
                                     std::vector<double> capacitance, std::vector<BlockCells> blocks,
                                     double ambient_temperature);

    int node_count() const { return static_cast<int>(capacitance_.size()); }
    int grid_rows() const { return grid_rows_; }
    int grid_cols() const { return grid_cols_; }
    double ambient_temperature() const { return ambient_; }

    const std::vector<Conductance>& edges() const { return edges_; }
    const std::vector<double>& ambient_coupling() const { return ambient_coupling_; }
    const std::vector<double>& capacitance() const { return capacitance_; }
    const std::vector<BlockCells>& blocks() const { return blocks_; }
    /// Stack index of each node.
    const std::vector<int>& node_component() const { return component_; }

    /// Throws InvalidArgument for unknown names.
    int block_index(std::string_view name) const;
    std::string node_label(int node) const;

    /// Nodes of grid layer `layer` in stack `component`; empty for
    /// non-grid layers.
    std::vector<int> layer_nodes(int component, int layer) const;

    /// Throws ValidationError when the M-matrix structure is broken.
    void validate() const;

    /// Text dump: `G i j value` and `C i value` lines.
    std::string dump() const;

private:
    struct LayerRange {
        int component;
        int layer;
        int first_node;
    };

    std::vector<Conductance> edges_;
    std::vector<double> ambient_coupling_;
    std::vector<double> capacitance_;
    std::vector<BlockCells> blocks_;
    std::vector<int> component_;
    std::vector<LayerRange> layers_;
    std::vector<std::string> labels_;  // only for non-grid nodes
    int grid_rows_ = 0;
    int grid_cols_ = 0;
    double ambient_ = 0.0;
};

struct ThermalState {
    std::vector<double> temperatures;  // K, one per node
    double time = 0.0;                 // s
};

ThermalState ambient_state(const ThermalNetwork& net);

struct BlockTemperature {
    double max = 0.0;
    double mean = 0.0;
};

std::vector<BlockTemperature> block_temperatures(const ThermalNetwork& net, const ThermalState& state);
BlockTemperature block_temperature(const ThermalNetwork& net, const ThermalState& state,
                                   std::string_view block);

/// Outcome of one epoch: the new state plus the leakage that was injected,
/// averaged over the substeps.
struct StepResult {
    ThermalState state;
    std::vector<double> static_power;  // W per block
    double injected_power = 0.0;       // W, dynamic + static
};

/// Backward Euler stepper with a cached factorization of C/h + G. Leakage is
/// evaluated at the block mean temperature at the start of each substep.
class TransientSolver {
public:
    TransientSolver(const ThermalNetwork& net, double dt, int substeps);
    ~TransientSolver();
    TransientSolver(TransientSolver&&) noexcept;
    TransientSolver& operator=(TransientSolver&&) noexcept;

    StepResult step(const ThermalState& state, std::span<const double> block_powers,
                    std::span<const LeakageFit> leakage) const;

    double dt() const { return dt_; }
    int substeps() const { return substeps_; }

private:
    struct Impl;
    const ThermalNetwork* net_;
    double dt_;
    int substeps_;
    std::unique_ptr<Impl> impl_;
};

ThermalState transient_step(const ThermalNetwork& net, const ThermalState& state,
                            std::span<const double> block_powers, std::span<const LeakageFit> leakage,
                            double dt, int substeps);

struct SteadyOptions {
    double tolerance = 1e-4;  // K
    int max_iterations = 100;
    double runaway_guard = 500.0;  // K
};

/// Fixed-point iteration on G T = P(T). Throws ThermalRunaway when the
/// leakage loop diverges.
ThermalState steady_state(const ThermalNetwork& net, std::span<const double> block_powers,
                          std::span<const LeakageFit> leakage, const SteadyOptions& opt = {});

/// Steady rise for fixed per-node power (no leakage).
std::vector<double> steady_rise(const ThermalNetwork& net, std::span<const double> node_powers);

/// Spreads per-block power over the block's cells.
std::vector<double> node_powers(const ThermalNetwork& net, std::span<const double> block_powers);

}  // namespace thermiq
