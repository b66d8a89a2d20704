#include "thermiq/thermal.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <fmt/format.h>

#include "thermiq/error.hpp"

namespace thermiq {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

SpMat laplacian(const ThermalNetwork& net, const std::vector<double>& extra_diag) {
    const int n = net.node_count();
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(net.edges().size() * 4 + n);
    std::vector<double> diag(n, 0.0);
    for (int i = 0; i < n; ++i) diag[i] = net.ambient_coupling()[i] + extra_diag[i];
    for (const auto& e : net.edges()) {
        t.emplace_back(e.a, e.b, -e.g);
        t.emplace_back(e.b, e.a, -e.g);
        diag[e.a] += e.g;
        diag[e.b] += e.g;
    }
    for (int i = 0; i < n; ++i) t.emplace_back(i, i, diag[i]);
    SpMat m(n, n);
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

using Factor = Eigen::SimplicialLDLT<SpMat>;

void factorize(Factor& f, const SpMat& m) {
    f.compute(m);
    if (f.info() != Eigen::Success) throw InternalError("thermal matrix factorization failed");
}

void check_powers(const ThermalNetwork& net, std::span<const double> block_powers,
                  std::span<const LeakageFit> leakage) {
    if (block_powers.size() != net.blocks().size())
        throw InvalidArgument(fmt::format("expected {} block powers, got {}", net.blocks().size(),
                                          block_powers.size()));
    if (!leakage.empty() && leakage.size() != net.blocks().size())
        throw InvalidArgument(fmt::format("expected {} leakage fits, got {}", net.blocks().size(),
                                          leakage.size()));
    for (std::size_t b = 0; b < block_powers.size(); ++b)
        if (!(block_powers[b] >= 0.0))
            throw InvalidArgument(
                fmt::format("block '{}' has negative or NaN power", net.blocks()[b].name));
}

double block_mean(const BlockCells& b, const Vec& rise) {
    double m = 0.0;
    for (auto [node, frac] : b.cells) m += frac * rise[node];
    return m;
}

// Leakage per block at the current field; throws on runaway.
void eval_leakage(const ThermalNetwork& net, std::span<const LeakageFit> leakage, const Vec& rise,
                  double guard, std::vector<double>& out) {
    out.assign(net.blocks().size(), 0.0);
    if (leakage.empty()) return;
    const double amb = net.ambient_temperature();
    for (std::size_t b = 0; b < out.size(); ++b) {
        if (leakage[b].p0 == 0.0) continue;
        const double t = amb + block_mean(net.blocks()[b], rise);
        if (t > guard)
            throw ThermalRunaway(fmt::format("block '{}' reached {:.1f} K (guard {:.0f} K)",
                                             net.blocks()[b].name, t, guard));
        out[b] = leakage[b].at(t);
    }
}

void add_block_power(const ThermalNetwork& net, std::size_t b, double p, Vec& node_p) {
    for (auto [node, frac] : net.blocks()[b].cells) node_p[node] += p * frac;
}

void check_finite(const ThermalNetwork& net, const Vec& rise) {
    for (int i = 0; i < rise.size(); ++i)
        if (!std::isfinite(rise[i]))
            throw NumericalError(fmt::format("non-finite temperature at node {}", net.node_label(i)));
}

void check_runaway(const ThermalNetwork& net, const Vec& rise, double guard) {
    const double amb = net.ambient_temperature();
    for (int i = 0; i < rise.size(); ++i)
        if (amb + rise[i] > guard)
            throw ThermalRunaway(fmt::format("node {} reached {:.1f} K (guard {:.0f} K)",
                                             net.node_label(i), amb + rise[i], guard));
}

Vec to_rise(const ThermalNetwork& net, const ThermalState& s) {
    if (static_cast<int>(s.temperatures.size()) != net.node_count())
        throw InvalidArgument("thermal state does not match network");
    Vec r(net.node_count());
    for (int i = 0; i < net.node_count(); ++i) r[i] = s.temperatures[i] - net.ambient_temperature();
    return r;
}

ThermalState from_rise(const ThermalNetwork& net, const Vec& r, double time) {
    ThermalState s;
    s.time = time;
    s.temperatures.resize(net.node_count());
    for (int i = 0; i < net.node_count(); ++i) s.temperatures[i] = net.ambient_temperature() + r[i];
    return s;
}

}  // namespace

double LeakageFit::at(double temperature) const { return p0 * std::exp(beta * (temperature - t_ref)); }

// ---------------------------------------------------------------------------
// Network assembly

ThermalNetwork ThermalNetwork::build(const std::vector<Stack>& stacks, int rows, int cols,
                                     const AmbientSpec& ambient, const PackageSpec& pkg) {
    if (rows < 1 || cols < 1) throw InvalidArgument("thermal grid must be at least 1x1");
    if (stacks.empty()) throw InvalidArgument("no stacks to build");
    if (!(ambient.sink_to_ambient_resistance > 0.0))
        throw ValidationError("sink-to-ambient resistance must be > 0");

    ThermalNetwork net;
    net.grid_rows_ = rows;
    net.grid_cols_ = cols;
    net.ambient_ = ambient.ambient_temperature;
    const int cells = rows * cols;
    std::set<std::string> names;

    for (std::size_t s = 0; s < stacks.size(); ++s) {
        const Stack& st = stacks[s];
        const int comp = static_cast<int>(s);
        for (const auto& l : st.layers) l.validate();

        std::vector<const LayerSpec*> grid_layers;
        const LayerSpec* spreader = nullptr;
        double die_w = 0.0, die_h = 0.0;
        for (const auto& l : st.layers) {
            if (l.kind == LayerKind::Spreader) {
                spreader = &l;
                continue;
            }
            grid_layers.push_back(&l);
            if (l.floorplan) {
                die_w = std::max(die_w, l.floorplan->width);
                die_h = std::max(die_h, l.floorplan->height);
            }
        }
        if (grid_layers.empty()) throw ValidationError(fmt::format("stack '{}' has no grid layers", st.id));
        if (!(die_w > 0.0) || !(die_h > 0.0))
            throw ValidationError(fmt::format("stack '{}' has no floorplan to size the die", st.id));

        const double dx = die_w / cols, dy = die_h / rows, area = dx * dy;
        const int base = net.node_count();
        const int nl = static_cast<int>(grid_layers.size());
        const int spreader_node = base + nl * cells;
        const int sink_node = spreader_node + 1;
        net.capacitance_.resize(sink_node + 1, 0.0);
        net.ambient_coupling_.resize(sink_node + 1, 0.0);
        net.component_.resize(sink_node + 1, comp);
        net.labels_.resize(sink_node + 1);
        net.labels_[spreader_node] = st.id + "/spreader";
        net.labels_[sink_node] = st.id + "/sink";

        auto node = [&](int layer, int r, int c) { return base + layer * cells + r * cols + c; };

        for (int li = 0; li < nl; ++li) {
            const LayerSpec& l = *grid_layers[li];
            net.layers_.push_back({comp, l.index, base + li * cells});
            const double k = l.conductivity, t = l.thickness;
            const double gx = k * t * dy / dx;  // between horizontal neighbours
            const double gy = k * t * dx / dy;
            for (int r = 0; r < rows; ++r) {
                for (int c = 0; c < cols; ++c) {
                    const int n = node(li, r, c);
                    net.capacitance_[n] = l.volumetric_heat_capacity * t * area;
                    if (c + 1 < cols) net.edges_.push_back({n, node(li, r, c + 1), gx});
                    if (r + 1 < rows) net.edges_.push_back({n, node(li, r + 1, c), gy});
                    if (li + 1 < nl) {
                        const LayerSpec& u = *grid_layers[li + 1];
                        const double rv = t / (2.0 * k * area) + u.thickness / (2.0 * u.conductivity * area);
                        net.edges_.push_back({n, node(li + 1, r, c), 1.0 / rv});
                    }
                }
            }
            if (!l.dissipates_power || !l.floorplan) continue;
            for (const auto& b : l.floorplan->blocks) {
                if (!names.insert(b.name).second)
                    throw ValidationError(fmt::format("block name '{}' is not unique across stacks", b.name));
                if (b.right() > die_w * (1 + 1e-12) || b.top() > die_h * (1 + 1e-12))
                    throw ValidationError(fmt::format("block '{}' lies outside the die", b.name));
                BlockCells bc{b.name, comp, l.index, {}};
                const int c0 = std::max(0, static_cast<int>(std::floor(b.x / dx)));
                const int c1 = std::min(cols - 1, static_cast<int>(std::ceil(b.right() / dx)) - 1);
                const int r0 = std::max(0, static_cast<int>(std::floor(b.y / dy)));
                const int r1 = std::min(rows - 1, static_cast<int>(std::ceil(b.top() / dy)) - 1);
                for (int r = r0; r <= r1; ++r) {
                    for (int c = c0; c <= c1; ++c) {
                        Block cell{"", c * dx, r * dy, dx, dy};
                        const double ov = overlap_area(b, cell);
                        if (ov > 0.0) bc.cells.emplace_back(node(li, r, c), ov / b.area());
                    }
                }
                if (bc.cells.empty())
                    throw ValidationError(fmt::format("block '{}' covers no grid cell", b.name));
                net.blocks_.push_back(std::move(bc));
            }
        }

        // spreader: material from the SPREADER layer, otherwise the defaults
        const Materials defaults;
        const double ks = spreader ? spreader->conductivity : defaults.spreader_conductivity;
        const double cs = spreader ? spreader->volumetric_heat_capacity : defaults.spreader_capacity;
        const double ts = spreader ? spreader->thickness : defaults.spreader_thickness;
        const LayerSpec& top = *grid_layers.back();
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) {
                const double rv = top.thickness / (2.0 * top.conductivity * area) + ts / (2.0 * ks * area);
                net.edges_.push_back({node(nl - 1, r, c), spreader_node, 1.0 / rv});
            }
        const double a_spr = pkg.spreader_side * pkg.spreader_side;
        const double a_sink = pkg.sink_side * pkg.sink_side;
        const double r_ss = ts / (2.0 * ks * a_spr) + pkg.sink_thickness / (2.0 * pkg.sink_conductivity * a_sink);
        net.edges_.push_back({spreader_node, sink_node, 1.0 / r_ss});
        net.capacitance_[spreader_node] = cs * a_spr * ts;
        net.capacitance_[sink_node] = pkg.sink_capacity * a_sink * pkg.sink_thickness + pkg.sink_extra_capacitance;
        double r_conv = ambient.sink_to_ambient_resistance;
        if (st.air_cooled) r_conv *= ambient.convection_multiplier_aircooled;
        net.ambient_coupling_[sink_node] = 1.0 / r_conv;
    }
    net.validate();
    return net;
}

ThermalNetwork ThermalNetwork::from_parts(std::vector<Conductance> edges, std::vector<double> ambient_coupling,
                                          std::vector<double> capacitance, std::vector<BlockCells> blocks,
                                          double ambient_temperature) {
    ThermalNetwork net;
    net.edges_ = std::move(edges);
    net.ambient_coupling_ = std::move(ambient_coupling);
    net.capacitance_ = std::move(capacitance);
    net.blocks_ = std::move(blocks);
    net.ambient_ = ambient_temperature;
    net.component_.assign(net.capacitance_.size(), 0);
    net.labels_.resize(net.capacitance_.size());
    for (std::size_t i = 0; i < net.labels_.size(); ++i) net.labels_[i] = fmt::format("n{}", i);
    net.validate();
    return net;
}

void ThermalNetwork::validate() const {
    const int n = node_count();
    if (n == 0) throw ValidationError("thermal network has no nodes");
    if (static_cast<int>(ambient_coupling_.size()) != n)
        throw ValidationError("ambient coupling size mismatch");
    for (int i = 0; i < n; ++i) {
        if (!(capacitance_[i] > 0.0))
            throw ValidationError(fmt::format("node {} has non-positive capacitance", node_label(i)));
        if (!(ambient_coupling_[i] >= 0.0))
            throw ValidationError(fmt::format("node {} has negative ambient coupling", node_label(i)));
    }
    for (const auto& e : edges_) {
        if (e.a < 0 || e.b < 0 || e.a >= n || e.b >= n || e.a == e.b)
            throw ValidationError("conductance references an invalid node pair");
        if (!(e.g > 0.0))
            throw ValidationError(fmt::format("non-positive conductance between {} and {}", node_label(e.a),
                                              node_label(e.b)));
        if (component_[e.a] != component_[e.b])
            throw ValidationError("conductance couples two independent stacks");
    }
    // every component needs a path to ambient, otherwise G is singular
    std::vector<char> grounded(n, 0);
    for (int i = 0; i < n; ++i) grounded[i] = ambient_coupling_[i] > 0.0;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& e : edges_)
            if (grounded[e.a] != grounded[e.b]) {
                grounded[e.a] = grounded[e.b] = 1;
                changed = true;
            }
    }
    for (int i = 0; i < n; ++i)
        if (!grounded[i]) throw ValidationError(fmt::format("node {} has no path to ambient", node_label(i)));
    for (const auto& b : blocks_) {
        if (b.cells.empty()) throw ValidationError(fmt::format("block '{}' maps to no cell", b.name));
        double sum = 0.0;
        for (auto [node, frac] : b.cells) {
            if (node < 0 || node >= n || !(frac > 0.0))
                throw ValidationError(fmt::format("block '{}' has an invalid cell entry", b.name));
            sum += frac;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw ValidationError(fmt::format("block '{}' area fractions sum to {}", b.name, sum));
    }
}

int ThermalNetwork::block_index(std::string_view name) const {
    for (std::size_t i = 0; i < blocks_.size(); ++i)
        if (blocks_[i].name == name) return static_cast<int>(i);
    throw InvalidArgument(fmt::format("unknown block '{}'", name));
}

std::string ThermalNetwork::node_label(int node) const {
    if (node < 0 || node >= node_count()) return fmt::format("#{}", node);
    if (!labels_[node].empty()) return labels_[node];
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
        if (node >= it->first_node) {
            const int cell = node - it->first_node;
            return fmt::format("stack{}/L{}[{},{}]", it->component, it->layer, cell / grid_cols_,
                               cell % grid_cols_);
        }
    }
    return fmt::format("#{}", node);
}

std::vector<int> ThermalNetwork::layer_nodes(int component, int layer) const {
    std::vector<int> out;
    for (const auto& lr : layers_)
        if (lr.component == component && lr.layer == layer)
            for (int i = 0; i < grid_rows_ * grid_cols_; ++i) out.push_back(lr.first_node + i);
    return out;
}

std::string ThermalNetwork::dump() const {
    std::string out = fmt::format("# nodes {} ambient {}\n", node_count(), ambient_);
    std::vector<double> diag(ambient_coupling_);
    for (const auto& e : edges_) {
        diag[e.a] += e.g;
        diag[e.b] += e.g;
    }
    for (int i = 0; i < node_count(); ++i) out += fmt::format("G {} {} {:.9e}\n", i, i, diag[i]);
    for (const auto& e : edges_) out += fmt::format("G {} {} {:.9e}\n", e.a, e.b, -e.g);
    for (int i = 0; i < node_count(); ++i) out += fmt::format("C {} {:.9e}\n", i, capacitance_[i]);
    return out;
}

// ---------------------------------------------------------------------------
// Queries

ThermalState ambient_state(const ThermalNetwork& net) {
    return ThermalState{std::vector<double>(net.node_count(), net.ambient_temperature()), 0.0};
}

std::vector<BlockTemperature> block_temperatures(const ThermalNetwork& net, const ThermalState& state) {
    if (static_cast<int>(state.temperatures.size()) != net.node_count())
        throw InvalidArgument("thermal state does not match network");
    std::vector<BlockTemperature> out;
    out.reserve(net.blocks().size());
    for (const auto& b : net.blocks()) {
        BlockTemperature bt{-1e300, 0.0};
        for (auto [node, frac] : b.cells) {
            const double t = state.temperatures[node];
            bt.max = std::max(bt.max, t);
            bt.mean += frac * t;
        }
        out.push_back(bt);
    }
    return out;
}

BlockTemperature block_temperature(const ThermalNetwork& net, const ThermalState& state,
                                   std::string_view block) {
    const int i = net.block_index(block);
    return block_temperatures(net, state)[i];
}

std::vector<double> node_powers(const ThermalNetwork& net, std::span<const double> block_powers) {
    Vec p = Vec::Zero(net.node_count());
    for (std::size_t b = 0; b < block_powers.size(); ++b) add_block_power(net, b, block_powers[b], p);
    return {p.data(), p.data() + p.size()};
}

// ---------------------------------------------------------------------------
// Solvers

struct TransientSolver::Impl {
    Factor factor;
    Vec c_over_h;
};

TransientSolver::TransientSolver(const ThermalNetwork& net, double dt, int substeps)
    : net_(&net), dt_(dt), substeps_(substeps), impl_(std::make_unique<Impl>()) {
    if (!(dt > 0.0)) throw InvalidArgument("time step must be > 0");
    if (substeps < 1) throw InvalidArgument("substeps must be >= 1");
    const double h = dt / substeps;
    std::vector<double> extra(net.node_count());
    impl_->c_over_h.resize(net.node_count());
    for (int i = 0; i < net.node_count(); ++i) {
        extra[i] = net.capacitance()[i] / h;
        impl_->c_over_h[i] = extra[i];
    }
    factorize(impl_->factor, laplacian(net, extra));
}

TransientSolver::~TransientSolver() = default;
TransientSolver::TransientSolver(TransientSolver&&) noexcept = default;
TransientSolver& TransientSolver::operator=(TransientSolver&&) noexcept = default;

StepResult TransientSolver::step(const ThermalState& state, std::span<const double> block_powers,
                                 std::span<const LeakageFit> leakage) const {
    const ThermalNetwork& net = *net_;
    check_powers(net, block_powers, leakage);
    const SteadyOptions guard;
    Vec rise = to_rise(net, state);
    Vec dyn = Vec::Zero(net.node_count());
    double dyn_total = 0.0;
    for (std::size_t b = 0; b < block_powers.size(); ++b) {
        add_block_power(net, b, block_powers[b], dyn);
        dyn_total += block_powers[b];
    }

    StepResult res;
    res.static_power.assign(net.blocks().size(), 0.0);
    std::vector<double> leak;
    for (int k = 0; k < substeps_; ++k) {
        eval_leakage(net, leakage, rise, guard.runaway_guard, leak);
        Vec rhs = dyn;
        for (std::size_t b = 0; b < leak.size(); ++b) {
            if (leak[b] == 0.0) continue;
            add_block_power(net, b, leak[b], rhs);
            res.static_power[b] += leak[b];
        }
        rhs += impl_->c_over_h.cwiseProduct(rise);
        rise = impl_->factor.solve(rhs);
        if (impl_->factor.info() != Eigen::Success) throw InternalError("thermal solve failed");
        check_finite(net, rise);
        check_runaway(net, rise, guard.runaway_guard);
    }
    double static_total = 0.0;
    for (auto& s : res.static_power) {
        s /= substeps_;
        static_total += s;
    }
    res.injected_power = dyn_total + static_total;
    res.state = from_rise(net, rise, state.time + dt_);
    return res;
}

ThermalState transient_step(const ThermalNetwork& net, const ThermalState& state,
                            std::span<const double> block_powers, std::span<const LeakageFit> leakage,
                            double dt, int substeps) {
    return TransientSolver(net, dt, substeps).step(state, block_powers, leakage).state;
}

std::vector<double> steady_rise(const ThermalNetwork& net, std::span<const double> node_p) {
    if (static_cast<int>(node_p.size()) != net.node_count())
        throw InvalidArgument("node power vector does not match network");
    Factor f;
    factorize(f, laplacian(net, std::vector<double>(net.node_count(), 0.0)));
    Vec p = Eigen::Map<const Vec>(node_p.data(), node_p.size());
    Vec r = f.solve(p);
    return {r.data(), r.data() + r.size()};
}

ThermalState steady_state(const ThermalNetwork& net, std::span<const double> block_powers,
                          std::span<const LeakageFit> leakage, const SteadyOptions& opt) {
    check_powers(net, block_powers, leakage);
    Factor f;
    factorize(f, laplacian(net, std::vector<double>(net.node_count(), 0.0)));
    Vec dyn = Vec::Zero(net.node_count());
    for (std::size_t b = 0; b < block_powers.size(); ++b) add_block_power(net, b, block_powers[b], dyn);

    Vec rise = Vec::Zero(net.node_count());
    std::vector<double> leak;
    for (int it = 0; it < opt.max_iterations; ++it) {
        eval_leakage(net, leakage, rise, opt.runaway_guard, leak);
        Vec p = dyn;
        for (std::size_t b = 0; b < leak.size(); ++b) add_block_power(net, b, leak[b], p);
        Vec next = f.solve(p);
        check_finite(net, next);
        check_runaway(net, next, opt.runaway_guard);
        const double delta = (next - rise).cwiseAbs().maxCoeff();
        rise = std::move(next);
        if (delta < opt.tolerance) return from_rise(net, rise, 0.0);
    }
    throw ThermalRunaway(
        fmt::format("leakage fixed point not reached in {} iterations", opt.max_iterations));
}

}  // namespace thermiq
