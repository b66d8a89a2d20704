#pragma once

#include <map>
#include <string>
#include <vector>

#include "thermiq/thermal.hpp"

namespace thermiq {

struct VfLevel {
    double voltage = 0.0;    // V
    double frequency = 0.0;  // GHz
};

/// Closed-form core power: P = c_dyn * activity * f[GHz] * V^2.
struct CorePowerParams {
    double c_dyn = 1.93;  // W / (GHz V^2); ~10 W at 3.6 GHz, 1.2 V
    std::vector<VfLevel> vf_table;
    LeakageFit leak;  // at the highest V/f level
    std::map<std::string, double> component_fractions;

    int max_level() const { return static_cast<int>(vf_table.size()) - 1; }
    void validate() const;
};

/// Default table topping out at 3.6 GHz / 1.2 V.
std::vector<VfLevel> default_vf_table();

struct MemPowerParams {
    double e_read = 5e-9;   // J / access
    double e_write = 5e-9;  // J / access
    LeakageFit leak;        // per bank
    double logic_layer_power = 1.0;  // W

    void validate() const;
};

struct BlockPower {
    double dynamic = 0.0;
    double static_ = 0.0;

    double total() const { return dynamic + static_; }
};

struct PowerBreakdown {
    long epoch_index = 0;
    std::vector<BlockPower> blocks;  // network block order

    double total() const;
};

double core_dynamic_power(double activity, int level, const CorePowerParams& params);

/// Per-component split of core_dynamic_power, in name order.
std::vector<std::pair<std::string, double>> core_dynamic_split(double activity, int level,
                                                               const CorePowerParams& params);

/// Core leakage at `level`: p0 scales linearly with the level voltage.
LeakageFit core_leakage_fit(int level, const CorePowerParams& params);

double mem_bank_power(double reads, double writes, double dt, const MemPowerParams& params);

/// Throws InvalidArgument outside 200..500 K.
double leakage_power(double temperature, const LeakageFit& fit);

/// p0 such that leak / (leak + dyn_ref) = target_fraction at `at_temperature`.
LeakageFit calibrate_memory_leakage(double target_fraction, double at_temperature, double dyn_ref,
                                    double beta, double t_ref);

}  // namespace thermiq
