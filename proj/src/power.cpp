#include "thermiq/power.hpp"

#include <cmath>

#include <fmt/format.h>

#include "thermiq/error.hpp"

namespace thermiq {

void CorePowerParams::validate() const {
    if (!(c_dyn >= 0.0)) throw InvalidArgument("c_dyn must be >= 0");
    if (vf_table.empty()) throw InvalidArgument("V/f table is empty");
    for (std::size_t i = 1; i < vf_table.size(); ++i)
        if (!(vf_table[i].voltage > vf_table[i - 1].voltage) ||
            !(vf_table[i].frequency > vf_table[i - 1].frequency))
            throw InvalidArgument("V/f table must be strictly increasing in V and f");
    if (vf_table.front().voltage <= 0.0 || vf_table.front().frequency <= 0.0)
        throw InvalidArgument("V/f entries must be positive");
    if (leak.p0 < 0.0 || leak.beta < 0.0) throw InvalidArgument("core leakage fit must be nonnegative");
    if (!component_fractions.empty()) {
        double sum = 0.0;
        for (const auto& [name, f] : component_fractions) {
            if (f < 0.0) throw InvalidArgument(fmt::format("negative fraction for '{}'", name));
            sum += f;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw InvalidArgument(fmt::format("component fractions sum to {}, expected 1", sum));
    }
}

std::vector<VfLevel> default_vf_table() {
    return {{0.7, 1.0}, {0.8, 1.6}, {0.9, 2.2}, {1.0, 2.8}, {1.1, 3.2}, {1.2, 3.6}};
}

void MemPowerParams::validate() const {
    if (e_read < 0.0 || e_write < 0.0) throw InvalidArgument("access energies must be >= 0");
    if (leak.p0 < 0.0 || leak.beta < 0.0) throw InvalidArgument("memory leakage fit must be nonnegative");
    if (logic_layer_power < 0.0) throw InvalidArgument("logic layer power must be >= 0");
}

double PowerBreakdown::total() const {
    double t = 0.0;
    for (const auto& b : blocks) t += b.total();
    return t;
}

double core_dynamic_power(double activity, int level, const CorePowerParams& params) {
    if (!(activity >= 0.0 && activity <= 1.0))
        throw InvalidArgument(fmt::format("activity {} outside [0, 1]", activity));
    if (level < 0 || level > params.max_level())
        throw InvalidArgument(fmt::format("V/f level {} out of range", level));
    const auto& vf = params.vf_table[level];
    return params.c_dyn * activity * vf.frequency * vf.voltage * vf.voltage;
}

std::vector<std::pair<std::string, double>> core_dynamic_split(double activity, int level,
                                                               const CorePowerParams& params) {
    const double total = core_dynamic_power(activity, level, params);
    std::vector<std::pair<std::string, double>> out;
    for (const auto& [name, f] : params.component_fractions) out.emplace_back(name, total * f);
    return out;
}

LeakageFit core_leakage_fit(int level, const CorePowerParams& params) {
    if (level < 0 || level > params.max_level())
        throw InvalidArgument(fmt::format("V/f level {} out of range", level));
    LeakageFit f = params.leak;
    f.p0 *= params.vf_table[level].voltage / params.vf_table.back().voltage;
    return f;
}

double mem_bank_power(double reads, double writes, double dt, const MemPowerParams& params) {
    if (!(dt > 0.0)) throw InvalidArgument("dt must be > 0");
    return (reads * params.e_read + writes * params.e_write) / dt;
}

double leakage_power(double temperature, const LeakageFit& fit) {
    if (!(temperature >= 200.0 && temperature <= 500.0))
        throw InvalidArgument(fmt::format("temperature {} K is not physical", temperature));
    return fit.at(temperature);
}

LeakageFit calibrate_memory_leakage(double target_fraction, double at_temperature, double dyn_ref,
                                    double beta, double t_ref) {
    if (!(target_fraction > 0.0 && target_fraction < 1.0))
        throw InvalidArgument("target leakage fraction must lie in (0, 1)");
    if (!(dyn_ref > 0.0)) throw InvalidArgument("reference dynamic power must be > 0");
    if (beta < 0.0) throw InvalidArgument("beta must be >= 0");
    LeakageFit f;
    f.beta = beta;
    f.t_ref = t_ref;
    f.p0 = dyn_ref * target_fraction / (1.0 - target_fraction) * std::exp(-beta * (at_temperature - t_ref));
    return f;
}

}  // namespace thermiq
