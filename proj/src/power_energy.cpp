#include "slicenego/power_energy.hpp"

#include <cmath>

#include "slicenego/errors.hpp"

namespace slicenego {

void PowerParams::validate() const {
  for (const double v : {p_static_w, c_bw_w_per_mhz, c_cpu_w_per_ghz}) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ParameterError("power parameters must be >= 0");
  }
}

double power_w(const Action& action, const PowerParams& params) {
  if (!(action.bandwidth_mhz >= 0.0) || !(action.cpu_ghz >= 0.0)) {
    throw ContractViolation("power_w needs a non-negative action");
  }
  return params.p_static_w + params.c_bw_w_per_mhz * action.bandwidth_mhz +
         params.c_cpu_w_per_ghz * action.cpu_ghz;
}

double energy_saving_fraction(const Action& final_action, const Action& baseline,
                              const PowerParams& params) {
  const double base = power_w(baseline, params);
  if (!(base > 0.0)) throw ParameterError("baseline power must be positive");
  return (base - power_w(final_action, params)) / base;
}

}  // namespace slicenego
