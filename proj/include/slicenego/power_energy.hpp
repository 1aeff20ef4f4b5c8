#pragma once

#include "slicenego/digital_twin.hpp"

namespace slicenego {

/// Linear slice power model: P = p_static + c_bw * b + c_cpu * f.
struct PowerParams {
  double p_static_w = 5.0;
  double c_bw_w_per_mhz = 0.5;
  double c_cpu_w_per_ghz = 0.2;

  void validate() const;
};

double power_w(const Action& action, const PowerParams& params);

/// (P(baseline) - P(final)) / P(baseline). Negative when the final allocation
/// draws more power than the baseline.
double energy_saving_fraction(const Action& final_action, const Action& baseline,
                              const PowerParams& params);

}  // namespace slicenego
