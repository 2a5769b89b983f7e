#pragma once

#include "tsso/grid.hpp"

namespace tsso {

struct RiskParams {
  double pr_min = 0.01;  // overload-probability floor
  double pr_max = 0.9;   // overload-probability ceiling (keep < 1 so weights stay finite)
  double mu = 10.0;      // sharpness of the smooth overload curve
  double alpha = 1.0;    // line-capacity improvement factor, >= 1
  double y_ext = 1000.0; // extreme-loss threshold, MW
  double eta = 0.5;      // paradox-indicator weight in (0, 1]
  int bpi_sign = +1;     // +1 adds the eta*BPI term to f_l; -1 subtracts it
};

// Throws ConfigError when a field is out of range.
void validate(const RiskParams& params);

// Smooth overload probability of a line at the given flow; |flow| is used.
// with_dtr selects the improved capacity (alpha > 1), otherwise the static
// one. Strictly increasing in |flow|, bounded to [pr_min, pr_max].
double failure_probability(double flow_mw, const Line& line, const RiskParams& params,
                           bool with_dtr);

}  // namespace tsso
