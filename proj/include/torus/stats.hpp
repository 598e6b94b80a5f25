#pragma once

#include <vector>

namespace torus {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
};
// least squares of log y on log x
LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace torus
