#include "torus/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace torus {

LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  if (n < 2 || y.size() != n) throw std::invalid_argument("fit needs at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::vector<double> lx(n), ly(n);
  for (size_t i = 0; i < n; ++i) {
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
    sx += lx[i];
    sy += ly[i];
  }
  const double mx = sx / n, my = sy / n;
  for (size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (n > 2) {
    double rss = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double r = ly[i] - f.intercept - f.slope * lx[i];
      rss += r * r;
    }
    f.slope_se = std::sqrt(rss / (n - 2) / sxx);
  }
  return f;
}

}  // namespace torus
