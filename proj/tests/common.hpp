#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "torus/spectral.hpp"

namespace testing_util {

inline torus::SpectralField from_trig(const oracle::Trig& t) {
  const int n = static_cast<int>(t.c.size()) - 1;
  torus::SpectralField f(n);
  for (int k = 0; k <= n; ++k) f.set(k, t.c[k]);
  return f;
}

// smooth random real field, coefficients decaying like exp(-decay k), scaled to the given L2 norm
inline torus::SpectralField smooth_field(int n, std::uint64_t seed, double l2 = 0.5, double decay = 0.5,
                                         bool mean_zero = false) {
  std::mt19937_64 rng(seed);
  auto t = oracle::random_trig(n, decay, rng);
  if (mean_zero) t.c[0] = 0.0;
  const double scale = l2 / std::sqrt(t.l2sq());
  for (auto& c : t.c) c *= scale;
  return from_trig(t);
}

inline torus::SpectralField cosine(int n, double amp = 1.0, int k = 1) {
  torus::SpectralField f(n);
  f.set(k, amp / 2.0);
  return f;
}

inline torus::SpectralField sine(int n, double amp = 1.0, int k = 1) {
  torus::SpectralField f(n);
  f.set(k, std::complex<double>(0.0, -amp / 2.0));
  return f;
}

inline torus::SpectralField constant(int n, double c) {
  torus::SpectralField f(n);
  f.set(0, c);
  return f;
}

inline double l2_diff(const torus::SpectralField& a, const torus::SpectralField& b) {
  const int n = std::max(a.n_modes(), b.n_modes());
  double s = 0.0;
  for (int k = -n; k <= n; ++k) s += std::norm(a.coeff(k) - b.coeff(k));
  return std::sqrt(s);
}

inline double max_coeff_diff(const torus::SpectralField& a, const torus::SpectralField& b) {
  const int n = std::max(a.n_modes(), b.n_modes());
  double m = 0.0;
  for (int k = -n; k <= n; ++k) m = std::max(m, std::abs(a.coeff(k) - b.coeff(k)));
  return m;
}

// least squares slope of log y on log x
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

}  // namespace testing_util
