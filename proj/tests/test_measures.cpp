#include <doctest.h>

#include "common.hpp"
#include "torus/measures.hpp"

using namespace torus;
using namespace testing_util;

TEST_CASE("multiplier values against the series oracle and frozen constants") {
  const auto t = multiplier_table(0.75, 256);
  CHECK(t.m2[0] == 0.0);
  CHECK(std::abs(t.c_s - oracle::c_s_075) < 1e-13);
  CHECK(std::abs(c_s_constant(0.6) - oracle::c_s_closed(0.6)) < 1e-12);
  CHECK(std::abs(t.m2[1] - oracle::m2_075[1]) < 1e-12 * oracle::m2_075[1]);
  CHECK(std::abs(t.m2[2] - oracle::m2_075[2]) < 1e-12 * oracle::m2_075[2]);
  CHECK(std::abs(t.m2[10] - oracle::m2_075_k10) < 1e-12 * oracle::m2_075_k10);
  CHECK(std::abs(t.m2[100] - oracle::m2_075_k100) < 1e-12 * oracle::m2_075_k100);
  for (int k : {1, 3, 17, 64, 255}) CHECK(std::abs(t.m2[k] - oracle::m2_series(0.75, freq(k))) < 1e-9 * t.m2[k]);
  for (double s : {0.0, 0.55, 0.9})
    CHECK(std::abs(ms_squared(s, freq(5)) - oracle::m2_series(s, freq(5))) < 1e-9 * ms_squared(s, freq(5)));
  CHECK_THROWS(multiplier_table(1.0, 4));
}

TEST_CASE("partial-fraction form of w") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> X(-2000.0, 2000.0), K(1.0, 1000.0);
  for (int i = 0; i < 1000; ++i) {
    const double xi = X(rng), kappa = K(rng);
    const double ref = 3 * kappa * kappa * xi * xi / ((kappa * kappa + xi * xi) * (4 * kappa * kappa + xi * xi));
    CHECK(std::abs(w_multiplier(xi, kappa) - ref) <= 1e-12 * std::max(ref, 1e-300));
    CHECK(std::abs(w_multiplier(xi, kappa) - w_partial_fractions(xi, kappa)) <= 1e-12);
  }
}

TEST_CASE("bracketing and the C_s asymptotics") {
  const auto t = multiplier_table(0.75, 256);
  double lo = 1e300, hi = 0;
  std::vector<double> xs, ds;
  for (int k = 0; k <= 256; ++k) {
    lo = std::min(lo, t.bracket(k));
    hi = std::max(hi, t.bracket(k));
    if (k >= 1) {
      xs.push_back(freq(k));
      ds.push_back(std::abs(t.c_s * std::pow(freq(k), 1.5) - t.m2[k]));
    }
  }
  CHECK(lo > 0.1);
  CHECK(hi < 10.0);
  CHECK(loglog_slope(xs, ds) <= -1.8);
  double cmax = 0;
  for (size_t i = 0; i < xs.size(); ++i) cmax = std::max(cmax, ds[i] * xs[i] * xs[i]);
  CHECK(cmax < 10.0);
}

TEST_CASE("sampler second moments") {
  MeasureSpec spec;
  spec.n_modes = 6;
  const auto t = multiplier_table(0.75, 6);
  const int M = 100000;
  std::vector<double> s1(7), s2(7), u1(7), u2(7);
  for (int i = 0; i < M; ++i) {
    const auto q = sample_mu_s(spec, t, 2024, i);
    const auto r = sample_mu_tilde(0.75, 6, t, 2024, i);
    for (int k = 0; k <= 6; ++k) {
      const double a = std::norm(q.coeff(k)), b = std::norm(r.coeff(k));
      s1[k] += a;
      s2[k] += a * a;
      u1[k] += b;
      u2[k] += b * b;
    }
  }
  for (int k = 0; k <= 6; ++k) {
    const double mean = s1[k] / M, se = std::sqrt((s2[k] / M - mean * mean) / M);
    CHECK(std::abs(mean - 1.0 / (1.0 + t.m2[k])) < 3 * se);
    const double mt = u1[k] / M, set = std::sqrt((u2[k] / M - mt * mt) / M);
    const double target = 1.0 / (t.c_s * std::pow(1 + freq(k) * freq(k), 0.75));
    CHECK(std::abs(mt - target) < 3 * set);
  }
}

TEST_CASE("sampler reality, determinism and cutoff nesting") {
  MeasureSpec spec;
  spec.n_modes = 32;
  const auto t = multiplier_table(0.75, 64);
  const auto a = sample_mu_s(spec, t, 7, 3), b = sample_mu_s(spec, t, 7, 3), c = sample_mu_s(spec, t, 7, 4);
  CHECK(max_coeff_diff(a, b) == 0.0);
  CHECK(max_coeff_diff(a, c) > 0.0);
  for (int k = 0; k <= 32; ++k) CHECK(a.coeff(-k) == std::conj(a.coeff(k)));
  CHECK(a.coeff(0).imag() == 0.0);
  spec.n_modes = 64;
  CHECK(max_coeff_diff(project(sample_mu_s(spec, t, 7, 3), 32), resize(a, 64)) == 0.0);
  spec.mean_zero = true;
  CHECK(sample_mu_s(spec, t, 7, 3).coeff(0) == cplx{});
  const auto r = sample_mu_tilde(0.75, 32, t, 7, 3);
  CHECK(max_coeff_diff(r, sample_mu_tilde(0.75, 32, t, 7, 3)) == 0.0);
}

TEST_CASE("variance ratio of the two Gaussian measures tends to one") {
  const auto t = multiplier_table(0.75, 256);
  double prev = 1e300;
  for (int k : {1, 4, 16, 64, 256}) {
    const double ratio = (t.c_s * std::pow(1 + freq(k) * freq(k), 0.75)) / (1 + t.m2[k]);
    CHECK(std::abs(ratio - 1) < prev);
    prev = std::abs(ratio - 1);
  }
  CHECK(prev < 1e-3);
}

TEST_CASE("Kakutani diagnostic") {
  const auto kt = kakutani_diagnostic(0.75, 256);
  for (double v : kt.summand) CHECK(v >= 0.0);
  CHECK(kt.summand_slope == doctest::Approx(-3.0).epsilon(0.1));
  double prev = 1e300;
  for (int K = 4; 2 * K <= 256; K *= 2) {
    const double d = kt.partial[2 * K] - kt.partial[K];
    CHECK(d < prev);
    prev = d;
  }
  CHECK(kt.tail_slope < 0.0);
}

TEST_CASE("density F") {
  MeasureSpec spec;
  spec.R = 0.5;
  const auto z = density_F(SpectralField(8), spec);
  CHECK(z.weight == 1.0);
  CHECK(z.e_value == 0.0);
  CHECK(density_F(cosine(8, 1.2), spec).weight == 0.0);  // ||q||^2 = 0.72
  const auto q = cosine(8, 0.8);
  const auto d = density_F(q, spec);
  CHECK(d.weight == doctest::Approx(std::exp(-d.e_value)));
  CHECK(d.weight > 0.0);
  spec.s = 0.5;
  CHECK_THROWS(density_F(q, spec));
}

TEST_CASE("truncated density converges in L") {
  MeasureSpec spec;
  spec.n_modes = 16;
  spec.R = 4;
  const auto t = multiplier_table(0.75, 16);
  std::vector<double> err(3);
  const double Ls[] = {16, 64, 256};
  for (int i = 0; i < 8; ++i) {
    const auto q = sample_mu_s(spec, t, 99, i);
    const auto f = density_F(q, spec);
    for (int j = 0; j < 3; ++j) err[j] += std::abs(density_F_truncated(q, spec, 16, Ls[j]).weight - f.weight);
  }
  CHECK(err[1] < err[0]);
  CHECK(err[2] < err[1]);
}

TEST_CASE("support trend of the sampler in H^sigma") {
  MeasureSpec spec;
  spec.n_modes = 64;
  const auto t = multiplier_table(0.75, 64);
  const int Ns[] = {8, 16, 32, 64};
  double inc02[3] = {}, inc03[3] = {};
  for (int i = 0; i < 1000; ++i) {
    const auto q = sample_mu_s(spec, t, 5, i);
    for (int j = 0; j < 3; ++j) {
      const auto band = project(project(q, Ns[j + 1]), Ns[j], Side::high);
      inc02[j] += std::pow(sobolev_norm(band, 0.2), 2);
      inc03[j] += std::pow(sobolev_norm(band, 0.3), 2);
    }
  }
  // dyadic increments of E||pi_N q||^2_{H^sigma} shrink below s - 1/2 and grow above it
  CHECK(inc02[1] < inc02[0]);
  CHECK(inc02[2] < inc02[1]);
  CHECK(inc03[1] > inc03[0]);
  CHECK(inc03[2] > inc03[1]);
}

TEST_CASE("ensemble weights and effective sample size") {
  MeasureSpec spec;
  spec.n_modes = 8;
  spec.R = 2;
  const auto e = draw_ensemble(spec, 3, 40);
  int zero = 0;
  for (auto& s : e.samples) {
    if (inner(s.field, s.field) > spec.R) {
      CHECK(s.weight == 0.0);
      ++zero;
    } else {
      CHECK(s.weight == doctest::Approx(std::exp(-s.e_value)));
    }
  }
  CHECK(e.ess() > 0.0);
  CHECK(e.ess() <= 40 - zero + 1e-9);
  const auto u = draw_ensemble(spec, 3, 40, false);
  CHECK(u.ess() == doctest::Approx(40.0));
}
