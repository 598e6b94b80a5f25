#include <doctest.h>

#include "common.hpp"
#include "torus/measures.hpp"
#include "torus/miura.hpp"

using namespace torus;
using namespace testing_util;

namespace {

FlowSpec mkdv_spec(double dt, double t_end, int stride) {
  FlowSpec s;
  s.dt = dt;
  s.t_end = t_end;
  s.snapshot_stride = stride;
  s.log_functionals = false;
  return s;
}

}  // namespace

TEST_CASE("forward map") {
  CHECK(miura_forward(SpectralField(4)).is_zero());
  for (double eps : {0.1, 0.5, 1.3}) {
    const auto w = miura_forward(sine(4, eps));
    for (double x : {0.0, 0.2, 0.55, 0.9}) CHECK(std::abs(evaluate(w, x) - oracle::miura_sine(eps, x)) < 1e-13);
  }
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto w = miura_forward(smooth_field(12, seed, 1.0, 0.2, true));
    CHECK(std::abs(w.coeff(0)) < 1e-12);
  }
  CHECK_THROWS(miura_forward(constant(4, 1.0)));
}

TEST_CASE("Jacobian against central differences") {
  const auto q = smooth_field(10, 3, 0.8, 0.3, true);
  const double h = 1e-5;
  for (int dir = 0; dir < 5; ++dir) {
    const auto f = smooth_field(10, 30 + dir, 1.0, 0.3, true);
    const auto fd = (1.0 / (2 * h)) * (miura_forward(q + h * f) - miura_forward(q - h * f));
    CHECK(l2_diff(fd, miura_jacobian_apply(q, f)) < 1e-6);
  }
}

TEST_CASE("inverse: round trips on the unit ball") {
  CHECK(miura_inverse(SpectralField(6)).q.is_zero());
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> U(0.05, 1.0);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto q = smooth_field(8, 700 + seed, U(rng), 0.3, true);
    const auto r = miura_inverse(miura_forward(q));
    CHECK(r.residual <= 1e-12);
    CHECK(l2_diff(r.q, q) < 1e-8);
  }
  CHECK_THROWS(miura_inverse(constant(4, 0.5)));
  MiuraInverseOptions stingy;
  stingy.max_iter = 0;
  CHECK_THROWS_AS(miura_inverse(miura_forward(sine(4, 0.5)), stingy), MiuraInverseFailure);
}

TEST_CASE("shifts") {
  const auto w = smooth_field(6, 2);
  CHECK(max_coeff_diff(tau_shift(tau_shift(w, 0.7), -0.7), w) < 1e-16);
  CHECK(tau_shift(w, 0.3).mean() == doctest::Approx(w.mean() - 0.3));
}

TEST_CASE("conjugated KdV against the direct integrator") {
  const auto z = kdv_conjugated(SpectralField(8), mkdv_spec(1e-5, 0.005, 100));
  for (auto& s : z.w.snapshots) CHECK(s.field.is_zero());

  const auto w0 = miura_forward(sine(8, 0.2), 16);
  const auto c = kdv_conjugated(w0, mkdv_spec(1e-5, 0.01, 100));
  for (double d : c.to_direct) CHECK(d <= 1e-5);
  for (auto& s : c.w.snapshots) CHECK(s.field.mean() == 0.0);

  const auto a0 = kdv_alpha(w0, mkdv_spec(1e-5, 0.005, 100));
  const auto c0 = kdv_conjugated(w0, mkdv_spec(1e-5, 0.005, 100));
  CHECK(l2_diff(a0.w.final_field(), c0.w.final_field()) < 1e-14);

  const auto wa = tau_shift(w0, -0.7);
  const auto ga = kdv_alpha(wa, mkdv_spec(1e-5, 0.01, 100));
  for (double d : ga.to_direct) CHECK(d <= 1e-5);
  CHECK(ga.w.final_field().mean() == doctest::Approx(0.7));

  auto focusing = mkdv_spec(1e-5, 0.01, 100);
  focusing.sign = Sign::focusing;
  CHECK_THROWS(kdv_conjugated(w0, focusing));
}

TEST_CASE("pushforward of the mean-zero Gaussian has spectral slope 2 - 2s") {
  MeasureSpec spec;
  spec.n_modes = 64;
  spec.mean_zero = true;
  const auto t = multiplier_table(0.75, 64);
  std::vector<double> m2(65);
  const int M = 400;
  for (int i = 0; i < M; ++i) {
    const auto w = miura_forward(sample_mu_s(spec, t, 11, i), 64);
    for (int k = 1; k <= 64; ++k) m2[k] += std::norm(w.coeff(k)) / M;
  }
  std::vector<double> xs, ys;
  for (int k = 8; k <= 48; ++k) {
    xs.push_back(freq(k));
    ys.push_back(m2[k]);
  }
  CHECK(loglog_slope(xs, ys) == doctest::Approx(0.5).epsilon(0.3));
}
