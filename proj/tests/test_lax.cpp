#include <doctest.h>

#include "common.hpp"
#include "torus/lax.hpp"

using namespace torus;
using namespace testing_util;

namespace {

double h1k(const SpectralField& f, double kappa) { return sobolev_norm(f, 1.0, kappa); }

void check_diagonal_identities(const SpectralField& q, double kappa) {
  const auto d = diagonal_greens(q, kappa);
  const int n = d.gamma.n_modes();
  for (double g : d.gamma_grid) CHECK(1.0 + g > 0.0);
  // d gamma = 2 q g+, d g- = -2 kappa g+
  CHECK(l2_diff(derivative(d.gamma), 2.0 * multiply(q, d.g_plus, 2, n)) < 1e-6);
  CHECK(l2_diff(derivative(d.g_minus), -2.0 * kappa * d.g_plus) < 1e-6);
  // g- = 4 kappa R0(2 kappa)(q gamma + q)
  auto rhs = resolvent_apply(multiply(q, d.gamma, 2, n) + resize(q, n), ResolventKind::r0, 2.0 * kappa);
  CHECK(l2_diff(d.g_minus, 4.0 * kappa * rhs) < 1e-6);
}

}  // namespace

TEST_CASE("monodromy of the free and constant systems") {
  auto m = monodromy(SpectralField(4), 1.0);
  const double sc = std::exp(m.log_scale);
  CHECK(std::abs(m.matrix[0] * sc - std::exp(1.0)) < 1e-10);
  CHECK(std::abs(m.matrix[3] * sc - std::exp(-1.0)) < 1e-10);
  CHECK(std::abs(m.matrix[1] * sc) < 1e-12);
  CHECK(std::abs(m.rho_plus - std::exp(1.0)) < 1e-10);

  const oracle::Constant c{1.0, 1.0};
  auto mc = monodromy(constant(4, 1.0), 1.0);
  const auto T = c.transfer();
  for (int i = 0; i < 4; ++i) CHECK(std::abs(mc.matrix[i] * std::exp(mc.log_scale) - T[i]) < 1e-9);
  CHECK(std::abs(mc.rho_plus - std::exp(std::sqrt(2.0))) < 1e-9);
  CHECK(std::abs(mc.rho_plus * mc.rho_minus - 1.0) < 1e-12);
}

TEST_CASE("monodromy determinant and Floquet pair") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto q = smooth_field(12, seed, 1.0);
    for (double kappa : {0.5, 1.0, 2.0, 4.0}) {
      auto m = monodromy(q, kappa);
      const double det = (m.matrix[0] * m.matrix[3] - m.matrix[1] * m.matrix[2]) * std::exp(2 * m.log_scale);
      CHECK(std::abs(det - 1.0) < 1e-8);
      CHECK(std::abs(m.rho_plus * m.rho_minus - 1.0) < 1e-8);
      CHECK(m.rho_minus < 1.0);
      CHECK(m.rho_plus > 1.0);
    }
  }
}

TEST_CASE("Magnus and RK4 agree") {
  auto q = smooth_field(16, 77, 1.5);
  LaxOptions mag;
  mag.stepper = Stepper::magnus4;
  for (double kappa : {1.0, 3.0}) {
    auto a = diagonal_greens(q, kappa), b = diagonal_greens(q, kappa, mag);
    CHECK(l2_diff(a.gamma, b.gamma) < 1e-9);
    CHECK(l2_diff(a.g_minus, b.g_minus) < 1e-9);
  }
}

TEST_CASE("Green's function of the free and constant potentials") {
  const double kappa = 1.3;
  for (auto [x, y] : {std::pair{0.2, 0.7}, {0.7, 0.2}, {0.1, 0.95}, {0.9, 0.05}}) {
    auto g = green_at(SpectralField(3), kappa, x, y);
    auto g0 = oracle::free_kernel(kappa, x, y);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(g.entries[i] - g0[i]) < 1e-10);
  }
  for (double c : {1.0, -0.6}) {
    const double mu = std::sqrt(kappa * kappa + c * c);
    for (double x : {0.0, 0.3, 0.8}) {
      auto g = green_at(constant(3, c), kappa, x, x);
      CHECK(std::abs(g.entries[2] - c / (2 * mu)) < 1e-9);
      CHECK(std::abs(g.entries[1] + c / (2 * mu)) < 1e-9);
    }
  }
}

TEST_CASE("Green's determinant vanishes and symmetries hold off the diagonal") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  auto q = smooth_field(10, 5, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double x = U(rng), y = U(rng), kappa = 1.0 + 3.0 * U(rng);
    if (std::abs(x - y) < 1e-3) continue;
    auto g = green_at(q, kappa, x, y);
    auto h = green_at(q, kappa, y, x);
    const double scale = std::max(1.0, std::abs(g.entries[0]) + std::abs(g.entries[3]));
    CHECK(std::abs(g.det()) < 1e-8 * scale * scale);
    CHECK(std::abs(h.entries[0] - g.entries[3]) < 1e-8);
    CHECK(std::abs(h.entries[1] - g.entries[1]) < 1e-8);
    CHECK(std::abs(h.entries[2] - g.entries[2]) < 1e-8);
  }
}

TEST_CASE("diagonal quantities: free, constant and small-amplitude") {
  auto z = diagonal_greens(SpectralField(4), 1.0);
  CHECK(z.gamma.is_zero());
  CHECK(z.g_plus.is_zero());
  CHECK(z.g_minus.is_zero());

  const oracle::Constant c{1.0, 1.0};
  auto d = diagonal_greens(constant(4, 1.0), 1.0);
  CHECK(std::abs(d.gamma.coeff(0).real() - c.gamma()) < 1e-9);
  CHECK(std::abs(d.g_minus.coeff(0).real() - c.g_minus()) < 1e-9);
  CHECK(l2_norm(d.g_plus) < 1e-9);
  CHECK(std::abs(d.gamma.coeff(0).real() - (1 / std::sqrt(2.0) - 1)) < 1e-9);

  // gamma - gamma2 vanishes to fourth order
  std::vector<double> amps{0.05, 0.1, 0.2}, errs;
  for (double a : amps) errs.push_back(l2_norm(diagonal_greens(cosine(8, a), 1.0).gamma - gamma2(cosine(8, a), 1.0)));
  CHECK(loglog_slope(amps, errs) == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("gamma2") {
  CHECK(gamma2(SpectralField(3), 1.0).is_zero());
  CHECK(std::abs(gamma2(constant(3, 1.0), 1.0).coeff(0) + 0.5) < 1e-15);
  CHECK(std::abs(gamma2(constant(3, 0.4), 2.0).coeff(0) + 0.16 / 8.0) < 1e-15);
  auto g = gamma2(smooth_field(8, 1), 1.5);
  for (int k = 0; k <= g.n_modes(); ++k) CHECK(std::abs(g.coeff(-k) - std::conj(g.coeff(k))) < 1e-15);
  // Taylor of kappa/mu - 1 at c = 0.01
  const oracle::Constant small{1.0, 0.01};
  CHECK(std::abs(gamma2(constant(3, 0.01), 1.0).coeff(0).real() - small.gamma()) < 1e-8 * 1.0);
}

TEST_CASE("gamma_ge4: quartic order and kappa^{3/2} bound") {
  CHECK(gamma_ge4(SpectralField(3), 1.0).is_zero());
  auto base = smooth_field(8, 2, 1.0);
  std::vector<double> amps{0.05, 0.1, 0.2}, norms;
  for (double a : amps) norms.push_back(h1k(gamma_ge4(a * base, 1.0), 1.0));
  CHECK(loglog_slope(amps, norms) == doctest::Approx(4.0).epsilon(0.05));

  std::vector<double> scaled;
  for (double kappa : {1.0, 2.0, 4.0, 8.0, 16.0})
    scaled.push_back(h1k(gamma_ge4(base, kappa), kappa) * std::pow(kappa, 1.5) / std::pow(l2_norm(base), 4));
  CHECK(*std::max_element(scaled.begin(), scaled.end()) < 10.0);
}

TEST_CASE("free-kernel folding reproduces the periodic kernel") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (double kappa : {1.0, 2.0, 4.0, 8.0}) {
    for (int i = 0; i < 50; ++i) {
      const double x = U(rng), y = U(rng);
      std::array<double, 4> sum{};
      for (int n = -20; n <= 20; ++n) {
        auto g = free_green(kappa, x, y + n);
        for (int j = 0; j < 4; ++j) sum[j] += g.entries[j];
      }
      auto p = periodic_free_green(kappa, x, y);
      auto o = oracle::periodic_kernel(kappa, x, y);
      // the folded sum stops at |n| = 20; its remainder is below e^{-20 kappa}/(1 - e^{-kappa})
      const double tail = std::exp(-20.0 * kappa) / (1.0 - std::exp(-kappa));
      for (int j : {0, 3}) {
        CHECK(std::abs(p.entries[j] - o[j]) < 1e-13);
        CHECK(std::abs(p.entries[j] - sum[j]) <= tail + 1e-13);
        if (kappa >= 2.0) CHECK(std::abs(p.entries[j] - sum[j]) < 1e-10);
      }
    }
  }
}

TEST_CASE("Lipschitz dependence of gamma on q") {
  std::vector<double> cs;
  for (double kappa : {1.0, 2.0, 4.0, 8.0}) {
    double worst = 0;
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      auto q1 = smooth_field(16, 1000 + seed, 1.0, 0.1), q2 = smooth_field(16, 2000 + seed, 1.0, 0.1);
      const double num = h1k(diagonal_greens(q1, kappa).gamma - diagonal_greens(q2, kappa).gamma, kappa);
      worst = std::max(worst, num * std::sqrt(kappa) / l2_diff(q1, q2));
    }
    cs.push_back(worst);
  }
  CHECK(*std::max_element(cs.begin(), cs.end()) / *std::min_element(cs.begin(), cs.end()) < 4.0);
}

TEST_CASE("window discretization of the resolvent matches the Floquet gamma") {
  std::mt19937_64 rng(21);
  auto t = oracle::random_trig(4, 0.4, rng, 1.0);
  auto q = from_trig(t);
  for (double kappa : {1.0, 2.0}) {
    auto d = diagonal_greens(q, kappa);
    for (double y : {0.0, 0.31, 0.77}) {
      const double w = oracle::window_gamma(t, kappa, y, 8.0 / kappa, 1600);
      CHECK(std::abs(w - evaluate(d.gamma, y)) < 1e-4);
    }
  }
}

TEST_CASE("diagonal identities on random smooth fields") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto q = smooth_field(12, 300 + seed, 1.0);
    for (double kappa : {1.0, 2.0, 4.0}) check_diagonal_identities(q, kappa);
  }
}
