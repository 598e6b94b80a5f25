#pragma once

// Test-side reference computations. Nothing here calls into the library's numerics.

#include <Eigen/Sparse>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

constexpr double pi = 3.141592653589793238462643383279502884;

// frozen high-precision values
constexpr double c_s_075 = 1.43604330568173481389;             // (1 - 2^{-2s}) pi / (2 sin pi s), s = 3/4
constexpr double m2_075[] = {0.0, 22.5970338059745482207, 63.9655605058144592905};  // k = 0, 1, 2
constexpr double m2_075_k10 = 715.215977212494880071;
constexpr double m2_075_k100 = 22617.1219274819967655;
constexpr double a_const = 0.414213562373095048802;        // 1/(1+sqrt 2)
constexpr double h_kappa_const = 2.34314575050761980479;   // 4 - 4/(1+sqrt 2)
constexpr double script_a_const = 0.105196567998147624699;  // 1/(1+sqrt 2) - 1/(1+sqrt 5)
constexpr double a2_cos = 0.0229999170875938081140;        // 1/(4+4 pi^2)
constexpr double h_mkdv_cos = 10.0571044010893586188;      // pi^2 + 3/16
constexpr double sobolev_cos_h1 = 4.49880081823797987511;  // (2 (1/4)(1+4 pi^2))^{1/2}

// constant potential q = c
struct Constant {
  double kappa, c;
  double mu() const { return std::sqrt(kappa * kappa + c * c); }
  double gamma() const { return kappa / mu() - 1.0; }
  double g_minus() const { return c / mu(); }
  double a() const { return c * c / (kappa + mu()); }
  double rho_plus() const { return std::exp(mu()); }
  // cosh(mu) I + sinh(mu)/mu [[k, c], [c, -k]]
  std::array<double, 4> transfer() const {
    const double m = mu(), ch = std::cosh(m), sh = std::sinh(m) / m;
    return {ch + sh * kappa, sh * c, sh * c, ch - sh * kappa};
  }
};

// free line kernel e^{-k|x-y|} diag(1_{x<y}, 1_{y<x})
inline std::array<double, 4> free_kernel(double kappa, double x, double y) {
  const double e = std::exp(-kappa * std::abs(x - y));
  return {x < y ? e : 0.0, 0.0, 0.0, y < x ? e : 0.0};
}

// periodic kernel by geometric series: sum over n of the free kernel at y + n
inline std::array<double, 4> periodic_kernel(double kappa, double x, double y) {
  const double d = x - y - std::floor(x - y);  // in [0, 1)
  const double r = std::exp(-kappa);
  // G11: sum over n with y + n > x of e^{-k (y + n - x)}, first term distance 1 - d (or 1 when d = 0)
  const double first11 = d == 0.0 ? 1.0 : 1.0 - d;
  const double first22 = d == 0.0 ? 1.0 : d;
  return {std::exp(-kappa * first11) / (1.0 - r), 0.0, 0.0, std::exp(-kappa * first22) / (1.0 - r)};
}

// trigonometric polynomial from coefficients c_k, k = 0..n (Hermitian extension implied)
struct Trig {
  std::vector<std::complex<double>> c;
  double operator()(double x) const {
    double v = c[0].real();
    for (size_t k = 1; k < c.size(); ++k) v += 2.0 * (c[k] * std::polar(1.0, 2.0 * pi * k * x)).real();
    return v;
  }
  double l2sq() const {
    double s = std::norm(c[0]);
    for (size_t k = 1; k < c.size(); ++k) s += 2.0 * std::norm(c[k]);
    return s;
  }
};

inline Trig random_trig(int n, double decay, std::mt19937_64& rng, double amp = 1.0) {
  std::normal_distribution<double> N;
  Trig t;
  t.c.resize(n + 1);
  t.c[0] = amp * N(rng) * 0.5;
  for (int k = 1; k <= n; ++k) t.c[k] = amp * std::complex<double>(N(rng), N(rng)) * std::exp(-decay * k) * 0.5;
  return t;
}

// gamma(y) from a trapezoidal box discretization of psi' = [[k, q], [q, -k]] psi on [y - W, y + W] with
// psi2(y - W) = 0, psi1(y + W) = 0 and jump diag(-1, 1) at y; two columns solved, Richardson in h.
inline double window_gamma_h(const std::function<double(double)>& q, double kappa, double y, double W, int m) {
  const int nodes = 2 * m + 1;  // node m is y; it carries a left and a right value
  const double h = W / m;
  // unknowns: psi at nodes 0..m (left of jump) and m..2m (right), 2 components each
  const int nu = 2 * (nodes + 1);
  auto idx = [&](int node, bool right, int comp) {
    const int slot = node < m ? node : (node == m ? (right ? m + 1 : m) : node + 1);
    return 2 * slot + comp;
  };
  double diag_sum = 0.0;
  for (int col = 0; col < 2; ++col) {
    std::vector<Eigen::Triplet<double>> T;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(nu);
    int row = 0;
    for (int j = 0; j < 2 * m; ++j) {
      const double xm = y - W + (j + 0.5) * h;
      const double a11 = kappa, a12 = q(xm), a21 = q(xm), a22 = -kappa;
      const bool r0 = j >= m;  // interval starting at node m uses the right value
      const int i0 = j, i1 = j + 1;
      for (int comp = 0; comp < 2; ++comp) {
        const double ar[2] = {comp == 0 ? a11 : a21, comp == 0 ? a12 : a22};
        // (psi1 - psi0)/h - A (psi0 + psi1)/2 = 0
        T.emplace_back(row, idx(i1, i1 > m, comp), 1.0 / h);
        T.emplace_back(row, idx(i0, r0, comp), -1.0 / h);
        for (int c2 = 0; c2 < 2; ++c2) {
          T.emplace_back(row, idx(i1, i1 > m, c2), -0.5 * ar[c2]);
          T.emplace_back(row, idx(i0, r0, c2), -0.5 * ar[c2]);
        }
        ++row;
      }
    }
    // jump: right - left = diag(-1, 1) e_col
    for (int comp = 0; comp < 2; ++comp) {
      T.emplace_back(row, idx(m, true, comp), 1.0);
      T.emplace_back(row, idx(m, false, comp), -1.0);
      b[row] = comp == col ? (comp == 0 ? -1.0 : 1.0) : 0.0;
      ++row;
    }
    T.emplace_back(row++, idx(0, false, 1), 1.0);
    T.emplace_back(row++, idx(2 * m, true, 0), 1.0);
    Eigen::SparseMatrix<double> A(row, nu);
    A.setFromTriplets(T.begin(), T.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(A);
    const Eigen::VectorXd sol = lu.solve(b);
    // continuous extension of (G - G0) on the diagonal: average of one-sided limits minus 1/2
    diag_sum += 0.5 * (sol[idx(m, false, col)] + sol[idx(m, true, col)]) - 0.5;
  }
  return diag_sum;
}

inline double window_gamma(const std::function<double(double)>& q, double kappa, double y, double W, int m) {
  const double coarse = window_gamma_h(q, kappa, y, W, m), fine = window_gamma_h(q, kappa, y, W, 2 * m);
  return fine + (fine - coarse) / 3.0;
}

// m_s(xi)^2 = |xi|^{2s} (C_s - 3 int_0^{1/|xi|} t^{2s+1} / ((1+t^2)(1+4t^2)) dt), composite Simpson
inline double m2_series(double s, double xi) {
  if (xi == 0.0) return 0.0;
  const double cs = s == 0.0 ? std::log(2.0) : (1.0 - std::pow(2.0, -2.0 * s)) * pi / (2.0 * std::sin(pi * s));
  const double b = 1.0 / std::abs(xi);
  const int n = 2000;
  const double h = b / n;
  auto f = [&](double t) { return 3.0 * std::pow(t, 2.0 * s + 1.0) / ((1.0 + t * t) * (1.0 + 4.0 * t * t)); };
  double acc = f(0.0) + f(b);
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(i * h);
  return std::pow(std::abs(xi), 2.0 * s) * (cs - acc * h / 3.0);
}

inline double c_s_closed(double s) { return (1.0 - std::pow(2.0, -2.0 * s)) * pi / (2.0 * std::sin(pi * s)); }

// sup ||f||_inf / ||f||_{H^1_k} = (sum_k 1/(4k^2 + xi^2))^{1/2} = sqrt(coth k / (4k))
inline double linf_h1k_constant(double kappa) { return std::sqrt(1.0 / std::tanh(kappa) / (4.0 * kappa)); }

// B(e sin 2 pi x) = 2 pi e cos 2 pi x - (e^2/2) cos 4 pi x
inline double miura_sine(double eps, double x) {
  return 2.0 * pi * eps * std::cos(2.0 * pi * x) - 0.5 * eps * eps * std::cos(4.0 * pi * x);
}

}  // namespace oracle
