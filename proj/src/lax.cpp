#include "torus/lax.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fft.hpp"

namespace torus {

namespace {

constexpr double kSqrt3 = 1.7320508075688772935;

Mat2 mul(const Mat2& a, const Mat2& b) {
  return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
          a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

Vec2 mul(const Mat2& a, const Vec2& v) { return {a[0] * v[0] + a[1] * v[1], a[2] * v[0] + a[3] * v[1]}; }

// inverse up to the (positive) determinant, which only rescales propagated directions
Vec2 mul_adj(const Mat2& a, const Vec2& v) { return {a[3] * v[0] - a[1] * v[1], -a[2] * v[0] + a[0] * v[1]}; }

double normalize(Vec2& v) {
  const double n = std::hypot(v[0], v[1]);
  v[0] /= n;
  v[1] /= n;
  return std::log(n);
}

double normalize(Mat2& m) {
  const double n = std::sqrt(m[0] * m[0] + m[1] * m[1] + m[2] * m[2] + m[3] * m[3]);
  for (double& x : m) x /= n;
  return std::log(n);
}

// exp of trace-free [[a, b], [c, -a]]
Mat2 expm_tracefree(double a, double b, double c) {
  const double d = a * a + b * c;
  double ch, sh;
  if (d > 1e-8) {
    const double r = std::sqrt(d);
    ch = std::cosh(r);
    sh = std::sinh(r) / r;
  } else if (d < -1e-8) {
    const double r = std::sqrt(-d);
    ch = std::cos(r);
    sh = std::sin(r) / r;
  } else {
    ch = 1.0 + d / 2.0 + d * d / 24.0;
    sh = 1.0 + d / 6.0 + d * d / 120.0;
  }
  return {ch + sh * a, sh * b, sh * c, ch - sh * a};
}

Mat2 magnus_step(double kappa, double q1, double q2, double h) {
  const double beta = kSqrt3 / 6.0 * h * h * kappa * (q1 - q2);
  const double qm = 0.5 * h * (q1 + q2);
  return expm_tracefree(h * kappa, qm + beta, qm - beta);
}

Mat2 rk4_step(double kappa, double q0, double qh, double q1, double h) {
  auto A = [kappa](double q) { return Mat2{kappa, q, q, -kappa}; };
  const Mat2 I{1, 0, 0, 1};
  auto axpy = [](const Mat2& x, double s, const Mat2& y) {
    return Mat2{x[0] + s * y[0], x[1] + s * y[1], x[2] + s * y[2], x[3] + s * y[3]};
  };
  const Mat2 k1 = A(q0);
  const Mat2 k2 = mul(A(qh), axpy(I, h / 2, k1));
  const Mat2 k3 = mul(A(qh), axpy(I, h / 2, k2));
  const Mat2 k4 = mul(A(q1), axpy(I, h, k3));
  Mat2 p;
  for (int i = 0; i < 4; ++i) p[i] = I[i] + h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  return p;
}

// one-step propagators over a uniform subdivision of [0,1)
std::vector<Mat2> step_table(const SpectralField& q, double kappa, int steps, Stepper st) {
  const double h = 1.0 / steps;
  std::vector<Mat2> E(steps);
  if (st == Stepper::magnus4) {
    const double c1 = 0.5 - kSqrt3 / 6.0, c2 = 0.5 + kSqrt3 / 6.0;
    auto qa = synthesize(translate(q, c1 * h), steps);
    auto qb = synthesize(translate(q, c2 * h), steps);
    for (int n = 0; n < steps; ++n) E[n] = magnus_step(kappa, qa[n], qb[n], h);
  } else {
    auto q0 = synthesize(q, steps);
    auto qh = synthesize(translate(q, 0.5 * h), steps);
    for (int n = 0; n < steps; ++n) E[n] = rk4_step(kappa, q0[n], qh[n], q0[(n + 1) % steps], h);
  }
  return E;
}

Mat2 pointwise_step(const SpectralField& q, double kappa, double x, double h, Stepper st) {
  if (st == Stepper::magnus4) {
    const double a = h >= 0 ? h : -h;
    const double x0 = h >= 0 ? x : x + h;
    const double c1 = 0.5 - kSqrt3 / 6.0, c2 = 0.5 + kSqrt3 / 6.0;
    Mat2 e = magnus_step(kappa, evaluate(q, x0 + c1 * a), evaluate(q, x0 + c2 * a), a);
    if (h >= 0) return e;
    return {e[3], -e[1], -e[2], e[0]};
  }
  return rk4_step(kappa, evaluate(q, x), evaluate(q, x + h / 2), evaluate(q, x + h), h);
}

struct Propagated {
  Vec2 v;
  double log_norm;
};

// carries a solution from a to b (either direction) with log-scaled renormalization
Propagated propagate(const SpectralField& q, double kappa, Vec2 v, double a, double b, int steps_per_unit,
                     Stepper st) {
  double ln = normalize(v);
  const int n = std::max(1, static_cast<int>(std::ceil(std::abs(b - a) * steps_per_unit)));
  const double h = (b - a) / n;
  for (int i = 0; i < n; ++i) {
    v = mul(pointwise_step(q, kappa, a + i * h, h, st), v);
    ln += normalize(v);
  }
  return {v, ln};
}

Vec2 eigvec(const Mat2& t, double lambda) {
  Vec2 a{t[1], lambda - t[0]};
  Vec2 b{lambda - t[3], t[2]};
  Vec2 v = (std::hypot(a[0], a[1]) >= std::hypot(b[0], b[1])) ? a : b;
  normalize(v);
  return v;
}

Monodromy floquet(const Mat2& scaled, double log_scale, int steps, double ode_tol) {
  Monodromy m;
  m.matrix = scaled;
  m.log_scale = log_scale;
  m.steps = steps;
  const double tau = scaled[0] + scaled[3];
  const double det = std::exp(-2.0 * log_scale);
  const double disc = tau * tau / 4.0 - det;
  if (!(disc > 0.0) || !(tau > 0.0))
    throw FloquetDegenerate("floquet-degenerate: monodromy is not hyperbolic (trace " +
                            std::to_string(tau * std::exp(log_scale)) + ")");
  const double lam = tau / 2.0 + std::sqrt(disc);
  m.log_rho_plus = log_scale + std::log(lam);
  m.rho_plus = std::exp(m.log_rho_plus);
  m.rho_minus = std::exp(-m.log_rho_plus);
  if (m.rho_plus - 1.0 < 10.0 * ode_tol)
    throw FloquetDegenerate("floquet-degenerate: |rho_plus| - 1 = " + std::to_string(m.rho_plus - 1.0));
  m.v_plus = eigvec(scaled, lam);
  m.v_minus = eigvec(scaled, det / lam);
  return m;
}

double stepper_constant(Stepper st) { return st == Stepper::magnus4 ? 60.0 : 50.0; }

}  // namespace

int greens_grid(int n_modes, const LaxOptions& opt) {
  return std::max(16, default_grid(n_modes, opt.grid_factor));
}

int ode_steps(const SpectralField& q, double kappa, const LaxOptions& opt, int grid) {
  const double qmax = linf_norm(q);
  const double lam = std::max(freq(std::max(1, q.n_modes())), 2.0 * std::sqrt(kappa * kappa + qmax * qmax));
  const double eta = stepper_constant(opt.stepper) * std::pow(opt.ode_tol, 0.25);
  const long per = static_cast<long>(std::ceil(lam / eta / grid));
  return static_cast<int>(std::max(1L, per) * grid);
}

Monodromy monodromy(const SpectralField& q, double kappa, double ode_tol) {
  LaxOptions opt;
  opt.ode_tol = ode_tol;
  return monodromy(q, kappa, opt);
}

Monodromy monodromy(const SpectralField& q, double kappa, const LaxOptions& opt) {
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
  if (!(opt.ode_tol > 0.0)) throw std::invalid_argument("ode_tol must be positive");
  const int grid = greens_grid(q.n_modes(), opt);
  const int steps = ode_steps(q, kappa, opt, grid);
  auto E = step_table(q, kappa, steps, opt.stepper);
  Mat2 psi{1, 0, 0, 1};
  double ls = 0.0;
  for (int n = 0; n < steps; ++n) {
    psi = mul(E[n], psi);
    if ((n & 15) == 15) ls += normalize(psi);
  }
  ls += normalize(psi);
  return floquet(psi, ls, steps, opt.ode_tol);
}

DiagonalGreens diagonal_greens(const SpectralField& q, double kappa, const LaxOptions& opt) {
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
  const int grid = greens_grid(q.n_modes(), opt);
  const int steps = ode_steps(q, kappa, opt, grid);
  const int r = steps / grid;
  auto E = step_table(q, kappa, steps, opt.stepper);

  std::vector<Mat2> psi_at(grid);
  Mat2 psi{1, 0, 0, 1};
  double ls = 0.0;
  for (int j = 0; j < grid; ++j) {
    psi_at[j] = psi;
    for (int i = 0; i < r; ++i) psi = mul(E[j * r + i], psi);
    ls += normalize(psi);
  }
  DiagonalGreens out;
  out.kappa = kappa;
  out.monodromy = floquet(psi, ls, steps, opt.ode_tol);
  const Vec2 vp = out.monodromy.v_plus;

  std::vector<Vec2> d_at(grid);
  Vec2 d = out.monodromy.v_minus;
  for (int j = grid - 1; j >= 0; --j) {
    for (int i = r - 1; i >= 0; --i) d = mul_adj(E[j * r + i], d);
    normalize(d);
    d_at[j] = d;
  }

  out.gamma_grid.resize(grid);
  out.g_plus_grid.resize(grid);
  out.g_minus_grid.resize(grid);
  for (int j = 0; j < grid; ++j) {
    Vec2 u = mul(psi_at[j], vp);
    normalize(u);
    const Vec2& dj = d_at[j];
    const double det = dj[0] * u[1] - dj[1] * u[0];
    out.gamma_grid[j] = -2.0 * dj[0] * u[1] / det;
    out.g_minus_grid[j] = (dj[0] * u[0] - dj[1] * u[1]) / det;
    out.g_plus_grid[j] = -(dj[0] * u[0] + dj[1] * u[1]) / det;
  }
  out.gamma = analyze(out.gamma_grid);
  out.g_plus = analyze(out.g_plus_grid);
  out.g_minus = analyze(out.g_minus_grid);
  return out;
}

GreenEval green_at(const SpectralField& q, double kappa, double x, double y, const LaxOptions& opt) {
  const Monodromy m = monodromy(q, kappa, opt);
  const int spu = m.steps;
  const double y0 = y - std::floor(y);
  const double x0 = x - (y - y0);
  GreenEval g;
  g.x = x;
  g.y = y;
  if (x0 >= y0) {
    const double top = std::max(std::ceil(x0), 1.0);
    const Propagated px = propagate(q, kappa, m.v_minus, top, x0, spu, opt.stepper);
    const Propagated py = propagate(q, kappa, px.v, x0, y0, spu, opt.stepper);
    const Propagated pu = propagate(q, kappa, m.v_plus, 0.0, y0, spu, opt.stepper);
    const Vec2& a = px.v;
    const Vec2& d = py.v;
    const Vec2& u = pu.v;
    const double scale = std::exp(-py.log_norm) / (d[0] * u[1] - d[1] * u[0]);
    g.entries = {-a[0] * u[1] * scale, -a[0] * u[0] * scale, -a[1] * u[1] * scale, -a[1] * u[0] * scale};
  } else {
    const double bottom = std::floor(x0);
    const Propagated px = propagate(q, kappa, m.v_plus, bottom, x0, spu, opt.stepper);
    const Propagated py = propagate(q, kappa, px.v, x0, y0, spu, opt.stepper);
    const Propagated pd = propagate(q, kappa, m.v_minus, 1.0, y0, spu, opt.stepper);
    const Vec2& a = px.v;
    const Vec2& u = py.v;
    const Vec2& d = pd.v;
    const double scale = std::exp(-py.log_norm) / (d[0] * u[1] - d[1] * u[0]);
    g.entries = {-a[0] * d[1] * scale, -a[0] * d[0] * scale, -a[1] * d[1] * scale, -a[1] * d[0] * scale};
  }
  return g;
}

SpectralField gamma2(const SpectralField& q, double kappa) {
  auto lo = resolvent_apply(q, ResolventKind::minus, kappa);
  auto hi = resolvent_apply(q, ResolventKind::plus, kappa);
  return -2.0 * multiply(lo, hi, 2, 2 * q.n_modes());
}

SpectralField gamma_ge4(const SpectralField& q, double kappa, const LaxOptions& opt) {
  return diagonal_greens(q, kappa, opt).gamma - gamma2(q, kappa);
}

GreenEval free_green(double kappa, double x, double y) {
  GreenEval g;
  g.x = x;
  g.y = y;
  const double e = std::exp(-kappa * std::abs(x - y));
  g.entries = {x < y ? e : 0.0, 0.0, 0.0, y < x ? e : 0.0};
  return g;
}

GreenEval periodic_free_green(double kappa, double x, double y) {
  GreenEval g;
  g.x = x;
  g.y = y;
  const double z = x - y;
  const double c = 1.0 / (1.0 - std::exp(-kappa));
  g.entries = {c * std::exp(kappa * (z - std::ceil(z))), 0.0, 0.0, c * std::exp(-kappa * (z - std::floor(z)))};
  return g;
}

}  // namespace torus
