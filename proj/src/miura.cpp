#include "torus/miura.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

namespace torus {

namespace {

void require_mean_zero(const SpectralField& f, const char* what) {
  if (std::abs(f.mean()) > 1e-12 * std::max(1.0, l2_norm(f)))
    throw std::invalid_argument(std::string(what) + " must have zero mean");
}

Eigen::VectorXd pack(const SpectralField& f, int n) {
  Eigen::VectorXd x(2 * n);
  for (int k = 1; k <= n; ++k) {
    x[2 * (k - 1)] = f.coeff(k).real();
    x[2 * (k - 1) + 1] = f.coeff(k).imag();
  }
  return x;
}

SpectralField unpack(const Eigen::VectorXd& x, int n) {
  SpectralField f(n);
  for (int k = 1; k <= n; ++k) f.set(k, {x[2 * (k - 1)], x[2 * (k - 1) + 1]});
  return f;
}

}  // namespace

SpectralField miura_forward(const SpectralField& q, int n_out) {
  require_mean_zero(q, "Miura input");
  const int n = q.n_modes();
  if (n_out < 0) n_out = 2 * n;
  SpectralField w = resize(derivative(q), n_out);
  w += power(q, 2, 2, n_out);
  auto c = w.coeffs_mut();
  c[n_out] = 0.0;  // the constant of q^2 is ||q||^2
  return w;
}

SpectralField miura_jacobian_apply(const SpectralField& q, const SpectralField& f, int n_out) {
  const int n = std::max(q.n_modes(), f.n_modes());
  if (n_out < 0) n_out = 2 * n;
  SpectralField j = resize(derivative(f), n_out);
  j += 2.0 * multiply(q, f, 2, n_out);
  auto c = j.coeffs_mut();
  c[n_out] -= 2.0 * inner(q, f);
  return j;
}

namespace {

struct NewtonOutcome {
  SpectralField q;
  double residual;
  int iterations;
  bool converged;
};

NewtonOutcome newton(const SpectralField& target, SpectralField q, int n, const MiuraInverseOptions& opt) {
  const Eigen::VectorXd rhs = pack(target, n);
  double res = 0.0;
  for (int it = 0; it <= opt.max_iter; ++it) {
    const Eigen::VectorXd F = pack(miura_forward(q, n), n) - rhs;
    // coefficient vector holds k > 0 only; the L2 norm counts both signs
    res = std::sqrt(2.0) * F.norm();
    if (!std::isfinite(res)) return {q, res, it, false};
    if (res <= opt.newton_tol) return {q, res, it, true};
    if (it == opt.max_iter) break;
    Eigen::MatrixXd J(2 * n, 2 * n);
    for (int j = 0; j < 2 * n; ++j) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(2 * n);
      e[j] = 1.0;
      J.col(j) = pack(miura_jacobian_apply(q, unpack(e, n), n), n);
    }
    const Eigen::VectorXd dx = J.partialPivLu().solve(F);
    q = unpack(pack(q, n) - dx, n);
  }
  return {q, res, opt.max_iter, false};
}

}  // namespace

MiuraInverseResult miura_inverse(const SpectralField& w, const MiuraInverseOptions& opt) {
  require_mean_zero(w, "Miura target");
  const int n = opt.n_modes < 0 ? w.n_modes() : opt.n_modes;
  MiuraInverseResult out;
  out.q = SpectralField(n);
  if (w.is_zero()) return out;
  NewtonOutcome r = newton(w, SpectralField(n), n, opt);
  out.iterations = r.iterations;
  if (!r.converged) {
    out.continued = true;
    SpectralField q(n);
    for (double t : {0.25, 0.5, 0.75, 1.0}) {
      SpectralField wt = w;
      wt *= t;
      r = newton(wt, q, n, opt);
      out.iterations += r.iterations;
      if (!r.converged) break;
      q = r.q;
    }
  }
  out.q = r.q;
  out.residual = r.residual;
  if (!r.converged) {
    std::ostringstream os;
    os << "Miura inverse did not converge: residual " << r.residual << " after " << out.iterations << " iterations";
    throw MiuraInverseFailure(os.str(), r.residual);
  }
  return out;
}

SpectralField tau_shift(const SpectralField& w, double alpha) {
  SpectralField out = w;
  out.coeffs_mut()[w.n_modes()] -= alpha;
  return out;
}

ConjugatedTrajectory kdv_conjugated(const SpectralField& w0, const FlowSpec& spec, const MiuraInverseOptions& opt) {
  if (spec.kind != FlowKind::mkdv || spec.sign != Sign::defocusing)
    throw std::invalid_argument("conjugated KdV requires a defocusing mKdV flow spec");
  require_mean_zero(w0, "KdV datum");
  const int n = w0.n_modes();
  MiuraInverseOptions io = opt;
  io.n_modes = n;
  const SpectralField q0 = miura_inverse(w0, io).q;
  FlowSpec mk = spec;
  mk.log_functionals = false;
  const Trajectory tq = evolve(q0, mk);
  FlowSpec kd = mk;
  kd.kind = FlowKind::kdv;
  const Trajectory direct = evolve(w0, kd);

  ConjugatedTrajectory out;
  out.w.spec = kd;
  const double l2 = inner(q0, q0);
  for (size_t i = 0; i < tq.snapshots.size(); ++i) {
    const double t = tq.snapshots[i].t;
    // mKdV with the mass term removed differs from mKdV by a drift of speed 6 ||q||^2
    const SpectralField q = translate(tq.snapshots[i].field, -6.0 * l2 * t);
    SpectralField w = miura_forward(q, n);
    out.w.snapshots.push_back({t, w});
    out.w.logs.push_back(log_row(t, w, out.w.spec));
    out.to_direct.push_back(l2_norm(w - direct.snapshots.at(i).field));
  }
  return out;
}

ConjugatedTrajectory kdv_alpha(const SpectralField& w0, const FlowSpec& spec, const MiuraInverseOptions& opt) {
  const double alpha = w0.mean();
  ConjugatedTrajectory c = kdv_conjugated(tau_shift(w0, alpha), spec, opt);
  FlowSpec kd = c.w.spec;
  kd.log_functionals = false;
  const Trajectory direct = evolve(w0, kd);
  for (size_t i = 0; i < c.w.snapshots.size(); ++i) {
    auto& s = c.w.snapshots[i];
    s.field = tau_shift(translate(s.field, 6.0 * alpha * s.t), -alpha);
    c.w.logs[i] = log_row(s.t, s.field, c.w.spec);
    c.to_direct[i] = l2_norm(s.field - direct.snapshots.at(i).field);
  }
  return c;
}

}  // namespace torus
