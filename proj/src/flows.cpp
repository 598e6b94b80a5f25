#include "torus/flows.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "torus/parallel.hpp"
#include "torus/stats.hpp"

namespace torus {

FlowKind parse_flow_kind(const std::string& name) {
  if (name == "mkdv") return FlowKind::mkdv;
  if (name == "kdv") return FlowKind::kdv;
  if (name == "h_kappa") return FlowKind::h_kappa;
  if (name == "h_kappa_trunc") return FlowKind::h_kappa_trunc;
  throw std::invalid_argument("unknown flow kind '" + name + "'");
}

std::string to_string(FlowKind kind) {
  switch (kind) {
    case FlowKind::mkdv: return "mkdv";
    case FlowKind::kdv: return "kdv";
    case FlowKind::h_kappa: return "h_kappa";
    case FlowKind::h_kappa_trunc: return "h_kappa_trunc";
  }
  return "?";
}

int FlowSpec::steps() const {
  if (t_end == 0.0) return 0;
  return static_cast<int>(std::ceil(t_end / dt - 1e-9));
}

double stability_number(const SpectralField& q0, const FlowSpec& spec) {
  int n = q0.n_modes();
  if (spec.kind == FlowKind::h_kappa_trunc) n = std::min(n, spec.N);
  const double amp = linf_norm(q0);
  const double xi = freq(n);
  const double lip = spec.kind == FlowKind::kdv ? 6.0 * amp * xi : 6.0 * amp * amp * xi;
  return spec.dt * lip;
}

void FlowSpec::validate(const SpectralField& q0) const {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(t_end >= 0.0)) throw std::invalid_argument("t_end must be >= 0");
  if (snapshot_stride < 1) throw std::invalid_argument("snapshot_stride must be >= 1");
  if (kind == FlowKind::h_kappa || kind == FlowKind::h_kappa_trunc) {
    if (!(kappa >= 1.0)) throw std::invalid_argument("H_kappa flows require kappa >= 1");
  }
  if (kind == FlowKind::h_kappa_trunc && (N < 0 || N > q0.n_modes()))
    throw std::invalid_argument("truncation N must satisfy 0 <= N <= n_modes");
  const double sn = stability_number(q0, *this);
  if (sn > stability_budget) {
    std::ostringstream os;
    os << "dt = " << dt << " exceeds the stability budget (dt * Lip = " << sn << " > " << stability_budget << ")";
    throw std::invalid_argument(os.str());
  }
}

namespace {

class Integrator {
 public:
  // the conserved transport part of the mKdV/KdV nonlinearity (6 ||q||^2 d/dx, 6 mean d/dx) is moved into
  // the linear propagator
  Integrator(const FlowSpec& spec, const SpectralField& q0) : spec_(spec), n_(q0.n_modes()) {
    if (spec.kind == FlowKind::mkdv) drift_ = (spec.sign == Sign::defocusing ? 6.0 : -6.0) * inner(q0, q0);
    if (spec.kind == FlowKind::kdv) drift_ = 6.0 * q0.mean();
  }

  cplx linear_symbol(int k) const {
    const double xi = freq(k);
    const double k2 = spec_.kappa * spec_.kappa;
    switch (spec_.kind) {
      case FlowKind::mkdv:
      case FlowKind::kdv: return {0.0, xi * xi * xi + drift_ * xi};
      case FlowKind::h_kappa: return {0.0, xi * 4.0 * k2 * xi * xi / (4.0 * k2 + xi * xi)};
      case FlowKind::h_kappa_trunc:
        if (std::abs(k) > spec_.N) return {0.0, 4.0 * k2 * xi};
        return {0.0, xi * 4.0 * k2 * xi * xi / (4.0 * k2 + xi * xi)};
    }
    return {};
  }

  SpectralField nonlinear(const SpectralField& q) const {
    switch (spec_.kind) {
      case FlowKind::mkdv: {
        const double c = spec_.sign == Sign::defocusing ? 2.0 : -2.0;
        return derivative(c * power(q, 3, 2, n_) - drift_ * q);
      }
      case FlowKind::kdv: return derivative(3.0 * power(q, 2, 2, n_) - drift_ * q);
      case FlowKind::h_kappa: return h_term(q, n_);
      case FlowKind::h_kappa_trunc: return resize(h_term(resize(q, spec_.N), spec_.N), n_);
    }
    return SpectralField(n_);
  }

  // e^{L h/2} applied mode-wise
  void propagate_half(SpectralField& f, double h) const {
    if (h != factor_h_) {
      factor_.resize(2 * n_ + 1);
      for (int k = -n_; k <= n_; ++k) factor_[k + n_] = std::exp(linear_symbol(k) * (0.5 * h));
      factor_h_ = h;
    }
    auto c = f.coeffs_mut();
    for (int k = -n_; k <= n_; ++k) c[k + n_] *= factor_[k + n_];
  }

  SpectralField step(const SpectralField& q, double h) const {
    auto axpy = [](SpectralField a, double s, const SpectralField& b) {
      a += s * b;
      return a;
    };
    auto half = [&](SpectralField f) {
      propagate_half(f, h);
      return f;
    };
    const SpectralField k1 = nonlinear(q);
    const SpectralField eq = half(q);
    const SpectralField k2 = nonlinear(axpy(eq, 0.5 * h, half(k1)));
    const SpectralField k3 = nonlinear(axpy(eq, 0.5 * h, k2));
    const SpectralField k4 = nonlinear(axpy(half(eq), h, half(k3)));
    SpectralField acc = half(half(k1));
    acc += 2.0 * half(k2 + k3);
    acc += k4;
    SpectralField out = half(eq);
    out += (h / 6.0) * acc;
    out.symmetrize();
    return out;
  }

 private:
  // -4 k^3 d/dx (g_- - 4k R0(2k) q), kept to n modes
  SpectralField h_term(const SpectralField& q, int n) const {
    const double kappa = spec_.kappa;
    if (q.is_zero()) return SpectralField(n);
    const DiagonalGreens d = diagonal_greens(q, kappa, spec_.lax);
    SpectralField g = resize(d.g_minus, n);
    g -= (4.0 * kappa) * resolvent_apply(q, ResolventKind::r0, 2.0 * kappa);
    return (-4.0 * kappa * kappa * kappa) * derivative(g);
  }

  const FlowSpec& spec_;
  int n_;
  double drift_ = 0.0;
  mutable std::vector<cplx> factor_;
  mutable double factor_h_ = std::numeric_limits<double>::quiet_NaN();
};

}  // namespace

LogRow log_row(double t, const SpectralField& q, const FlowSpec& spec) {
  LogRow r;
  r.t = t;
  r.l2 = inner(q, q);
  r.mass = 0.5 * r.l2;
  if (spec.log_functionals) {
    r.h_mkdv = hamiltonian_mkdv(q, spec.sign);
    r.a_probe.resize(spec.probe_kappas.size());
    parallel_for(spec.probe_kappas.size(),
                 [&](size_t i) { r.a_probe[i] = q.is_zero() ? 0.0 : a_full(q, spec.probe_kappas[i], spec.lax); });
    if (spec.log_energy) r.e_s = e_s_total(q, spec.energy_s, spec.energy_quad, spec.lax);
  }
  return r;
}

namespace {

Trajectory run(const SpectralField& q0, const FlowSpec& spec, bool keep) {
  spec.validate(q0);
  Trajectory tr;
  tr.spec = spec;
  const int steps = spec.steps();
  const double h = steps ? spec.t_end / steps : 0.0;
  Integrator integ(spec, q0);
  SpectralField q = q0;
  const double l2_0 = inner(q0, q0);
  auto record = [&](int i) {
    const double t = i * h;
    tr.snapshots.push_back({t, q});
    if (keep) tr.logs.push_back(log_row(t, q, spec));
  };
  if (keep) record(0);
  for (int i = 1; i <= steps; ++i) {
    q = integ.step(q, h);
    const double l2 = inner(q, q);
    const double drift = l2_0 > 0.0 ? std::abs(l2 - l2_0) / l2_0 : std::sqrt(l2);
    if (!(drift <= spec.drift_abort)) {
      std::ostringstream os;
      os << "flow " << to_string(spec.kind) << " unstable at t = " << i * h << ": L2 drift " << drift
         << " (dt = " << h << ")";
      throw FlowUnstable(os.str());
    }
    if (keep && (i % spec.snapshot_stride == 0 || i == steps)) record(i);
  }
  if (!keep) tr.snapshots.push_back({steps * h, q});
  return tr;
}

}  // namespace

Trajectory evolve(const SpectralField& q0, const FlowSpec& spec) { return run(q0, spec, true); }

SpectralField flow_to(const SpectralField& q0, const FlowSpec& spec) {
  return run(q0, spec, false).snapshots.back().field;
}

void write_trajectory(const std::string& dir, const Trajectory& tr) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  for (size_t i = 0; i < tr.snapshots.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "snap_%05zu.pfc", i);
    write_pfc((fs::path(dir) / name).string(), tr.snapshots[i].field, tr.snapshots[i].t);
  }
  std::ofstream os(fs::path(dir) / "logs.csv");
  if (!os) throw std::runtime_error("cannot write logs.csv in " + dir);
  os.precision(17);
  os << "t,mass,l2,h_mkdv";
  for (double k : tr.spec.probe_kappas) os << ",A_k" << k;
  os << ",E_s\n";
  for (auto& r : tr.logs) {
    os << r.t << ',' << r.mass << ',' << r.l2 << ',' << r.h_mkdv;
    for (size_t i = 0; i < tr.spec.probe_kappas.size(); ++i) os << ',' << (i < r.a_probe.size() ? r.a_probe[i] : 0.0);
    os << ',';
    if (r.e_s) os << *r.e_s;
    os << '\n';
  }
}

namespace {

FlowSpec quiet(FlowKind kind, double dt, double t_end, int stride) {
  FlowSpec s;
  s.kind = kind;
  s.dt = dt;
  s.t_end = t_end;
  s.snapshot_stride = stride;
  s.log_functionals = false;
  s.stability_budget = 1e300;
  return s;
}

int stride_for(double T, double dt, int n_snap) {
  const int steps = static_cast<int>(std::ceil(T / dt - 1e-9));
  return std::max(1, steps / std::max(1, n_snap));
}

double sup_distance(const Trajectory& a, const Trajectory& b) {
  double sup = 0.0;
  for (size_t i = 0; i < std::min(a.snapshots.size(), b.snapshots.size()); ++i)
    sup = std::max(sup, l2_norm(a.snapshots[i].field - b.snapshots[i].field));
  return sup;
}

void fit_decay(ScanTable& t) {
  std::vector<double> x, y;
  for (auto& r : t.rows)
    if (r.value > 0.0) {
      x.push_back(r.param);
      y.push_back(r.value);
    }
  if (x.size() >= 2) {
    const LineFit f = fit_loglog(x, y);
    t.fitted_exponent = -f.slope;
    t.exponent_se = f.slope_se;
  }
}

}  // namespace

ScanTable kappa_convergence(const SpectralField& q0, const std::vector<double>& kappas, double T, double dt,
                            int n_snap) {
  const int stride = stride_for(T, dt, n_snap);
  const Trajectory ref = evolve(q0, quiet(FlowKind::mkdv, dt, T, stride));
  ScanTable out;
  out.rows.resize(kappas.size());
  parallel_for(kappas.size(), [&](size_t i) {
    FlowSpec s = quiet(FlowKind::h_kappa, dt, T, stride);
    s.kappa = kappas[i];
    out.rows[i] = {kappas[i], sup_distance(evolve(q0, s), ref), 0.0};
  });
  fit_decay(out);
  return out;
}

double flow_commutator(const SpectralField& q0, double kappa, double t, double tau, double dt) {
  FlowSpec hk = quiet(FlowKind::h_kappa, dt, t, 1);
  hk.kappa = kappa;
  const FlowSpec mk = quiet(FlowKind::mkdv, dt, tau, 1);
  const SpectralField a = flow_to(flow_to(q0, mk), hk);
  const SpectralField b = flow_to(flow_to(q0, hk), mk);
  return l2_norm(a - b);
}

ScanTable truncation_convergence(const SpectralField& q0, double kappa, const std::vector<int>& Ns, double T,
                                 double dt, int n_snap) {
  const int stride = stride_for(T, dt, n_snap);
  FlowSpec full = quiet(FlowKind::h_kappa, dt, T, stride);
  full.kappa = kappa;
  const Trajectory ref = evolve(q0, full);
  ScanTable out;
  out.rows.resize(Ns.size());
  parallel_for(Ns.size(), [&](size_t i) {
    FlowSpec s = quiet(FlowKind::h_kappa_trunc, dt, T, stride);
    s.kappa = kappa;
    s.N = std::min(Ns[i], q0.n_modes());
    out.rows[i] = {static_cast<double>(Ns[i]), sup_distance(evolve(q0, s), ref),
                   l2_norm(project(q0, Ns[i], Side::high))};
  });
  fit_decay(out);
  return out;
}

double truncated_energy_rate(const SpectralField& u, double kappa, double s, const KappaQuadrature& quad,
                             const LaxOptions& opt) {
  if (u.is_zero()) return 0.0;
  const int n = u.n_modes();
  const SpectralField dgk = derivative(resize(diagonal_greens(u, kappa, opt).g_minus, n));
  const double c = -4.0 * kappa * kappa * kappa;
  const auto rate = [&](double eta) { return c * inner(resize(diagonal_greens(u, eta, opt).g_minus, n), dgk); };
  return kappa_transform(rate, quad, s).total();
}

ScanTable asymptotic_conservation_scan(const SpectralField& q0, double kappa, double s, const std::vector<int>& Ns,
                                       double T, double dt, int n_snap, const KappaQuadrature& quad) {
  const int stride = stride_for(T, dt, n_snap);
  ScanTable out;
  for (int N : Ns) {
    const SpectralField qn = resize(q0, std::min(N, q0.n_modes()));
    FlowSpec fs = quiet(FlowKind::h_kappa_trunc, dt, T, stride);
    fs.kappa = kappa;
    fs.N = qn.n_modes();
    const Trajectory tr = evolve(qn, fs);
    const size_t m = tr.snapshots.size();
    std::vector<double> e(m), rate(m);
    for (size_t i = 0; i < m; ++i) {
      e[i] = e_s_total(tr.snapshots[i].field, s, quad);
      rate[i] = truncated_energy_rate(tr.snapshots[i].field, kappa, s, quad);
    }
    ScanRow row{static_cast<double>(N), 0.0, e.empty() ? 0.0 : e.front(), 0.0};
    for (size_t i = 0; i < m; ++i) row.value = std::max(row.value, std::abs(rate[i]));
    for (size_t i = 1; i + 1 < m; ++i) {
      const double dtau = tr.snapshots[i + 1].t - tr.snapshots[i - 1].t;
      row.aux = std::max(row.aux, std::abs(e[i + 1] - e[i - 1]) / dtau);
    }
    out.rows.push_back(row);
  }
  fit_decay(out);
  std::vector<double> x, y;
  for (auto& r : out.rows)
    if (r.aux > 0.0) {
      x.push_back(r.param);
      y.push_back(r.aux);
    }
  if (x.size() >= 2) out.aux_exponent = -fit_loglog(x, y).slope;
  return out;
}

}  // namespace torus
