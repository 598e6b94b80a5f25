#include "torus/harness.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "torus/miura.hpp"
#include "torus/parallel.hpp"
#include "torus/stats.hpp"

namespace torus {

std::vector<Observable> default_observables() {
  return {
      {"cos_re_q1", [](const SpectralField& q) { return std::cos(q.coeff(1).real()); }},
      {"exp_low_mass", [](const SpectralField& q) {
         const SpectralField low = project(q, 4);
         return std::exp(-inner(low, low));
       }},
      {"sin_im_q2", [](const SpectralField& q) { return std::sin(q.coeff(2).imag()); }},
  };
}

Observable l2_observable() {
  return {"l2", [](const SpectralField& q) { return inner(q, q); }};
}

InvarianceFlow parse_invariance_flow(const std::string& name) {
  if (name == "mkdv") return InvarianceFlow::mkdv;
  if (name == "h_kappa") return InvarianceFlow::h_kappa;
  if (name == "h_kappa_trunc") return InvarianceFlow::h_kappa_trunc;
  if (name == "kdv_conjugated" || name == "kdv-conjugated") return InvarianceFlow::kdv_conjugated;
  throw std::invalid_argument("unknown invariance flow '" + name + "'");
}

std::string to_string(InvarianceFlow f) {
  switch (f) {
    case InvarianceFlow::mkdv: return "mkdv";
    case InvarianceFlow::h_kappa: return "h_kappa";
    case InvarianceFlow::h_kappa_trunc: return "h_kappa_trunc";
    case InvarianceFlow::kdv_conjugated: return "kdv_conjugated";
  }
  return "?";
}

double InvarianceReport::max_abs_z() const {
  double m = 0.0;
  for (auto& o : observables) {
    if (std::isnan(o.z)) return o.z;
    m = std::max(m, std::abs(o.z));
  }
  return m;
}

namespace {

FlowSpec sample_flow(const SpectralField& q, const InvarianceSpec& inv, int n_modes) {
  FlowSpec fs;
  switch (inv.flow) {
    case InvarianceFlow::mkdv:
    case InvarianceFlow::kdv_conjugated: fs.kind = FlowKind::mkdv; break;
    case InvarianceFlow::h_kappa: fs.kind = FlowKind::h_kappa; break;
    case InvarianceFlow::h_kappa_trunc: fs.kind = FlowKind::h_kappa_trunc; break;
  }
  fs.kappa = inv.kappa;
  fs.N = n_modes;
  fs.t_end = inv.t;
  fs.log_functionals = false;
  fs.lax.ode_tol = inv.ode_tol;
  const bool dispersive = inv.flow == InvarianceFlow::mkdv || inv.flow == InvarianceFlow::kdv_conjugated;
  fs.dt = inv.dt_max > 0.0 ? inv.dt_max : (dispersive ? 1e-5 : 1e-3);
  const double sn = stability_number(q, fs);
  const double target = 0.8 * fs.stability_budget;
  if (sn > target) fs.dt *= target / sn;
  return fs;
}

double weighted_mean(const std::vector<double>& w, const std::vector<double>& f, const std::vector<int>& idx) {
  double sw = 0.0, sf = 0.0;
  for (int i : idx) {
    sw += w[i];
    sf += w[i] * f[i];
  }
  return sw > 0.0 ? sf / sw : std::numeric_limits<double>::quiet_NaN();
}

double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / (v.size() - 1));
}

}  // namespace

InvarianceReport invariance_test(const MeasureSpec& spec, const InvarianceSpec& flow,
                                 const std::vector<Observable>& observables, int M, std::uint64_t seed,
                                 int bootstrap_B) {
  if (M < 1) throw std::invalid_argument("ensemble size M must be >= 1");
  if (bootstrap_B < 2) throw std::invalid_argument("bootstrap resamples must be >= 2");
  if (!(flow.t >= 0.0)) throw std::invalid_argument("flow time must be >= 0");
  MeasureSpec ms = spec;
  if (flow.flow == InvarianceFlow::kdv_conjugated) ms.mean_zero = true;
  const Ensemble ens = draw_ensemble(ms, seed, M);

  const size_t nobs = observables.size();
  std::vector<double> w(M);
  std::vector<std::vector<double>> fb(nobs, std::vector<double>(M)), fa(nobs, std::vector<double>(M));
  std::vector<char> failed(M, 0), evolved(M, 0);
  parallel_for(M, [&](size_t i) {
    const Sample& smp = ens.samples[i];
    w[i] = smp.weight;
    SpectralField before = smp.field, after = smp.field;
    try {
      if (w[i] > 0.0 && flow.t > 0.0) {
        FlowSpec fs = sample_flow(smp.field, flow, ms.n_modes);
        for (int attempt = 0;; ++attempt) {
          try {
            after = flow_to(smp.field, fs);
            break;
          } catch (const FlowUnstable&) {
            if (attempt == 2) throw;
            fs.dt /= 4.0;
          }
        }
        evolved[i] = 1;
      }
      if (flow.flow == InvarianceFlow::kdv_conjugated) {
        const double l2 = inner(smp.field, smp.field);
        after = miura_forward(translate(after, -6.0 * l2 * flow.t), ms.n_modes);
        before = miura_forward(before, ms.n_modes);
      }
    } catch (const std::exception&) {
      failed[i] = 1;
      w[i] = 0.0;
    }
    for (size_t j = 0; j < nobs; ++j) {
      fb[j][i] = observables[j].f(before);
      fa[j][i] = failed[i] ? fb[j][i] : observables[j].f(after);
    }
  });

  InvarianceReport rep;
  rep.M = M;
  rep.flow = flow;
  rep.measure = ms;
  for (int i = 0; i < M; ++i) {
    rep.failures += failed[i];
    rep.evolved += evolved[i];
  }
  double sw = 0.0, sw2 = 0.0;
  for (double x : w) {
    sw += x;
    sw2 += x * x;
  }
  rep.ess = sw2 > 0.0 ? sw * sw / sw2 : 0.0;
  rep.inconclusive = !(rep.ess > M / 10.0);

  std::vector<int> all(M);
  std::iota(all.begin(), all.end(), 0);
  std::vector<std::vector<int>> resamples(bootstrap_B, std::vector<int>(M));
  auto rng = substream(seed, 0, 0xB0075u);
  std::uniform_int_distribution<int> pick(0, M - 1);
  for (auto& r : resamples)
    for (int& i : r) i = pick(rng);

  for (size_t j = 0; j < nobs; ++j) {
    ObservableRow row;
    row.name = observables[j].name;
    row.before_mean = weighted_mean(w, fb[j], all);
    row.after_mean = weighted_mean(w, fa[j], all);
    std::vector<double> bb, ba;
    for (auto& r : resamples) {
      const double b = weighted_mean(w, fb[j], r), a = weighted_mean(w, fa[j], r);
      if (std::isfinite(b) && std::isfinite(a)) {
        bb.push_back(b);
        ba.push_back(a);
      }
    }
    row.se_before = stddev(bb);
    row.se_after = stddev(ba);
    const double diff = row.after_mean - row.before_mean;
    const double se = std::hypot(row.se_before, row.se_after);
    if (std::isnan(diff))
      row.z = diff;  // no surviving weight
    else
      row.z = diff == 0.0 ? 0.0 : (se > 0.0 ? diff / se : std::copysign(std::numeric_limits<double>::infinity(), diff));
    rep.observables.push_back(row);
  }
  return rep;
}

namespace {

ExponentFit make_fit(const std::string& name, const std::vector<ScanRow>& rows) {
  ExponentFit f;
  f.scan = name;
  f.rows = rows;
  std::vector<double> x, y;
  for (auto& r : rows)
    if (r.value > 0.0) {
      x.push_back(r.param);
      y.push_back(r.value);
    }
  if (x.size() >= 2) {
    const LineFit lf = fit_loglog(x, y);
    f.exponent = -lf.slope;
    f.ci_low = f.exponent - 1.96 * lf.slope_se;
    f.ci_high = f.exponent + 1.96 * lf.slope_se;
  }
  return f;
}

}  // namespace

ConvergenceReport convergence_suite(const MeasureSpec& spec, std::uint64_t seed) {
  spec.validate();
  ConvergenceReport rep;
  rep.tol = spec.quad.tol;
  const int npp = spec.quad.nodes_per_panel;
  const SpectralField q = power_law_field(spec.n_modes, spec.s, seed, 1.0);

  // E_L against E_{2L}, from the first dyadic L above twice the top frequency where the power law holds
  {
    double L0 = 8.0;
    while (L0 < 2.0 * freq(spec.n_modes)) L0 *= 2.0;
    std::vector<double> Ls;
    for (int i = 0; i < 4; ++i) Ls.push_back(L0 * (1 << i));
    std::vector<double> e(Ls.size() + 1);
    parallel_for(e.size(), [&](size_t i) {
      const double L = i < Ls.size() ? Ls[i] : 2.0 * Ls.back();
      e[i] = e_truncated(q, L, spec.s, npp);
    });
    std::vector<ScanRow> rows;
    for (size_t i = 0; i < Ls.size(); ++i) rows.push_back({Ls[i], std::abs(e[i + 1] - e[i]), e[i], 0.0});
    rep.scans.push_back(make_fit("e_cutoff_L", rows));
  }
  // E(pi_N q) against E(pi_{2N} q)
  {
    std::vector<int> Ns;
    for (int N = 4; 2 * N <= spec.n_modes; N *= 2) Ns.push_back(N);
    std::vector<ScanRow> rows;
    for (int N : Ns) {
      const double a = e_functional(project(q, N), spec.quad, spec.s).total();
      const double b = e_functional(project(q, 2 * N), spec.quad, spec.s).total();
      rows.push_back({static_cast<double>(N), std::abs(b - a), a, 0.0});
    }
    rep.scans.push_back(make_fit("e_projection_N", rows));
  }
  // quadrature node doubling on both fields used above
  {
    KappaQuadrature fine = spec.quad;
    fine.nodes_per_panel = std::min(32, 2 * npp);
    rep.node_doubling_change =
        std::abs(e_functional(q, fine, spec.s).total() - e_functional(q, spec.quad, spec.s).total());
  }
  // truncated H_kappa flow against the full flow
  {
    const SpectralField q0 = power_law_field(64, 1.0, seed + 1, 1.0);
    const ScanTable t = truncation_convergence(q0, 2.0, {8, 16, 32}, 0.01, 1e-4);
    rep.scans.push_back(make_fit("truncated_flow_N", t.rows));
  }
  // asymptotic conservation of E_s along the truncated flow
  {
    const SpectralField q0 = power_law_field(64, 1.2, seed + 2, 3.0);
    const ScanTable t = asymptotic_conservation_scan(q0, 2.0, spec.s, {8, 16, 32, 64}, 0.01, 1e-4, 8, spec.quad);
    rep.scans.push_back(make_fit("energy_rate_N", t.rows));
  }
  return rep;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

Config parse_config(const std::string& text) {
  Config c;
  std::istringstream is(text);
  std::string line;
  int no = 0;
  while (std::getline(is, line)) {
    ++no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("config line " + std::to_string(no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw std::invalid_argument("config line " + std::to_string(no) + ": empty key or value");
    c[key] = value;
  }
  return c;
}

Config read_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read config " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

}  // namespace torus
