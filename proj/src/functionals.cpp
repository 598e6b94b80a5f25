#include "torus/functionals.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "torus/measures.hpp"
#include "torus/parallel.hpp"

namespace torus {

double mass(const SpectralField& q) { return 0.5 * inner(q, q); }

double hamiltonian_mkdv(const SpectralField& q, Sign sign) {
  const SpectralField dq = derivative(q);
  const SpectralField* f4[] = {&q, &q, &q, &q};
  const double quartic = integrate_product(f4);
  return 0.5 * inner(dq, dq) + (sign == Sign::defocusing ? 0.5 : -0.5) * quartic;
}

namespace {

void check_denominator(const std::vector<double>& gamma) {
  for (double g : gamma)
    if (!(2.0 + g > 0.1)) throw std::runtime_error("2 + gamma fell below 0.1 on the grid");
}

}  // namespace

double a_full(const SpectralField& q, const DiagonalGreens& d) {
  const int m = static_cast<int>(d.gamma_grid.size());
  check_denominator(d.gamma_grid);
  const auto qg = synthesize(q, m);
  double s = 0.0;
  for (int j = 0; j < m; ++j) s += qg[j] * d.g_minus_grid[j] / (2.0 + d.gamma_grid[j]);
  return s / m;
}

double a_full(const SpectralField& q, double kappa, const LaxOptions& opt) {
  return a_full(q, diagonal_greens(q, kappa, opt));
}

double a2(const SpectralField& q, double kappa) {
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
  double s = 0.0;
  for (int k = -q.n_modes(); k <= q.n_modes(); ++k) {
    const double xi = freq(k);
    s += 2.0 * kappa * std::norm(q.coeff(k)) / (4.0 * kappa * kappa + xi * xi);
  }
  return s;
}

double a4(const SpectralField& q, double kappa) {
  const auto lo = resolvent_apply(q, ResolventKind::minus, kappa);
  const auto hi = resolvent_apply(q, ResolventKind::plus, kappa);
  const auto cubic = multiply3(q, lo, hi, 4, q.n_modes());
  return -2.0 * kappa * inner(q, resolvent_apply(cubic, ResolventKind::r0, 2.0 * kappa));
}

std::pair<double, double> a_ge6(const SpectralField& q, const DiagonalGreens& d) {
  const double kappa = d.kappa;
  check_denominator(d.gamma_grid);
  const SpectralField g2 = gamma2(q, kappa);
  const SpectralField g4 = d.gamma - g2;
  const int n = q.n_modes();
  const SpectralField qg2 = multiply(q, g2, 2, n + g2.n_modes());
  const SpectralField qg4 = multiply(q, g4, 2, n + g4.n_modes());
  const SpectralField r_qg2 = resolvent_apply(qg2, ResolventKind::r0, 2.0 * kappa);
  const SpectralField r_qg4 = resolvent_apply(qg4, ResolventKind::r0, 2.0 * kappa);
  const SpectralField r_q = resolvent_apply(q, ResolventKind::r0, 2.0 * kappa);

  const int m = 2 * static_cast<int>(d.gamma_grid.size());
  const auto Q = synthesize(q, m);
  const auto G = synthesize(d.gamma, m);
  const auto QG2 = synthesize(qg2, m), QG4 = synthesize(qg4, m);
  const auto RQG2 = synthesize(r_qg2, m), RQG4 = synthesize(r_qg4, m);
  const auto RQ = synthesize(r_q, m);
  double s1 = 0.0, s2 = 0.0;
  for (int j = 0; j < m; ++j) {
    const double den = 2.0 + G[j];
    s1 -= kappa * G[j] / den * (2.0 * Q[j] * RQG2[j] - QG2[j] * RQ[j]);
    s2 += 2.0 * kappa / den * (2.0 * Q[j] * RQG4[j] - QG4[j] * RQ[j]);
  }
  return {s1 / m, s2 / m};
}

std::pair<double, double> a_ge6(const SpectralField& q, double kappa, const LaxOptions& opt) {
  return a_ge6(q, diagonal_greens(q, kappa, opt));
}

double script_a(const SpectralField& q, double kappa, const LaxOptions& opt) {
  if (!(kappa >= 1.0)) throw std::invalid_argument("script_a requires kappa >= 1");
  return a_full(q, kappa, opt) - 0.5 * a_full(q, kappa / 2.0, opt);
}

namespace {

double a_ge4(const SpectralField& q, double kappa, const LaxOptions& opt) {
  if (q.is_zero()) return 0.0;
  return a_full(q, kappa, opt) - a2(q, kappa);
}

template <int N>
void fill_rule(std::vector<double>& x, std::vector<double>& w) {
  using R = boost::math::quadrature::gauss<double, N>;
  const auto& a = R::abscissa();
  const auto& b = R::weights();
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) {
      x.push_back(0.0);
      w.push_back(b[i]);
      continue;
    }
    x.push_back(-a[i]);
    w.push_back(b[i]);
    x.push_back(a[i]);
    w.push_back(b[i]);
  }
}

void gauss_rule(int n, std::vector<double>& x, std::vector<double>& w) {
  x.clear();
  w.clear();
  switch (n) {
    case 4: fill_rule<4>(x, w); break;
    case 8: fill_rule<8>(x, w); break;
    case 16: fill_rule<16>(x, w); break;
    case 32: fill_rule<32>(x, w); break;
    default: throw std::invalid_argument("nodes_per_panel must be 4, 8, 16 or 32");
  }
}

struct Panel {
  double a, b;
  std::vector<double> nodes, weights;
};

Panel make_panel(double a, double b, int npp) {
  std::vector<double> x, w;
  gauss_rule(npp, x, w);
  Panel p{a, b, {}, {}};
  const double half = 0.5 * (b - a);
  for (size_t i = 0; i < x.size(); ++i) {
    p.nodes.push_back(a + half * (1.0 + x[i]));
    p.weights.push_back(half * w[i]);
  }
  return p;
}

class VCache {
 public:
  VCache(const std::function<double(double)>& f, double s) : f_(f), s_(s) {}

  // evaluates f at every node of the panels (and at half the node) not seen before
  void prepare(const std::vector<Panel>& panels) {
    std::vector<double> need;
    for (auto& p : panels)
      for (double k : p.nodes)
        for (double kk : {k, 0.5 * k})
          if (!cache_.count(kk)) {
            cache_[kk] = 0.0;
            need.push_back(kk);
          }
    std::vector<double> vals(need.size());
    parallel_for(need.size(), [&](size_t i) { vals[i] = f_(need[i]); });
    for (size_t i = 0; i < need.size(); ++i) cache_[need[i]] = vals[i];
    evaluations_ += static_cast<int>(need.size());
  }

  double panel_integral(const Panel& p) const {
    double sum = 0.0;
    for (size_t i = 0; i < p.nodes.size(); ++i) {
      const double k = p.nodes[i];
      const double v = cache_.at(k) - 0.5 * cache_.at(0.5 * k);
      sum += p.weights[i] * std::pow(k, 2.0 * s_) * v;
    }
    return sum;
  }

  int evaluations() const { return evaluations_; }

 private:
  const std::function<double(double)>& f_;
  double s_;
  std::map<double, double> cache_;
  int evaluations_ = 0;
};

std::vector<Panel> panels_between(double lo, double hi, int npp) {
  std::vector<Panel> ps;
  for (double a = lo; a < hi; a *= 2.0) ps.push_back(make_panel(a, std::min(2.0 * a, hi), npp));
  return ps;
}

void check_s(double s) {
  if (!(s > 0.5 && s < 1.0)) throw std::invalid_argument("E requires 1/2 < s < 1");
}

}  // namespace

EValue kappa_transform(const std::function<double(double)>& f, const KappaQuadrature& quad, double s) {
  check_s(s);
  if (!(quad.L >= 2.0)) throw std::invalid_argument("quadrature cutoff L must be >= 2");
  EValue out;
  VCache cache(f, s);
  std::vector<Panel> panels = panels_between(1.0, quad.L, quad.nodes_per_panel);
  cache.prepare(panels);
  double L = quad.L;
  const double p = 2.0 * s - 2.0;
  for (;;) {
    double value = 0.0;
    for (auto& pn : panels) value += cache.panel_integral(pn);
    const Panel& last = panels.back();
    const double last_int = cache.panel_integral(last);
    const double c = last_int * p / (std::pow(last.b, p) - std::pow(last.a, p));
    const double tail = c * std::pow(L, p) / (2.0 - 2.0 * s);
    out.value = value;
    out.tail = tail;
    out.tail_constant = c;
    out.L = L;
    out.evaluations = cache.evaluations();
    if (std::abs(tail) <= quad.tol) return out;
    if (2.0 * L > quad.L_max)
      throw TailNotConverged("tail-not-converged: modelled tail " + std::to_string(tail) + " exceeds tol " +
                             std::to_string(quad.tol) + " at L = " + std::to_string(L));
    auto more = panels_between(L, 2.0 * L, quad.nodes_per_panel);
    cache.prepare(more);
    panels.insert(panels.end(), more.begin(), more.end());
    L *= 2.0;
  }
}

EValue e_functional(const SpectralField& q, const KappaQuadrature& quad, double s, const LaxOptions& opt) {
  if (q.is_zero()) {
    check_s(s);
    EValue out;
    out.L = quad.L;
    return out;
  }
  return kappa_transform([&](double k) { return a_ge4(q, k, opt); }, quad, s);
}

double e_truncated(const SpectralField& q, double L, double s, int nodes_per_panel, const LaxOptions& opt) {
  check_s(s);
  if (q.is_zero() || L <= 1.0) return 0.0;
  const std::function<double(double)> f = [&](double k) { return a_ge4(q, k, opt); };
  VCache cache(f, s);
  auto panels = panels_between(1.0, L, nodes_per_panel);
  cache.prepare(panels);
  double value = 0.0;
  for (auto& pn : panels) value += cache.panel_integral(pn);
  return value;
}

double v_remainder(const SpectralField& q, double kappa, const LaxOptions& opt) {
  if (!(kappa >= 1.0)) throw std::invalid_argument("v_remainder requires kappa >= 1");
  return a_ge4(q, kappa, opt) - 0.5 * a_ge4(q, kappa / 2.0, opt);
}

double quadratic_energy(const SpectralField& q, double s) {
  const auto& m2 = ms2_cached(s, q.n_modes());
  double sum = 0.0;
  for (int k = 1; k <= q.n_modes(); ++k) sum += 2.0 * m2[k] * std::norm(q.coeff(k));
  return 0.5 * sum;
}

double e_s_total(const SpectralField& q, double s, const KappaQuadrature& quad, const LaxOptions& opt) {
  return quadratic_energy(q, s) + e_functional(q, quad, s, opt).total();
}

double h_kappa(const SpectralField& q, double kappa, const LaxOptions& opt) {
  if (!(kappa >= 1.0)) throw std::invalid_argument("h_kappa requires kappa >= 1");
  return 4.0 * kappa * kappa * inner(q, q) - 4.0 * kappa * kappa * kappa * a_full(q, kappa, opt);
}

}  // namespace torus
