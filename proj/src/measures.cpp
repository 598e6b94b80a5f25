#include "torus/measures.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>

#include "json.hpp"
#include "torus/parallel.hpp"

namespace torus {

double w_multiplier(double xi, double kappa) {
  const double k2 = kappa * kappa, x2 = xi * xi;
  return 3.0 * k2 * x2 / ((k2 + x2) * (4.0 * k2 + x2));
}

double w_partial_fractions(double xi, double kappa) {
  const double k2 = kappa * kappa, x2 = xi * xi;
  return x2 / (k2 + x2) - x2 / (4.0 * k2 + x2);
}

double ms_squared(double s, double xi, double tol, double* achieved) {
  if (xi == 0.0) {
    if (achieved) *achieved = 0.0;
    return 0.0;
  }
  boost::math::quadrature::exp_sinh<double> integrator;
  auto f = [&](double k) { return std::pow(k, 2.0 * s - 1.0) * w_partial_fractions(xi, k); };
  double err = 0.0, l1 = 0.0;
  const double v = integrator.integrate(f, 1.0, std::numeric_limits<double>::infinity(), tol, &err, &l1);
  if (achieved) *achieved = err;
  if (!(err <= 1e3 * tol * std::max(1.0, l1)))
    throw QuadratureFailure("multiplier quadrature reached only " + std::to_string(err));
  return v;
}

double c_s_constant(double s, double tol) {
  auto f = [&](double k) { return 3.0 * std::pow(k, 2.0 * s + 1.0) / ((1.0 + k * k) * (1.0 + 4.0 * k * k)); };
  boost::math::quadrature::tanh_sinh<double> ts;
  boost::math::quadrature::exp_sinh<double> es;
  double e1 = 0.0, e2 = 0.0;
  const double v = ts.integrate(f, 0.0, 1.0, tol, &e1) +
                   es.integrate(f, 1.0, std::numeric_limits<double>::infinity(), tol, &e2);
  if (!(e1 + e2 <= 1e3 * tol * std::max(1.0, v)))
    throw QuadratureFailure("C_s quadrature reached only " + std::to_string(e1 + e2));
  return v;
}

double MultiplierTable::bracket(int k) const {
  const double xi = freq(k);
  return (1.0 + m2.at(k)) / std::pow(1.0 + xi * xi, s);
}

MultiplierTable multiplier_table(double s, int k_max, double tol) {
  if (!(s >= 0.0 && s < 1.0)) throw std::invalid_argument("multiplier table requires 0 <= s < 1");
  MultiplierTable t;
  t.s = s;
  t.tol = tol;
  t.m2.resize(k_max + 1);
  std::vector<double> err(k_max + 1);
  parallel_for(k_max + 1, [&](size_t k) { t.m2[k] = ms_squared(s, freq(static_cast<int>(k)), tol, &err[k]); });
  for (double e : err) t.achieved = std::max(t.achieved, e);
  t.c_s = c_s_constant(s, tol);
  return t;
}

const std::vector<double>& ms2_cached(double s, int k_max) {
  static std::mutex mu;
  static std::map<double, std::vector<double>> cache;
  std::lock_guard lock(mu);
  auto& v = cache[s];
  if (static_cast<int>(v.size()) <= k_max) {
    const int from = static_cast<int>(v.size());
    v.resize(k_max + 1);
    for (int k = from; k <= k_max; ++k) v[k] = ms_squared(s, freq(k));
  }
  return v;
}

void write_multiplier_csv(const std::string& path, const MultiplierTable& t) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  os.precision(17);
  os << "k,xi,m2,bracket\n";
  for (int k = 0; k <= t.k_max(); ++k) os << k << ',' << freq(k) << ',' << t.m2[k] << ',' << t.bracket(k) << '\n';
}

void MeasureSpec::validate() const {
  if (!(s > 0.5 && s < 1.0)) throw std::invalid_argument("measure requires 1/2 < s < 1");
  if (!(R > 0.0)) throw std::invalid_argument("mass cutoff R must be positive");
  if (n_modes < 0) throw std::invalid_argument("n_modes must be >= 0");
}

std::mt19937_64 substream(std::uint64_t seed, std::uint64_t draw, std::uint64_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(draw), static_cast<std::uint32_t>(draw >> 32),
                    static_cast<std::uint32_t>(tag)};
  return std::mt19937_64(seq);
}

namespace {

// g_0 real N(0,1); g_k complex with Re, Im ~ N(0, 1/2)
SpectralField gaussian_series(int n_modes, std::uint64_t seed, std::uint64_t draw, bool mean_zero,
                              const std::function<double(int)>& scale) {
  auto rng = substream(seed, draw);
  std::normal_distribution<double> normal;
  SpectralField f(n_modes);
  const double g0 = normal(rng);
  if (!mean_zero) f.set(0, g0 * scale(0));
  const double h = std::sqrt(0.5);
  for (int k = 1; k <= n_modes; ++k) {
    const double re = normal(rng) * h;
    const double im = normal(rng) * h;
    f.set(k, cplx(re, im) * scale(k));
  }
  return f;
}

}  // namespace

SpectralField sample_mu_s(const MeasureSpec& spec, const MultiplierTable& table, std::uint64_t seed,
                          std::uint64_t draw) {
  if (table.k_max() < spec.n_modes) throw std::invalid_argument("multiplier table does not cover n_modes");
  return gaussian_series(spec.n_modes, seed, draw, spec.mean_zero,
                         [&](int k) { return 1.0 / std::sqrt(1.0 + table.m2[k]); });
}

SpectralField sample_mu_tilde(double s, int n_modes, const MultiplierTable& table, std::uint64_t seed,
                              std::uint64_t draw) {
  const double c = std::sqrt(table.c_s);
  return gaussian_series(n_modes, seed, draw, false, [&](int k) {
    const double xi = freq(k);
    return 1.0 / (c * std::pow(1.0 + xi * xi, 0.5 * s));
  });
}

SpectralField power_law_field(int n_modes, double p, std::uint64_t seed, double amp) {
  return gaussian_series(n_modes, seed, 0, true, [&](int k) {
    const double xi = freq(k);
    return amp * std::pow(1.0 + xi * xi, -0.5 * p);
  });
}

Density density_F(const SpectralField& q, const MeasureSpec& spec, const LaxOptions& opt) {
  spec.validate();
  Density d;
  if (inner(q, q) > spec.R) {
    d.e_value = std::numeric_limits<double>::quiet_NaN();
    return d;
  }
  d.e_value = e_functional(q, spec.quad, spec.s, opt).total();
  d.weight = std::exp(-d.e_value);
  return d;
}

Density density_F_truncated(const SpectralField& q, const MeasureSpec& spec, int N, double L,
                            const LaxOptions& opt) {
  spec.validate();
  const SpectralField qn = resize(q, std::min(N, q.n_modes()));
  Density d;
  if (inner(qn, qn) > spec.R) {
    d.e_value = std::numeric_limits<double>::quiet_NaN();
    return d;
  }
  d.e_value = e_truncated(qn, L, spec.s, spec.quad.nodes_per_panel, opt);
  d.weight = std::exp(-d.e_value);
  return d;
}

double Ensemble::ess() const {
  double s = 0.0, s2 = 0.0;
  for (auto& x : samples) {
    s += x.weight;
    s2 += x.weight * x.weight;
  }
  return s2 > 0.0 ? s * s / s2 : 0.0;
}

Ensemble draw_ensemble(const MeasureSpec& spec, std::uint64_t seed, int M, bool weighted, const LaxOptions& opt) {
  spec.validate();
  const MultiplierTable table = [&] {
    MultiplierTable t;
    t.s = spec.s;
    t.m2 = ms2_cached(spec.s, spec.n_modes);
    return t;
  }();
  Ensemble e;
  e.spec = spec;
  e.seed = seed;
  e.samples.resize(M);
  parallel_for(M, [&](size_t i) {
    Sample& smp = e.samples[i];
    smp.seed = seed;
    smp.draw = i;
    smp.field = sample_mu_s(spec, table, seed, i);
    if (weighted) {
      const Density d = density_F(smp.field, spec, opt);
      smp.weight = d.weight;
      smp.e_value = d.e_value;
    } else {
      smp.weight = 1.0;
    }
  });
  return e;
}

void write_ensemble(const std::string& dir, const Ensemble& e) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json j;
  j["spec"] = {{"s", e.spec.s}, {"R", e.spec.R}, {"n_modes", e.spec.n_modes}, {"mean_zero", e.spec.mean_zero},
               {"L", e.spec.quad.L}, {"nodes_per_panel", e.spec.quad.nodes_per_panel}};
  j["seed"] = e.seed;
  j["ess"] = e.ess();
  auto& arr = j["samples"] = nlohmann::json::array();
  for (auto& s : e.samples) {
    const std::string name = "sample_" + std::to_string(s.draw) + ".pfc";
    write_pfc((fs::path(dir) / name).string(), s.field, e.spec.s);
    nlohmann::json row = {{"draw", s.draw}, {"weight", s.weight}, {"field", name}};
    row["e_value"] = std::isfinite(s.e_value) ? nlohmann::json(s.e_value) : nlohmann::json(nullptr);
    arr.push_back(row);
  }
  std::ofstream os(fs::path(dir) / "manifest.json");
  os << j.dump(1) << '\n';
}

KakutaniTable kakutani_diagnostic(double s, int k_max) {
  const MultiplierTable t = multiplier_table(s, k_max);
  KakutaniTable out;
  out.summand.resize(k_max + 1);
  out.partial.resize(k_max + 1);
  double acc = 0.0;
  for (int k = 0; k <= k_max; ++k) {
    const double xi = freq(k);
    const double a = 1.0 / (1.0 + t.m2[k]);
    const double b = 1.0 / (t.c_s * std::pow(1.0 + xi * xi, s));
    const double r = a / b - 1.0;
    out.summand[k] = (k == 0 ? 1.0 : 2.0) * r * r;
    acc += out.summand[k];
    out.partial[k] = acc;
  }
  std::vector<double> xs, ys;
  const int lo = std::min(32, std::max(1, k_max / 2));
  for (int k = lo; k <= std::min(256, k_max); ++k) {
    xs.push_back(freq(k));
    ys.push_back(out.summand[k]);
  }
  if (xs.size() >= 2) out.summand_slope = fit_loglog(xs, ys).slope;
  xs.clear();
  ys.clear();
  for (int K = 4; 2 * K <= k_max; K *= 2) {
    xs.push_back(K);
    ys.push_back(out.partial[2 * K] - out.partial[K]);
  }
  if (xs.size() >= 2) out.tail_slope = fit_loglog(xs, ys).slope;
  return out;
}

}  // namespace torus
