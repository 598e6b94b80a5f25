#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include "json.hpp"
#include "torus/harness.hpp"
#include "torus/miura.hpp"

namespace torus {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

const std::set<std::string> kKnownKeys = {
    "s",     "R",    "n_modes", "kappa",  "N",     "dt",      "t_end",    "M",      "seed",   "bootstrap",
    "out_dir", "kmax", "flow",  "sign",   "L",     "npp",     "tol",      "init",   "amp",    "input",
    "stride", "probes", "observables", "weighted", "log_energy", "ode_tol"};

struct Inconclusive : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Params {
 public:
  explicit Params(Config c) : c_(std::move(c)) {
    for (auto& [k, v] : c_)
      if (!kKnownKeys.count(k)) throw std::invalid_argument("unknown config key '" + k + "'");
  }
  bool has(const std::string& k) const { return c_.count(k) > 0; }
  std::string str(const std::string& k, const std::string& def) const {
    auto it = c_.find(k);
    return it == c_.end() ? def : it->second;
  }
  double num(const std::string& k, double def) const {
    auto it = c_.find(k);
    if (it == c_.end()) return def;
    size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(it->second, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != it->second.size()) throw std::invalid_argument("key '" + k + "' expects a number, got '" + it->second + "'");
    return v;
  }
  long long integer(const std::string& k, long long def) const {
    const double v = num(k, static_cast<double>(def));
    if (v != std::floor(v)) throw std::invalid_argument("key '" + k + "' expects an integer");
    return static_cast<long long>(v);
  }
  bool flag(const std::string& k, bool def) const {
    const std::string v = str(k, def ? "true" : "false");
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument("key '" + k + "' expects true or false");
  }
  std::vector<double> list(const std::string& k, std::vector<double> def) const {
    if (!has(k)) return def;
    std::vector<double> out;
    std::stringstream ss(str(k, ""));
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    return out;
  }

 private:
  Config c_;
};

MeasureSpec measure_spec(const Params& p) {
  MeasureSpec m;
  m.s = p.num("s", 0.75);
  m.R = p.num("R", 4.0);
  m.n_modes = static_cast<int>(p.integer("n_modes", 32));
  m.quad.L = p.num("L", 256.0);
  m.quad.nodes_per_panel = static_cast<int>(p.integer("npp", 8));
  m.quad.tol = p.num("tol", 1.0);
  m.quad.L_max = std::max(m.quad.L_max, m.quad.L);
  m.validate();
  return m;
}

SpectralField initial_field(const Params& p) {
  const std::string input = p.str("input", "");
  const std::string init = p.str("init", input.empty() ? "cos" : "file");
  const int n = static_cast<int>(p.integer("n_modes", 32));
  if (init == "file") {
    if (input.empty()) throw std::invalid_argument("init = file needs an input path");
    if (fs::path(input).extension() == ".json") {
      std::ifstream is(input);
      if (!is) throw std::runtime_error("cannot read " + input);
      std::stringstream ss;
      ss << is.rdbuf();
      return from_json(ss.str());
    }
    return read_pfc(input);
  }
  if (init == "zero") return SpectralField(n);
  if (init == "cos") {
    SpectralField q(n);
    q.set(1, 0.5 * p.num("amp", 0.2));
    return q;
  }
  if (init == "sample") {
    MeasureSpec m = measure_spec(p);
    const MultiplierTable t = multiplier_table(m.s, m.n_modes);
    return sample_mu_s(m, t, static_cast<std::uint64_t>(p.integer("seed", 1)), 0);
  }
  throw std::invalid_argument("unknown init '" + init + "' (zero, cos, sample, file)");
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << j.dump(2) << '\n';
}

class Csv {
 public:
  Csv(const fs::path& path, const std::vector<std::string>& header) : os_(path) {
    if (!os_) throw std::runtime_error("cannot write " + path.string());
    os_.precision(17);
    for (size_t i = 0; i < header.size(); ++i) os_ << (i ? "," : "") << header[i];
    os_ << '\n';
  }
  template <class... T>
  void row(const T&... v) {
    bool first = true;
    ((os_ << (first ? "" : ",") << v, first = false), ...);
    os_ << '\n';
  }

 private:
  std::ofstream os_;
};

fs::path out_dir(const Params& p, const std::string& sub) {
  fs::path d = p.str("out_dir", "out/" + sub);
  fs::create_directories(d);
  return d;
}

double rel_drift(double a, double b) { return a == 0.0 ? std::abs(b) : std::abs(b - a) / std::abs(a); }

int cmd_multiplier_table(const Params& p) {
  const double s = p.num("s", 0.75);
  const int kmax = static_cast<int>(p.integer("kmax", 256));
  const MultiplierTable t = multiplier_table(s, kmax, p.num("tol", 1e-14));
  const fs::path d = out_dir(p, "multiplier-table");
  write_multiplier_csv((d / "table.csv").string(), t);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (int k = 0; k <= kmax; ++k) {
    lo = std::min(lo, t.bracket(k));
    hi = std::max(hi, t.bracket(k));
  }
  write_json(d / "report.json", {{"s", s}, {"kmax", kmax}, {"c_s", t.c_s}, {"bracket_low", lo}, {"bracket_high", hi},
                                 {"achieved_tol", t.achieved}});
  std::cout << "multiplier-table s=" << s << " kmax=" << kmax << " C_s=" << t.c_s << " bracket=[" << lo << ", " << hi
            << "] -> " << d.string() << '\n';
  return 0;
}

int cmd_kakutani(const Params& p) {
  const double s = p.num("s", 0.75);
  const int kmax = static_cast<int>(p.integer("kmax", 256));
  const KakutaniTable k = kakutani_diagnostic(s, kmax);
  const fs::path d = out_dir(p, "kakutani");
  Csv csv(d / "table.csv", {"k", "xi", "summand", "partial"});
  for (int i = 0; i <= kmax; ++i) csv.row(i, freq(i), k.summand[i], k.partial[i]);
  write_json(d / "report.json",
             {{"s", s}, {"kmax", kmax}, {"summand_slope", k.summand_slope}, {"tail_slope", k.tail_slope},
              {"partial_sum", k.partial.back()}});
  std::cout << "kakutani s=" << s << " summand slope=" << k.summand_slope << " tail slope=" << k.tail_slope
            << " S=" << k.partial.back() << '\n';
  return 0;
}

int cmd_sample(const Params& p) {
  const MeasureSpec m = measure_spec(p);
  const int M = static_cast<int>(p.integer("M", 16));
  const auto seed = static_cast<std::uint64_t>(p.integer("seed", 1));
  const Ensemble e = draw_ensemble(m, seed, M, p.flag("weighted", true));
  const fs::path d = out_dir(p, "sample");
  write_ensemble((d / "ensemble").string(), e);
  Csv csv(d / "table.csv", {"draw", "l2", "e_value", "weight"});
  for (auto& s : e.samples) csv.row(s.draw, inner(s.field, s.field), s.e_value, s.weight);
  write_json(d / "report.json", {{"M", M}, {"seed", seed}, {"ess", e.ess()}, {"n_modes", m.n_modes}, {"s", m.s},
                                 {"R", m.R}});
  std::cout << "sample M=" << M << " ESS=" << e.ess() << " -> " << d.string() << '\n';
  return 0;
}

FlowSpec flow_spec(const Params& p) {
  FlowSpec f;
  f.kind = parse_flow_kind(p.str("flow", "mkdv"));
  const std::string sign = p.str("sign", "defocusing");
  if (sign != "defocusing" && sign != "focusing") throw std::invalid_argument("sign must be defocusing or focusing");
  f.sign = sign == "defocusing" ? Sign::defocusing : Sign::focusing;
  f.kappa = p.num("kappa", 2.0);
  f.N = static_cast<int>(p.integer("N", p.integer("n_modes", 32)));
  f.dt = p.num("dt", 1e-5);
  f.t_end = p.num("t_end", 0.01);
  f.snapshot_stride = static_cast<int>(p.integer("stride", 100));
  f.probe_kappas = p.list("probes", {1.0, 2.0});
  f.log_energy = p.flag("log_energy", false);
  f.energy_s = p.num("s", 0.75);
  f.lax.ode_tol = p.num("ode_tol", 1e-12);
  return f;
}

int cmd_evolve(const Params& p) {
  const SpectralField q0 = initial_field(p);
  const FlowSpec f = flow_spec(p);
  const Trajectory tr = evolve(q0, f);
  const fs::path d = out_dir(p, "evolve");
  write_trajectory((d / "trajectory").string(), tr);
  fs::copy_file(d / "trajectory" / "logs.csv", d / "table.csv", fs::copy_options::overwrite_existing);
  const LogRow &a = tr.logs.front(), &b = tr.logs.back();
  json drifts = {{"mass", rel_drift(a.mass, b.mass)}, {"l2", rel_drift(a.l2, b.l2)},
                 {"h_mkdv", rel_drift(a.h_mkdv, b.h_mkdv)}};
  for (size_t i = 0; i < f.probe_kappas.size(); ++i)
    drifts["A_k" + std::to_string(i + 1)] = rel_drift(a.a_probe[i], b.a_probe[i]);
  if (a.e_s && b.e_s) drifts["E_s"] = rel_drift(*a.e_s, *b.e_s);
  write_json(d / "report.json", {{"flow", to_string(f.kind)},
                                 {"t_end", f.t_end},
                                 {"dt", f.dt},
                                 {"steps", f.steps()},
                                 {"snapshots", tr.snapshots.size()},
                                 {"relative_drift", drifts}});
  std::cout << "evolve " << to_string(f.kind) << " t_end=" << f.t_end << " steps=" << f.steps()
            << " l2 drift=" << rel_drift(a.l2, b.l2) << " -> " << d.string() << '\n';
  return 0;
}

int cmd_functionals(const Params& p) {
  const SpectralField q = initial_field(p);
  const double s = p.num("s", 0.75);
  KappaQuadrature quad;
  quad.L = p.num("L", 256.0);
  quad.nodes_per_panel = static_cast<int>(p.integer("npp", 8));
  quad.tol = p.num("tol", 1.0);
  quad.L_max = std::max(quad.L_max, quad.L);
  const std::vector<double> probes = p.list("probes", {1.0, 2.0, 4.0});
  const fs::path d = out_dir(p, "functionals");
  Csv csv(d / "table.csv", {"kappa", "A", "A2", "A4", "A6_1", "A6_2", "script_A", "V", "H_kappa"});
  json probe_json = json::array();
  for (double k : probes) {
    const double a = a_full(q, k), b2 = a2(q, k), b4 = a4(q, k);
    const auto [c1, c2] = a_ge6(q, k);
    const double sa = k >= 1.0 ? script_a(q, k) : std::nan("");
    const double v = k >= 1.0 ? v_remainder(q, k) : std::nan("");
    const double h = k >= 1.0 ? h_kappa(q, k) : std::nan("");
    csv.row(k, a, b2, b4, c1, c2, sa, v, h);
    probe_json.push_back({{"kappa", k}, {"A", a}, {"H_kappa", h}});
  }
  const EValue e = e_functional(q, quad, s);
  const double quadratic = quadratic_energy(q, s);
  write_json(d / "report.json", {{"mass", mass(q)},
                                 {"h_mkdv", hamiltonian_mkdv(q)},
                                 {"probes", probe_json},
                                 {"E", e.total()},
                                 {"E_s", quadratic + e.total()},
                                 {"quadrature",
                                  {{"s", s},
                                   {"L", e.L},
                                   {"nodes_per_panel", quad.nodes_per_panel},
                                   {"tail", e.tail},
                                   {"tail_constant", e.tail_constant},
                                   {"evaluations", e.evaluations}}}});
  std::cout << "functionals M=" << mass(q) << " H=" << hamiltonian_mkdv(q) << " E_s=" << quadratic + e.total()
            << " -> " << d.string() << '\n';
  return 0;
}

int cmd_invariance(const Params& p) {
  const MeasureSpec m = measure_spec(p);
  InvarianceSpec inv;
  inv.flow = parse_invariance_flow(p.str("flow", "h_kappa_trunc"));
  inv.kappa = p.num("kappa", 2.0);
  inv.t = p.num("t_end", 0.1);
  inv.dt_max = p.num("dt", 0.0);
  inv.ode_tol = p.num("ode_tol", 1e-10);
  const std::string which = p.str("observables", "default");
  std::vector<Observable> obs;
  if (which == "default" || which == "all") obs = default_observables();
  if (which == "l2" || which == "all") obs.push_back(l2_observable());
  if (obs.empty()) throw std::invalid_argument("observables must be default, l2 or all");
  const int M = static_cast<int>(p.integer("M", 512));
  const auto seed = static_cast<std::uint64_t>(p.integer("seed", 1));
  const InvarianceReport r = invariance_test(m, inv, obs, M, seed, static_cast<int>(p.integer("bootstrap", 200)));
  const fs::path d = out_dir(p, "invariance");
  Csv csv(d / "table.csv", {"observable", "before_mean", "after_mean", "se_before", "se_after", "z"});
  json rows = json::array();
  for (auto& o : r.observables) {
    csv.row(o.name, o.before_mean, o.after_mean, o.se_before, o.se_after, o.z);
    rows.push_back({{"name", o.name},
                    {"before_mean", o.before_mean},
                    {"after_mean", o.after_mean},
                    {"bootstrap_se_before", o.se_before},
                    {"bootstrap_se_after", o.se_after},
                    {"z_score", o.z}});
  }
  write_json(d / "report.json", {{"observables", rows},
                                 {"M", M},
                                 {"seed", seed},
                                 {"flow", {{"kind", to_string(inv.flow)}, {"kappa", inv.kappa}, {"t", inv.t}}},
                                 {"measure", {{"s", m.s}, {"R", m.R}, {"n_modes", m.n_modes}}},
                                 {"ess", r.ess},
                                 {"inconclusive", r.inconclusive},
                                 {"failures", r.failures}});
  std::cout << "invariance " << to_string(inv.flow) << " M=" << M << " ESS=" << r.ess << " max|z|=" << r.max_abs_z()
            << " failures=" << r.failures << (r.inconclusive ? " INCONCLUSIVE" : "") << '\n';
  if (r.inconclusive) throw Inconclusive("effective sample size below M/10");
  return 0;
}

int cmd_convergence(const Params& p) {
  const MeasureSpec m = measure_spec(p);
  const auto seed = static_cast<std::uint64_t>(p.integer("seed", 1));
  const ConvergenceReport r = convergence_suite(m, seed);
  const fs::path d = out_dir(p, "convergence");
  Csv csv(d / "table.csv", {"scan", "param", "value", "reference"});
  json scans = json::array();
  for (auto& s : r.scans) {
    for (auto& row : s.rows) csv.row(s.scan, row.param, row.value, row.reference);
    scans.push_back({{"scan", s.scan}, {"exponent", s.exponent}, {"ci_low", s.ci_low}, {"ci_high", s.ci_high}});
  }
  write_json(d / "report.json",
             {{"scans", scans}, {"node_doubling_change", r.node_doubling_change}, {"tol", r.tol}, {"seed", seed}});
  std::cout << "convergence";
  for (auto& s : r.scans) std::cout << ' ' << s.scan << '=' << s.exponent;
  std::cout << '\n';
  return 0;
}

int cmd_miura(const Params& p) {
  SpectralField q = initial_field(p);
  q = tau_shift(q, q.mean());
  const int n = q.n_modes();
  const SpectralField w0 = miura_forward(q, n);
  MiuraInverseOptions io;
  io.n_modes = n;
  const MiuraInverseResult inv = miura_inverse(miura_forward(q), io);
  FlowSpec f;
  f.dt = p.num("dt", 1e-5);
  f.t_end = p.num("t_end", 0.01);
  f.snapshot_stride = static_cast<int>(p.integer("stride", 100));
  f.log_functionals = false;
  const ConjugatedTrajectory c = kdv_conjugated(w0, f, io);
  const fs::path d = out_dir(p, "miura");
  write_trajectory((d / "trajectory").string(), c.w);
  Csv csv(d / "table.csv", {"t", "distance_to_direct", "mean"});
  double worst = 0.0;
  for (size_t i = 0; i < c.to_direct.size(); ++i) {
    csv.row(c.w.snapshots[i].t, c.to_direct[i], c.w.snapshots[i].field.mean());
    worst = std::max(worst, c.to_direct[i]);
  }
  write_json(d / "report.json", {{"round_trip_error", l2_norm(inv.q - q)},
                                 {"newton_iterations", inv.iterations},
                                 {"continued", inv.continued},
                                 {"max_distance_to_direct", worst},
                                 {"t_end", f.t_end}});
  std::cout << "miura round trip=" << l2_norm(inv.q - q) << " conjugated vs direct=" << worst << '\n';
  return 0;
}

}  // namespace

int cli(int argc, char** argv) {
  CLI::App app{"Integrable-structure numerics on the unit torus"};
  app.require_subcommand(1);
  struct Sub {
    const char* name;
    const char* help;
    std::vector<std::string> keys;
    int (*run)(const Params&);
  };
  const std::vector<Sub> subs = {
      {"sample", "draw a weighted ensemble", {"s", "R", "n_modes", "M", "seed", "L", "npp", "tol", "weighted"},
       cmd_sample},
      {"multiplier-table", "tabulate m_s^2 and C_s", {"s", "kmax", "tol"}, cmd_multiplier_table},
      {"evolve", "integrate a flow",
       {"flow", "sign", "kappa", "N", "dt", "t_end", "stride", "n_modes", "init", "amp", "input", "seed", "s",
        "log_energy", "probes", "ode_tol", "R"},
       cmd_evolve},
      {"functionals", "evaluate conserved functionals",
       {"n_modes", "init", "amp", "input", "seed", "s", "L", "npp", "tol", "probes", "R"}, cmd_functionals},
      {"invariance", "Monte Carlo invariance test",
       {"s", "R", "n_modes", "flow", "kappa", "t_end", "dt", "M", "seed", "bootstrap", "observables", "L", "npp",
        "tol", "ode_tol"},
       cmd_invariance},
      {"kakutani", "Kakutani partial sums", {"s", "kmax"}, cmd_kakutani},
      {"convergence", "convergence scans with slope fits", {"s", "R", "n_modes", "seed", "L", "npp", "tol"},
       cmd_convergence},
      {"miura", "Miura round trip and conjugated KdV",
       {"n_modes", "init", "amp", "input", "seed", "dt", "t_end", "stride"}, cmd_miura},
  };
  std::string config_path;
  Config flags;
  std::vector<CLI::App*> apps;
  for (auto& s : subs) {
    CLI::App* a = app.add_subcommand(s.name, s.help);
    a->add_option("--config", config_path, "key = value config file");
    a->add_option_function<std::string>("--out,--out-dir", [&](const std::string& v) { flags["out_dir"] = v; },
                                        "output directory");
    for (const std::string& k : s.keys) {
      std::string flag = "--" + k;
      std::replace(flag.begin(), flag.end(), '_', '-');
      if (k == "t_end") flag += ",--t";
      a->add_option_function<std::string>(flag, [&flags, k](const std::string& v) { flags[k] = v; });
    }
    apps.push_back(a);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  try {
    for (size_t i = 0; i < subs.size(); ++i) {
      if (!apps[i]->parsed()) continue;
      Config c = config_path.empty() ? Config{} : read_config(config_path);
      for (auto& [k, v] : flags) c[k] = v;
      return subs[i].run(Params(c));
    }
  } catch (const Inconclusive& e) {
    std::cerr << "inconclusive: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace torus
