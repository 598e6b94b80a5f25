#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "torus/flows.hpp"
#include "torus/measures.hpp"

namespace torus {

struct Observable {
  std::string name;
  std::function<double(const SpectralField&)> f;
};

// cos(Re q(2pi)), exp(-||pi_4 q||^2), sin(Im q(4pi))
std::vector<Observable> default_observables();
Observable l2_observable();

enum class InvarianceFlow { mkdv, h_kappa, h_kappa_trunc, kdv_conjugated };
InvarianceFlow parse_invariance_flow(const std::string& name);
std::string to_string(InvarianceFlow f);

struct InvarianceSpec {
  InvarianceFlow flow = InvarianceFlow::h_kappa_trunc;
  double kappa = 2.0;
  double t = 0.1;
  // per-sample dt is reduced to meet the stability budget; 0 picks 1e-5 for mKdV-based flows, 1e-3 otherwise
  double dt_max = 0.0;
  double ode_tol = 1e-10;
};

struct ObservableRow {
  std::string name;
  double before_mean = 0.0;
  double after_mean = 0.0;
  double se_before = 0.0;
  double se_after = 0.0;
  double z = 0.0;
};

struct InvarianceReport {
  std::vector<ObservableRow> observables;
  int M = 0;
  InvarianceSpec flow;
  MeasureSpec measure;
  double ess = 0.0;
  bool inconclusive = false;
  int failures = 0;
  int evolved = 0;
  double max_abs_z() const;
};

InvarianceReport invariance_test(const MeasureSpec& spec, const InvarianceSpec& flow,
                                 const std::vector<Observable>& observables, int M, std::uint64_t seed,
                                 int bootstrap_B);

struct ExponentFit {
  std::string scan;
  double exponent = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::vector<ScanRow> rows;
};

struct ConvergenceReport {
  std::vector<ExponentFit> scans;
  double node_doubling_change = 0.0;  // max |E(npp) - E(2 npp)| over the sampled fields
  double tol = 0.0;
};

// E_L tail, pi_N projection, truncated-flow and asymptotic-conservation scans
ConvergenceReport convergence_suite(const MeasureSpec& spec, std::uint64_t seed);

// flat key = value text with # comments
using Config = std::map<std::string, std::string>;
Config parse_config(const std::string& text);
Config read_config(const std::string& path);

int cli(int argc, char** argv);

}  // namespace torus
