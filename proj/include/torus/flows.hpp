#pragma once

#include <optional>
#include <string>
#include <vector>

#include "torus/functionals.hpp"
#include "torus/lax.hpp"
#include "torus/spectral.hpp"

namespace torus {

enum class FlowKind { mkdv, kdv, h_kappa, h_kappa_trunc };

struct FlowUnstable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

FlowKind parse_flow_kind(const std::string& name);
std::string to_string(FlowKind kind);

struct FlowSpec {
  FlowKind kind = FlowKind::mkdv;
  Sign sign = Sign::defocusing;
  double kappa = 1.0;
  int N = 0;
  double dt = 1e-5;
  double t_end = 0.0;
  int snapshot_stride = 100;
  std::vector<double> probe_kappas{1.0, 2.0};
  bool log_functionals = true;
  bool log_energy = false;
  double energy_s = 0.75;
  KappaQuadrature energy_quad;
  LaxOptions lax;
  double stability_budget = 2.5;
  double drift_abort = 1e-3;

  // throws std::invalid_argument when dt exceeds the explicit budget for data q0
  void validate(const SpectralField& q0) const;
  int steps() const;
};

struct LogRow {
  double t = 0.0;
  double mass = 0.0;
  double l2 = 0.0;
  double h_mkdv = 0.0;
  std::vector<double> a_probe;
  std::optional<double> e_s;
};

struct Snapshot {
  double t = 0.0;
  SpectralField field;
};

struct Trajectory {
  FlowSpec spec;
  std::vector<Snapshot> snapshots;
  std::vector<LogRow> logs;
  const SpectralField& final_field() const { return snapshots.back().field; }
};

// dt times the nonlinear Lipschitz estimate at q0
double stability_number(const SpectralField& q0, const FlowSpec& spec);

Trajectory evolve(const SpectralField& q0, const FlowSpec& spec);
// final state only, no logging
SpectralField flow_to(const SpectralField& q0, const FlowSpec& spec);
LogRow log_row(double t, const SpectralField& q, const FlowSpec& spec);
void write_trajectory(const std::string& dir, const Trajectory& tr);

struct ScanRow {
  double param = 0.0;  // kappa or N
  double value = 0.0;
  double reference = 0.0;
  double aux = 0.0;
};

struct ScanTable {
  std::vector<ScanRow> rows;
  double fitted_exponent = 0.0;  // decay exponent: value ~ param^{-exponent}
  double exponent_se = 0.0;
  double aux_exponent = 0.0;
};

// sup over snapshots of ||Phi_kappa(t) q0 - Phi_mKdV(t) q0||
ScanTable kappa_convergence(const SpectralField& q0, const std::vector<double>& kappas, double T, double dt,
                            int n_snap = 10);
// ||Phi_kappa(t) Phi_mKdV(tau) q0 - Phi_mKdV(tau) Phi_kappa(t) q0||
double flow_commutator(const SpectralField& q0, double kappa, double t, double tau, double dt);
// sup over snapshots of ||Phi_kappa(t) q0 - Phi_{kappa,N}(t) q0||; reference column holds ||pi_{>N} q0||
ScanTable truncation_convergence(const SpectralField& q0, double kappa, const std::vector<int>& Ns, double T,
                                 double dt, int n_snap = 10);
// dE_s/dt at a state u of the truncated H_kappa flow with N = u.n_modes(), from
// dA(eta)/dt = -4 kappa^3 int pi_N g_-(eta) d/dx pi_N g_-(kappa)
double truncated_energy_rate(const SpectralField& u, double kappa, double s, const KappaQuadrature& quad = {},
                             const LaxOptions& opt = {});
// value: max |dE_s/dt| over snapshots of Phi_{kappa,N} pi_N q0 from the rate identity;
// aux: max centered difference quotient of E_s over the same snapshots
ScanTable asymptotic_conservation_scan(const SpectralField& q0, double kappa, double s, const std::vector<int>& Ns,
                                       double T, double dt, int n_snap = 8,
                                       const KappaQuadrature& quad = {});

}  // namespace torus
