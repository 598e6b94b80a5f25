#pragma once

#include <functional>
#include <stdexcept>
#include <utility>

#include "torus/lax.hpp"
#include "torus/spectral.hpp"

namespace torus {

enum class Sign { defocusing, focusing };

struct TailNotConverged : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double mass(const SpectralField& q);
double hamiltonian_mkdv(const SpectralField& q, Sign sign = Sign::defocusing);

// A(k,q) = int q g_- / (2 + gamma)
double a_full(const SpectralField& q, double kappa, const LaxOptions& opt = {});
double a_full(const SpectralField& q, const DiagonalGreens& d);
double a2(const SpectralField& q, double kappa);
double a4(const SpectralField& q, double kappa);
std::pair<double, double> a_ge6(const SpectralField& q, double kappa, const LaxOptions& opt = {});
std::pair<double, double> a_ge6(const SpectralField& q, const DiagonalGreens& d);

double script_a(const SpectralField& q, double kappa, const LaxOptions& opt = {});
double v_remainder(const SpectralField& q, double kappa, const LaxOptions& opt = {});

struct KappaQuadrature {
  int nodes_per_panel = 8;
  double L = 256.0;
  double L_max = 1024.0;
  double tol = 1.0;  // absolute bound on the modelled tail
};

struct EValue {
  double value = 0.0;  // integral over [1, L]
  double tail = 0.0;   // modelled integral over [L, inf)
  double tail_constant = 0.0;
  double L = 0.0;
  int evaluations = 0;
  double total() const { return value + tail; }
};

// int_1^inf k^{2s} (f(k) - f(k/2)/2) dk with the panel rule and tail model of E
EValue kappa_transform(const std::function<double(double)>& f, const KappaQuadrature& quad, double s);

// E(q) = int_1^inf k^{2s} V(k,q) dk
EValue e_functional(const SpectralField& q, const KappaQuadrature& quad, double s,
                    const LaxOptions& opt = {});
// E_L without tail model or tolerance check
double e_truncated(const SpectralField& q, double L, double s, int nodes_per_panel = 8,
                   const LaxOptions& opt = {});

double quadratic_energy(const SpectralField& q, double s);
double e_s_total(const SpectralField& q, double s, const KappaQuadrature& quad, const LaxOptions& opt = {});
double h_kappa(const SpectralField& q, double kappa, const LaxOptions& opt = {});

}  // namespace torus
