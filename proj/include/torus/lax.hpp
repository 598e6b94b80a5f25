#pragma once

#include <array>
#include <stdexcept>
#include <vector>

#include "torus/spectral.hpp"

namespace torus {

struct FloquetDegenerate : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Mat2 = std::array<double, 4>;  // row-major
using Vec2 = std::array<double, 2>;

enum class Stepper { rk4, magnus4 };

struct LaxOptions {
  double ode_tol = 1e-12;
  int grid_factor = 4;
  Stepper stepper = Stepper::rk4;
};

// Transfer of psi' = [[k, q], [q, -k]] psi over one period; true matrix is exp(log_scale) * matrix.
struct Monodromy {
  Mat2 matrix{};
  double log_scale = 0.0;
  double rho_plus = 0.0;
  double rho_minus = 0.0;
  double log_rho_plus = 0.0;
  Vec2 v_plus{};
  Vec2 v_minus{};
  int steps = 0;
};

struct GreenEval {
  Mat2 entries{};
  double x = 0.0;
  double y = 0.0;
  double det() const { return entries[0] * entries[3] - entries[1] * entries[2]; }
};

struct DiagonalGreens {
  double kappa = 0.0;
  SpectralField gamma;
  SpectralField g_plus;
  SpectralField g_minus;
  Monodromy monodromy;
  std::vector<double> gamma_grid;
  std::vector<double> g_plus_grid;
  std::vector<double> g_minus_grid;
};

Monodromy monodromy(const SpectralField& q, double kappa, double ode_tol = 1e-12);
Monodromy monodromy(const SpectralField& q, double kappa, const LaxOptions& opt);
GreenEval green_at(const SpectralField& q, double kappa, double x, double y,
                   const LaxOptions& opt = {});
DiagonalGreens diagonal_greens(const SpectralField& q, double kappa, const LaxOptions& opt = {});

SpectralField gamma2(const SpectralField& q, double kappa);
SpectralField gamma_ge4(const SpectralField& q, double kappa, const LaxOptions& opt = {});

// line free kernel and its periodization
GreenEval free_green(double kappa, double x, double y);
GreenEval periodic_free_green(double kappa, double x, double y);

// output grid used for diagonal quantities of a field with n modes
int greens_grid(int n_modes, const LaxOptions& opt);
int ode_steps(const SpectralField& q, double kappa, const LaxOptions& opt, int grid);

}  // namespace torus
