#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "torus/functionals.hpp"
#include "torus/spectral.hpp"
#include "torus/stats.hpp"

namespace torus {

struct QuadratureFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double w_multiplier(double xi, double kappa);
double w_partial_fractions(double xi, double kappa);
double ms_squared(double s, double xi, double tol = 1e-14, double* achieved = nullptr);
double c_s_constant(double s, double tol = 1e-14);

struct MultiplierTable {
  double s = 0.0;
  std::vector<double> m2;  // m_s(2 pi k)^2, k = 0..k_max
  double c_s = 0.0;
  double tol = 0.0;
  double achieved = 0.0;
  int k_max() const { return static_cast<int>(m2.size()) - 1; }
  // (1 + m^2) / <xi>^{2s}
  double bracket(int k) const;
};

MultiplierTable multiplier_table(double s, int k_max, double tol = 1e-14);
const std::vector<double>& ms2_cached(double s, int k_max);
void write_multiplier_csv(const std::string& path, const MultiplierTable& t);

struct MeasureSpec {
  double s = 0.75;
  double R = 4.0;
  int n_modes = 32;
  KappaQuadrature quad;
  bool mean_zero = false;
  void validate() const;
};

struct Sample {
  SpectralField field;
  double weight = 0.0;
  double e_value = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t draw = 0;
};

// per-draw substream; modes are consumed in increasing |k| so lower modes do not depend on the cutoff
std::mt19937_64 substream(std::uint64_t seed, std::uint64_t draw, std::uint64_t tag = 0);

SpectralField sample_mu_s(const MeasureSpec& spec, const MultiplierTable& table, std::uint64_t seed,
                          std::uint64_t draw);
SpectralField sample_mu_tilde(double s, int n_modes, const MultiplierTable& table, std::uint64_t seed,
                              std::uint64_t draw);

// zero-mean field with coefficients amp * g_k / <xi>^p, g_k standard complex normal
SpectralField power_law_field(int n_modes, double p, std::uint64_t seed, double amp = 1.0);

struct Density {
  double weight = 0.0;
  double e_value = 0.0;
};
Density density_F(const SpectralField& q, const MeasureSpec& spec, const LaxOptions& opt = {});
// F_{N,L}: cutoff and E_L evaluated on pi_N q
Density density_F_truncated(const SpectralField& q, const MeasureSpec& spec, int N, double L,
                            const LaxOptions& opt = {});

struct Ensemble {
  MeasureSpec spec;
  std::uint64_t seed = 0;
  std::vector<Sample> samples;
  double ess() const;
};

Ensemble draw_ensemble(const MeasureSpec& spec, std::uint64_t seed, int M, bool weighted = true,
                       const LaxOptions& opt = {});
void write_ensemble(const std::string& dir, const Ensemble& e);

struct KakutaniTable {
  std::vector<double> summand;  // per |k|, both signs counted
  std::vector<double> partial;  // S(K) = sum_{|k| <= K}
  double summand_slope = 0.0;   // log-log slope in xi over k in [32, 256] (or available range)
  double tail_slope = 0.0;      // slope of S(2K) - S(K) against K
};
KakutaniTable kakutani_diagnostic(double s, int k_max);

}  // namespace torus
