#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace torus {

using cplx = std::complex<double>;

constexpr double kTwoPi = 6.283185307179586476925286766559;

inline double freq(int k) { return kTwoPi * k; }

struct ResolutionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Real periodic function on [0,1) stored as coefficients c_k, |k| <= n_modes,
// f(x) = sum_k c_k exp(2 pi i k x).
class SpectralField {
 public:
  SpectralField() = default;
  explicit SpectralField(int n_modes, int grid_factor = 2);
  static SpectralField from_coeffs(std::vector<cplx> coeffs, int grid_factor = 2);

  int n_modes() const { return n_; }
  int grid_factor() const { return grid_factor_; }
  void set_grid_factor(int g) { grid_factor_ = g; }
  int grid_size() const;

  cplx coeff(int k) const { return (k < -n_ || k > n_) ? cplx{} : c_[k + n_]; }
  cplx operator[](int k) const { return coeff(k); }
  // sets coeff(k) and coeff(-k) = conj
  void set(int k, cplx v);

  std::span<const cplx> coeffs() const { return c_; }
  std::span<cplx> coeffs_mut() { return c_; }

  double mean() const { return c_.empty() ? 0.0 : c_[n_].real(); }
  bool is_zero() const;
  void symmetrize();

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator-=(const SpectralField& o);
  SpectralField& operator*=(double a);

 private:
  int n_ = 0;
  int grid_factor_ = 2;
  std::vector<cplx> c_ = std::vector<cplx>(1);
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double s, SpectralField a);

int default_grid(int n_modes, int grid_factor);

SpectralField analyze(std::span<const double> samples, int n_modes);
// keeps every mode a grid of this size can resolve
SpectralField analyze(std::span<const double> samples);
std::vector<double> synthesize(const SpectralField& f, int grid);
std::vector<double> synthesize(const SpectralField& f);
double evaluate(const SpectralField& f, double x);

double inner(const SpectralField& f, const SpectralField& g);
double l2_norm(const SpectralField& f);
double sobolev_norm(const SpectralField& f, double s, std::optional<double> kappa = std::nullopt);
double linf_norm(const SpectralField& f, int grid = 0);

struct Multiplier {
  std::function<cplx(double xi)> symbol;
  std::string description;
};

SpectralField apply(const SpectralField& f, const Multiplier& m);
// symbol given as a function of the integer index k
SpectralField apply_k(const SpectralField& f, const std::function<cplx(int)>& symbol);

enum class ResolventKind { plus, minus, r0 };
Multiplier resolvent_symbol(ResolventKind kind, double kappa);
SpectralField resolvent_apply(const SpectralField& f, ResolventKind kind, double kappa);
SpectralField derivative(const SpectralField& f);
// f(. + a)
SpectralField translate(const SpectralField& f, double a);

SpectralField multiply(const SpectralField& f, const SpectralField& g, int pad = 2, int n_out = -1);
SpectralField multiply3(const SpectralField& f, const SpectralField& g, const SpectralField& h,
                        int pad = 2, int n_out = -1);
SpectralField power(const SpectralField& f, int p, int pad = 2, int n_out = -1);
// grid integral of f*g*h*k without truncation, exact for band-limited data
double integrate_product(std::span<const SpectralField* const> factors);

enum class Side { low, high };
SpectralField project(const SpectralField& f, int N, Side side = Side::low);
SpectralField resize(const SpectralField& f, int n_modes);

// .pfc snapshots
void write_pfc(const std::string& path, const SpectralField& f, double meta = 0.0);
SpectralField read_pfc(const std::string& path, double* meta = nullptr);
std::string to_json(const SpectralField& f, double meta = 0.0);
SpectralField from_json(const std::string& text, double* meta = nullptr);

}  // namespace torus
