#include "torus/spectral.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>

#include "fft.hpp"
#include "json.hpp"

namespace torus {

using detail::next_pow2;

SpectralField::SpectralField(int n_modes, int grid_factor)
    : n_(n_modes), grid_factor_(grid_factor), c_(2 * n_modes + 1) {
  if (n_modes < 0) throw std::invalid_argument("n_modes must be >= 0");
}

SpectralField SpectralField::from_coeffs(std::vector<cplx> coeffs, int grid_factor) {
  if (coeffs.size() % 2 == 0) throw std::invalid_argument("coefficient count must be odd");
  SpectralField f(static_cast<int>(coeffs.size() / 2), grid_factor);
  f.c_ = std::move(coeffs);
  f.symmetrize();
  return f;
}

int SpectralField::grid_size() const { return default_grid(n_, grid_factor_); }

void SpectralField::set(int k, cplx v) {
  if (k < -n_ || k > n_) throw std::out_of_range("mode outside band");
  if (k == 0) {
    c_[n_] = {v.real(), 0.0};
    return;
  }
  c_[n_ + k] = v;
  c_[n_ - k] = std::conj(v);
}

bool SpectralField::is_zero() const {
  return std::all_of(c_.begin(), c_.end(), [](cplx z) { return z == cplx{}; });
}

void SpectralField::symmetrize() {
  c_[n_] = {c_[n_].real(), 0.0};
  for (int k = 1; k <= n_; ++k) {
    cplx a = 0.5 * (c_[n_ + k] + std::conj(c_[n_ - k]));
    c_[n_ + k] = a;
    c_[n_ - k] = std::conj(a);
  }
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
  if (o.n_ > n_) *this = resize(*this, o.n_);
  for (int k = -o.n_; k <= o.n_; ++k) c_[n_ + k] += o.c_[o.n_ + k];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
  if (o.n_ > n_) *this = resize(*this, o.n_);
  for (int k = -o.n_; k <= o.n_; ++k) c_[n_ + k] -= o.c_[o.n_ + k];
  return *this;
}

SpectralField& SpectralField::operator*=(double a) {
  for (auto& z : c_) z *= a;
  return *this;
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double s, SpectralField a) { return a *= s; }

int default_grid(int n_modes, int grid_factor) {
  return next_pow2(std::max(1, grid_factor) * (2 * n_modes + 1));
}

SpectralField analyze(std::span<const double> samples, int n_modes) {
  const int m = static_cast<int>(samples.size());
  if (m < 2 * n_modes + 1)
    throw ResolutionError("grid of " + std::to_string(m) + " points cannot resolve " +
                          std::to_string(n_modes) + " modes");
  std::vector<cplx> half(m / 2 + 1);
  detail::rfft(samples, half);
  SpectralField f(n_modes);
  auto c = f.coeffs_mut();
  const double inv = 1.0 / m;
  c[n_modes] = {half[0].real() * inv, 0.0};
  for (int k = 1; k <= n_modes; ++k) {
    cplx a = half[k] * inv;
    c[n_modes + k] = a;
    c[n_modes - k] = std::conj(a);
  }
  return f;
}

SpectralField analyze(std::span<const double> samples) {
  return analyze(samples, (static_cast<int>(samples.size()) - 1) / 2);
}

std::vector<double> synthesize(const SpectralField& f, int grid) {
  const int n = f.n_modes();
  if (grid < 2 * n + 1)
    throw ResolutionError("grid of " + std::to_string(grid) + " points cannot carry " +
                          std::to_string(n) + " modes");
  std::vector<cplx> half(grid / 2 + 1);
  for (int k = 0; k <= n; ++k) half[k] = f.coeff(k);
  half[0] = {half[0].real(), 0.0};
  std::vector<double> out(grid);
  detail::irfft(half, out);
  return out;
}

std::vector<double> synthesize(const SpectralField& f) { return synthesize(f, f.grid_size()); }

double evaluate(const SpectralField& f, double x) {
  double v = f.coeff(0).real();
  for (int k = 1; k <= f.n_modes(); ++k) {
    const cplx e = std::polar(1.0, freq(k) * x);
    v += 2.0 * (f.coeff(k) * e).real();
  }
  return v;
}

double inner(const SpectralField& f, const SpectralField& g) {
  const int n = std::min(f.n_modes(), g.n_modes());
  double s = f.coeff(0).real() * g.coeff(0).real();
  for (int k = 1; k <= n; ++k) s += 2.0 * (f.coeff(k) * std::conj(g.coeff(k))).real();
  return s;
}

double l2_norm(const SpectralField& f) { return std::sqrt(inner(f, f)); }

double sobolev_norm(const SpectralField& f, double s, std::optional<double> kappa) {
  double sum = 0.0;
  for (int k = -f.n_modes(); k <= f.n_modes(); ++k) {
    const double xi = freq(k);
    const double w = kappa ? 4.0 * *kappa * *kappa + xi * xi : 1.0 + xi * xi;
    sum += std::pow(w, s) * std::norm(f.coeff(k));
  }
  return std::sqrt(sum);
}

double linf_norm(const SpectralField& f, int grid) {
  if (grid <= 0) grid = default_grid(f.n_modes(), 8);
  auto v = synthesize(f, grid);
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

SpectralField apply(const SpectralField& f, const Multiplier& m) {
  return apply_k(f, [&](int k) { return m.symbol(freq(k)); });
}

SpectralField apply_k(const SpectralField& f, const std::function<cplx(int)>& symbol) {
  SpectralField g(f.n_modes(), f.grid_factor());
  auto c = g.coeffs_mut();
  const int n = f.n_modes();
  for (int k = -n; k <= n; ++k) c[n + k] = symbol(k) * f.coeff(k);
  return g;
}

Multiplier resolvent_symbol(ResolventKind kind, double kappa) {
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
  switch (kind) {
    case ResolventKind::plus:
      return {[kappa](double xi) { return 1.0 / cplx(2.0 * kappa, xi); }, "(2k+d)^-1"};
    case ResolventKind::minus:
      return {[kappa](double xi) { return 1.0 / cplx(2.0 * kappa, -xi); }, "(2k-d)^-1"};
    case ResolventKind::r0:
      return {[kappa](double xi) { return cplx(1.0 / (kappa * kappa + xi * xi)); }, "(k^2-d^2)^-1"};
  }
  throw std::invalid_argument("unknown resolvent kind");
}

SpectralField resolvent_apply(const SpectralField& f, ResolventKind kind, double kappa) {
  return apply(f, resolvent_symbol(kind, kappa));
}

SpectralField derivative(const SpectralField& f) {
  return apply_k(f, [](int k) { return cplx(0.0, freq(k)); });
}

SpectralField translate(const SpectralField& f, double a) {
  return apply_k(f, [a](int k) { return std::polar(1.0, freq(k) * a); });
}

namespace {

int product_grid(int pad, int n_max, int n_sum, int n_out) {
  return std::max(default_grid(n_max, pad), next_pow2(n_sum + n_out + 1));
}

SpectralField product_of(std::span<const SpectralField* const> fs, int pad, int n_out) {
  int n_max = 0, n_sum = 0;
  for (auto* f : fs) {
    n_max = std::max(n_max, f->n_modes());
    n_sum += f->n_modes();
  }
  if (n_out < 0) n_out = n_max;
  const int m = product_grid(pad, n_max, n_sum, n_out);
  std::vector<double> acc = synthesize(*fs[0], m);
  for (size_t i = 1; i < fs.size(); ++i) {
    auto v = synthesize(*fs[i], m);
    for (int j = 0; j < m; ++j) acc[j] *= v[j];
  }
  SpectralField out = analyze(acc, n_out);
  out.set_grid_factor(fs[0]->grid_factor());
  return out;
}

}  // namespace

SpectralField multiply(const SpectralField& f, const SpectralField& g, int pad, int n_out) {
  const SpectralField* fs[] = {&f, &g};
  return product_of(fs, pad, n_out);
}

SpectralField multiply3(const SpectralField& f, const SpectralField& g, const SpectralField& h,
                        int pad, int n_out) {
  const SpectralField* fs[] = {&f, &g, &h};
  return product_of(fs, pad, n_out);
}

SpectralField power(const SpectralField& f, int p, int pad, int n_out) {
  std::vector<const SpectralField*> fs(p, &f);
  return product_of(fs, pad, n_out);
}

double integrate_product(std::span<const SpectralField* const> factors) {
  int n_sum = 0;
  for (auto* f : factors) n_sum += f->n_modes();
  const int m = next_pow2(n_sum + 1);
  std::vector<double> acc(m, 1.0);
  for (auto* f : factors) {
    auto v = synthesize(*f, m);
    for (int j = 0; j < m; ++j) acc[j] *= v[j];
  }
  double s = 0.0;
  for (double x : acc) s += x;
  return s / m;
}

SpectralField project(const SpectralField& f, int N, Side side) {
  if (N < 0) throw std::invalid_argument("projection index must be >= 0");
  return apply_k(f, [N, side](int k) {
    const bool low = std::abs(k) <= N;
    return cplx((low == (side == Side::low)) ? 1.0 : 0.0);
  });
}

SpectralField resize(const SpectralField& f, int n_modes) {
  SpectralField g(n_modes, f.grid_factor());
  auto c = g.coeffs_mut();
  const int n = std::min(n_modes, f.n_modes());
  for (int k = -n; k <= n; ++k) c[n_modes + k] = f.coeff(k);
  return g;
}

namespace {

template <class T>
void put_le(std::ofstream& os, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get_le(std::ifstream& is) {
  unsigned char b[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(b), sizeof(T))) throw std::runtime_error("truncated .pfc file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

std::string dec(double x) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

double undec(const std::string& s) {
  double v = 0.0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc()) throw std::runtime_error("bad decimal string: " + s);
  return v;
}

}  // namespace

void write_pfc(const std::string& path, const SpectralField& f, double meta) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  os.write("PFC1", 4);
  put_le<uint32_t>(os, static_cast<uint32_t>(f.n_modes()));
  put_le<double>(os, meta);
  for (cplx z : f.coeffs()) {
    put_le<double>(os, z.real());
    put_le<double>(os, z.imag());
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

SpectralField read_pfc(const std::string& path, double* meta) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "PFC1", 4) != 0)
    throw std::runtime_error("not a PFC1 file: " + path);
  const int n = static_cast<int>(get_le<uint32_t>(is));
  const double m = get_le<double>(is);
  if (meta) *meta = m;
  std::vector<cplx> c(2 * n + 1);
  for (auto& z : c) {
    const double re = get_le<double>(is);
    const double im = get_le<double>(is);
    z = {re, im};
  }
  SpectralField f(n);
  std::copy(c.begin(), c.end(), f.coeffs_mut().begin());
  return f;
}

std::string to_json(const SpectralField& f, double meta) {
  nlohmann::json j;
  j["format"] = "PFC1";
  j["n_modes"] = f.n_modes();
  j["meta"] = dec(meta);
  auto& arr = j["coeffs"] = nlohmann::json::array();
  for (int k = -f.n_modes(); k <= f.n_modes(); ++k)
    arr.push_back({{"k", k}, {"re", dec(f.coeff(k).real())}, {"im", dec(f.coeff(k).imag())}});
  return j.dump(1);
}

SpectralField from_json(const std::string& text, double* meta) {
  auto j = nlohmann::json::parse(text);
  const int n = j.at("n_modes").get<int>();
  if (meta) *meta = undec(j.at("meta").get<std::string>());
  SpectralField f(n);
  auto c = f.coeffs_mut();
  for (auto& e : j.at("coeffs")) {
    const int k = e.at("k").get<int>();
    if (k < -n || k > n) throw std::runtime_error("mode index outside band in JSON field");
    c[n + k] = {undec(e.at("re").get<std::string>()), undec(e.at("im").get<std::string>())};
  }
  return f;
}

}  // namespace torus
