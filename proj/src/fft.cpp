#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace torus::detail {

namespace {

struct Plans {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

std::mutex plan_mutex;

const Plans& plans_for(int m) {
  static std::map<int, Plans> cache;
  std::lock_guard lock(plan_mutex);
  auto it = cache.find(m);
  if (it != cache.end()) return it->second;
  std::vector<double> r(m);
  std::vector<cplx> c(m / 2 + 1);
  auto* cc = reinterpret_cast<fftw_complex*>(c.data());
  Plans p;
  p.fwd = fftw_plan_dft_r2c_1d(m, r.data(), cc, FFTW_ESTIMATE | FFTW_UNALIGNED);
  p.bwd = fftw_plan_dft_c2r_1d(m, cc, r.data(), FFTW_ESTIMATE | FFTW_UNALIGNED | FFTW_DESTROY_INPUT);
  return cache.emplace(m, p).first->second;
}

}  // namespace

void rfft(std::span<const double> in, std::span<cplx> out) {
  const int m = static_cast<int>(in.size());
  const Plans& p = plans_for(m);
  fftw_execute_dft_r2c(p.fwd, const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void irfft(std::span<cplx> in, std::span<double> out) {
  const int m = static_cast<int>(out.size());
  const Plans& p = plans_for(m);
  fftw_execute_dft_c2r(p.bwd, reinterpret_cast<fftw_complex*>(in.data()), out.data());
}

int next_pow2(int n) {
  int m = 1;
  while (m < n) m <<= 1;
  return m;
}

}  // namespace torus::detail
