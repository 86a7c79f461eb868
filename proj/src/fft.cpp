#include "superdiff/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <vector>

#include "superdiff/error.hpp"

namespace superdiff::fft {
namespace {

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

// Planning is not thread-safe in FFTW; execution through the new-array
// interface is.
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

const PlanPair& plans_for(int n) {
  static std::map<int, PlanPair> cache;
  std::lock_guard lock(plan_mutex());
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<double> real(static_cast<std::size_t>(n) * n);
  std::vector<std::complex<double>> cplx(half_size(n));
  auto* c = reinterpret_cast<fftw_complex*>(cplx.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  PlanPair p;
  p.forward = fftw_plan_dft_r2c_2d(n, n, real.data(), c, flags);
  p.inverse = fftw_plan_dft_c2r_2d(n, n, c, real.data(), flags | FFTW_DESTROY_INPUT);
  if (!p.forward || !p.inverse) throw NumericError("fftw planning failed");
  return cache.emplace(n, p).first->second;
}

void check_sizes(int n, std::size_t real_size, std::size_t complex_size) {
  if (n <= 0 || real_size != static_cast<std::size_t>(n) * n || complex_size != half_size(n))
    throw ConfigError("fft: buffer sizes do not match grid");
}

}  // namespace

void inverse_c2r(int n, std::span<const std::complex<double>> in, std::span<double> out) {
  check_sizes(n, out.size(), in.size());
  const PlanPair& p = plans_for(n);
  thread_local std::vector<std::complex<double>> scratch;
  scratch.assign(in.begin(), in.end());
  fftw_execute_dft_c2r(p.inverse, reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
}

void forward_r2c(int n, std::span<const double> in, std::span<std::complex<double>> out) {
  check_sizes(n, in.size(), out.size());
  const PlanPair& p = plans_for(n);
  // r2c does not modify its input, but the interface takes a non-const pointer.
  fftw_execute_dft_r2c(p.forward, const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

}  // namespace superdiff::fft
