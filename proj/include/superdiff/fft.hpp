#pragma once

#include <complex>
#include <span>

namespace superdiff::fft {

/// Number of complex entries of an N×N real-to-complex transform: N·(N/2+1).
constexpr std::size_t half_size(int n) { return static_cast<std::size_t>(n) * (n / 2 + 1); }

/// out[i][j] = Σ_k X[k] exp(+2πi k·(i,j)/N), unnormalized; `in` holds the
/// non-redundant half (last axis 0..N/2) of a Hermitian spectrum. `in` is not modified.
void inverse_c2r(int n, std::span<const std::complex<double>> in, std::span<double> out);

/// X[k] = Σ_n x[n] exp(−2πi k·n/N), half spectrum.
void forward_r2c(int n, std::span<const double> in, std::span<std::complex<double>> out);

}  // namespace superdiff::fft
