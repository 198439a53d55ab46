#ifndef SPECFIT_FFT_HPP
#define SPECFIT_FFT_HPP

#include <complex>
#include <cstddef>
#include <vector>

namespace specfit {

using cdouble = std::complex<double>;

// In-place iterative radix-2 transform; size must be a power of two.
// inverse = true applies the conjugate transform including the 1/n factor.
void fft_pow2(std::vector<cdouble>& a, bool inverse);

std::size_t next_pow2(std::size_t n);

// DFT of arbitrary length via Bluestein's chirp-z reduction to power-of-two
// transforms: X_k = sum_j x_j exp(-2*pi*i*j*k/n).
std::vector<cdouble> dft(const std::vector<cdouble>& x);

std::vector<cdouble> dft_real(const std::vector<double>& x);

// Linear convolution of two real sequences (length na + nb - 1).
std::vector<double> convolve(const std::vector<double>& a, const std::vector<double>& b);

// Raw lagged products r_m = sum_j x_j x_{j+m}, m = 0..max_lag.
std::vector<double> autocorr_raw(const std::vector<double>& x, std::size_t max_lag);

}  // namespace specfit

#endif
