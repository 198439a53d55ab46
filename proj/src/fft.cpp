#include "specfit/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace specfit {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

void fft_pow2(std::vector<cdouble>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument("fft_pow2: size not a power of two");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = kTwoPi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        const cdouble wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cdouble w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                const cdouble u = a[i + j];
                const cdouble v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse) {
        const double inv = 1.0 / static_cast<double>(n);
        for (auto& x : a) x *= inv;
    }
}

std::vector<cdouble> dft(const std::vector<cdouble>& x) {
    const std::size_t n = x.size();
    if (n == 0) return {};
    if ((n & (n - 1)) == 0) {
        std::vector<cdouble> a = x;
        fft_pow2(a, false);
        return a;
    }
    // Bluestein: X_k = conj(c_k) * sum_j [x_j conj(c_j)] c_{k-j}, c_m = exp(i pi m^2 / n)
    const std::size_t m = next_pow2(2 * n - 1);
    std::vector<cdouble> chirp(n);
    for (std::size_t j = 0; j < n; ++j) {
        // j^2 mod 2n keeps the phase argument small for large n
        const std::size_t j2 = (j * j) % (2 * n);
        const double ang = M_PI * static_cast<double>(j2) / static_cast<double>(n);
        chirp[j] = cdouble(std::cos(ang), std::sin(ang));
    }
    std::vector<cdouble> a(m, cdouble(0, 0)), b(m, cdouble(0, 0));
    for (std::size_t j = 0; j < n; ++j) a[j] = x[j] * std::conj(chirp[j]);
    b[0] = chirp[0];
    for (std::size_t j = 1; j < n; ++j) b[j] = b[m - j] = chirp[j];
    fft_pow2(a, false);
    fft_pow2(b, false);
    for (std::size_t j = 0; j < m; ++j) a[j] *= b[j];
    fft_pow2(a, true);
    std::vector<cdouble> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = std::conj(chirp[k]) * a[k];
    return out;
}

std::vector<cdouble> dft_real(const std::vector<double>& x) {
    std::vector<cdouble> cx(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) cx[i] = cdouble(x[i], 0.0);
    return dft(cx);
}

std::vector<double> convolve(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) return {};
    const std::size_t out_len = a.size() + b.size() - 1;
    const std::size_t m = next_pow2(out_len);
    std::vector<cdouble> fa(m, cdouble(0, 0)), fb(m, cdouble(0, 0));
    for (std::size_t i = 0; i < a.size(); ++i) fa[i] = a[i];
    for (std::size_t i = 0; i < b.size(); ++i) fb[i] = b[i];
    fft_pow2(fa, false);
    fft_pow2(fb, false);
    for (std::size_t i = 0; i < m; ++i) fa[i] *= fb[i];
    fft_pow2(fa, true);
    std::vector<double> out(out_len);
    for (std::size_t i = 0; i < out_len; ++i) out[i] = fa[i].real();
    return out;
}

std::vector<double> autocorr_raw(const std::vector<double>& x, std::size_t max_lag) {
    const std::size_t n = x.size();
    if (n == 0) return {};
    max_lag = std::min(max_lag, n - 1);
    const std::size_t m = next_pow2(2 * n);
    std::vector<cdouble> fx(m, cdouble(0, 0));
    for (std::size_t i = 0; i < n; ++i) fx[i] = x[i];
    fft_pow2(fx, false);
    for (auto& v : fx) v = cdouble(std::norm(v), 0.0);
    fft_pow2(fx, true);
    std::vector<double> out(max_lag + 1);
    for (std::size_t lag = 0; lag <= max_lag; ++lag) out[lag] = fx[lag].real();
    return out;
}

}  // namespace specfit
