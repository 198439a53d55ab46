#include "specfit/levy_noise.hpp"

#include <algorithm>
#include <cmath>

#include "specfit/errors.hpp"
#include "specfit/fft.hpp"
#include "specfit/quadrature.hpp"

namespace specfit {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kKernelTail = 1e-10;
}  // namespace

void LevyDriverSpec::validate() const {
    if (brownian_variance < 0.0 || jump_rate < 0.0 || jump_std < 0.0)
        throw std::invalid_argument("LevyDriverSpec: negative parameter");
    switch (family) {
        case DriverFamily::Brownian:
            if (brownian_variance <= 0.0)
                throw DegenerateDriverError("Brownian driver needs brownian_variance > 0");
            break;
        case DriverFamily::CompoundPoissonNormal:
            if (jump_rate <= 0.0 || jump_std <= 0.0)
                throw DegenerateDriverError(
                    "compound Poisson driver needs jump_rate > 0 and jump_std > 0");
            break;
        case DriverFamily::Mixed:
            if (brownian_variance + jump_rate * jump_std * jump_std <= 0.0)
                throw DegenerateDriverError("mixed driver has zero variance");
            break;
    }
}

DriverCumulants driver_cumulants(const LevyDriverSpec& spec) {
    spec.validate();
    const double b = spec.family == DriverFamily::CompoundPoissonNormal
                         ? 0.0
                         : spec.brownian_variance;
    const double rate = spec.family == DriverFamily::Brownian ? 0.0 : spec.jump_rate;
    const double sj2 = spec.jump_std * spec.jump_std;
    DriverCumulants c;
    c.d2 = b + rate * sj2;
    c.d4 = 3.0 * rate * sj2 * sj2;  // E J^4 = 3 sigma_J^4 for normal jumps
    if (c.d2 <= 0.0) throw DegenerateDriverError("driver has zero variance");
    c.gamma2 = c.d4 / (c.d2 * c.d2);
    return c;
}

double sample_increment(const LevyDriverSpec& spec, double dt, Rng& rng) {
    double x = 0.0;
    if (spec.family != DriverFamily::CompoundPoissonNormal && spec.brownian_variance > 0.0)
        x += std::sqrt(spec.brownian_variance * dt) * rng.normal();
    if (spec.family != DriverFamily::Brownian && spec.jump_rate > 0.0) {
        const std::uint64_t njumps = rng.poisson(spec.jump_rate * dt);
        if (njumps > 0)
            x += spec.jump_std * std::sqrt(static_cast<double>(njumps)) * rng.normal();
    }
    return x;
}

void KernelSpec::validate() const {
    if (decay <= 0.0) throw std::invalid_argument("KernelSpec: decay must be > 0");
    if (family == KernelFamily::Gamma && shape <= -0.5)
        throw std::invalid_argument("KernelSpec: Gamma shape must be > -1/2");
    if (family == KernelFamily::CAR2Pendulum && frequency <= 0.0)
        throw std::invalid_argument("KernelSpec: CAR2 frequency must be > 0");
}

double KernelSpec::support_horizon() const {
    double t = std::max(-std::log(kKernelTail) / decay, 20.0 / decay);
    if (family == KernelFamily::Gamma && shape > 0.0) {
        // widen for the polynomial factor t^shape
        for (int i = 0; i < 3; ++i)
            t = (-std::log(kKernelTail) + shape * std::log(std::max(t, 1.0))) / decay;
        t = std::max(t, 20.0 / decay);
    }
    return t;
}

double kernel_eval(const KernelSpec& k, double t) {
    switch (k.family) {
        case KernelFamily::OU:
            return t >= 0.0 ? std::exp(-k.decay * t) : 0.0;
        case KernelFamily::WellBalancedOU:
            return std::exp(-k.decay * std::fabs(t));
        case KernelFamily::Gamma:
            if (t < 0.0) return 0.0;
            if (t == 0.0) return k.shape == 0.0 ? 1.0 : 0.0;
            return std::pow(t, k.shape) * std::exp(-k.decay * t);
        case KernelFamily::CAR2Pendulum:
            return t >= 0.0 ? std::exp(-k.decay * t) * std::sin(k.frequency * t) / k.frequency
                            : 0.0;
    }
    return 0.0;
}

std::complex<double> kernel_transform(const KernelSpec& k, double lambda) {
    using cd = std::complex<double>;
    switch (k.family) {
        case KernelFamily::OU:
            return 1.0 / cd(k.decay, lambda);
        case KernelFamily::WellBalancedOU:
            return cd(2.0 * k.decay / (k.decay * k.decay + lambda * lambda), 0.0);
        case KernelFamily::CAR2Pendulum: {
            const double a = k.decay, w = k.frequency;
            return 1.0 / cd(a * a + w * w - lambda * lambda, 2.0 * a * lambda);
        }
        case KernelFamily::Gamma: {
            const double horizon = k.support_horizon();
            auto re = integrate([&](double t) { return kernel_eval(k, t) * std::cos(lambda * t); },
                                0.0, horizon, 1e-10, 1e-10, 32, 20000);
            auto im = integrate([&](double t) { return kernel_eval(k, t) * std::sin(lambda * t); },
                                0.0, horizon, 1e-10, 1e-10, 32, 20000);
            return cd(re.value, -im.value);
        }
    }
    return cd(0.0, 0.0);
}

double covariance(const KernelSpec& k, const LevyDriverSpec& d, double t) {
    k.validate();
    const double d2 = driver_cumulants(d).d2;
    const double at = std::fabs(t);  // B is even
    const double horizon = k.support_horizon();
    double lo, hi;
    if (k.two_sided()) {
        lo = -horizon - at;
        hi = horizon;
    } else {
        lo = 0.0;
        hi = horizon;  // a_hat(s) vanishes outside [0, horizon]
    }
    if (hi <= lo) return 0.0;
    auto integrand = [&](double s) { return kernel_eval(k, at + s) * kernel_eval(k, s); };
    const int splits = std::max(8, static_cast<int>((hi - lo) * k.decay));
    auto q = integrate(integrand, lo, hi, 1e-12, 1e-11, splits, 20000);
    if (!q.converged)
        throw NumericError("covariance quadrature did not converge; error estimate " +
                           std::to_string(q.error_estimate));
    return d2 * q.value;
}

double covariance_car2_closed_form(double alpha, double omega, double d2, double t) {
    if (alpha <= 0.0 || omega <= 0.0)
        throw std::invalid_argument("covariance_car2_closed_form: alpha, omega must be > 0");
    const double at = std::fabs(t);
    return d2 / (4.0 * (alpha * alpha + omega * omega)) * std::exp(-alpha * at) *
           (std::sin(omega * at) / omega + std::cos(omega * t) / alpha);
}

std::complex<double> spectral_density_order_r(const KernelSpec& k, const LevyDriverSpec& d,
                                              const std::vector<double>& lambdas) {
    const std::size_t r = lambdas.size() + 1;
    if (r < 2 || r > 4)
        throw UnsupportedOrderError("spectral density order must be 2, 3 or 4");
    const DriverCumulants c = driver_cumulants(d);
    double dr;
    switch (r) {
        case 2: dr = c.d2; break;
        case 3: dr = 0.0; break;  // normal jumps: odd cumulants vanish
        default: dr = c.d4; break;
    }
    if (dr == 0.0) return {0.0, 0.0};
    double sum = 0.0;
    std::complex<double> prod(1.0, 0.0);
    for (double l : lambdas) {
        sum += l;
        prod *= kernel_transform(k, l);
    }
    prod *= kernel_transform(k, -sum);
    const double scale = std::pow(kTwoPi, -static_cast<double>(r) + 1.0) * dr;
    return scale * prod;
}

double spectral_density(const KernelSpec& k, const LevyDriverSpec& d, double lambda) {
    const double d2 = driver_cumulants(d).d2;
    return d2 / kTwoPi * std::norm(kernel_transform(k, lambda));
}

std::vector<double> kernel_taps(const KernelSpec& k, double delta, int& p_lo) {
    const double horizon = k.support_horizon();
    const int p_hi = static_cast<int>(std::ceil(horizon / delta)) + 1;
    p_lo = k.two_sided() ? -p_hi : 1;  // causal kernels vanish for p <= 0
    std::vector<double> taps;
    taps.reserve(static_cast<std::size_t>(p_hi - p_lo + 1));
    for (int p = p_lo; p <= p_hi; ++p)
        taps.push_back(kernel_eval(k, (static_cast<double>(p) - 0.5) * delta));
    return taps;
}

NoisePath simulate_linear_noise(const LevyDriverSpec& d, const KernelSpec& k, double horizon,
                                double delta, std::uint64_t seed) {
    d.validate();
    k.validate();
    driver_cumulants(d);  // rejects degenerate drivers
    if (delta <= 0.0) throw std::invalid_argument("simulate_linear_noise: delta must be > 0");
    const double n_real = horizon / delta;
    const auto n = static_cast<std::size_t>(std::llround(n_real));
    if (n == 0 || std::fabs(n_real - static_cast<double>(n)) > 1e-9 * std::max(1.0, n_real))
        throw ShapeError("simulate_linear_noise: horizon must be an integer multiple of delta");

    int p_lo = 0;
    const std::vector<double> taps = kernel_taps(k, delta, p_lo);
    const int p_hi = p_lo + static_cast<int>(taps.size()) - 1;

    // increments dL_j for j = -p_hi .. n-1-p_lo
    const std::size_t n_inc = n - 1 - p_lo + p_hi + 1;
    std::vector<double> increments(n_inc);
    Rng rng(seed);
    for (auto& dl : increments) dl = sample_increment(d, delta, rng);

    // eps_k = sum_p taps[p] dL_{k-p}; convolution index k+p_hi into the output
    const std::vector<double> conv = convolve(taps, increments);
    NoisePath path;
    path.delta = delta;
    path.seed = seed;
    path.values.resize(n);
    for (std::size_t kk = 0; kk < n; ++kk)
        path.values[kk] = conv[kk + static_cast<std::size_t>(p_hi - p_lo)];

    double rate_scale = k.decay;
    if (k.family == KernelFamily::CAR2Pendulum) rate_scale = std::max(rate_scale, k.frequency);
    path.coarse_delta_warning = delta > 1.0 / (10.0 * rate_scale);
    return path;
}

std::vector<double> lattice_covariance(const KernelSpec& k, const LevyDriverSpec& d,
                                       double delta, std::size_t max_lag) {
    const double d2 = driver_cumulants(d).d2;
    int p_lo = 0;
    const std::vector<double> taps = kernel_taps(k, delta, p_lo);
    std::vector<double> acf = autocorr_raw(taps, max_lag);
    acf.resize(max_lag + 1, 0.0);
    for (double& v : acf) v *= d2 * delta;
    return acf;
}

}  // namespace specfit
