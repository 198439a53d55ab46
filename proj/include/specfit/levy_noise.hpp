#ifndef SPECFIT_LEVY_NOISE_HPP
#define SPECFIT_LEVY_NOISE_HPP

#include <complex>
#include <cstdint>
#include <vector>

#include "specfit/rng.hpp"

namespace specfit {

enum class DriverFamily { Brownian, CompoundPoissonNormal, Mixed };

// Zero-mean Levy driver restricted to Brownian + compound-Poisson-with-normal-
// jumps mixtures. This family has finite exponential moments and closed-form
// cumulants of every order, which the estimation targets depend on.
struct LevyDriverSpec {
    DriverFamily family = DriverFamily::Brownian;
    double brownian_variance = 1.0;  // variance of the Gaussian part per unit time
    double jump_rate = 0.0;          // jumps per unit time
    double jump_std = 0.0;           // std of one normal jump

    void validate() const;
};

struct DriverCumulants {
    double d2 = 0.0;      // second cumulant of L(1)
    double d4 = 0.0;      // fourth cumulant of L(1)
    double gamma2 = 0.0;  // excess d4 / d2^2
};

DriverCumulants driver_cumulants(const LevyDriverSpec& spec);

// One increment of L over a window of length dt (mean zero by construction).
double sample_increment(const LevyDriverSpec& spec, double dt, Rng& rng);

enum class KernelFamily { OU, WellBalancedOU, Gamma, CAR2Pendulum };

// Moving-average kernels. decay is the exponential rate (lambda or alpha),
// shape the Gamma-family exponent (> -1/2), frequency the damped angular
// frequency of the CAR(2) pendulum kernel.
struct KernelSpec {
    KernelFamily family = KernelFamily::OU;
    double decay = 1.0;
    double shape = 0.0;
    double frequency = 1.0;

    void validate() const;
    bool two_sided() const { return family == KernelFamily::WellBalancedOU; }
    // truncation horizon: kernel mass beyond it is below 1e-10
    double support_horizon() const;
};

double kernel_eval(const KernelSpec& k, double t);

// a(lambda) = int a_hat(t) exp(-i lambda t) dt; closed form except for the
// Gamma family, which goes through quadrature.
std::complex<double> kernel_transform(const KernelSpec& k, double lambda);

// B(t) = d2 int a_hat(t+s) a_hat(s) ds by adaptive quadrature over the
// kernel's effective support.
double covariance(const KernelSpec& k, const LevyDriverSpec& d, double t);

// Stationary covariance of the damped-pendulum CAR(2) process.
double covariance_car2_closed_form(double alpha, double omega, double d2, double t);

// f_r(l_1,..,l_{r-1}) = (2 pi)^{-r+1} d_r a(-sum l_j) prod a(l_j), r in {2,3,4}.
// Normal jumps have no odd cumulants, so r=3 always gives zero here.
std::complex<double> spectral_density_order_r(const KernelSpec& k, const LevyDriverSpec& d,
                                              const std::vector<double>& lambdas);

// Second-order spectral density as a real value.
double spectral_density(const KernelSpec& k, const LevyDriverSpec& d, double lambda);

struct NoisePath {
    double delta = 0.0;
    std::vector<double> values;
    std::uint64_t seed = 0;
    bool coarse_delta_warning = false;

    std::size_t length() const { return values.size(); }
    double horizon() const { return delta * static_cast<double>(values.size()); }
};

// Riemann moving average on the delta-lattice: the Levy increment over
// [s_j, s_{j+1}) is weighted by the kernel at the interval midpoint, which
// removes the O(delta) variance bias of the left-point rule. The increment
// lattice starts at -support_horizon so the path is stationary from t = 0.
NoisePath simulate_linear_noise(const LevyDriverSpec& d, const KernelSpec& k, double horizon,
                                double delta, std::uint64_t seed);

// Midpoint kernel taps h_p = a_hat((p - 1/2) delta); eps_k = sum_p h_p dL_{k-p}.
// Exposed for the covariance of the discretised process.
std::vector<double> kernel_taps(const KernelSpec& k, double delta, int& p_lo);

// Covariance of the simulated lattice process at lag m (exact for the
// discretisation above).
std::vector<double> lattice_covariance(const KernelSpec& k, const LevyDriverSpec& d,
                                       double delta, std::size_t max_lag);

}  // namespace specfit

#endif
