#ifndef SPECFIT_VALIDATION_HPP
#define SPECFIT_VALIDATION_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "specfit/levy_noise.hpp"
#include "specfit/linalg.hpp"
#include "specfit/regression.hpp"
#include "specfit/spectral.hpp"
#include "specfit/whittle.hpp"

namespace specfit {

struct ReplicateRecord {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    Vector estimate;
    bool converged = false;
};

struct MCReport {
    int replicates = 0;
    int failures = 0;       // replicate threw (recorded, not fatal)
    int non_converged = 0;  // fit flagged non-converged or on the box boundary
    double horizon = 0.0;
    std::vector<ReplicateRecord> records;  // every replicate that produced a fit
    std::vector<Vector> estimates;   // aggregated rows (converged fits only)
    Vector empirical_mean;           // of the raw estimates
    Vector bias;                     // empirical_mean - truth (empty when not applicable)
    Matrix empirical_covariance;     // of the normalised errors
    Matrix target_covariance;
    Vector coverage;                 // per-coordinate CI coverage (may be empty)
    Vector skewness_stats;           // of standardised errors
    Vector kurtosis_stats;
    Vector ks_stats;                 // sup distance of standardised marginals to N(0,1)
};

struct MeanSquareCheck {
    double nu_star = 0.0;   // T^-1 int_0^T eps^2
    double rel_error = 0.0; // |nu_star - B(0)| / B(0)
};

MeanSquareCheck mean_square_check(const NoisePath& path, double b0);

// int F_T(u) G(u) du for the squared-kernel Fejer family (k = 2); converges
// to G(0) for bounded G continuous at zero.
double fejer_limit_check(const std::function<double(double)>& g, double horizon);

struct CltCheck {
    double sample_mean = 0.0;
    double sample_variance = 0.0;    // of T^{-1/2} Q_T across replicates
    double sigma2_target = 0.0;      // 16 pi^3 int b^2 f^2 + gamma2 (2 pi int b f)^2
};

// Q_T = int int (eps(t)eps(s) - B(t-s)) bhat(t-s) dt ds with bhat the Fourier
// transform of the even weight b. Computed on the lattice through one
// autocorrelation per replicate.
CltCheck clt_functional_check(const LevyDriverSpec& d, const KernelSpec& k,
                              const std::function<double(double)>& b, double horizon,
                              int replicates, std::uint64_t seed, double delta = 0.05,
                              unsigned threads = 1);

// Block-diagonal limit covariance of the normalised trigonometric LSE errors
// (sqrt(T) dA, sqrt(T) dB, T^{3/2} dphi); alpha0 in (A,B,phi) layout,
// f_at_phi the noise spectral density at each true frequency.
Matrix sigma_trig(const Vector& alpha0, const Vector& f_at_phi);

MCReport lse_normality_check(const RegressionModel& model, const Vector& alpha0,
                             const LevyDriverSpec& driver, const KernelSpec& kernel,
                             double horizon, double delta, int replicates, std::uint64_t seed,
                             unsigned threads = 1);

enum class Gamma2Mode { FromDriver, UserValue, EstimateFromResiduals };

struct PipelineSpec {
    LevyDriverSpec driver;
    KernelSpec kernel;
    RegressionModel regression;
    Vector alpha0;
    SpectralModel spectral;  // theta0 must be set
    WeightSpec weights;
    double delta = 0.05;
    double confidence_level = 0.95;
    Gamma2Mode gamma2_mode = Gamma2Mode::FromDriver;
    double gamma2_value = 0.0;
};

// Full pipeline study: simulate -> LSE -> residual periodogram -> MCE.
// Replicates whose fit stalls or lands on the Theta boundary are counted in
// non_converged and left out of the covariance/coverage aggregates; the limit
// law being checked only describes interior minimisers.
MCReport mce_normality_study(const PipelineSpec& spec, double horizon, int replicates,
                             std::uint64_t seed, unsigned threads = 1);

// d4 of the driver read off the residual marginal fourth cumulant and the
// fitted kernel shape; gamma2_hat = d4_hat / beta_hat^2.
double estimate_gamma2_from_residuals(const NoisePath& res, const SpectralModel& s,
                                      const Vector& theta_hat);

// Trigonometric-sum approximation of a bounded entire function of exponential
// type <= sigma, with coefficients s E_s(j s) obtained by quadrature.
std::vector<double> levitan_coefficients(const std::function<double(double)>& f, double sigma,
                                         int n);
double levitan_eval(const std::vector<double>& coeffs, double sigma, int n, double lambda);
double levitan_polynomial(const std::function<double(double)>& f, double sigma, int n,
                          double lambda);

}  // namespace specfit

#endif
