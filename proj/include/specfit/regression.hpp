#ifndef SPECFIT_REGRESSION_HPP
#define SPECFIT_REGRESSION_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "specfit/levy_noise.hpp"
#include "specfit/linalg.hpp"

namespace specfit {

enum class RegressionFamily { ExponentialInner, TrigonometricSum };

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double x, double slack = 0.0) const { return x >= lo - slack && x <= hi + slack; }
    double clamp(double x) const { return x < lo ? lo : (x > hi ? hi : x); }
    double width() const { return hi - lo; }
};

enum class RegressorKind { Constant, Cosine, Sine };

// One bounded closed-form regressor coordinate y_i(t).
struct RegressorTerm {
    RegressorKind kind = RegressorKind::Constant;
    double amplitude = 1.0;
    double frequency = 0.0;

    double operator()(double t) const;
};

// Two regression families:
//   ExponentialInner   g(t, alpha) = exp{ <alpha, y(t)> } with bounded regressors
//   TrigonometricSum   g(t, alpha) = sum_k A_k cos(phi_k t) + B_k sin(phi_k t),
//                      alpha = (A_1, B_1, phi_1, ..., A_N, B_N, phi_N)
// Frequencies are constrained to an increasing sequence inside (phi_lo, phi_hi).
struct RegressionModel {
    RegressionFamily family = RegressionFamily::ExponentialInner;
    std::vector<RegressorTerm> regressors;  // exponential family
    int harmonics = 0;                      // trigonometric family
    std::vector<Interval> box;              // parameter box, size q

    std::size_t dimension() const;
    void validate() const;
    bool in_box(const Vector& alpha, double slack = 1e-12) const;
    Vector clamp_to_box(const Vector& alpha) const;
};

double reg_eval(const RegressionModel& m, double t, const Vector& alpha);
Vector reg_grad(const RegressionModel& m, double t, const Vector& alpha);
double reg_hess_entry(const RegressionModel& m, double t, const Vector& alpha, std::size_t i,
                      std::size_t l);

// Fused value + gradient without allocation or box checks; grad must point at
// dimension() doubles. The least squares inner loop lives on this.
void reg_eval_grad_unchecked(const RegressionModel& m, double t, const Vector& alpha,
                             double& value, double* grad);

// d_iT(alpha)^2 = int_0^T g_i(t, alpha)^2 dt, returned as the vector d_iT.
Vector reg_norming(const RegressionModel& m, const Vector& alpha, double horizon);

// Phi_T(a1, a2) = int_0^T (g(t,a1) - g(t,a2))^2 dt
double reg_parameter_gap(const RegressionModel& m, const Vector& a1, const Vector& a2,
                         double horizon);

struct LSEFit {
    Vector alpha_hat;
    double sse = 0.0;  // Riemann approximation of S_T at alpha_hat
    Vector norming;    // d_T(alpha_hat)
    bool converged = false;
    int iterations = 0;
    int starts = 0;
};

// Least squares over the closed box. Trigonometric frequencies are seeded by
// a periodogram-peak scan before the Levenberg-Marquardt refinement.
LSEFit lse_fit(const RegressionModel& m, const NoisePath& data, const Vector& init);

NoisePath residuals(const RegressionModel& m, const NoisePath& data, const Vector& alpha_hat);

// S_T(alpha) on the observation lattice (the objective lse_fit minimises).
double lse_objective(const RegressionModel& m, const NoisePath& data, const Vector& alpha);

// Empirical constant c0 with Phi_T(alpha, alpha0) <= c0 ||d_T(alpha0)(alpha-alpha0)||^2
// over a random sweep of the box; a diagnostic, not a certified bound.
double estimate_c0(const RegressionModel& m, const Vector& alpha0, double horizon,
                   int samples, std::uint64_t seed);

}  // namespace specfit

#endif
