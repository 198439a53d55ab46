#ifndef SPECFIT_SPECTRAL_HPP
#define SPECFIT_SPECTRAL_HPP

#include <string>
#include <vector>

#include "specfit/levy_noise.hpp"
#include "specfit/linalg.hpp"
#include "specfit/regression.hpp"

namespace specfit {

enum class PeriodogramSource { Raw, Residual };

struct Periodogram {
    std::vector<double> lambdas;  // symmetric about 0, Fourier frequencies 2 pi k / T
    std::vector<double> values;   // I_T(lambda_k) >= 0
    double horizon = 0.0;
    double delta = 0.0;
    PeriodogramSource source = PeriodogramSource::Residual;
};

// Symmetric Fourier grid {2 pi k / T : |2 pi k / T| <= lambda_max}.
std::vector<double> fourier_grid(double horizon, double lambda_max);

// I_T(lambda) = (2 pi T)^-1 |delta * sum_k r_k exp(-i lambda k delta)|^2 at
// Fourier frequencies, computed through one DFT of the lattice. The plain
// lattice sum keeps the discrete Parseval identity exact.
Periodogram residual_periodogram(const NoisePath& res, const std::vector<double>& grid,
                                 PeriodogramSource source = PeriodogramSource::Residual);

// |(2 pi / T) sum_{full DFT grid} I - (delta / T) sum r^2|, which should be
// at rounding level.
double plancherel_gap(const NoisePath& res);

enum class SpectralFamily { CAR2Pendulum, OU, RieszBessel };

// Parametric spectral density families.
//   CAR2Pendulum: f(l, theta) = beta / (2 pi [(l^2 - a^2 - g^2)^2 + 4 a^2 l^2]),
//                 theta = (alpha, beta, gamma)
//   OU:           f(l, theta) = theta2 / (2 pi (theta1^2 + l^2))
//   RieszBessel:  f(l, theta) = beta / (2 pi |l|^{2 alpha} (1+l^2)^gamma),
//                 evaluation only; estimation conditions do not cover it.
struct SpectralModel {
    SpectralFamily family = SpectralFamily::CAR2Pendulum;
    std::vector<Interval> box;
    Vector theta0;  // optional truth marker, may be empty
    bool eval_only = false;

    std::size_t dimension() const { return box.size(); }
    void validate() const;
    bool in_box(const Vector& theta, double slack = 1e-12) const;
    Vector clamp_to_box(const Vector& theta) const;
};

double spectral_eval(const SpectralModel& s, double lambda, const Vector& theta);
Vector spectral_grad(const SpectralModel& s, double lambda, const Vector& theta);
Matrix spectral_hess(const SpectralModel& s, double lambda, const Vector& theta);

// Allocation-free evaluation for the contrast hot loops. theta must already
// be inside the box; grad may be null.
void spectral_eval_grad_unchecked(const SpectralModel& s, double lambda, const Vector& theta,
                                  double& f, double* grad);

enum class WeightKind { W, V };

// w(l) = scale (1+l^2)^-a and v(l) = scale (1+l^2)^-b; the scale knob exists
// because the contrast is linear in w and the argmin must not depend on it.
struct WeightSpec {
    double exponent_a = 3.0;
    double exponent_b = 3.0;
    double scale = 1.0;
};

double weight_eval(const WeightSpec& w, double lambda, WeightKind which);

// Largest frequency worth keeping on the contrast grid: w(lambda) < 1e-8
// beyond it.
double default_lambda_max(const WeightSpec& w);

struct WeightReport {
    bool pass = true;
    std::vector<std::string> violations;
    double sup_w_over_f = 0.0;  // max of w/f over the spot-check grid
};

// Checks the admissibility constraints a > 5/2 and a >= b > 2 used with the
// CAR(2) model, plus a numeric spot check that w/f stays bounded on a
// log-spaced grid up to 1e4.
WeightReport validate_weight_conditions(const WeightSpec& w, const SpectralModel& s);

}  // namespace specfit

#endif
