#ifndef SPECFIT_WHITTLE_HPP
#define SPECFIT_WHITTLE_HPP

#include <utility>
#include <vector>

#include "specfit/linalg.hpp"
#include "specfit/spectral.hpp"

namespace specfit {

// U_T(theta) = int (log f + I_T / f) w dlambda, trapezoid on the periodogram's
// Fourier grid.
double contrast_field(const Periodogram& p, const SpectralModel& s, const WeightSpec& w,
                      const Vector& theta);

// Population contrast gap K(theta0, theta) = int (f0/f - 1 - log(f0/f)) w >= 0,
// zero exactly at theta = theta0.
double contrast_function_K(const SpectralModel& s, const WeightSpec& w, const Vector& theta0,
                           const Vector& theta);

struct WhittleFit {
    Vector theta_hat;
    double contrast = 0.0;
    Matrix w1, w2, v, w;
    std::vector<Interval> ci;
    double confidence_level = 0.95;
    double gamma2 = 0.0;
    bool converged = false;
    bool on_boundary = false;  // ended on the box boundary; CIs unreliable
    int iterations = 0;
    int contrast_evals = 0;
};

struct WhittleOptions {
    double gamma2 = 0.0;
    double confidence_level = 0.95;
    bool compute_matrices = true;
    int scan_points_per_dim = 5;  // deterministic multistart seed grid
    unsigned threads = 1;
};

// Minimum contrast estimator over the closed box: deterministic coarse scan,
// projected BFGS with the analytic contrast gradient, Nelder-Mead fallback.
WhittleFit whittle_fit(const Periodogram& p, const SpectralModel& s, const WeightSpec& w,
                       const Vector& init, const WhittleOptions& opts = {});

struct AsymptoticMatrices {
    Matrix w1, w2, v;
};

// W1 = int (grad log f)(grad log f)' w ; W2 = 4 pi int ... w^2 ;
// V = gamma2 (int grad log f w)(int grad log f w)'.
AsymptoticMatrices asymptotic_matrices(const SpectralModel& s, const WeightSpec& w,
                                       double gamma2, const Vector& theta,
                                       double quad_tol = 1e-12);

// Sandwich W = W1^-1 (W2 + V) W1^-1; throws when cond(W1) > 1e12.
Matrix mce_covariance(const Matrix& w1, const Matrix& w2, const Matrix& v);

// theta_i +- z_{(1+level)/2} sqrt(W_ii / T)
std::vector<Interval> confidence_intervals(const Vector& theta_hat, const Matrix& w,
                                           double horizon, double level);

struct GridSpec {
    std::vector<int> points_per_dim;  // one entry per theta coordinate
    std::vector<Interval> box;        // empty means the model box
};

// Exhaustive contrast evaluation on a rectangular grid; ties resolved to the
// lexicographically smallest point.
std::pair<Vector, double> grid_oracle(const Periodogram& p, const SpectralModel& s,
                                      const WeightSpec& w, const GridSpec& grid,
                                      unsigned threads = 1);

// grid_oracle plus shrinking-box refinement around the running best point.
std::pair<Vector, double> grid_refine_oracle(const Periodogram& p, const SpectralModel& s,
                                             const WeightSpec& w, int points_per_dim,
                                             int rounds, unsigned threads = 1);

}  // namespace specfit

#endif
