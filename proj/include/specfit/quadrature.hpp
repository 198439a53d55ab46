#ifndef SPECFIT_QUADRATURE_HPP
#define SPECFIT_QUADRATURE_HPP

#include <functional>

namespace specfit {

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    bool converged = true;
};

// Adaptive Gauss-Kronrod 15(7) over [a, b]. initial_splits seeds the work
// queue with equal subintervals, which matters for oscillatory integrands.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double abs_tol = 1e-9, double rel_tol = 1e-10,
                           int initial_splits = 8, int max_intervals = 4000);

// Integral over [0, inf) through the substitution x = u/(1-u). The integrand
// must decay at least like x^-2.
QuadratureResult integrate_half_line(const std::function<double(double)>& f,
                                     double abs_tol = 1e-9, double rel_tol = 1e-10,
                                     int initial_splits = 16, int max_intervals = 4000);

// Integral of an even function over the whole line.
inline QuadratureResult integrate_even_line(const std::function<double(double)>& f,
                                            double abs_tol = 1e-9, double rel_tol = 1e-10) {
    QuadratureResult r = integrate_half_line(f, abs_tol / 2, rel_tol / 2);
    r.value *= 2.0;
    r.error_estimate *= 2.0;
    return r;
}

}  // namespace specfit

#endif
