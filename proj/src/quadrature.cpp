#include "specfit/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

namespace specfit {
namespace {

// QUADPACK 15-point Kronrod rule with embedded 7-point Gauss rule.
constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
constexpr double kWg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct Interval {
    double a, b, value, error;
    bool operator<(const Interval& o) const { return error < o.error; }
};

Interval gk15(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double kronrod = kWgk[7] * fc;
    double gauss = kWg[3] * fc;
    for (int i = 0; i < 7; ++i) {
        const double x = h * kXgk[i];
        const double fsum = f(c - x) + f(c + x);
        kronrod += kWgk[i] * fsum;
        if (i % 2 == 1) gauss += kWg[i / 2] * fsum;
    }
    kronrod *= h;
    gauss *= h;
    return {a, b, kronrod, std::fabs(kronrod - gauss)};
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double abs_tol, double rel_tol, int initial_splits,
                           int max_intervals) {
    QuadratureResult out;
    if (a == b) return out;
    initial_splits = std::max(1, initial_splits);
    std::priority_queue<Interval> queue;
    double total = 0.0, total_err = 0.0;
    for (int i = 0; i < initial_splits; ++i) {
        const double lo = a + (b - a) * i / initial_splits;
        const double hi = a + (b - a) * (i + 1) / initial_splits;
        Interval iv = gk15(f, lo, hi);
        total += iv.value;
        total_err += iv.error;
        queue.push(iv);
    }
    int n = initial_splits;
    while (total_err > std::max(abs_tol, rel_tol * std::fabs(total)) && n < max_intervals) {
        Interval worst = queue.top();
        queue.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        Interval left = gk15(f, worst.a, mid);
        Interval right = gk15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        queue.push(left);
        queue.push(right);
        ++n;
    }
    out.value = total;
    out.error_estimate = total_err;
    out.converged = total_err <= std::max(abs_tol, rel_tol * std::fabs(total)) * 1.001 ||
                    total_err <= abs_tol * 10.0;
    return out;
}

QuadratureResult integrate_half_line(const std::function<double(double)>& f, double abs_tol,
                                     double rel_tol, int initial_splits, int max_intervals) {
    auto transformed = [&f](double u) {
        const double om = 1.0 - u;
        const double x = u / om;
        return f(x) / (om * om);
    };
    // stop short of u = 1; the mapped integrand is assumed to vanish there
    return integrate(transformed, 0.0, 1.0 - 1e-13, abs_tol, rel_tol, initial_splits,
                     max_intervals);
}

}  // namespace specfit
