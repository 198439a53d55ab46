#include "specfit/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "specfit/errors.hpp"
#include "specfit/fft.hpp"

namespace specfit {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

std::vector<double> fourier_grid(double horizon, double lambda_max) {
    if (horizon <= 0.0 || lambda_max <= 0.0)
        throw std::invalid_argument("fourier_grid: horizon, lambda_max must be > 0");
    const double step = kTwoPi / horizon;
    const auto kmax = static_cast<long>(std::floor(lambda_max / step + 1e-12));
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(2 * kmax + 1));
    for (long k = -kmax; k <= kmax; ++k) grid.push_back(step * static_cast<double>(k));
    return grid;
}

Periodogram residual_periodogram(const NoisePath& res, const std::vector<double>& grid,
                                 PeriodogramSource source) {
    const std::size_t n = res.values.size();
    if (n == 0) throw ShapeError("residual_periodogram: empty path");
    const double horizon = res.horizon();
    const double nyquist = M_PI / res.delta;
    const double bin = kTwoPi / horizon;
    const auto dftv = dft_real(res.values);
    Periodogram p;
    p.lambdas = grid;
    p.values.resize(grid.size());
    p.horizon = horizon;
    p.delta = res.delta;
    p.source = source;
    const double scale = res.delta * res.delta / (kTwoPi * horizon);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double lambda = grid[i];
        if (std::fabs(lambda) > nyquist + 1e-9)
            throw std::domain_error("residual_periodogram: grid beyond the Nyquist band");
        const double kreal = lambda / bin;
        const auto k = static_cast<long>(std::llround(kreal));
        if (std::fabs(kreal - static_cast<double>(k)) > 1e-6)
            throw std::domain_error("residual_periodogram: grid point is not a Fourier frequency");
        long idx = k % static_cast<long>(n);
        if (idx < 0) idx += static_cast<long>(n);
        p.values[i] = scale * std::norm(dftv[static_cast<std::size_t>(idx)]);
    }
    return p;
}

double plancherel_gap(const NoisePath& res) {
    const std::size_t n = res.values.size();
    if (n == 0) return 0.0;
    const double horizon = res.horizon();
    const auto dftv = dft_real(res.values);
    const double scale = res.delta * res.delta / (kTwoPi * horizon);
    double lhs = 0.0;
    for (const auto& v : dftv) lhs += scale * std::norm(v);
    lhs *= kTwoPi / horizon;
    double rhs = 0.0;
    for (double r : res.values) rhs += r * r;
    rhs *= res.delta / horizon;
    return std::fabs(lhs - rhs);
}

void SpectralModel::validate() const {
    const std::size_t want = family == SpectralFamily::OU ? 2 : 3;
    if (box.size() != want)
        throw std::invalid_argument("SpectralModel: box dimension mismatch for family");
    for (const auto& iv : box)
        if (!(iv.hi >= iv.lo)) throw std::invalid_argument("SpectralModel: empty box interval");
    if (family == SpectralFamily::CAR2Pendulum || family == SpectralFamily::OU) {
        for (const auto& iv : box)
            if (iv.lo <= 0.0)
                throw std::invalid_argument("SpectralModel: box must be strictly positive");
    }
    if (family == SpectralFamily::RieszBessel && !eval_only)
        throw std::invalid_argument(
            "SpectralModel: RieszBessel requires the eval_only acknowledgment");
    if (!theta0.empty() && theta0.size() != box.size())
        throw std::invalid_argument("SpectralModel: theta0 dimension mismatch");
}

bool SpectralModel::in_box(const Vector& theta, double slack) const {
    if (theta.size() != box.size()) return false;
    for (std::size_t i = 0; i < theta.size(); ++i)
        if (!box[i].contains(theta[i], slack)) return false;
    return true;
}

Vector SpectralModel::clamp_to_box(const Vector& theta) const {
    Vector out = theta;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = box[i].clamp(out[i]);
    return out;
}

double spectral_eval(const SpectralModel& s, double lambda, const Vector& theta) {
    if (!s.in_box(theta, 1e-9))
        throw std::domain_error("spectral_eval: theta outside the parameter box");
    switch (s.family) {
        case SpectralFamily::CAR2Pendulum: {
            const double a = theta[0], beta = theta[1], g = theta[2];
            const double p = lambda * lambda - a * a - g * g;
            const double denom = p * p + 4.0 * a * a * lambda * lambda;
            return beta / (kTwoPi * denom);
        }
        case SpectralFamily::OU: {
            const double rate = theta[0], d2 = theta[1];
            return d2 / (kTwoPi * (rate * rate + lambda * lambda));
        }
        case SpectralFamily::RieszBessel: {
            const double a = theta[0], beta = theta[1], g = theta[2];
            const double al = std::fabs(lambda);
            return beta / (kTwoPi * std::pow(al, 2.0 * a) *
                           std::pow(1.0 + lambda * lambda, g));
        }
    }
    return 0.0;
}

Vector spectral_grad(const SpectralModel& s, double lambda, const Vector& theta) {
    if (s.family == SpectralFamily::RieszBessel)
        throw std::invalid_argument("spectral_grad: RieszBessel is evaluation-only");
    if (!s.in_box(theta, 1e-9))
        throw std::domain_error("spectral_grad: theta outside the parameter box");
    if (s.family == SpectralFamily::OU) {
        const double rate = theta[0], d2 = theta[1];
        const double denom = rate * rate + lambda * lambda;
        return {-d2 * 2.0 * rate / (kTwoPi * denom * denom), 1.0 / (kTwoPi * denom)};
    }
    const double a = theta[0], beta = theta[1], g = theta[2];
    const double l2 = lambda * lambda;
    const double p = l2 - a * a - g * g;   // s = p^2 + 4 a^2 l^2
    const double u = l2 + a * a + g * g;   // ds/da = 4 a u, ds/dg = -4 g p
    const double sden = p * p + 4.0 * a * a * l2;
    const double s2 = sden * sden;
    Vector grad(3);
    grad[0] = -4.0 * a * beta * u / (kTwoPi * s2);
    grad[1] = 1.0 / (kTwoPi * sden);
    grad[2] = 4.0 * beta * g * p / (kTwoPi * s2);
    return grad;
}

Matrix spectral_hess(const SpectralModel& s, double lambda, const Vector& theta) {
    if (s.family == SpectralFamily::RieszBessel)
        throw std::invalid_argument("spectral_hess: RieszBessel is evaluation-only");
    if (!s.in_box(theta, 1e-9))
        throw std::domain_error("spectral_hess: theta outside the parameter box");
    if (s.family == SpectralFamily::OU) {
        const double rate = theta[0], d2 = theta[1];
        const double denom = rate * rate + lambda * lambda;
        Matrix h(2, 2);
        h(0, 0) = d2 * (8.0 * rate * rate / denom - 2.0) / (kTwoPi * denom * denom);
        h(0, 1) = h(1, 0) = -2.0 * rate / (kTwoPi * denom * denom);
        h(1, 1) = 0.0;
        return h;
    }
    const double a = theta[0], beta = theta[1], g = theta[2];
    const double l2 = lambda * lambda;
    const double p = l2 - a * a - g * g;
    const double u = l2 + a * a + g * g;
    const double sden = p * p + 4.0 * a * a * l2;
    const double s2 = sden * sden;
    const double s3 = s2 * sden;
    const double sa = 4.0 * a * u;    // ds/dalpha
    const double sg = -4.0 * g * p;   // ds/dgamma
    Matrix h(3, 3);
    // f = beta / (2 pi s); f_x = -beta s_x / (2 pi s^2)
    h(0, 0) = -beta / kTwoPi * ((4.0 * u + 8.0 * a * a) / s2 - 2.0 * sa * sa / s3);
    h(0, 1) = h(1, 0) = -sa / (kTwoPi * s2);
    h(0, 2) = h(2, 0) = -beta / kTwoPi * (8.0 * a * g / s2 - 2.0 * sa * sg / s3);
    h(1, 1) = 0.0;
    h(1, 2) = h(2, 1) = -sg / (kTwoPi * s2);
    h(2, 2) = -beta / kTwoPi * ((-4.0 * p + 8.0 * g * g) / s2 - 2.0 * sg * sg / s3);
    return h;
}

void spectral_eval_grad_unchecked(const SpectralModel& s, double lambda, const Vector& theta,
                                  double& f, double* grad) {
    switch (s.family) {
        case SpectralFamily::CAR2Pendulum: {
            const double a = theta[0], beta = theta[1], g = theta[2];
            const double l2 = lambda * lambda;
            const double p = l2 - a * a - g * g;
            const double u = l2 + a * a + g * g;
            const double sden = p * p + 4.0 * a * a * l2;
            f = beta / (kTwoPi * sden);
            if (grad) {
                const double s2 = sden * sden;
                grad[0] = -4.0 * a * beta * u / (kTwoPi * s2);
                grad[1] = 1.0 / (kTwoPi * sden);
                grad[2] = 4.0 * beta * g * p / (kTwoPi * s2);
            }
            return;
        }
        case SpectralFamily::OU: {
            const double rate = theta[0], d2 = theta[1];
            const double denom = rate * rate + lambda * lambda;
            f = d2 / (kTwoPi * denom);
            if (grad) {
                grad[0] = -d2 * 2.0 * rate / (kTwoPi * denom * denom);
                grad[1] = 1.0 / (kTwoPi * denom);
            }
            return;
        }
        case SpectralFamily::RieszBessel: {
            f = spectral_eval(s, lambda, theta);
            if (grad) throw std::invalid_argument("RieszBessel is evaluation-only");
            return;
        }
    }
}

double default_lambda_max(const WeightSpec& w) {
    return std::sqrt(std::pow(10.0, 8.0 / w.exponent_a) - 1.0);
}

double weight_eval(const WeightSpec& w, double lambda, WeightKind which) {
    const double e = which == WeightKind::W ? w.exponent_a : w.exponent_b;
    return w.scale * std::pow(1.0 + lambda * lambda, -e);
}

WeightReport validate_weight_conditions(const WeightSpec& w, const SpectralModel& s) {
    WeightReport report;
    if (!(w.exponent_a > 2.5)) {
        report.pass = false;
        report.violations.push_back("weight exponent must satisfy a > 5/2; got a = " +
                                    std::to_string(w.exponent_a));
    }
    if (!(w.exponent_a >= w.exponent_b)) {
        report.pass = false;
        report.violations.push_back("weight exponents must satisfy a >= b; got a = " +
                                    std::to_string(w.exponent_a) +
                                    ", b = " + std::to_string(w.exponent_b));
    }
    if (!(w.exponent_b > 2.0)) {
        report.pass = false;
        report.violations.push_back("weight exponent must satisfy b > 2; got b = " +
                                    std::to_string(w.exponent_b));
    }

    // spot check sup w/f over theta box corners and a log-spaced lambda grid
    if (s.family != SpectralFamily::RieszBessel) {
        const std::size_t m = s.dimension();
        std::vector<Vector> thetas;
        const auto corners = static_cast<std::size_t>(1) << m;
        for (std::size_t mask = 0; mask < corners; ++mask) {
            Vector th(m);
            for (std::size_t i = 0; i < m; ++i)
                th[i] = (mask >> i) & 1 ? s.box[i].hi : s.box[i].lo;
            thetas.push_back(th);
        }
        Vector center(m);
        for (std::size_t i = 0; i < m; ++i) center[i] = 0.5 * (s.box[i].lo + s.box[i].hi);
        thetas.push_back(center);

        double sup = 0.0, sup_last_decade = 0.0, sup_prev_decade = 0.0;
        for (int i = 0; i <= 240; ++i) {
            const double lambda = i == 0 ? 0.0 : std::pow(10.0, -2.0 + 6.0 * (i - 1) / 239.0);
            const double wv = weight_eval(w, lambda, WeightKind::W);
            for (const auto& th : thetas) {
                const double ratio = wv / spectral_eval(s, lambda, th);
                sup = std::max(sup, ratio);
                if (lambda > 1e3) sup_last_decade = std::max(sup_last_decade, ratio);
                else if (lambda > 1e2) sup_prev_decade = std::max(sup_prev_decade, ratio);
            }
        }
        report.sup_w_over_f = sup;
        if (sup_last_decade > 10.0 * std::max(sup_prev_decade, 1e-300)) {
            report.pass = false;
            report.violations.push_back("w/f appears unbounded in lambda (fails C4-type check)");
        }
    }
    return report;
}

}  // namespace specfit
