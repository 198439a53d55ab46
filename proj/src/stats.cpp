#include "specfit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace specfit {

double mean(const std::vector<double>& x) {
    if (x.empty()) return 0.0;
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double sample_variance(const std::vector<double>& x) {
    const std::size_t n = x.size();
    if (n < 2) return 0.0;
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(n - 1);
}

double sample_cumulant2(const std::vector<double>& x) { return sample_variance(x); }

double sample_cumulant4(const std::vector<double>& x) {
    // k4 = [n^2 ((n+1) m4 - 3 (n-1) m2^2)] / [(n-1)(n-2)(n-3)], central moments m_r
    const double n = static_cast<double>(x.size());
    if (x.size() < 4) return 0.0;
    const double m = mean(x);
    double m2 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double d = v - m;
        const double d2 = d * d;
        m2 += d2;
        m4 += d2 * d2;
    }
    m2 /= n;
    m4 /= n;
    return n * n * ((n + 1.0) * m4 - 3.0 * (n - 1.0) * m2 * m2) /
           ((n - 1.0) * (n - 2.0) * (n - 3.0));
}

double skewness(const std::vector<double>& x) {
    const double n = static_cast<double>(x.size());
    if (x.size() < 3) return 0.0;
    const double m = mean(x);
    double m2 = 0.0, m3 = 0.0;
    for (double v : x) {
        const double d = v - m;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= n;
    m3 /= n;
    if (m2 <= 0.0) return 0.0;
    return m3 / std::pow(m2, 1.5);
}

double excess_kurtosis(const std::vector<double>& x) {
    const double n = static_cast<double>(x.size());
    if (x.size() < 4) return 0.0;
    const double m = mean(x);
    double m2 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double d = v - m;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m4 /= n;
    if (m2 <= 0.0) return 0.0;
    return m4 / (m2 * m2) - 3.0;
}

Matrix sample_covariance(const std::vector<Vector>& rows) {
    if (rows.empty()) return Matrix(0, 0);
    const std::size_t n = rows.size();
    const std::size_t d = rows.front().size();
    Vector mu(d, 0.0);
    for (const auto& r : rows)
        for (std::size_t j = 0; j < d; ++j) mu[j] += r[j];
    for (double& v : mu) v /= static_cast<double>(n);
    Matrix c(d, d);
    for (const auto& r : rows)
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) c(i, j) += (r[i] - mu[i]) * (r[j] - mu[j]);
    if (n > 1)
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) c(i, j) /= static_cast<double>(n - 1);
    return c;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865475244); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p outside (0,1)");
    // Acklam's rational approximation followed by one Halley step
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double e = normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
    x = x - u / (1.0 + 0.5 * x * u);
    return x;
}

double ks_distance_to_normal(std::vector<double> x) {
    const std::size_t n = x.size();
    if (n == 0) return 0.0;
    const double m = mean(x);
    const double sd = std::sqrt(sample_variance(x));
    if (sd <= 0.0) return 1.0;
    for (double& v : x) v = (v - m) / sd;
    std::sort(x.begin(), x.end());
    double dmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double phi = normal_cdf(x[i]);
        const double lo = static_cast<double>(i) / static_cast<double>(n);
        const double hi = static_cast<double>(i + 1) / static_cast<double>(n);
        dmax = std::max(dmax, std::max(std::fabs(phi - lo), std::fabs(phi - hi)));
    }
    return dmax;
}

}  // namespace specfit
