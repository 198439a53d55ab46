#ifndef SPECFIT_STATS_HPP
#define SPECFIT_STATS_HPP

#include <vector>

#include "specfit/linalg.hpp"

namespace specfit {

double mean(const std::vector<double>& x);
double sample_variance(const std::vector<double>& x);  // denominator n-1

// k-statistics: unbiased second cumulant and the standard fourth k-statistic.
double sample_cumulant2(const std::vector<double>& x);
double sample_cumulant4(const std::vector<double>& x);

double skewness(const std::vector<double>& x);
double excess_kurtosis(const std::vector<double>& x);

// rows = observations; returns the (n-1)-denominator covariance matrix
Matrix sample_covariance(const std::vector<Vector>& rows);

double normal_cdf(double x);
// Inverse standard normal CDF, refined to near machine precision.
double normal_quantile(double p);

// sup_x |F_n(x) - Phi(x)| after standardising by the sample mean/sd
double ks_distance_to_normal(std::vector<double> x);

}  // namespace specfit

#endif
