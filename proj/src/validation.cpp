#include "specfit/validation.hpp"

#include <algorithm>
#include <cmath>

#include "specfit/errors.hpp"
#include "specfit/fft.hpp"
#include "specfit/parallel.hpp"
#include "specfit/quadrature.hpp"
#include "specfit/rng.hpp"
#include "specfit/stats.hpp"

namespace specfit {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

void finalize_normality_stats(MCReport& report, const std::vector<Vector>& normalised) {
    if (normalised.empty()) return;
    const std::size_t m = normalised.front().size();
    report.skewness_stats.resize(m);
    report.kurtosis_stats.resize(m);
    report.ks_stats.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
        std::vector<double> coord(normalised.size());
        for (std::size_t r = 0; r < normalised.size(); ++r) coord[r] = normalised[r][j];
        report.skewness_stats[j] = skewness(coord);
        report.kurtosis_stats[j] = excess_kurtosis(coord);
        report.ks_stats[j] = ks_distance_to_normal(coord);
    }
}
}  // namespace

MeanSquareCheck mean_square_check(const NoisePath& path, double b0) {
    if (path.values.empty()) throw ShapeError("mean_square_check: empty path");
    if (!(b0 > 0.0)) throw std::invalid_argument("mean_square_check: B(0) must be > 0");
    double s = 0.0;
    for (double v : path.values) s += v * v;
    MeanSquareCheck out;
    out.nu_star = s * path.delta / path.horizon();
    out.rel_error = std::fabs(out.nu_star - b0) / b0;
    return out;
}

double fejer_limit_check(const std::function<double(double)>& g, double horizon) {
    if (!(horizon > 0.0)) throw std::invalid_argument("fejer_limit_check: T must be > 0");
    // substitute u = 2v/T: integral becomes (1/pi) int sinc^2(v) G(2v/T) dv
    const double v_max = std::max(2000.0, 5.0 * horizon);
    auto integrand = [&](double v) {
        const double sinc = v == 0.0 ? 1.0 : std::sin(v) / v;
        return sinc * sinc * g(2.0 * v / horizon);
    };
    const int chunks = static_cast<int>(std::ceil(2.0 * v_max / M_PI));
    auto q = integrate(integrand, -v_max, v_max, 1e-7, 1e-9, chunks, chunks + 400);
    return q.value / M_PI;
}

CltCheck clt_functional_check(const LevyDriverSpec& d, const KernelSpec& k,
                              const std::function<double(double)>& b, double horizon,
                              int replicates, std::uint64_t seed, double delta,
                              unsigned threads) {
    const auto n = static_cast<std::size_t>(std::llround(horizon / delta));
    if (n < 2) throw ShapeError("clt_functional_check: horizon too short");

    // bhat(m delta) = int exp(i lambda m delta) b(lambda) dlambda via one
    // rectangle-rule transform on a lattice matched to the FFT length
    const std::size_t nfft = next_pow2(2 * n);
    const double dl = kTwoPi / (static_cast<double>(nfft) * delta);
    std::vector<cdouble> spec(nfft, cdouble(0.0, 0.0));
    const std::size_t half = nfft / 2;
    for (std::size_t l = 0; l < nfft; ++l) {
        const auto signed_l = l < half ? static_cast<long>(l)
                                       : static_cast<long>(l) - static_cast<long>(nfft);
        spec[l] = b(dl * static_cast<double>(signed_l));
    }
    fft_pow2(spec, true);  // inverse transform: sum_l spec_l exp(+2 pi i l m / nfft) / nfft
    std::vector<double> bhat(n);
    for (std::size_t m = 0; m < n; ++m)
        bhat[m] = spec[m].real() * dl * static_cast<double>(nfft);

    const std::vector<double> bcov = lattice_covariance(k, d, delta, n - 1);

    std::vector<double> stats(static_cast<std::size_t>(replicates));
    parallel_for(static_cast<std::size_t>(replicates), threads, [&](std::size_t r) {
        const NoisePath path = simulate_linear_noise(d, k, horizon, delta, derive_seed(seed, r));
        const std::vector<double> acf = autocorr_raw(path.values, n - 1);
        double q = 0.0;
        for (std::size_t m = 0; m < n; ++m) {
            const double centred =
                acf[m] - static_cast<double>(n - m) * bcov[m];
            q += (m == 0 ? 1.0 : 2.0) * bhat[m] * centred;
        }
        q *= delta * delta;
        stats[r] = q / std::sqrt(horizon);
    });

    CltCheck out;
    out.sample_mean = mean(stats);
    out.sample_variance = sample_variance(stats);
    const double d2 = driver_cumulants(d).d2;
    const double gamma2 = driver_cumulants(d).gamma2;
    auto f = [&](double lambda) { return d2 / kTwoPi * std::norm(kernel_transform(k, lambda)); };
    const double int_b2f2 =
        integrate_even_line([&](double l) { const double bf = b(l) * f(l); return b(l) * bf * f(l); },
                            1e-12, 1e-10).value;
    const double int_bf =
        integrate_even_line([&](double l) { return b(l) * f(l); }, 1e-12, 1e-10).value;
    out.sigma2_target = 16.0 * M_PI * M_PI * M_PI * int_b2f2 +
                        gamma2 * (kTwoPi * int_bf) * (kTwoPi * int_bf);
    return out;
}

Matrix sigma_trig(const Vector& alpha0, const Vector& f_at_phi) {
    if (alpha0.size() % 3 != 0 || alpha0.empty())
        throw ShapeError("sigma_trig: alpha0 must have 3N entries");
    const std::size_t nh = alpha0.size() / 3;
    if (f_at_phi.size() != nh) throw ShapeError("sigma_trig: f_at_phi must have N entries");
    Matrix sigma(3 * nh, 3 * nh);
    for (std::size_t k = 0; k < nh; ++k) {
        const double a = alpha0[3 * k], b = alpha0[3 * k + 1];
        const double c2 = a * a + b * b;
        if (c2 <= 0.0) throw std::invalid_argument("sigma_trig: degenerate harmonic amplitude");
        if (!(f_at_phi[k] > 0.0))
            throw std::invalid_argument("sigma_trig: spectral density must be positive");
        const double factor = 4.0 * M_PI * f_at_phi[k] / c2;
        const double block[3][3] = {{a * a + 4.0 * b * b, -3.0 * a * b, -6.0 * b},
                                    {-3.0 * a * b, b * b + 4.0 * a * a, 6.0 * a},
                                    {-6.0 * b, 6.0 * a, 12.0}};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) sigma(3 * k + i, 3 * k + j) = factor * block[i][j];
    }
    return sigma;
}

MCReport lse_normality_check(const RegressionModel& model, const Vector& alpha0,
                             const LevyDriverSpec& driver, const KernelSpec& kernel,
                             double horizon, double delta, int replicates, std::uint64_t seed,
                             unsigned threads) {
    if (model.family != RegressionFamily::TrigonometricSum)
        throw std::invalid_argument("lse_normality_check: trigonometric model expected");
    model.validate();
    const std::size_t q = model.dimension();
    const std::size_t nh = static_cast<std::size_t>(model.harmonics);

    Vector f_at_phi(nh);
    for (std::size_t k = 0; k < nh; ++k)
        f_at_phi[k] = spectral_density(kernel, driver, alpha0[3 * k + 2]);

    std::vector<Vector> rows(static_cast<std::size_t>(replicates));
    std::vector<char> ok(static_cast<std::size_t>(replicates), 0);
    const double rt = std::sqrt(horizon);
    const double rt3 = horizon * rt;
    parallel_for(static_cast<std::size_t>(replicates), threads, [&](std::size_t r) {
        try {
            const NoisePath noise =
                simulate_linear_noise(driver, kernel, horizon, delta, derive_seed(seed, r));
            NoisePath data = noise;
            for (std::size_t i = 0; i < data.values.size(); ++i)
                data.values[i] += reg_eval(model, delta * static_cast<double>(i), alpha0);
            const LSEFit fit = lse_fit(model, data, alpha0);
            Vector row(q);
            for (std::size_t k = 0; k < nh; ++k) {
                row[3 * k] = rt * (fit.alpha_hat[3 * k] - alpha0[3 * k]);
                row[3 * k + 1] = rt * (fit.alpha_hat[3 * k + 1] - alpha0[3 * k + 1]);
                row[3 * k + 2] = rt3 * (fit.alpha_hat[3 * k + 2] - alpha0[3 * k + 2]);
            }
            rows[r] = row;
            ok[r] = fit.converged ? 1 : 2;
        } catch (const std::exception&) {
            ok[r] = 0;
        }
    });

    MCReport report;
    report.replicates = replicates;
    report.horizon = horizon;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (ok[r]) {
            report.records.push_back({r, derive_seed(seed, r), rows[r], ok[r] == 1});
            report.estimates.push_back(rows[r]);
            if (ok[r] == 2) ++report.non_converged;
        } else {
            ++report.failures;
        }
    }
    if (report.estimates.empty()) throw NumericError("lse_normality_check: no replicate succeeded");
    report.empirical_covariance = sample_covariance(report.estimates);
    report.target_covariance = sigma_trig(alpha0, f_at_phi);
    report.empirical_mean.assign(q, 0.0);
    for (const auto& row : report.estimates)
        for (std::size_t j = 0; j < q; ++j) report.empirical_mean[j] += row[j];
    for (double& v : report.empirical_mean) v /= static_cast<double>(report.estimates.size());

    // standardise by the closed-form block for the normality diagnostics
    std::vector<Vector> standardised = report.estimates;
    for (auto& row : standardised)
        for (std::size_t j = 0; j < q; ++j)
            row[j] /= std::sqrt(report.target_covariance(j, j));
    finalize_normality_stats(report, standardised);
    return report;
}

double estimate_gamma2_from_residuals(const NoisePath& res, const SpectralModel& s,
                                      const Vector& theta_hat) {
    KernelSpec kernel;
    double d2_hat;
    switch (s.family) {
        case SpectralFamily::CAR2Pendulum:
            kernel = {KernelFamily::CAR2Pendulum, theta_hat[0], 0.0, theta_hat[2]};
            d2_hat = theta_hat[1];
            break;
        case SpectralFamily::OU:
            kernel = {KernelFamily::OU, theta_hat[0], 0.0, 1.0};
            d2_hat = theta_hat[1];
            break;
        default:
            throw std::invalid_argument("estimate_gamma2_from_residuals: unsupported family");
    }
    const double horizon = kernel.support_horizon();
    const double int_a4 = integrate(
        [&](double t) {
            const double a = kernel_eval(kernel, t);
            return a * a * a * a;
        },
        0.0, horizon, 1e-12, 1e-10, 16, 4000).value;
    const double k4 = sample_cumulant4(res.values);
    const double d4_hat = std::max(0.0, k4 / int_a4);
    return d4_hat / (d2_hat * d2_hat);
}

MCReport mce_normality_study(const PipelineSpec& spec, double horizon, int replicates,
                             std::uint64_t seed, unsigned threads) {
    spec.regression.validate();
    spec.spectral.validate();
    if (spec.spectral.theta0.empty())
        throw std::invalid_argument("mce_normality_study: spectral.theta0 required");
    {
        const WeightReport wr = validate_weight_conditions(spec.weights, spec.spectral);
        if (!wr.pass)
            throw ConfigError("mce_normality_study: weight conditions failed: " +
                              wr.violations.front());
    }
    const Vector theta0 = spec.spectral.theta0;
    const std::size_t m = theta0.size();
    const std::vector<double> grid =
        fourier_grid(horizon, default_lambda_max(spec.weights));

    Vector center(m);
    for (std::size_t i = 0; i < m; ++i)
        center[i] = 0.5 * (spec.spectral.box[i].lo + spec.spectral.box[i].hi);

    const DriverCumulants cum = driver_cumulants(spec.driver);
    double gamma2_default = cum.gamma2;
    if (spec.gamma2_mode == Gamma2Mode::UserValue) gamma2_default = spec.gamma2_value;

    // the sandwich at the truth is both the covariance target and, unless the
    // user asked for per-replicate gamma2 estimation, the CI variance
    const AsymptoticMatrices am0 =
        asymptotic_matrices(spec.spectral, spec.weights, gamma2_default, theta0, 1e-10);
    const Matrix w_target = mce_covariance(am0.w1, am0.w2, am0.v);
    const bool plugin_ci = spec.gamma2_mode == Gamma2Mode::EstimateFromResiduals;

    struct ReplicateOut {
        Vector theta;
        std::vector<char> covered;
        bool ok = false;
        bool converged = false;
    };
    std::vector<ReplicateOut> results(static_cast<std::size_t>(replicates));

    parallel_for(static_cast<std::size_t>(replicates), threads, [&](std::size_t r) {
        ReplicateOut& out = results[r];
        try {
            const std::uint64_t rng_seed = derive_seed(seed, r);
            const NoisePath noise =
                simulate_linear_noise(spec.driver, spec.kernel, horizon, spec.delta, rng_seed);
            NoisePath data = noise;
            for (std::size_t i = 0; i < data.values.size(); ++i)
                data.values[i] +=
                    reg_eval(spec.regression, spec.delta * static_cast<double>(i), spec.alpha0);
            const LSEFit lse = lse_fit(spec.regression, data, spec.alpha0);
            const NoisePath res = residuals(spec.regression, data, lse.alpha_hat);
            const Periodogram p = residual_periodogram(res, grid);

            WhittleOptions wopts;
            wopts.gamma2 = gamma2_default;
            wopts.confidence_level = spec.confidence_level;
            wopts.compute_matrices = false;
            WhittleFit fit = whittle_fit(p, spec.spectral, spec.weights, center, wopts);

            Matrix w_ci = w_target;
            if (plugin_ci) {
                const double gamma2_rep =
                    estimate_gamma2_from_residuals(res, spec.spectral, fit.theta_hat);
                const AsymptoticMatrices am = asymptotic_matrices(
                    spec.spectral, spec.weights, gamma2_rep, fit.theta_hat, 1e-9);
                w_ci = mce_covariance(am.w1, am.w2, am.v);
            }
            const auto ci =
                confidence_intervals(fit.theta_hat, w_ci, horizon, spec.confidence_level);

            out.theta = fit.theta_hat;
            out.converged = fit.converged;
            out.covered.resize(m);
            for (std::size_t i = 0; i < m; ++i)
                out.covered[i] = ci[i].contains(theta0[i]) ? 1 : 0;
            out.ok = true;
        } catch (const std::exception&) {
            out.ok = false;
        }
    });

    MCReport report;
    report.replicates = replicates;
    report.horizon = horizon;
    std::vector<Vector> scaled;
    Vector coverage(m, 0.0);
    const double rt = std::sqrt(horizon);
    for (std::size_t r = 0; r < results.size(); ++r) {
        const auto& res = results[r];
        if (!res.ok) {
            ++report.failures;
            continue;
        }
        report.records.push_back({r, derive_seed(seed, r), res.theta, res.converged});
        if (!res.converged) {
            ++report.non_converged;
            continue;
        }
        report.estimates.push_back(res.theta);
        Vector row(m);
        for (std::size_t i = 0; i < m; ++i) {
            row[i] = rt * (res.theta[i] - theta0[i]);
            coverage[i] += res.covered[i];
        }
        scaled.push_back(row);
    }
    if (report.estimates.empty()) throw NumericError("mce_normality_study: no replicate succeeded");
    const double n_ok = static_cast<double>(report.estimates.size());
    for (double& c : coverage) c /= n_ok;
    report.coverage = coverage;
    report.empirical_mean.assign(m, 0.0);
    for (const auto& row : report.estimates)
        for (std::size_t i = 0; i < m; ++i) report.empirical_mean[i] += row[i];
    for (double& v : report.empirical_mean) v /= n_ok;
    report.bias.resize(m);
    for (std::size_t i = 0; i < m; ++i) report.bias[i] = report.empirical_mean[i] - theta0[i];
    report.empirical_covariance = sample_covariance(scaled);
    report.target_covariance = w_target;

    std::vector<Vector> standardised = scaled;
    for (auto& row : standardised)
        for (std::size_t i = 0; i < m; ++i)
            row[i] /= std::sqrt(report.target_covariance(i, i));
    finalize_normality_stats(report, standardised);
    return report;
}

std::vector<double> levitan_coefficients(const std::function<double(double)>& f, double sigma,
                                         int n) {
    if (n < 1) throw std::invalid_argument("levitan_coefficients: n must be >= 1");
    if (!(sigma > 0.0)) throw std::invalid_argument("levitan_coefficients: sigma must be > 0");
    const double s = sigma / static_cast<double>(n);
    // E_s(x) = (2 pi)^-1 int exp(-i x u) (2 sin(s u / 2) / (s u))^2 f(u) du.
    // The squared-sinc factor decays like u^-2 only, hence the wide window.
    const double v_max = std::max(1.0e4, 200.0 / s);
    const int chunks = static_cast<int>(std::ceil(2.0 * v_max / M_PI));
    auto sinc2 = [s](double u) {
        if (u == 0.0) return 1.0;
        const double r = 2.0 * std::sin(0.5 * s * u) / (s * u);
        return r * r;
    };
    // coeffs laid out as [re c_{-n}.. re c_0 .. re c_n | im c_{-n}.. im c_n]
    std::vector<double> coeffs(2 * static_cast<std::size_t>(2 * n + 1), 0.0);
    const auto stride = static_cast<std::size_t>(2 * n + 1);
    for (int j = 0; j <= n; ++j) {
        const double x = s * static_cast<double>(j);
        auto qc = integrate([&](double u) { return sinc2(u) * f(u) * std::cos(x * u); }, -v_max,
                            v_max, 1e-8, 1e-9, chunks, chunks + 600);
        auto qs = integrate([&](double u) { return sinc2(u) * f(u) * std::sin(x * u); }, -v_max,
                            v_max, 1e-8, 1e-9, chunks, chunks + 600);
        const double re = s * qc.value / kTwoPi;
        const double im = -s * qs.value / kTwoPi;
        coeffs[static_cast<std::size_t>(n + j)] = re;
        coeffs[stride + static_cast<std::size_t>(n + j)] = im;
        if (j > 0) {  // E_s(-x) = conj(E_s(x)) for real f
            coeffs[static_cast<std::size_t>(n - j)] = re;
            coeffs[stride + static_cast<std::size_t>(n - j)] = -im;
        }
    }
    return coeffs;
}

double levitan_eval(const std::vector<double>& coeffs, double sigma, int n, double lambda) {
    const double s = sigma / static_cast<double>(n);
    const auto stride = static_cast<std::size_t>(2 * n + 1);
    double acc = coeffs[static_cast<std::size_t>(n)];
    for (int j = 1; j <= n; ++j) {
        const double angle = s * static_cast<double>(j) * lambda;
        const double c = std::cos(angle), si = std::sin(angle);
        const double re = coeffs[static_cast<std::size_t>(n + j)];
        const double im = coeffs[stride + static_cast<std::size_t>(n + j)];
        acc += 2.0 * (re * c - im * si);  // c_j e^{i j s z} + conjugate
    }
    return acc;
}

double levitan_polynomial(const std::function<double(double)>& f, double sigma, int n,
                          double lambda) {
    const auto coeffs = levitan_coefficients(f, sigma, n);
    return levitan_eval(coeffs, sigma, n, lambda);
}

}  // namespace specfit
