#include "specfit/regression.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "specfit/errors.hpp"
#include "specfit/fft.hpp"
#include "specfit/rng.hpp"

namespace specfit {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

double max_model_frequency(const RegressionModel& m) {
    double f = 0.0;
    if (m.family == RegressionFamily::ExponentialInner) {
        for (const auto& r : m.regressors)
            if (r.kind != RegressorKind::Constant) f = std::max(f, std::fabs(r.frequency));
    } else {
        for (int k = 0; k < m.harmonics; ++k) f = std::max(f, m.box[3 * k + 2].hi);
    }
    return f;
}

// composite Simpson over [0, T] with resolution tied to the fastest regressor
double simpson_over_horizon(const RegressionModel& m, double horizon,
                            const std::function<double(double)>& f) {
    const double fmax = max_model_frequency(m);
    std::size_t n = 2048;
    if (fmax > 0.0)
        n = std::max<std::size_t>(n, static_cast<std::size_t>(horizon * fmax * 16.0 / M_PI));
    if (n % 2 == 1) ++n;
    const double h = horizon / static_cast<double>(n);
    double s = f(0.0) + f(horizon);
    for (std::size_t i = 1; i < n; ++i) s += f(h * static_cast<double>(i)) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}
}  // namespace

double RegressorTerm::operator()(double t) const {
    switch (kind) {
        case RegressorKind::Constant: return amplitude;
        case RegressorKind::Cosine: return amplitude * std::cos(frequency * t);
        case RegressorKind::Sine: return amplitude * std::sin(frequency * t);
    }
    return 0.0;
}

std::size_t RegressionModel::dimension() const {
    return family == RegressionFamily::ExponentialInner ? regressors.size()
                                                        : static_cast<std::size_t>(3 * harmonics);
}

void RegressionModel::validate() const {
    if (box.size() != dimension())
        throw std::invalid_argument("RegressionModel: box size must equal parameter dimension");
    if (family == RegressionFamily::TrigonometricSum) {
        if (harmonics < 1) throw std::invalid_argument("RegressionModel: harmonics must be >= 1");
        for (int k = 0; k < harmonics; ++k) {
            const Interval& fi = box[3 * k + 2];
            if (fi.lo <= 0.0 || fi.hi <= fi.lo)
                throw std::invalid_argument("RegressionModel: frequency box must satisfy 0 < lo < hi");
        }
    } else if (regressors.empty()) {
        throw std::invalid_argument("RegressionModel: no regressors");
    }
    for (const auto& iv : box)
        if (!(iv.hi >= iv.lo)) throw std::invalid_argument("RegressionModel: empty box interval");
}

bool RegressionModel::in_box(const Vector& alpha, double slack) const {
    if (alpha.size() != dimension()) return false;
    for (std::size_t i = 0; i < alpha.size(); ++i)
        if (!box[i].contains(alpha[i], slack)) return false;
    if (family == RegressionFamily::TrigonometricSum)
        for (int k = 0; k + 1 < harmonics; ++k)
            if (alpha[3 * k + 2] > alpha[3 * (k + 1) + 2] + slack) return false;
    return true;
}

Vector RegressionModel::clamp_to_box(const Vector& alpha) const {
    Vector out = alpha;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = box[i].clamp(out[i]);
    if (family == RegressionFamily::TrigonometricSum) {
        // keep the frequency sequence nondecreasing
        for (int k = 1; k < harmonics; ++k)
            out[3 * k + 2] = std::max(out[3 * k + 2], out[3 * (k - 1) + 2]);
    }
    return out;
}

double reg_eval(const RegressionModel& m, double t, const Vector& alpha) {
    if (!m.in_box(alpha, 1e-9))
        throw std::domain_error("reg_eval: alpha outside the parameter box");
    if (m.family == RegressionFamily::ExponentialInner) {
        double inner = 0.0;
        for (std::size_t i = 0; i < m.regressors.size(); ++i) inner += alpha[i] * m.regressors[i](t);
        return std::exp(inner);
    }
    double g = 0.0;
    for (int k = 0; k < m.harmonics; ++k) {
        const double a = alpha[3 * k], b = alpha[3 * k + 1], phi = alpha[3 * k + 2];
        g += a * std::cos(phi * t) + b * std::sin(phi * t);
    }
    return g;
}

Vector reg_grad(const RegressionModel& m, double t, const Vector& alpha) {
    Vector g(m.dimension(), 0.0);
    if (m.family == RegressionFamily::ExponentialInner) {
        const double val = reg_eval(m, t, alpha);
        for (std::size_t i = 0; i < m.regressors.size(); ++i) g[i] = m.regressors[i](t) * val;
        return g;
    }
    if (!m.in_box(alpha, 1e-9))
        throw std::domain_error("reg_grad: alpha outside the parameter box");
    for (int k = 0; k < m.harmonics; ++k) {
        const double a = alpha[3 * k], b = alpha[3 * k + 1], phi = alpha[3 * k + 2];
        const double c = std::cos(phi * t), s = std::sin(phi * t);
        g[3 * k] = c;
        g[3 * k + 1] = s;
        g[3 * k + 2] = t * (-a * s + b * c);
    }
    return g;
}

double reg_hess_entry(const RegressionModel& m, double t, const Vector& alpha, std::size_t i,
                      std::size_t l) {
    if (m.family == RegressionFamily::ExponentialInner) {
        const double val = reg_eval(m, t, alpha);
        return m.regressors[i](t) * m.regressors[l](t) * val;
    }
    if (!m.in_box(alpha, 1e-9))
        throw std::domain_error("reg_hess_entry: alpha outside the parameter box");
    if (i > l) std::swap(i, l);
    if (i / 3 != l / 3) return 0.0;  // harmonics do not interact
    const std::size_t k = i / 3;
    const double a = alpha[3 * k], b = alpha[3 * k + 1], phi = alpha[3 * k + 2];
    const double c = std::cos(phi * t), s = std::sin(phi * t);
    const std::size_t ii = i % 3, ll = l % 3;
    if (ll < 2) return 0.0;                       // A/B block is linear
    if (ii == 0) return -t * s;                   // d2/dA dphi
    if (ii == 1) return t * c;                    // d2/dB dphi
    return -t * t * (a * c + b * s);              // d2/dphi2
}

void reg_eval_grad_unchecked(const RegressionModel& m, double t, const Vector& alpha,
                             double& value, double* grad) {
    if (m.family == RegressionFamily::ExponentialInner) {
        double inner = 0.0;
        for (std::size_t i = 0; i < m.regressors.size(); ++i) inner += alpha[i] * m.regressors[i](t);
        value = std::exp(inner);
        for (std::size_t i = 0; i < m.regressors.size(); ++i) grad[i] = m.regressors[i](t) * value;
        return;
    }
    value = 0.0;
    for (int k = 0; k < m.harmonics; ++k) {
        const double a = alpha[3 * k], b = alpha[3 * k + 1], phi = alpha[3 * k + 2];
        const double c = std::cos(phi * t), s = std::sin(phi * t);
        value += a * c + b * s;
        grad[3 * k] = c;
        grad[3 * k + 1] = s;
        grad[3 * k + 2] = t * (-a * s + b * c);
    }
}

Vector reg_norming(const RegressionModel& m, const Vector& alpha, double horizon) {
    if (horizon <= 0.0) throw std::invalid_argument("reg_norming: horizon must be > 0");
    const std::size_t q = m.dimension();
    Vector d(q);
    for (std::size_t i = 0; i < q; ++i) {
        const double d2 = simpson_over_horizon(m, horizon, [&](double t) {
            const double gi = reg_grad(m, t, alpha)[i];
            return gi * gi;
        });
        if (d2 < 1e-30)
            throw SingularNormingError("reg_norming: zero-gradient coordinate " + std::to_string(i));
        d[i] = std::sqrt(d2);
    }
    return d;
}

double reg_parameter_gap(const RegressionModel& m, const Vector& a1, const Vector& a2,
                         double horizon) {
    return simpson_over_horizon(m, horizon, [&](double t) {
        const double diff = reg_eval(m, t, a1) - reg_eval(m, t, a2);
        return diff * diff;
    });
}

double lse_objective(const RegressionModel& m, const NoisePath& data, const Vector& alpha) {
    double s = 0.0;
    for (std::size_t k = 0; k < data.values.size(); ++k) {
        const double r = data.values[k] - reg_eval(m, data.delta * static_cast<double>(k), alpha);
        s += r * r;
    }
    return s * data.delta;
}

NoisePath residuals(const RegressionModel& m, const NoisePath& data, const Vector& alpha_hat) {
    NoisePath out;
    out.delta = data.delta;
    out.seed = data.seed;
    out.values.resize(data.values.size());
    for (std::size_t k = 0; k < data.values.size(); ++k)
        out.values[k] =
            data.values[k] - reg_eval(m, data.delta * static_cast<double>(k), alpha_hat);
    return out;
}

namespace {

struct LMOutcome {
    Vector alpha;
    double sse = 0.0;
    bool converged = false;
    int iterations = 0;
};

// Levenberg-Marquardt with box projection; Marquardt's diagonal damping makes
// the step scale-free across amplitude and frequency coordinates.
LMOutcome levenberg_marquardt(const RegressionModel& m, const NoisePath& data,
                              Vector alpha, int max_iter = 120) {
    const std::size_t q = m.dimension();
    const std::size_t n = data.values.size();
    alpha = m.clamp_to_box(alpha);
    LMOutcome out;
    double sse = lse_objective(m, data, alpha);
    double mu = 1e-3;
    int iter = 0;
    std::vector<double> g(q);
    for (; iter < max_iter; ++iter) {
        Matrix jtj(q, q);
        Vector jtr(q, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            const double t = data.delta * static_cast<double>(k);
            double value;
            reg_eval_grad_unchecked(m, t, alpha, value, g.data());
            const double r = data.values[k] - value;
            for (std::size_t i = 0; i < q; ++i) {
                jtr[i] += g[i] * r;
                for (std::size_t j = i; j < q; ++j) jtj(i, j) += g[i] * g[j];
            }
        }
        for (std::size_t i = 0; i < q; ++i)
            for (std::size_t j = 0; j < i; ++j) jtj(i, j) = jtj(j, i);

        double gnorm = 0.0;
        for (std::size_t i = 0; i < q; ++i) gnorm = std::max(gnorm, std::fabs(jtr[i]));
        if (gnorm * data.delta < 1e-12 * (1.0 + sse)) {
            out.converged = true;
            break;
        }

        bool stepped = false;
        for (int tries = 0; tries < 18; ++tries) {
            Matrix damped = jtj;
            for (std::size_t i = 0; i < q; ++i)
                damped(i, i) += mu * std::max(jtj(i, i), 1e-12);
            Vector delta;
            try {
                delta = solve(damped, jtr);
            } catch (const std::exception&) {
                mu *= 10.0;
                continue;
            }
            Vector cand(q);
            for (std::size_t i = 0; i < q; ++i) cand[i] = alpha[i] + delta[i];
            cand = m.clamp_to_box(cand);
            const double cand_sse = lse_objective(m, data, cand);
            if (cand_sse < sse) {
                double step = 0.0;
                for (std::size_t i = 0; i < q; ++i)
                    step = std::max(step, std::fabs(cand[i] - alpha[i]) /
                                              std::max(1.0, m.box[i].width()));
                alpha = cand;
                const double drop = sse - cand_sse;
                sse = cand_sse;
                mu = std::max(mu / 3.0, 1e-12);
                stepped = true;
                if (step < 1e-13 || drop < 1e-15 * (1.0 + sse)) {
                    out.converged = true;
                    iter = max_iter;  // flag outer loop exit
                }
                break;
            }
            mu *= 10.0;
        }
        if (!stepped) {
            out.converged = true;  // no descent direction left at this scale
            break;
        }
        if (iter >= max_iter) break;
    }
    out.alpha = alpha;
    out.sse = sse;
    out.iterations = std::min(iter, max_iter);
    return out;
}

// Periodogram of the raw data restricted to a frequency band; returns bin
// frequencies of local maxima ordered by height.
std::vector<double> periodogram_peaks(const NoisePath& data, double lo, double hi,
                                      std::size_t max_peaks) {
    const std::size_t n = data.values.size();
    const double horizon = data.horizon();
    const auto bins = dft_real(data.values);
    const std::size_t half = n / 2;
    std::vector<std::pair<double, double>> peaks;  // (power, frequency)
    for (std::size_t j = 1; j + 1 < half; ++j) {
        const double freq = kTwoPi * static_cast<double>(j) / horizon;
        if (freq < lo || freq > hi) continue;
        const double p = std::norm(bins[j]);
        if (p >= std::norm(bins[j - 1]) && p > std::norm(bins[j + 1]))
            peaks.emplace_back(p, freq);
    }
    std::sort(peaks.begin(), peaks.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<double> out;
    for (const auto& [p, f] : peaks) {
        (void)p;
        out.push_back(f);
        if (out.size() == max_peaks) break;
    }
    return out;
}

// Given frequencies, amplitudes are a linear least squares problem.
Vector amplitudes_for_frequencies(const RegressionModel& m, const NoisePath& data,
                                  const std::vector<double>& freqs) {
    const std::size_t nh = freqs.size();
    const std::size_t dim = 2 * nh;
    Matrix ata(dim, dim);
    Vector atb(dim, 0.0);
    const std::size_t n = data.values.size();
    std::vector<double> basis(dim);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = data.delta * static_cast<double>(k);
        for (std::size_t h = 0; h < nh; ++h) {
            basis[2 * h] = std::cos(freqs[h] * t);
            basis[2 * h + 1] = std::sin(freqs[h] * t);
        }
        for (std::size_t i = 0; i < dim; ++i) {
            atb[i] += basis[i] * data.values[k];
            for (std::size_t j = i; j < dim; ++j) ata(i, j) += basis[i] * basis[j];
        }
    }
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < i; ++j) ata(i, j) = ata(j, i);
    Vector ab = solve(ata, atb);
    Vector alpha(3 * nh);
    for (std::size_t h = 0; h < nh; ++h) {
        alpha[3 * h] = m.box[3 * h].clamp(ab[2 * h]);
        alpha[3 * h + 1] = m.box[3 * h + 1].clamp(ab[2 * h + 1]);
        alpha[3 * h + 2] = m.box[3 * h + 2].clamp(freqs[h]);
    }
    return alpha;
}

void canonicalize_harmonics(const RegressionModel& m, Vector& alpha) {
    if (m.family != RegressionFamily::TrigonometricSum) return;
    std::vector<std::array<double, 3>> triples(m.harmonics);
    for (int k = 0; k < m.harmonics; ++k)
        triples[k] = {alpha[3 * k], alpha[3 * k + 1], alpha[3 * k + 2]};
    std::sort(triples.begin(), triples.end(),
              [](const auto& a, const auto& b) { return a[2] < b[2]; });
    for (int k = 0; k < m.harmonics; ++k) {
        alpha[3 * k] = triples[k][0];
        alpha[3 * k + 1] = triples[k][1];
        alpha[3 * k + 2] = triples[k][2];
    }
}

bool lex_less(const Vector& a, const Vector& b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) return true;
        if (a[i] > b[i]) return false;
    }
    return false;
}

}  // namespace

LSEFit lse_fit(const RegressionModel& m, const NoisePath& data, const Vector& init) {
    m.validate();
    if (data.values.empty()) throw ShapeError("lse_fit: empty data");
    if (init.size() != m.dimension())
        throw ShapeError("lse_fit: init dimension does not match the model");
    if (!m.in_box(init, 1e-9)) throw std::domain_error("lse_fit: init outside the box");

    std::vector<Vector> starts{m.clamp_to_box(init)};
    if (m.family == RegressionFamily::TrigonometricSum) {
        double band_lo = m.box[2].lo, band_hi = m.box[2].hi;
        for (int k = 0; k < m.harmonics; ++k) {
            band_lo = std::min(band_lo, m.box[3 * k + 2].lo);
            band_hi = std::max(band_hi, m.box[3 * k + 2].hi);
        }
        const std::size_t nh = static_cast<std::size_t>(m.harmonics);
        const double bin = kTwoPi / data.horizon();
        auto peaks = periodogram_peaks(data, band_lo, band_hi, nh + 3);
        if (peaks.size() >= nh) {
            std::vector<double> primary(peaks.begin(), peaks.begin() + nh);
            std::sort(primary.begin(), primary.end());
            starts.push_back(amplitudes_for_frequencies(m, data, primary));
            // neighbouring bins of the strongest peak guard against scalloping
            for (double shift : {-bin, bin}) {
                std::vector<double> variant = primary;
                variant[0] += shift;
                std::sort(variant.begin(), variant.end());
                starts.push_back(amplitudes_for_frequencies(m, data, variant));
            }
        }
    }

    LSEFit best;
    bool have_best = false;
    for (const auto& start : starts) {
        LMOutcome run = levenberg_marquardt(m, data, start);
        canonicalize_harmonics(m, run.alpha);
        const bool better =
            !have_best || run.sse < best.sse * (1.0 - 1e-9) ||
            (std::fabs(run.sse - best.sse) <= 1e-9 * std::max(best.sse, 1e-300) &&
             lex_less(run.alpha, best.alpha_hat));
        if (better) {
            best.alpha_hat = run.alpha;
            best.sse = run.sse;
            best.converged = run.converged;
            best.iterations = run.iterations;
            have_best = true;
        }
    }
    best.starts = static_cast<int>(starts.size());
    best.norming = reg_norming(m, best.alpha_hat, data.horizon());
    return best;
}

double estimate_c0(const RegressionModel& m, const Vector& alpha0, double horizon, int samples,
                   std::uint64_t seed) {
    m.validate();
    const std::size_t q = m.dimension();
    const Vector d0 = reg_norming(m, alpha0, horizon);
    Rng rng(seed);
    double c0 = 0.0;
    for (int s = 0; s < samples; ++s) {
        Vector alpha(q);
        for (std::size_t i = 0; i < q; ++i) alpha[i] = rng.uniform(m.box[i].lo, m.box[i].hi);
        canonicalize_harmonics(m, alpha);
        double denom = 0.0;
        for (std::size_t i = 0; i < q; ++i) {
            const double z = d0[i] * (alpha[i] - alpha0[i]);
            denom += z * z;
        }
        if (denom < 1e-20) continue;
        c0 = std::max(c0, reg_parameter_gap(m, alpha, alpha0, horizon) / denom);
    }
    return c0;
}

}  // namespace specfit
