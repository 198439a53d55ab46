#include "specfit/whittle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "specfit/errors.hpp"
#include "specfit/parallel.hpp"
#include "specfit/quadrature.hpp"
#include "specfit/stats.hpp"

namespace specfit {

namespace {

// Precomputed grid data shared by every contrast evaluation of one fit.
struct ContrastContext {
    const SpectralModel* model;
    std::vector<double> lambdas;
    std::vector<double> tw;  // trapezoid coefficient times w(lambda)
    std::vector<double> intensity;
    double weight_mass = 0.0;  // sum of tw; the natural contrast scale

    ContrastContext(const Periodogram& p, const SpectralModel& s, const WeightSpec& w)
        : model(&s), lambdas(p.lambdas), intensity(p.values) {
        if (lambdas.size() < 2) throw ShapeError("contrast grid needs at least two points");
        const double h = lambdas[1] - lambdas[0];
        tw.resize(lambdas.size());
        for (std::size_t i = 0; i < lambdas.size(); ++i) {
            const double coeff = (i == 0 || i + 1 == lambdas.size()) ? 0.5 * h : h;
            tw[i] = coeff * weight_eval(w, lambdas[i], WeightKind::W);
            weight_mass += tw[i];
        }
    }

    double scale(double value) const { return std::max(std::fabs(value), weight_mass); }

    double value(const Vector& theta) const {
        double u = 0.0;
        double f;
        for (std::size_t i = 0; i < lambdas.size(); ++i) {
            spectral_eval_grad_unchecked(*model, lambdas[i], theta, f, nullptr);
            if (!(f > 0.0)) throw NumericError("contrast_field: nonpositive model density");
            u += tw[i] * (std::log(f) + intensity[i] / f);
        }
        return u;
    }

    double value_grad(const Vector& theta, Vector& grad) const {
        const std::size_t m = theta.size();
        std::fill(grad.begin(), grad.end(), 0.0);
        double u = 0.0;
        double f;
        double df[4];
        for (std::size_t i = 0; i < lambdas.size(); ++i) {
            spectral_eval_grad_unchecked(*model, lambdas[i], theta, f, df);
            if (!(f > 0.0)) throw NumericError("contrast_field: nonpositive model density");
            const double ratio = intensity[i] / f;
            u += tw[i] * (std::log(f) + ratio);
            const double factor = tw[i] * (1.0 - ratio) / f;
            for (std::size_t j = 0; j < m; ++j) grad[j] += factor * df[j];
        }
        return u;
    }
};

void check_theta(const SpectralModel& s, const Vector& theta, const char* who) {
    if (s.eval_only)
        throw std::invalid_argument(std::string(who) + ": model is evaluation-only");
    if (!s.in_box(theta, 1e-9))
        throw std::domain_error(std::string(who) + ": theta outside the parameter box");
}

Vector projected_gradient(const SpectralModel& s, const Vector& theta, const Vector& grad) {
    Vector pg = grad;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double width = s.box[i].width();
        if (theta[i] <= s.box[i].lo + 1e-12 * width && pg[i] > 0.0) pg[i] = 0.0;
        if (theta[i] >= s.box[i].hi - 1e-12 * width && pg[i] < 0.0) pg[i] = 0.0;
    }
    return pg;
}

struct MinimizeOutcome {
    Vector theta;
    double value = std::numeric_limits<double>::infinity();
    bool converged = false;
    int iterations = 0;
    int evals = 0;
};

MinimizeOutcome bfgs_box(const ContrastContext& ctx, const SpectralModel& s, Vector theta,
                         int max_iter = 300) {
    const std::size_t m = theta.size();
    MinimizeOutcome out;
    theta = s.clamp_to_box(theta);
    Vector grad(m), new_grad(m);
    double value = ctx.value_grad(theta, grad);
    ++out.evals;
    Matrix h = Matrix::identity(m);
    int tiny_steps = 0;
    for (int iter = 0; iter < max_iter; ++iter) {
        out.iterations = iter + 1;
        const Vector pg = projected_gradient(s, theta, grad);
        double pg_inf = 0.0;
        for (double gje : pg) pg_inf = std::max(pg_inf, std::fabs(gje));
        if (pg_inf <= 1e-10 * ctx.scale(value)) {
            out.converged = true;
            break;
        }
        Vector dir(m, 0.0);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) dir[i] -= h(i, j) * grad[j];
        if (dot(dir, grad) >= 0.0) {  // reset on a non-descent direction
            h = Matrix::identity(m);
            for (std::size_t i = 0; i < m; ++i) dir[i] = -grad[i];
        }
        double step = 1.0;
        bool accepted = false;
        Vector cand(m);
        double cand_value = 0.0;
        for (int ls = 0; ls < 50; ++ls) {
            for (std::size_t i = 0; i < m; ++i) cand[i] = theta[i] + step * dir[i];
            cand = s.clamp_to_box(cand);
            double descent = 0.0;
            for (std::size_t i = 0; i < m; ++i) descent += grad[i] * (cand[i] - theta[i]);
            cand_value = ctx.value(cand);
            ++out.evals;
            if (descent < 0.0 && cand_value <= value + 1e-4 * descent) {
                accepted = true;
                break;
            }
            step *= 0.5;
            if (step < 1e-14) break;
        }
        if (!accepted) break;
        cand_value = ctx.value_grad(cand, new_grad);
        ++out.evals;
        Vector sdiff(m), ydiff(m);
        double max_rel_step = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            sdiff[i] = cand[i] - theta[i];
            ydiff[i] = new_grad[i] - grad[i];
            max_rel_step = std::max(max_rel_step, std::fabs(sdiff[i]) / s.box[i].width());
        }
        const double sy = dot(sdiff, ydiff);
        if (sy > 1e-14 * norm2(sdiff) * norm2(ydiff)) {
            // BFGS inverse update
            Vector hy(m, 0.0);
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < m; ++j) hy[i] += h(i, j) * ydiff[j];
            const double yhy = dot(ydiff, hy);
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < m; ++j)
                    h(i, j) += (sy + yhy) * sdiff[i] * sdiff[j] / (sy * sy) -
                               (hy[i] * sdiff[j] + sdiff[i] * hy[j]) / sy;
        }
        theta = cand;
        value = cand_value;
        grad = new_grad;
        tiny_steps = max_rel_step < 1e-13 ? tiny_steps + 1 : 0;
        if (tiny_steps >= 2) {
            out.converged = true;
            break;
        }
    }
    out.theta = theta;
    out.value = value;
    return out;
}

// first-order interior optimality, scale-relative; the definitive converged flag
bool gradient_test(const ContrastContext& ctx, const SpectralModel& s, const Vector& theta,
                   double value, double rel_tol) {
    Vector grad(theta.size());
    ctx.value_grad(theta, grad);
    const Vector pg = projected_gradient(s, theta, grad);
    double pg_inf = 0.0;
    for (double g : pg) pg_inf = std::max(pg_inf, std::fabs(g));
    return pg_inf <= rel_tol * ctx.scale(value);
}

MinimizeOutcome nelder_mead_box(const ContrastContext& ctx, const SpectralModel& s,
                                const Vector& start, int max_evals = 800) {
    const std::size_t m = start.size();
    MinimizeOutcome out;
    std::vector<std::pair<double, Vector>> simplex;
    auto eval = [&](const Vector& th) {
        ++out.evals;
        return ctx.value(s.clamp_to_box(th));
    };
    simplex.emplace_back(eval(start), s.clamp_to_box(start));
    for (std::size_t i = 0; i < m; ++i) {
        Vector v = start;
        const double h = 0.05 * s.box[i].width();
        v[i] = v[i] + h <= s.box[i].hi ? v[i] + h : v[i] - h;
        v = s.clamp_to_box(v);
        simplex.emplace_back(eval(v), v);
    }
    auto order = [&] {
        std::sort(simplex.begin(), simplex.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
    };
    order();
    while (out.evals < max_evals) {
        ++out.iterations;
        if (simplex.back().first - simplex.front().first <
            1e-13 * (1.0 + std::fabs(simplex.front().first))) {
            out.converged = true;
            break;
        }
        Vector centroid(m, 0.0);
        for (std::size_t k = 0; k + 1 < simplex.size(); ++k)
            for (std::size_t i = 0; i < m; ++i) centroid[i] += simplex[k].second[i];
        for (double& c : centroid) c /= static_cast<double>(m);
        auto blend = [&](double coef) {
            Vector v(m);
            for (std::size_t i = 0; i < m; ++i)
                v[i] = centroid[i] + coef * (simplex.back().second[i] - centroid[i]);
            return s.clamp_to_box(v);
        };
        Vector refl = blend(-1.0);
        const double f_refl = eval(refl);
        if (f_refl < simplex.front().first) {
            Vector expd = blend(-2.0);
            const double f_expd = eval(expd);
            simplex.back() = f_expd < f_refl ? std::make_pair(f_expd, expd)
                                             : std::make_pair(f_refl, refl);
        } else if (f_refl < simplex[simplex.size() - 2].first) {
            simplex.back() = {f_refl, refl};
        } else {
            Vector contr = blend(0.5);
            const double f_contr = eval(contr);
            if (f_contr < simplex.back().first) {
                simplex.back() = {f_contr, contr};
            } else {
                for (std::size_t k = 1; k < simplex.size(); ++k) {
                    for (std::size_t i = 0; i < m; ++i)
                        simplex[k].second[i] =
                            0.5 * (simplex[k].second[i] + simplex.front().second[i]);
                    simplex[k].first = eval(simplex[k].second);
                }
            }
        }
        order();
    }
    out.theta = simplex.front().second;
    out.value = simplex.front().first;
    return out;
}

bool lex_less(const Vector& a, const Vector& b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) return true;
        if (a[i] > b[i]) return false;
    }
    return false;
}

}  // namespace

double contrast_field(const Periodogram& p, const SpectralModel& s, const WeightSpec& w,
                      const Vector& theta) {
    check_theta(s, theta, "contrast_field");
    ContrastContext ctx(p, s, w);
    const double u = ctx.value(theta);
    if (!std::isfinite(u)) throw NumericError("contrast_field: non-finite value");
    return u;
}

double contrast_function_K(const SpectralModel& s, const WeightSpec& w, const Vector& theta0,
                           const Vector& theta) {
    check_theta(s, theta0, "contrast_function_K");
    check_theta(s, theta, "contrast_function_K");
    auto integrand = [&](double lambda) {
        const double f0 = spectral_eval(s, lambda, theta0);
        const double f = spectral_eval(s, lambda, theta);
        const double r = f0 / f;
        return (r - 1.0 - std::log(r)) * weight_eval(w, lambda, WeightKind::W);
    };
    return integrate_even_line(integrand, 1e-13, 1e-12).value;
}

AsymptoticMatrices asymptotic_matrices(const SpectralModel& s, const WeightSpec& w,
                                       double gamma2, const Vector& theta, double quad_tol) {
    check_theta(s, theta, "asymptotic_matrices");
    const std::size_t m = s.dimension();
    AsymptoticMatrices out{Matrix(m, m), Matrix(m, m), Matrix(m, m)};
    auto dlogf = [&](double lambda, std::size_t i) {
        double f;
        double df[4];
        spectral_eval_grad_unchecked(s, lambda, theta, f, df);
        return df[i] / f;
    };
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i; j < m; ++j) {
            auto q1 = integrate_even_line(
                [&](double l) {
                    return dlogf(l, i) * dlogf(l, j) * weight_eval(w, l, WeightKind::W);
                },
                quad_tol, quad_tol);
            if (!q1.converged) throw NumericError("asymptotic_matrices: W1 quadrature failed");
            out.w1(i, j) = out.w1(j, i) = q1.value;
            auto q2 = integrate_even_line(
                [&](double l) {
                    const double wl = weight_eval(w, l, WeightKind::W);
                    return dlogf(l, i) * dlogf(l, j) * wl * wl;
                },
                quad_tol, quad_tol);
            if (!q2.converged) throw NumericError("asymptotic_matrices: W2 quadrature failed");
            out.w2(i, j) = out.w2(j, i) = 4.0 * M_PI * q2.value;
        }
    Vector c(m);
    for (std::size_t i = 0; i < m; ++i) {
        auto qc = integrate_even_line(
            [&](double l) { return dlogf(l, i) * weight_eval(w, l, WeightKind::W); }, quad_tol,
            quad_tol);
        if (!qc.converged) throw NumericError("asymptotic_matrices: V quadrature failed");
        c[i] = qc.value;
    }
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) out.v(i, j) = gamma2 * c[i] * c[j];
    return out;
}

Matrix mce_covariance(const Matrix& w1, const Matrix& w2, const Matrix& v) {
    const double cond = symmetric_condition(w1);
    if (!(cond < 1e12))
        throw IllConditionedError("mce_covariance: W1 condition number " + std::to_string(cond));
    const Matrix w1inv = inverse(w1);
    Matrix w = w1inv * (w2 + v) * w1inv;
    w.symmetrize();
    return w;
}

std::vector<Interval> confidence_intervals(const Vector& theta_hat, const Matrix& w,
                                           double horizon, double level) {
    if (!(level > 0.0 && level < 1.0))
        throw std::invalid_argument("confidence_intervals: level outside (0,1)");
    const double z = normal_quantile(0.5 * (1.0 + level));
    std::vector<Interval> ci(theta_hat.size());
    for (std::size_t i = 0; i < theta_hat.size(); ++i) {
        const double var = std::max(w(i, i), 0.0);
        const double half = z * std::sqrt(var / horizon);
        ci[i] = {theta_hat[i] - half, theta_hat[i] + half};
    }
    return ci;
}

WhittleFit whittle_fit(const Periodogram& p, const SpectralModel& s, const WeightSpec& w,
                       const Vector& init, const WhittleOptions& opts) {
    s.validate();
    check_theta(s, init, "whittle_fit");
    const std::size_t m = s.dimension();
    ContrastContext ctx(p, s, w);

    // deterministic multistart: init plus the best points of a coarse scan
    std::vector<Vector> starts{s.clamp_to_box(init)};
    int scan_evals = 0;
    if (opts.scan_points_per_dim >= 2) {
        const int npd = opts.scan_points_per_dim;
        std::size_t total = 1;
        for (std::size_t i = 0; i < m; ++i) total *= static_cast<std::size_t>(npd);
        std::vector<double> values(total);
        std::vector<Vector> points(total);
        parallel_for(total, opts.threads, [&](std::size_t flat) {
            Vector th(m);
            std::size_t rem = flat;
            for (std::size_t i = m; i-- > 0;) {
                const int gi = static_cast<int>(rem % npd);
                rem /= npd;
                const Interval& iv = s.box[i];
                th[i] = iv.lo + iv.width() * (gi + 0.5) / npd;  // interior nodes
            }
            points[flat] = th;
            values[flat] = ctx.value(th);
        });
        scan_evals = static_cast<int>(total);
        std::size_t best = 0, second = 0;
        for (std::size_t i = 1; i < total; ++i)
            if (values[i] < values[best]) best = i;
        double second_best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < total; ++i) {
            if (i == best) continue;
            double dist = 0.0;
            for (std::size_t j = 0; j < m; ++j)
                dist = std::max(dist,
                                std::fabs(points[i][j] - points[best][j]) / s.box[j].width());
            if (dist > 1.5 / npd && values[i] < second_best) {
                second_best = values[i];
                second = i;
            }
        }
        starts.push_back(points[best]);
        if (std::isfinite(second_best)) starts.push_back(points[second]);
    }

    MinimizeOutcome best;
    int total_evals = scan_evals, total_iters = 0;
    for (const auto& start : starts) {
        MinimizeOutcome run = bfgs_box(ctx, s, start);
        total_evals += run.evals;
        total_iters += run.iterations;
        if (!run.converged) {
            MinimizeOutcome polish = nelder_mead_box(ctx, s, run.theta);
            total_evals += polish.evals;
            if (polish.value < run.value) run = polish;
        }
        if (run.value < best.value - 1e-15 ||
            (std::fabs(run.value - best.value) <= 1e-12 * std::max(1.0, std::fabs(best.value)) &&
             !best.theta.empty() && lex_less(run.theta, best.theta))) {
            best = run;
        }
    }
    // fresh-Hessian restarts shake off line-search stalls just above the optimum
    for (int restart = 0; restart < 3; ++restart) {
        MinimizeOutcome again = bfgs_box(ctx, s, best.theta);
        total_evals += again.evals;
        if (again.value >= best.value - 1e-13 * ctx.scale(best.value)) break;
        again.converged = again.converged || best.converged;
        best = again;
    }

    WhittleFit fit;
    fit.theta_hat = best.theta;
    fit.contrast = best.value;
    fit.iterations = total_iters;
    fit.contrast_evals = total_evals;
    fit.confidence_level = opts.confidence_level;
    fit.gamma2 = opts.gamma2;
    for (std::size_t i = 0; i < m; ++i) {
        const double width = s.box[i].width();
        if (fit.theta_hat[i] <= s.box[i].lo + 1e-9 * width ||
            fit.theta_hat[i] >= s.box[i].hi - 1e-9 * width)
            fit.on_boundary = true;
    }
    fit.converged = !fit.on_boundary && gradient_test(ctx, s, fit.theta_hat, fit.contrast, 1e-6);
    fit.contrast_evals += 1;
    if (opts.compute_matrices) {
        AsymptoticMatrices am = asymptotic_matrices(s, w, opts.gamma2, fit.theta_hat, 1e-10);
        fit.w1 = am.w1;
        fit.w2 = am.w2;
        fit.v = am.v;
        fit.w = mce_covariance(am.w1, am.w2, am.v);
        fit.ci = confidence_intervals(fit.theta_hat, fit.w, p.horizon, opts.confidence_level);
    }
    return fit;
}

std::pair<Vector, double> grid_oracle(const Periodogram& p, const SpectralModel& s,
                                      const WeightSpec& w, const GridSpec& grid,
                                      unsigned threads) {
    const std::size_t m = s.dimension();
    if (grid.points_per_dim.size() != m)
        throw std::invalid_argument("grid_oracle: points_per_dim dimension mismatch");
    const std::vector<Interval>& box = grid.box.empty() ? s.box : grid.box;
    ContrastContext ctx(p, s, w);
    std::size_t total = 1;
    for (int n : grid.points_per_dim) {
        if (n < 1) throw std::invalid_argument("grid_oracle: need >= 1 point per dim");
        total *= static_cast<std::size_t>(n);
    }
    std::vector<double> values(total);
    parallel_for(total, threads, [&](std::size_t flat) {
        Vector th(m);
        std::size_t rem = flat;
        for (std::size_t i = m; i-- > 0;) {
            const int n = grid.points_per_dim[i];
            const int gi = static_cast<int>(rem % static_cast<std::size_t>(n));
            rem /= static_cast<std::size_t>(n);
            th[i] = n == 1 ? 0.5 * (box[i].lo + box[i].hi)
                           : box[i].lo + box[i].width() * gi / (n - 1);
        }
        values[flat] = ctx.value(s.clamp_to_box(th));
    });
    // flat index iterates coordinates lexicographically, so the first strict
    // minimum is the lexicographically smallest argmin
    std::size_t best = 0;
    for (std::size_t i = 1; i < total; ++i)
        if (values[i] < values[best]) best = i;
    Vector th(m);
    std::size_t rem = best;
    for (std::size_t i = m; i-- > 0;) {
        const int n = grid.points_per_dim[i];
        const int gi = static_cast<int>(rem % static_cast<std::size_t>(n));
        rem /= static_cast<std::size_t>(n);
        th[i] = n == 1 ? 0.5 * (box[i].lo + box[i].hi)
                       : box[i].lo + box[i].width() * gi / (n - 1);
    }
    return {s.clamp_to_box(th), values[best]};
}

std::pair<Vector, double> grid_refine_oracle(const Periodogram& p, const SpectralModel& s,
                                             const WeightSpec& w, int points_per_dim,
                                             int rounds, unsigned threads) {
    const std::size_t m = s.dimension();
    ContrastContext ctx(p, s, w);

    // coarse pass over the full box
    GridSpec coarse;
    coarse.points_per_dim.assign(m, points_per_dim);
    coarse.box = s.box;
    std::size_t total = 1;
    for (int n : coarse.points_per_dim) total *= static_cast<std::size_t>(n);
    std::vector<double> values(total);
    std::vector<Vector> points(total);
    parallel_for(total, threads, [&](std::size_t flat) {
        Vector th(m);
        std::size_t rem = flat;
        for (std::size_t i = m; i-- > 0;) {
            const int n = points_per_dim;
            const int gi = static_cast<int>(rem % static_cast<std::size_t>(n));
            rem /= static_cast<std::size_t>(n);
            th[i] = s.box[i].lo + s.box[i].width() * gi / (n - 1);
        }
        points[flat] = th;
        values[flat] = ctx.value(th);
    });

    // several well-separated candidates guard against basins the coarse grid
    // only grazes
    std::vector<std::size_t> order(total);
    for (std::size_t i = 0; i < total; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<std::size_t> cands;
    for (std::size_t idx : order) {
        bool separated = true;
        for (std::size_t c : cands) {
            double dist = 0.0;
            for (std::size_t i = 0; i < m; ++i)
                dist = std::max(dist, std::fabs(points[idx][i] - points[c][i]) /
                                          std::max(1e-12, s.box[i].width()));
            separated = separated && dist > 2.0 / (points_per_dim - 1);
        }
        if (separated) cands.push_back(idx);
        if (cands.size() == 5) break;
    }

    std::pair<Vector, double> best{points[order.front()], values[order.front()]};
    const int refine_points = std::min(points_per_dim, 11);
    for (std::size_t c : cands) {
        GridSpec grid;
        grid.points_per_dim.assign(m, refine_points);
        grid.box.resize(m);
        const double coarse_spacing = 1.0 / (points_per_dim - 1);
        for (std::size_t i = 0; i < m; ++i) {
            const double half = 1.2 * coarse_spacing * s.box[i].width();
            grid.box[i].lo = std::max(s.box[i].lo, points[c][i] - half);
            grid.box[i].hi = std::min(s.box[i].hi, points[c][i] + half);
        }
        std::pair<Vector, double> local{points[c], values[c]};
        // slide the window while the argmin sits on a face (the minimum tends
        // to run along a diagonal valley); shrink only on interior hits
        for (int round = 1; round < rounds; ++round) {
            local = grid_oracle(p, s, w, grid, threads);
            bool on_face = false;
            for (std::size_t i = 0; i < m; ++i) {
                const double spacing = grid.box[i].width() / (refine_points - 1);
                const bool at_model_bound =
                    local.first[i] <= s.box[i].lo + 1e-14 ||
                    local.first[i] >= s.box[i].hi - 1e-14;
                if (!at_model_bound && (local.first[i] <= grid.box[i].lo + 0.51 * spacing ||
                                        local.first[i] >= grid.box[i].hi - 0.51 * spacing))
                    on_face = true;
            }
            std::vector<Interval> next(m);
            for (std::size_t i = 0; i < m; ++i) {
                const double half = on_face
                                        ? 0.5 * grid.box[i].width()
                                        : 1.2 * grid.box[i].width() / (refine_points - 1);
                next[i].lo = std::max(s.box[i].lo, local.first[i] - half);
                next[i].hi = std::min(s.box[i].hi, local.first[i] + half);
            }
            grid.box = next;
        }
        if (local.second < best.second) best = local;
    }
    return best;
}

}  // namespace specfit
