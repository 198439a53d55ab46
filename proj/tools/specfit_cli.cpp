// Command-line front end: simulate paths, fit the regression and the noise
// spectral parameter, run Monte Carlo studies and the limit-theorem checks.
// Every subcommand is a pure function of (config, seed); outputs are CSV/JSON.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "specfit/config.hpp"
#include "specfit/errors.hpp"
#include "specfit/parallel.hpp"
#include "specfit/stats.hpp"

namespace fs = std::filesystem;
using namespace specfit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigInvalid = 2;
constexpr int kExitNumericFailure = 3;

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw NumericError("cannot write " + path.string());
    out << content;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int cmd_simulate(const ExperimentConfig& cfg, unsigned threads) {
    (void)threads;
    const fs::path out_dir(cfg.output_dir);
    for (double horizon : cfg.t_ladder) {
        const NoisePath noise =
            simulate_linear_noise(cfg.driver, cfg.kernel, horizon, cfg.delta, cfg.seed);
        NoisePath data = noise;
        for (std::size_t i = 0; i < data.values.size(); ++i)
            data.values[i] += reg_eval(cfg.regression, cfg.delta * static_cast<double>(i),
                                       cfg.alpha0);
        std::ostringstream name;
        name << "path_T" << format_double(horizon) << ".csv";
        write_file(out_dir / name.str(), path_to_csv(data));
        if (noise.coarse_delta_warning)
            std::cerr << "warning: delta is coarse for the kernel scales at T = " << horizon
                      << "\n";
    }
    std::cout << "wrote " << cfg.t_ladder.size() << " path file(s) to " << cfg.output_dir
              << "\n";
    return kExitOk;
}

int cmd_fit_lse(const ExperimentConfig& cfg, const std::string& data_path, unsigned threads) {
    (void)threads;
    const NoisePath data = path_from_csv(read_file(data_path));
    const LSEFit fit = lse_fit(cfg.regression, data, cfg.alpha0);
    const NoisePath res = residuals(cfg.regression, data, fit.alpha_hat);
    const fs::path out_dir(cfg.output_dir);
    write_file(out_dir / "lse_fit.json", lse_fit_to_json(fit));
    write_file(out_dir / "residuals.csv", path_to_csv(res));
    std::cout << lse_fit_to_json(fit);
    return kExitOk;
}

int cmd_fit_whittle(const ExperimentConfig& cfg, const std::string& data_path,
                    unsigned threads) {
    const NoisePath data = path_from_csv(read_file(data_path));
    const LSEFit lse = lse_fit(cfg.regression, data, cfg.alpha0);
    const NoisePath res = residuals(cfg.regression, data, lse.alpha_hat);
    const auto grid = fourier_grid(res.horizon(), default_lambda_max(cfg.weights));
    const Periodogram p = residual_periodogram(res, grid);

    WhittleOptions opts;
    opts.confidence_level = cfg.confidence_level;
    opts.threads = threads;
    switch (cfg.gamma2_mode) {
        case Gamma2Mode::FromDriver:
            opts.gamma2 = driver_cumulants(cfg.driver).gamma2;
            break;
        case Gamma2Mode::UserValue:
            opts.gamma2 = cfg.gamma2_value;
            break;
        case Gamma2Mode::EstimateFromResiduals:
            opts.gamma2 = 0.0;  // refined after the point estimate below
            break;
    }
    Vector init(cfg.spectral.dimension());
    for (std::size_t i = 0; i < init.size(); ++i)
        init[i] = 0.5 * (cfg.spectral.box[i].lo + cfg.spectral.box[i].hi);
    WhittleFit fit = whittle_fit(p, cfg.spectral, cfg.weights, init, opts);
    if (cfg.gamma2_mode == Gamma2Mode::EstimateFromResiduals) {
        opts.gamma2 = estimate_gamma2_from_residuals(res, cfg.spectral, fit.theta_hat);
        const AsymptoticMatrices am =
            asymptotic_matrices(cfg.spectral, cfg.weights, opts.gamma2, fit.theta_hat);
        fit.gamma2 = opts.gamma2;
        fit.w1 = am.w1;
        fit.w2 = am.w2;
        fit.v = am.v;
        fit.w = mce_covariance(am.w1, am.w2, am.v);
        fit.ci = confidence_intervals(fit.theta_hat, fit.w, p.horizon, cfg.confidence_level);
    }
    const fs::path out_dir(cfg.output_dir);
    write_file(out_dir / "whittle_fit.json", whittle_fit_to_json(fit));
    write_file(out_dir / "periodogram.csv", periodogram_to_csv(p));
    std::cout << whittle_fit_to_json(fit);
    return kExitOk;
}

int cmd_mc_study(const ExperimentConfig& cfg, unsigned threads) {
    const fs::path out_dir(cfg.output_dir);
    const PipelineSpec spec = cfg.pipeline();
    for (double horizon : cfg.t_ladder) {
        const MCReport report =
            mce_normality_study(spec, horizon, cfg.replicates, cfg.seed, threads);
        std::ostringstream base;
        base << "mc_T" << format_double(horizon);
        write_file(out_dir / (base.str() + "_replicates.csv"), report_to_csv(report));
        write_file(out_dir / (base.str() + "_summary.json"), report_to_json(report));
        std::cout << "T = " << horizon << ": bias";
        for (double b : report.bias) std::cout << ' ' << b;
        std::cout << ", coverage";
        for (double c : report.coverage) std::cout << ' ' << c;
        std::cout << ", failures " << report.failures << "\n";
    }
    return kExitOk;
}

struct CheckLine {
    std::string name;
    bool pass;
    std::string detail;
};

int cmd_verify(const ExperimentConfig& cfg, unsigned threads) {
    std::vector<CheckLine> checks;
    const DriverCumulants cum = driver_cumulants(cfg.driver);

    {  // mean-square ergodicity at the smallest ladder horizon
        const double horizon = cfg.t_ladder.front();
        const double b0 = covariance(cfg.kernel, cfg.driver, 0.0);
        const NoisePath path =
            simulate_linear_noise(cfg.driver, cfg.kernel, horizon, cfg.delta, cfg.seed);
        const MeanSquareCheck ms = mean_square_check(path, b0);
        checks.push_back({"mean_square_ergodicity", ms.rel_error < 0.15,
                          "nu* = " + format_double(ms.nu_star) +
                              ", rel err = " + format_double(ms.rel_error)});
    }
    {  // Fejer limit at growing horizons
        auto g = [](double u) { return std::exp(-u * u); };
        const double e10 = std::fabs(fejer_limit_check(g, 10.0) - 1.0);
        const double e100 = std::fabs(fejer_limit_check(g, 100.0) - 1.0);
        const double e1000 = std::fabs(fejer_limit_check(g, 1000.0) - 1.0);
        checks.push_back({"fejer_kernel_limit", e100 < 0.05 && e10 > e100 && e100 > e1000,
                          "errors " + format_double(e10) + " > " + format_double(e100) +
                              " > " + format_double(e1000)});
    }
    {  // CLT for the quadratic functional, desk scale
        auto b = [](double l) { return std::pow(1.0 + l * l, -3.0); };
        const CltCheck clt =
            clt_functional_check(cfg.driver, cfg.kernel, b, 500.0, 200, cfg.seed, cfg.delta,
                                 threads);
        const double rel = std::fabs(clt.sample_variance - clt.sigma2_target) /
                           clt.sigma2_target;
        checks.push_back({"clt_quadratic_functional", rel < 0.35,
                          "sample var = " + format_double(clt.sample_variance) +
                              ", target = " + format_double(clt.sigma2_target)});
    }
    {  // Levitan approximation of a decaying type-1 function
        auto f = [](double u) { return u == 0.0 ? 1.0 : std::sin(u) / u; };
        double prev = 1e300;
        bool monotone = true;
        std::ostringstream detail;
        for (int n : {8, 16, 32}) {
            const auto coeffs = levitan_coefficients(f, 1.0, n);
            double sup = 0.0;
            for (int i = 0; i <= 400; ++i) {
                const double l = -10.0 + 20.0 * i / 400.0;
                sup = std::max(sup, std::fabs(f(l) - levitan_eval(coeffs, 1.0, n, l)));
            }
            monotone = monotone && sup < prev;
            prev = sup;
            detail << " n=" << n << ": " << format_double(sup);
        }
        checks.push_back({"levitan_approximation", monotone, detail.str()});
    }
    {  // closed-form trig LSE covariance block: PSD + rotation invariance
        const Vector alpha0{2.0, 1.0, 1.5};
        const double fphi = spectral_density(cfg.kernel, cfg.driver, 1.5);
        const Matrix sigma = sigma_trig(alpha0, {fphi});
        const Vector ev = symmetric_eigenvalues(sigma);
        bool ok = ev.front() > 0.0;
        Rng rot_rng(cfg.seed);
        for (int trial = 0; trial < 20 && ok; ++trial) {
            const double psi = rot_rng.uniform(0.0, 2.0 * M_PI);
            const Vector rotated{2.0 * std::cos(psi) - 1.0 * std::sin(psi),
                                 2.0 * std::sin(psi) + 1.0 * std::cos(psi), 1.5};
            const Vector ev2 = symmetric_eigenvalues(sigma_trig(rotated, {fphi}));
            for (std::size_t i = 0; i < ev.size(); ++i)
                ok = ok && std::fabs(ev2[i] - ev[i]) < 1e-9 * std::max(1.0, std::fabs(ev[i]));
        }
        checks.push_back({"sigma_trig_block", ok,
                          "eigenvalues " + format_double(ev[0]) + " .. " +
                              format_double(ev[2])});
    }
    {  // driver cumulants against simulated unit-time increments
        Rng rng(derive_seed(cfg.seed, 7));
        const int draws = 200000;
        std::vector<double> sample(draws);
        for (auto& x : sample) x = sample_increment(cfg.driver, 1.0, rng);
        const double k2 = sample_cumulant2(sample);
        const double k4 = sample_cumulant4(sample);
        const double se2 = std::sqrt(2.0 / draws) * cum.d2 * 2.0;
        const bool ok = std::fabs(k2 - cum.d2) < std::max(4.0 * se2, 0.05 * cum.d2 + 1e-3) &&
                        std::fabs(k4 - cum.d4) < std::max(0.2 * cum.d2 * cum.d2, 0.2 * cum.d4);
        checks.push_back({"driver_cumulants_mc", ok,
                          "k2 = " + format_double(k2) + " (d2 = " + format_double(cum.d2) +
                              "), k4 = " + format_double(k4) +
                              " (d4 = " + format_double(cum.d4) + ")"});
    }

    bool all = true;
    std::ostringstream report;
    for (const auto& c : checks) {
        all = all && c.pass;
        report << (c.pass ? "PASS" : "FAIL") << "  " << c.name << "  [" << c.detail << "]\n";
    }
    std::cout << report.str();
    write_file(fs::path(cfg.output_dir) / "verify.txt", report.str());
    return all ? kExitOk : kExitNumericFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Levy-noise regression and Whittle spectral-parameter estimation"};
    app.require_subcommand(1);

    std::string config_path;
    std::string data_path;
    std::string out_override;
    std::uint64_t seed_override = 0;
    bool seed_given = false;
    unsigned threads = default_threads();

    app.add_option("--config", config_path, "experiment config (JSON)")->required();
    app.add_option("--seed", seed_override, "override the config seed")
        ->each([&](const std::string&) { seed_given = true; });
    app.add_option("--out", out_override, "override the output directory");
    app.add_option("--threads", threads, "worker threads for replicate jobs");

    auto* sim = app.add_subcommand("simulate", "simulate observation paths per T in the ladder");
    auto* fit_lse_cmd = app.add_subcommand("fit-lse", "least squares regression fit");
    fit_lse_cmd->add_option("--data", data_path, "path CSV (t,value)")->required();
    auto* fit_wh = app.add_subcommand("fit-whittle", "LSE + residual periodogram + MCE");
    fit_wh->add_option("--data", data_path, "path CSV (t,value)")->required();
    auto* mc = app.add_subcommand("mc-study", "Monte Carlo pipeline study over the T ladder");
    auto* verify = app.add_subcommand("verify", "limit-theorem check suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfigInvalid;
    }

    ExperimentConfig cfg;
    try {
        cfg = load_config_file(config_path);
        if (seed_given) cfg.seed = seed_override;
        if (!out_override.empty()) cfg.output_dir = out_override;
        cfg.validate();
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigInvalid;
    }

    try {
        if (sim->parsed()) return cmd_simulate(cfg, threads);
        if (fit_lse_cmd->parsed()) return cmd_fit_lse(cfg, data_path, threads);
        if (fit_wh->parsed()) return cmd_fit_whittle(cfg, data_path, threads);
        if (mc->parsed()) return cmd_mc_study(cfg, threads);
        if (verify->parsed()) return cmd_verify(cfg, threads);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigInvalid;
    } catch (const std::exception& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumericFailure;
    }
    return kExitConfigInvalid;
}
