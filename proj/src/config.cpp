#include "specfit/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "specfit/errors.hpp"

namespace specfit {

using json = nlohmann::ordered_json;

namespace {

std::string driver_family_name(DriverFamily f) {
    switch (f) {
        case DriverFamily::Brownian: return "brownian";
        case DriverFamily::CompoundPoissonNormal: return "compound_poisson_normal";
        case DriverFamily::Mixed: return "mixed";
    }
    return "";
}

DriverFamily driver_family_from(const std::string& s) {
    if (s == "brownian") return DriverFamily::Brownian;
    if (s == "compound_poisson_normal") return DriverFamily::CompoundPoissonNormal;
    if (s == "mixed") return DriverFamily::Mixed;
    throw ConfigError("driver.family: unknown value '" + s + "'");
}

std::string kernel_family_name(KernelFamily f) {
    switch (f) {
        case KernelFamily::OU: return "ou";
        case KernelFamily::WellBalancedOU: return "well_balanced_ou";
        case KernelFamily::Gamma: return "gamma";
        case KernelFamily::CAR2Pendulum: return "car2_pendulum";
    }
    return "";
}

KernelFamily kernel_family_from(const std::string& s) {
    if (s == "ou") return KernelFamily::OU;
    if (s == "well_balanced_ou") return KernelFamily::WellBalancedOU;
    if (s == "gamma") return KernelFamily::Gamma;
    if (s == "car2_pendulum") return KernelFamily::CAR2Pendulum;
    throw ConfigError("kernel.family: unknown value '" + s + "'");
}

std::string spectral_family_name(SpectralFamily f) {
    switch (f) {
        case SpectralFamily::CAR2Pendulum: return "car2_pendulum";
        case SpectralFamily::OU: return "ou";
        case SpectralFamily::RieszBessel: return "riesz_bessel";
    }
    return "";
}

SpectralFamily spectral_family_from(const std::string& s) {
    if (s == "car2_pendulum") return SpectralFamily::CAR2Pendulum;
    if (s == "ou") return SpectralFamily::OU;
    if (s == "riesz_bessel") return SpectralFamily::RieszBessel;
    throw ConfigError("spectral.family: unknown value '" + s + "'");
}

std::string gamma2_mode_name(Gamma2Mode m) {
    switch (m) {
        case Gamma2Mode::FromDriver: return "from_driver";
        case Gamma2Mode::UserValue: return "user_value";
        case Gamma2Mode::EstimateFromResiduals: return "estimate_from_residuals";
    }
    return "";
}

Gamma2Mode gamma2_mode_from(const std::string& s) {
    if (s == "from_driver") return Gamma2Mode::FromDriver;
    if (s == "user_value") return Gamma2Mode::UserValue;
    if (s == "estimate_from_residuals") return Gamma2Mode::EstimateFromResiduals;
    throw ConfigError("gamma2_mode: unknown value '" + s + "'");
}

json intervals_to_json(const std::vector<Interval>& box) {
    json arr = json::array();
    for (const auto& iv : box) arr.push_back(json::array({iv.lo, iv.hi}));
    return arr;
}

std::vector<Interval> intervals_from_json(const json& arr, const std::string& path) {
    if (!arr.is_array()) throw ConfigError(path + ": expected an array of [lo, hi] pairs");
    std::vector<Interval> box;
    for (const auto& e : arr) {
        if (!e.is_array() || e.size() != 2)
            throw ConfigError(path + ": each entry must be [lo, hi]");
        box.push_back({e[0].get<double>(), e[1].get<double>()});
    }
    return box;
}

template <typename T>
T require(const json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key)) throw ConfigError(path + "." + key + ": missing field");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(path + "." + key + ": " + e.what());
    }
}

}  // namespace

PipelineSpec ExperimentConfig::pipeline() const {
    PipelineSpec p;
    p.driver = driver;
    p.kernel = kernel;
    p.regression = regression;
    p.alpha0 = alpha0;
    p.spectral = spectral;
    p.weights = weights;
    p.delta = delta;
    p.confidence_level = confidence_level;
    p.gamma2_mode = gamma2_mode;
    p.gamma2_value = gamma2_value;
    return p;
}

void ExperimentConfig::validate() const {
    try {
        driver.validate();
        kernel.validate();
        regression.validate();
        spectral.validate();
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    const WeightReport wr = validate_weight_conditions(weights, spectral);
    if (!wr.pass) throw ConfigError("weights: " + wr.violations.front());
    if (alpha0.size() != regression.dimension())
        throw ConfigError("alpha0: dimension does not match the regression model");
    if (!regression.in_box(alpha0, 1e-12)) throw ConfigError("alpha0: outside the model box");
    if (spectral.theta0.empty()) throw ConfigError("spectral.theta0: required");
    if (!spectral.in_box(spectral.theta0, 1e-12))
        throw ConfigError("spectral.theta0: outside the Theta box");
    if (!(delta > 0.0)) throw ConfigError("delta: must be > 0");
    if (t_ladder.empty()) throw ConfigError("t_ladder: must not be empty");
    for (double t : t_ladder) {
        if (!(t > 0.0)) throw ConfigError("t_ladder: horizons must be > 0");
        const double n = t / delta;
        if (std::fabs(n - std::llround(n)) > 1e-9 * std::max(1.0, n))
            throw ConfigError("t_ladder: horizon must be an integer multiple of delta");
    }
    if (replicates < 1) throw ConfigError("replicates: must be >= 1");
    if (!(confidence_level > 0.0 && confidence_level < 1.0))
        throw ConfigError("confidence_level: must lie in (0,1)");
    // Nyquist guard for the largest frequency the model can produce
    double fmax = 0.0;
    if (regression.family == RegressionFamily::TrigonometricSum) {
        for (int k = 0; k < regression.harmonics; ++k)
            fmax = std::max(fmax, regression.box[3 * k + 2].hi);
    } else {
        for (const auto& term : regression.regressors)
            if (term.kind != RegressorKind::Constant)
                fmax = std::max(fmax, std::fabs(term.frequency));
    }
    if (kernel.family == KernelFamily::CAR2Pendulum) fmax = std::max(fmax, kernel.frequency);
    if (fmax > 0.0 && delta > M_PI / fmax)
        throw ConfigError("delta: violates the Nyquist bound for the model frequencies");
}

ExperimentConfig default_config() {
    ExperimentConfig c;
    c.driver = {DriverFamily::Brownian, 1.0, 0.0, 0.0};
    c.kernel = {KernelFamily::CAR2Pendulum, 1.0, 0.0, 2.0};
    c.regression.family = RegressionFamily::ExponentialInner;
    c.regression.regressors = {{RegressorKind::Constant, 1.0, 0.0}};
    c.regression.box = {{-1.0, 1.0}};
    c.alpha0 = {0.0};
    c.spectral.family = SpectralFamily::CAR2Pendulum;
    c.spectral.box = {{0.2, 3.0}, {0.2, 4.0}, {0.5, 4.0}};
    c.spectral.theta0 = {1.0, 1.0, 2.0};
    c.weights = {3.0, 3.0};
    return c;
}

namespace {

json config_to_json(const ExperimentConfig& c) {
    json j;
    j["driver"] = {{"family", driver_family_name(c.driver.family)},
                   {"brownian_variance", c.driver.brownian_variance},
                   {"jump_rate", c.driver.jump_rate},
                   {"jump_std", c.driver.jump_std}};
    j["kernel"] = {{"family", kernel_family_name(c.kernel.family)},
                   {"decay", c.kernel.decay},
                   {"shape", c.kernel.shape},
                   {"frequency", c.kernel.frequency}};
    json reg;
    if (c.regression.family == RegressionFamily::ExponentialInner) {
        reg["family"] = "exponential_inner";
        json terms = json::array();
        for (const auto& t : c.regression.regressors) {
            const char* kind = t.kind == RegressorKind::Constant
                                   ? "constant"
                                   : (t.kind == RegressorKind::Cosine ? "cosine" : "sine");
            terms.push_back(
                {{"kind", kind}, {"amplitude", t.amplitude}, {"frequency", t.frequency}});
        }
        reg["regressors"] = terms;
    } else {
        reg["family"] = "trigonometric_sum";
        reg["harmonics"] = c.regression.harmonics;
    }
    reg["box"] = intervals_to_json(c.regression.box);
    j["regression"] = reg;
    j["alpha0"] = c.alpha0;
    j["spectral"] = {{"family", spectral_family_name(c.spectral.family)},
                     {"box", intervals_to_json(c.spectral.box)},
                     {"theta0", c.spectral.theta0},
                     {"eval_only", c.spectral.eval_only}};
    j["weights"] = {{"a", c.weights.exponent_a}, {"b", c.weights.exponent_b}};
    j["t_ladder"] = c.t_ladder;
    j["delta"] = c.delta;
    j["replicates"] = c.replicates;
    j["seed"] = c.seed;
    j["confidence_level"] = c.confidence_level;
    j["gamma2_mode"] = gamma2_mode_name(c.gamma2_mode);
    j["gamma2_value"] = c.gamma2_value;
    j["output_dir"] = c.output_dir;
    return j;
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    const json& jd = j.contains("driver") ? j.at("driver")
                                          : throw ConfigError("driver: missing section");
    c.driver.family = driver_family_from(require<std::string>(jd, "family", "driver"));
    c.driver.brownian_variance = jd.value("brownian_variance", 0.0);
    c.driver.jump_rate = jd.value("jump_rate", 0.0);
    c.driver.jump_std = jd.value("jump_std", 0.0);

    const json& jk = j.contains("kernel") ? j.at("kernel")
                                          : throw ConfigError("kernel: missing section");
    c.kernel.family = kernel_family_from(require<std::string>(jk, "family", "kernel"));
    c.kernel.decay = require<double>(jk, "decay", "kernel");
    c.kernel.shape = jk.value("shape", 0.0);
    c.kernel.frequency = jk.value("frequency", 1.0);

    const json& jr = j.contains("regression") ? j.at("regression")
                                              : throw ConfigError("regression: missing section");
    const std::string rf = require<std::string>(jr, "family", "regression");
    if (rf == "exponential_inner") {
        c.regression.family = RegressionFamily::ExponentialInner;
        if (!jr.contains("regressors"))
            throw ConfigError("regression.regressors: missing field");
        c.regression.regressors.clear();
        for (const auto& t : jr.at("regressors")) {
            RegressorTerm term;
            const std::string kind = require<std::string>(t, "kind", "regression.regressors[]");
            if (kind == "constant") term.kind = RegressorKind::Constant;
            else if (kind == "cosine") term.kind = RegressorKind::Cosine;
            else if (kind == "sine") term.kind = RegressorKind::Sine;
            else throw ConfigError("regression.regressors[].kind: unknown value '" + kind + "'");
            term.amplitude = t.value("amplitude", 1.0);
            term.frequency = t.value("frequency", 0.0);
            c.regression.regressors.push_back(term);
        }
    } else if (rf == "trigonometric_sum") {
        c.regression.family = RegressionFamily::TrigonometricSum;
        c.regression.harmonics = require<int>(jr, "harmonics", "regression");
    } else {
        throw ConfigError("regression.family: unknown value '" + rf + "'");
    }
    c.regression.box = intervals_from_json(
        jr.contains("box") ? jr.at("box") : throw ConfigError("regression.box: missing field"),
        "regression.box");

    c.alpha0 = require<Vector>(j, "alpha0", "");

    const json& js = j.contains("spectral") ? j.at("spectral")
                                            : throw ConfigError("spectral: missing section");
    c.spectral.family = spectral_family_from(require<std::string>(js, "family", "spectral"));
    c.spectral.box = intervals_from_json(
        js.contains("box") ? js.at("box") : throw ConfigError("spectral.box: missing field"),
        "spectral.box");
    if (js.contains("theta0")) c.spectral.theta0 = js.at("theta0").get<Vector>();
    c.spectral.eval_only = js.value("eval_only", false);

    const json& jw = j.contains("weights") ? j.at("weights")
                                           : throw ConfigError("weights: missing section");
    c.weights.exponent_a = require<double>(jw, "a", "weights");
    c.weights.exponent_b = require<double>(jw, "b", "weights");

    c.t_ladder = require<std::vector<double>>(j, "t_ladder", "");
    c.delta = require<double>(j, "delta", "");
    c.replicates = require<int>(j, "replicates", "");
    c.seed = require<std::uint64_t>(j, "seed", "");
    c.confidence_level = j.value("confidence_level", 0.95);
    c.gamma2_mode = gamma2_mode_from(j.value("gamma2_mode", std::string("from_driver")));
    c.gamma2_value = j.value("gamma2_value", 0.0);
    c.output_dir = j.value("output_dir", std::string("out"));
    return c;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return config_from_json(j);
}

std::string serialize_config(const ExperimentConfig& config) {
    return config_to_json(config).dump(2) + "\n";
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {
json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}
}  // namespace

std::string report_to_json(const MCReport& report) {
    json j;
    j["replicates"] = report.replicates;
    j["failures"] = report.failures;
    j["non_converged"] = report.non_converged;
    j["horizon"] = report.horizon;
    j["empirical_mean"] = report.empirical_mean;
    j["bias"] = report.bias;
    j["empirical_covariance"] = matrix_to_json(report.empirical_covariance);
    j["target_covariance"] = matrix_to_json(report.target_covariance);
    j["coverage"] = report.coverage;
    j["skewness"] = report.skewness_stats;
    j["excess_kurtosis"] = report.kurtosis_stats;
    j["ks_distance"] = report.ks_stats;
    return j.dump(2) + "\n";
}

std::string report_to_csv(const MCReport& report) {
    std::ostringstream out;
    const std::size_t m = report.records.empty() ? 0 : report.records.front().estimate.size();
    out << "replicate,seed";
    for (std::size_t i = 0; i < m; ++i) out << ",estimate_" << i;
    out << ",converged\n";
    for (const auto& rec : report.records) {
        out << rec.index << ',' << rec.seed;
        for (std::size_t i = 0; i < m; ++i) out << ',' << format_double(rec.estimate[i]);
        out << ',' << (rec.converged ? 1 : 0) << "\n";
    }
    return out.str();
}

std::string whittle_fit_to_json(const WhittleFit& fit) {
    json j;
    j["theta_hat"] = fit.theta_hat;
    j["contrast"] = fit.contrast;
    j["converged"] = fit.converged;
    j["on_boundary"] = fit.on_boundary;
    j["iterations"] = fit.iterations;
    j["contrast_evals"] = fit.contrast_evals;
    j["gamma2"] = fit.gamma2;
    j["confidence_level"] = fit.confidence_level;
    j["ci_reliable"] = !fit.on_boundary;
    if (fit.w1.rows() > 0) {
        j["W1"] = matrix_to_json(fit.w1);
        j["W2"] = matrix_to_json(fit.w2);
        j["V"] = matrix_to_json(fit.v);
        j["W"] = matrix_to_json(fit.w);
        json ci = json::array();
        for (const auto& iv : fit.ci) ci.push_back(json::array({iv.lo, iv.hi}));
        j["ci"] = ci;
    }
    return j.dump(2) + "\n";
}

std::string path_to_csv(const NoisePath& path) {
    std::ostringstream out;
    out << "t,value\n";
    for (std::size_t k = 0; k < path.values.size(); ++k)
        out << format_double(path.delta * static_cast<double>(k)) << ','
            << format_double(path.values[k]) << "\n";
    return out.str();
}

NoisePath path_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("path csv: empty file");
    NoisePath path;
    std::vector<double> times;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ConfigError("path csv: malformed row: " + line);
        times.push_back(std::stod(line.substr(0, comma)));
        path.values.push_back(std::stod(line.substr(comma + 1)));
    }
    if (path.values.size() < 2) throw ConfigError("path csv: need at least two samples");
    path.delta = times[1] - times[0];
    for (std::size_t k = 1; k < times.size(); ++k)
        if (std::fabs(times[k] - times[k - 1] - path.delta) > 1e-9 * std::max(1.0, path.delta))
            throw ConfigError("path csv: sample times are not an even lattice");
    return path;
}

std::string periodogram_to_csv(const Periodogram& p) {
    std::ostringstream out;
    out << "lambda,value\n";
    for (std::size_t i = 0; i < p.lambdas.size(); ++i)
        out << format_double(p.lambdas[i]) << ',' << format_double(p.values[i]) << "\n";
    return out.str();
}

std::string lse_fit_to_json(const LSEFit& fit) {
    json j;
    j["alpha_hat"] = fit.alpha_hat;
    j["sse"] = fit.sse;
    j["norming"] = fit.norming;
    j["converged"] = fit.converged;
    j["iterations"] = fit.iterations;
    j["starts"] = fit.starts;
    return j.dump(2) + "\n";
}

}  // namespace specfit
