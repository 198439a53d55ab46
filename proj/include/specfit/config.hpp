#ifndef SPECFIT_CONFIG_HPP
#define SPECFIT_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "specfit/validation.hpp"

namespace specfit {

// One JSON document drives every subcommand. Outputs are a pure function of
// (config bytes, seed): CSV floats carry 17 significant digits and no
// timestamps or machine identifiers appear anywhere.
struct ExperimentConfig {
    LevyDriverSpec driver;
    KernelSpec kernel;
    RegressionModel regression;
    Vector alpha0;
    SpectralModel spectral;
    WeightSpec weights;
    std::vector<double> t_ladder{500.0, 1000.0, 2000.0};
    double delta = 0.05;
    int replicates = 400;
    std::uint64_t seed = 20250801;
    double confidence_level = 0.95;
    Gamma2Mode gamma2_mode = Gamma2Mode::FromDriver;
    double gamma2_value = 0.0;
    std::string output_dir = "out";

    PipelineSpec pipeline() const;
    // Throws ConfigError naming the violated constraint.
    void validate() const;
};

ExperimentConfig default_config();

ExperimentConfig parse_config(const std::string& json_text);
std::string serialize_config(const ExperimentConfig& config);

ExperimentConfig load_config_file(const std::string& path);

// 17-significant-digit float formatting shared by all CSV emitters.
std::string format_double(double x);

std::string report_to_json(const MCReport& report);
std::string report_to_csv(const MCReport& report);  // one row per replicate
std::string whittle_fit_to_json(const WhittleFit& fit);
std::string path_to_csv(const NoisePath& path);
NoisePath path_from_csv(const std::string& text);
std::string periodogram_to_csv(const Periodogram& p);
std::string lse_fit_to_json(const LSEFit& fit);

}  // namespace specfit

#endif
