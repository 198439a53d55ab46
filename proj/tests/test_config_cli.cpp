#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "specfit/config.hpp"
#include "specfit/errors.hpp"

using namespace specfit;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

int run_cli(const std::string& args) {
    const std::string cmd = std::string(SPECFIT_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("config round-trips through JSON byte-identically") {
    const ExperimentConfig cfg = default_config();
    const std::string once = serialize_config(cfg);
    const ExperimentConfig parsed = parse_config(once);
    const std::string twice = serialize_config(parsed);
    CHECK(once == twice);
    parsed.validate();
}

TEST_CASE("trigonometric regression config round-trips") {
    ExperimentConfig cfg = default_config();
    cfg.regression = RegressionModel{};
    cfg.regression.family = RegressionFamily::TrigonometricSum;
    cfg.regression.harmonics = 2;
    cfg.regression.box = {{-5, 5}, {-5, 5}, {0.5, 1.4}, {-5, 5}, {-5, 5}, {1.4, 3.0}};
    cfg.alpha0 = {2.0, 1.0, 1.0, 0.5, -0.5, 2.0};
    const std::string s = serialize_config(cfg);
    const ExperimentConfig back = parse_config(s);
    CHECK(back.regression.harmonics == 2);
    CHECK(serialize_config(back) == s);
    back.validate();
}

TEST_CASE("weight violations are named in the rejection") {
    ExperimentConfig cfg = default_config();
    cfg.weights.exponent_a = 2.0;
    cfg.weights.exponent_b = 2.0;
    try {
        cfg.validate();
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("5/2") != std::string::npos);
    }
}

TEST_CASE("malformed config carries the field path") {
    try {
        parse_config(R"({"driver": {"family": "nope"}})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("driver.family") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
    try {
        ExperimentConfig cfg = default_config();
        std::string s = serialize_config(cfg);
        auto pos = s.find("\"decay\"");
        s.erase(pos, s.find(',', pos) - pos + 1);
        parse_config(s);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("kernel.decay") != std::string::npos);
    }
}

TEST_CASE("invalid configs are rejected by validate") {
    ExperimentConfig bad_delta = default_config();
    bad_delta.delta = -0.1;
    CHECK_THROWS_AS(bad_delta.validate(), ConfigError);

    ExperimentConfig off_grid = default_config();
    off_grid.t_ladder = {100.325};  // 2006.5 steps of delta = 0.05
    CHECK_THROWS_AS(off_grid.validate(), ConfigError);

    ExperimentConfig bad_theta0 = default_config();
    bad_theta0.spectral.theta0 = {5.0, 1.0, 2.0};  // outside the box
    CHECK_THROWS_AS(bad_theta0.validate(), ConfigError);

    ExperimentConfig nyquist = default_config();
    nyquist.delta = 2.0;  // pi / omega = 1.57 < 2
    CHECK_THROWS_AS(nyquist.validate(), ConfigError);
}

TEST_CASE("float formatting uses 17 significant digits") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(1.0) == "1");
    const double x = 0.123456789012345678;
    CHECK(std::stod(format_double(x)) == x);
}

TEST_CASE("path csv round-trips") {
    NoisePath p;
    p.delta = 0.25;
    p.values = {1.0, -0.5, 0.125, 3.14159};
    const NoisePath q = path_from_csv(path_to_csv(p));
    CHECK(q.delta == doctest::Approx(0.25));
    REQUIRE(q.values.size() == p.values.size());
    for (std::size_t i = 0; i < p.values.size(); ++i) CHECK(q.values[i] == p.values[i]);
}

TEST_CASE("cli: bad config exits 2, pipeline runs end to end deterministically") {
    TempDir dir("specfit_cli_test");
    const fs::path cfg_path = dir.path / "config.json";

    {  // invalid weights must exit 2 and not produce outputs
        ExperimentConfig cfg = default_config();
        cfg.weights.exponent_a = 2.0;
        std::ofstream(cfg_path) << serialize_config(cfg);
        CHECK(run_cli("--config " + cfg_path.string() + " simulate") == 2);
    }

    ExperimentConfig cfg = default_config();
    cfg.t_ladder = {120.0};
    cfg.replicates = 4;
    cfg.output_dir = (dir.path / "out_a").string();
    std::ofstream(cfg_path) << serialize_config(cfg);

    REQUIRE(run_cli("--config " + cfg_path.string() + " simulate") == 0);
    const fs::path data = fs::path(cfg.output_dir) / "path_T120.csv";
    REQUIRE(fs::exists(data));

    REQUIRE(run_cli("--config " + cfg_path.string() + " fit-lse --data " + data.string()) == 0);
    CHECK(fs::exists(fs::path(cfg.output_dir) / "lse_fit.json"));
    CHECK(fs::exists(fs::path(cfg.output_dir) / "residuals.csv"));

    REQUIRE(run_cli("--config " + cfg_path.string() + " fit-whittle --data " + data.string()) ==
            0);
    CHECK(fs::exists(fs::path(cfg.output_dir) / "whittle_fit.json"));
    CHECK(fs::exists(fs::path(cfg.output_dir) / "periodogram.csv"));

    REQUIRE(run_cli("--config " + cfg_path.string() + " mc-study") == 0);
    const fs::path rep_csv = fs::path(cfg.output_dir) / "mc_T120_replicates.csv";
    const fs::path rep_json = fs::path(cfg.output_dir) / "mc_T120_summary.json";
    REQUIRE(fs::exists(rep_csv));
    REQUIRE(fs::exists(rep_json));

    // identical config + seed into a second directory: byte-identical outputs
    ExperimentConfig cfg_b = cfg;
    cfg_b.output_dir = (dir.path / "out_b").string();
    const fs::path cfg_path_b = dir.path / "config_b.json";
    std::ofstream(cfg_path_b) << serialize_config(cfg_b);
    REQUIRE(run_cli("--config " + cfg_path_b.string() + " simulate") == 0);
    REQUIRE(run_cli("--config " + cfg_path_b.string() + " mc-study") == 0);
    CHECK(slurp(data) == slurp(fs::path(cfg_b.output_dir) / "path_T120.csv"));
    CHECK(slurp(rep_csv) == slurp(fs::path(cfg_b.output_dir) / "mc_T120_replicates.csv"));
    CHECK(slurp(rep_json) == slurp(fs::path(cfg_b.output_dir) / "mc_T120_summary.json"));

    // seed override changes the simulated bytes
    REQUIRE(run_cli("--config " + cfg_path_b.string() + " --seed 7 simulate") == 0);
    CHECK(slurp(data) != slurp(fs::path(cfg_b.output_dir) / "path_T120.csv"));

    // unknown flag is a usage error
    CHECK(run_cli("--config " + cfg_path.string() + " simulate --bogus") == 2);
}

TEST_CASE("cli: verify runs the limit-theorem suite on the default config") {
    TempDir dir("specfit_cli_verify");
    const fs::path cfg_path = dir.path / "config.json";
    ExperimentConfig cfg = default_config();
    cfg.t_ladder = {400.0};
    cfg.output_dir = (dir.path / "out").string();
    std::ofstream(cfg_path) << serialize_config(cfg);
    REQUIRE(run_cli("--config " + cfg_path.string() + " verify") == 0);
    const std::string report = slurp(fs::path(cfg.output_dir) / "verify.txt");
    CHECK(report.find("FAIL") == std::string::npos);
    CHECK(report.find("PASS") != std::string::npos);
}
