#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "insmkt/errors.hpp"
#include "insmkt/experiment.hpp"
#include "insmkt/io.hpp"

using namespace insmkt;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path write_config(const std::string& name, const json& j) {
    const fs::path dir = fs::temp_directory_path() / "insmkt_test_experiment";
    fs::create_directories(dir);
    io::write_json(dir / name, j);
    return dir / name;
}

struct EnvGuard {
    EnvGuard() { unsetenv(kOutputDirEnv); }
    ~EnvGuard() { unsetenv(kOutputDirEnv); }
};

}  // namespace

TEST_CASE("defaults are the benchmark") {
    EnvGuard env;
    const auto cfg = load_experiment(std::nullopt, {});
    CHECK(cfg == ExperimentConfig{});
    CHECK(cfg.market == MarketParams::benchmark());
    CHECK(cfg.output.directory == "out");
}

TEST_CASE("override precedence per field") {
    EnvGuard env;
    const auto file = write_config("prec.json", {{"market", {{"rho", 0.2}, {"theta", 3.5}}},
                                                 {"output", {{"directory", "from_file"}}}});
    SUBCASE("file beats default") {
        const auto cfg = load_experiment(file, {});
        CHECK(cfg.market.rho == 0.2);
        CHECK(cfg.market.theta == 3.5);
        CHECK(cfg.market.gamma == MarketParams{}.gamma);
    }
    SUBCASE("flag beats file") {
        const auto cfg = load_experiment(file, {"market.rho=0.5"});
        CHECK(cfg.market.rho == 0.5);
        CHECK(cfg.market.theta == 3.5);
    }
    SUBCASE("environment beats file, flag beats environment") {
        setenv(kOutputDirEnv, "from_env", 1);
        CHECK(load_experiment(file, {}).output.directory == "from_env");
        CHECK(load_experiment(file, {"output.directory=from_flag"}).output.directory == "from_flag");
    }
    SUBCASE("later flags win") {
        CHECK(load_experiment(file, {"market.rho=0.1", "market.rho=-0.1"}).market.rho == -0.1);
    }
}

TEST_CASE("overrides parse JSON values and create blocks") {
    json doc = json::object();
    apply_override(doc, "sweep.values=[0.1,0.2]");
    apply_override(doc, "sweep.axis=theta");
    apply_override(doc, "output.emit_svg=true");
    CHECK(doc["sweep"]["values"] == json::array({0.1, 0.2}));
    CHECK(doc["sweep"]["axis"] == "theta");
    CHECK(doc["output"]["emit_svg"] == true);
    CHECK_THROWS_AS(apply_override(doc, "market.rho"), ConfigError);
    CHECK_THROWS_AS(apply_override(doc, "=1"), ConfigError);
    CHECK_THROWS_AS(apply_override(doc, "market..rho=1"), ConfigError);
}

TEST_CASE("unknown keys and bad values are configuration errors") {
    EnvGuard env;
    CHECK_THROWS_AS(load_experiment(std::nullopt, {"market.kappa=1"}), ConfigError);
    CHECK_THROWS_AS(load_experiment(std::nullopt, {"plots.size=1"}), ConfigError);
    CHECK_THROWS_AS(load_experiment(std::nullopt, {"output.stride=0"}), ConfigError);
    CHECK_THROWS_AS(load_experiment(std::nullopt, {"sweep.axis=l"}), ConfigError);
    CHECK_THROWS_AS(load_experiment(std::nullopt, {"market.rho=high"}), ConfigError);
    // Semantic validation is reported as a configuration error too.
    CHECK_THROWS_AS(load_experiment(std::nullopt, {"market.theta=0"}), ConfigError);
    CHECK_THROWS_AS(load_experiment(std::nullopt, {"solver.grid_size=2"}), ConfigError);

    const fs::path broken = fs::temp_directory_path() / "insmkt_test_experiment" / "broken.json";
    std::ofstream(broken) << "{ not json";
    CHECK_THROWS_AS(load_experiment(broken, {}), ConfigError);
    CHECK_THROWS_AS(load_experiment(fs::path("/nonexistent/config.json"), {}), ConfigError);
}

TEST_CASE("document round-trip and stride plumbing") {
    EnvGuard env;
    ExperimentConfig cfg;
    cfg.market.rho = 0.2;
    cfg.sweep = {"theta", {0.8, 4.0}};
    cfg.output.stride = 7;
    cfg.simulation.stride = 7;
    cfg.simulation.seed = 99;
    const auto back = experiment_from_json(to_json(cfg));
    CHECK(back == cfg);
    CHECK(back.simulation.stride == 7);
}
