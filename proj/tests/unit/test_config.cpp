#include <doctest.h>

#include <numbers>
#include <sstream>

#include "rsmastat/config.hpp"

using namespace rsmastat;

namespace {

ExperimentConfig parse(const std::string& text, const std::vector<std::string>& overrides = {}) {
    std::istringstream in(text);
    return parse_config(in, "test.cfg", overrides);
}

std::string error_of(const std::string& text, const std::vector<std::string>& overrides = {}) {
    try {
        parse(text, overrides);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

const char* const kRayleigh = R"(
# correlation sweep
[experiment]
name = corr-t1
scenario = correlated-rayleigh
n_tx = 4
users = 3
snr_db = 0:5:20
samples = 200
draws = 20
strategies = rsma, sdma, noma
seed = 12345
record_wall_time = false

[correlated-rayleigh]
magnitude = 1
phase_interval_rad = -pi/2, pi/2
phase_inaccuracy_half_width_rad = pi/8

[optimizer]
tolerance = 1e-4
max_iterations = 300
random_restarts = 2
)";

}  // namespace

TEST_CASE("angle expressions") {
    const double pi = std::numbers::pi;
    CHECK(parse_angle("0") == 0.0);
    CHECK(parse_angle("1.25") == 1.25);
    CHECK(parse_angle("pi") == pi);
    CHECK(parse_angle("-pi") == -pi);
    CHECK(parse_angle("2pi") == 2 * pi);
    CHECK(parse_angle("pi/4") == pi / 4);
    CHECK(parse_angle(" -3*pi/4 ") == -3 * pi / 4);
    CHECK(parse_angle("0.5pi") == 0.5 * pi);
    CHECK_THROWS_AS(parse_angle("pie"), ConfigError);
    CHECK_THROWS_AS(parse_angle("pi/0"), ConfigError);
    CHECK_THROWS_AS(parse_angle("pipi"), ConfigError);
    CHECK_THROWS_AS(parse_angle(""), ConfigError);
}

TEST_CASE("full correlated Rayleigh config") {
    const ExperimentConfig c = parse(kRayleigh);
    CHECK(c.name == "corr-t1");
    CHECK(c.scenario == ScenarioKind::kCorrelatedRayleigh);
    CHECK(c.snr_db == std::vector<double>{0, 5, 10, 15, 20});
    CHECK(c.strategies == std::vector<Strategy>{Strategy::kRsma, Strategy::kSdma, Strategy::kNoma});
    CHECK(c.seed == 12345);
    CHECK_FALSE(c.record_wall_time);
    CHECK(c.rayleigh.magnitude == 1.0);
    CHECK(c.rayleigh.phase_interval.lo == -std::numbers::pi / 2);
    CHECK(c.rayleigh.phase_inaccuracy_half_width == std::numbers::pi / 8);
    CHECK(c.optimizer.max_iterations == 300);
    CHECK(c.optimizer.random_restarts == 2);
    CHECK(c.evaluation_sample_count() == 200);
    const auto t = std::get<CorrelatedRayleighTemplate>(c.stats_template());
    CHECK(t.n_tx == 4);
    CHECK(t.users == 3);
}

TEST_CASE("ULA config and defaults") {
    const ExperimentConfig c = parse(R"(
[experiment]
scenario = ula-phase
users = 3
snr_db = 20, 30
[ula-phase]
amplitudes = 1, 0.8, 0.5
phase_range_rad = 2pi
)");
    CHECK(c.scenario == ScenarioKind::kUlaPhase);
    CHECK(c.ula.amplitudes == std::vector<double>{1.0, 0.8, 0.5});
    CHECK(c.ula.phase_range == 2 * std::numbers::pi);
    CHECK(c.ula.mean_phase_interval.lo == -std::numbers::pi);
    CHECK(c.ula.mean_phase_interval.hi == std::numbers::pi);
    CHECK(c.samples == 200);
    CHECK(c.draws == 20);
    CHECK(c.n_tx == 4);
}

TEST_CASE("config errors carry location") {
    CHECK(error_of("[experiment]\nsnr_db = 10\nfoo = 1\n").find("test.cfg:3") != std::string::npos);
    CHECK(error_of("[experiment]\nsnr_db = 10\nfoo = 1\n").find("unknown key 'experiment.foo'") != std::string::npos);
    CHECK(error_of("[experimnt]\nsnr_db = 10\n").find("unknown section 'experimnt'") != std::string::npos);
    CHECK(error_of("[experiment]\nsnr_db = 10\nsnr_db = 20\n").find("duplicate key") != std::string::npos);
    CHECK(error_of("snr_db = 10\n").find("outside of any section") != std::string::npos);
    CHECK(error_of("[experiment]\nsnr_db = 10\nsamples = 2x\n").find("expected an integer") != std::string::npos);
    CHECK(error_of("[experiment]\nsnr_db = 10\nstrategies = rsma, oma\n").find("unknown strategy") != std::string::npos);
    CHECK(error_of("[experiment]\nsnr_db = 10\nstrategies = rsma, rsma\n").find("twice") != std::string::npos);
    CHECK(error_of("[experiment]\nsnr_db\n").find("expected 'key = value'") != std::string::npos);
    CHECK(error_of("[experiment\n").find("malformed") != std::string::npos);
}

TEST_CASE("config validation") {
    CHECK(error_of("[experiment]\n").find("snr_db") != std::string::npos);
    CHECK(error_of("[experiment]\nsnr_db = 10\nsamples = 0\n").find("samples") != std::string::npos);
    CHECK(error_of("[experiment]\nsnr_db = 10\ndraws = 0\n").find("draws") != std::string::npos);
    CHECK(error_of("[experiment]\nsnr_db = 10\n[correlated-rayleigh]\nmagnitude = 1.5\n").find("magnitude") !=
          std::string::npos);
    CHECK(error_of("[experiment]\nscenario = ula-phase\nsnr_db = 10\n[ula-phase]\namplitudes = 1, 2\n")
              .find("one amplitude per user") != std::string::npos);
    CHECK(error_of("[experiment]\nsnr_db = 10\n[correlated-rayleigh]\nphase_interval_rad = pi, -pi\n")
              .find("lower end") != std::string::npos);
    CHECK(error_of("[experiment]\nsnr_db = 5:0:10\n").find("step") != std::string::npos);
}

TEST_CASE("overrides apply after the file") {
    const ExperimentConfig c = parse(kRayleigh, {"experiment.seed=7", "optimizer.tolerance = 1e-5"});
    CHECK(c.seed == 7);
    CHECK(c.optimizer.tolerance == 1e-5);
    CHECK(error_of(kRayleigh, {"seed=7"}).find("section.key=value") != std::string::npos);
    CHECK(error_of(kRayleigh, {"experiment.sed=7"}).find("unknown key") != std::string::npos);
}
