#include <sstream>

#include "doctest.h"
#include "tunnelpairs/config.hpp"
#include "tunnelpairs/errors.hpp"

using namespace tunnelpairs;

namespace {

const char* kBase = R"([junction]
resistance = 23.6 ohm
temperature = 20 mK

[drive]
f0 = 11.6 GHz

[band1]
center = 4.4 GHz
bandwidth = 0.65 GHz

[band2]
center = 7.2 GHz
bandwidth = 0.38 GHz
)";

AppConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

// Line and column of the ParseError raised by `text`.
std::pair<int, int> error_at(const std::string& text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    return {e.line(), e.column()};
  }
  FAIL("expected a ParseError");
  return {0, 0};
}

}  // namespace

TEST_CASE("quantities carry units") {
  CHECK(parse_quantity("22 uV", Dimension::voltage) == doctest::Approx(22e-6));
  CHECK(parse_quantity("22uV", Dimension::voltage) == doctest::Approx(22e-6));
  CHECK(parse_quantity("22 \xC2\xB5V", Dimension::voltage) == doctest::Approx(22e-6));
  CHECK(parse_quantity("-1.5 mV", Dimension::voltage) == doctest::Approx(-1.5e-3));
  CHECK(parse_quantity("11.6 GHz", Dimension::frequency) == doctest::Approx(11.6e9));
  CHECK(parse_quantity("20 mK", Dimension::temperature) == doctest::Approx(0.02));
  CHECK(parse_quantity("1 ns", Dimension::time) == doctest::Approx(1e-9));
  CHECK(parse_quantity("2.5e-1", Dimension::none) == 0.25);
  CHECK_THROWS_AS(parse_quantity("22", Dimension::voltage), ParseError);
  CHECK_THROWS_AS(parse_quantity("22 GHz", Dimension::voltage), ParseError);
  CHECK_THROWS_AS(parse_quantity("22 uv", Dimension::voltage), ParseError);
  CHECK_THROWS_AS(parse_quantity("abc", Dimension::voltage), ParseError);
  CHECK_THROWS_AS(parse_quantity("1 K", Dimension::none), ParseError);
  CHECK_THROWS_AS(parse_quantity("inf K", Dimension::temperature), ParseError);
}

TEST_CASE("unit errors point at the unit") {
  try {
    parse_quantity("22 GHz", Dimension::voltage, 7, 10);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 7);
    CHECK(e.column() == 13);
  }
}

TEST_CASE("full sweep config") {
  const auto cfg = parse(std::string(kBase) + R"(
[sweep]   # grid
v_dc_start = 0 uV
v_dc_stop = 100 uV
v_dc_step = 0.5 uV
v_ac = 11 uV, 22 uV
outputs = nrf, g2, g2_kelvin2, g2
band_policy = average
)");
  CHECK(cfg.junction.resistance == 23.6);
  CHECK(cfg.junction.temperature == doctest::Approx(0.02));
  REQUIRE(cfg.sweep);
  const auto& s = *cfg.sweep;
  CHECK(s.v_ac.size() == 2);
  CHECK(s.v_ac[1] == doctest::Approx(22e-6));
  REQUIRE(s.outputs.size() == 3);
  CHECK(s.outputs[0] == SweepOutput::g2);
  CHECK(s.outputs[1] == SweepOutput::nrf);
  CHECK(s.outputs[2] == SweepOutput::g2_kelvin2);
  CHECK(s.band1.policy == BandPolicy::average);
  CHECK(s.band2.policy == BandPolicy::average);
  CHECK_NOTHROW(validate(s));
  CHECK_FALSE(cfg.mc);
}

TEST_CASE("mc section") {
  const auto cfg = parse(std::string(kBase) + R"(
[mc]
n_windows = 2^20
seed = 12345678901
amp_noise_temperature = 0.1 K, 200 mK
crosstalk = 0.01
source = thermal_control
source_temperature = 300 mK
detector_time_constant = 1 ns
)");
  REQUIRE(cfg.mc);
  CHECK(cfg.mc->n_windows == (1u << 20));
  CHECK(cfg.mc->seed == 12345678901ull);
  CHECK(cfg.mc->amp_noise_temperature[1] == doctest::Approx(0.2));
  CHECK(cfg.mc->crosstalk[0][1] == 0.01);
  CHECK(cfg.mc->crosstalk[1][0] == 0.01);
  CHECK(cfg.mc->source_mode == sim::SourceMode::thermal_control);
  CHECK_NOTHROW(sim::validate(*cfg.mc));
}

TEST_CASE("calibration section needs no bands") {
  const auto cfg = parse(R"([junction]
resistance = 50 ohm
temperature = 20 mK
[drive]
f0 = 11.6 GHz
[calibration]
t_amp = 4 K
attenuation = 0.5
)");
  REQUIRE(cfg.calibration);
  CHECK(cfg.calibration->initial.t_amp == 4.0);
  CHECK(cfg.calibration->initial.attenuation == 0.5);
  CHECK(cfg.calibration->starts == 8);
}

TEST_CASE("diagnostics name line and column") {
  const std::string base(kBase);
  const int after = 15;  // first line after the base block
  CHECK(error_at(base + "[sweep]\nv_ac = 22 GHz\noutputs = g2\n") == std::pair{after + 1, 11});
  CHECK(error_at(base + "[sweep]\nv_ac = 22 uV, 5\noutputs = g2\n") == std::pair{after + 1, 16});
  CHECK(error_at(base + "[sweep]\nv_ac = 1 uV\noutputs = g2, g3\n") == std::pair{after + 2, 15});
  CHECK(error_at(base + "[sweeps]\n").first == after);
  CHECK(error_at(base + "[mc]\nbins = 4\n") == std::pair{after + 1, 1});
  CHECK(error_at(base + "[mc]\nseed = 1\nseed = 2\n").first == after + 2);
  CHECK(error_at(base + "[mc]\nn_windows = -3\n") == std::pair{after + 1, 13});
  CHECK(error_at(base + "[mc]\nsource = laser\n").first == after + 1);
  CHECK(error_at("resistance = 1 ohm\n").first == 1);
  CHECK(error_at("[junction]\nresistance 1 ohm\n").first == 2);
}

TEST_CASE("missing sections and keys") {
  CHECK_THROWS_AS(parse("[junction]\nresistance = 1 ohm\ntemperature = 1 K\n"), ParseError);
  CHECK_THROWS_AS(parse("[junction]\nresistance = 1 ohm\n[drive]\nf0 = 1 GHz\n"), ParseError);
  CHECK_THROWS_AS(parse(std::string(kBase) + "[sweep]\noutputs = g2\n"), ParseError);
  CHECK_THROWS_AS(parse(R"([junction]
resistance = 1 ohm
temperature = 1 K
[drive]
f0 = 1 GHz
[sweep]
v_ac = 1 uV
outputs = g2
)"), ParseError);
}

TEST_CASE("sweep spec invariants") {
  auto cfg = parse(std::string(kBase) + "[sweep]\nv_ac = 22 uV\noutputs = g2\n");
  SweepSpec s = *cfg.sweep;
  CHECK_NOTHROW(validate(s));
  s.v_ac.clear();
  CHECK_THROWS_AS(validate(s), ConfigurationError);
  s = *cfg.sweep;
  s.v_dc_step = 0.0;
  CHECK_THROWS_AS(validate(s), ConfigurationError);
  s = *cfg.sweep;
  s.v_dc_stop = s.v_dc_start;
  CHECK_THROWS_AS(validate(s), ConfigurationError);
  s = *cfg.sweep;
  s.outputs.clear();
  CHECK_THROWS_AS(validate(s), ConfigurationError);
}
