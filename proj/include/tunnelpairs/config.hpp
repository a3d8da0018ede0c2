#pragma once

// Text configuration for the command-line drivers.
//
//   # comment
//   [junction]
//   resistance = 23.6 ohm
//   temperature = 20 mK
//
// Every physical quantity must carry a unit suffix; bare numbers are only
// accepted for dimensionless keys. Unknown sections or keys, duplicates and
// wrong units are ParseErrors with the offending line and column.

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "tunnelpairs/band.hpp"
#include "tunnelpairs/calibration_fit.hpp"
#include "tunnelpairs/detection_sim.hpp"
#include "tunnelpairs/junction_noise.hpp"

namespace tunnelpairs {

enum class Dimension { voltage, frequency, temperature, resistance, time, none };

/// "22 uV" -> 2.2e-5. Throws ParseError (column relative to `text`) when the
/// number or unit is malformed or the unit has the wrong dimension.
double parse_quantity(const std::string& text, Dimension dim, int line = 0, int column = 1);

enum class SweepOutput { g2, nrf, n1, n2, p_pair, pair_rate, g2_kelvin2 };

/// Canonical CSV column name of an output.
const char* column_name(SweepOutput o);
/// Inverse of the config spelling (g2, nrf, n1, n2, p_pair, pair_rate, g2_kelvin2).
std::optional<SweepOutput> parse_output_name(const std::string& s);

struct SweepSpec {
  Junction junction;
  Drive drive;  // v_dc and v_ac replaced along the grid
  DetectionBand band1, band2;
  double v_dc_start = -150e-6;
  double v_dc_stop = 150e-6;
  double v_dc_step = 0.5e-6;
  std::vector<double> v_ac;
  std::vector<SweepOutput> outputs;  // canonical order, no duplicates
  double pair_bandwidth = 200e6;     // Hz, for pair_rate
};

/// Throws ConfigurationError on a bad grid, empty v_ac list or no outputs.
void validate(const SweepSpec& s);

struct CalibrationSettings {
  calib::CalibrationModel initial;
  int starts = 8;
};

struct AppConfig {
  Junction junction;
  Drive drive;
  DetectionBand band1, band2;
  std::optional<SweepSpec> sweep;
  std::optional<sim::McConfig> mc;
  std::optional<CalibrationSettings> calibration;
};

AppConfig parse_config(std::istream& in);
/// Throws IoError when the file cannot be read.
AppConfig load_config(const std::string& path);

}  // namespace tunnelpairs
