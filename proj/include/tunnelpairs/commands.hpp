#pragma once

// Drivers behind the `mc` and `calibrate` subcommands, plus NoiseCurve CSV
// input/output (header v_dc_V,v_gen_V,f_Hz,t_noise_K, one row per point).

#include <istream>
#include <ostream>
#include <string>

#include "tunnelpairs/calibration_fit.hpp"
#include "tunnelpairs/config.hpp"
#include "tunnelpairs/detection_sim.hpp"

namespace tunnelpairs {

/// Rows may come in any order but must cover the full (v_gen, v_dc) grid
/// exactly once at a single frequency. Throws ParseError naming the row
/// (line) and column on schema violations.
calib::NoiseCurve read_noise_curve(std::istream& in);
calib::NoiseCurve load_noise_curve(const std::string& path);
void write_noise_curve(std::ostream& out, const calib::NoiseCurve& c);

/// Runs the Monte Carlo, writes a deterministic report to `report` and, when
/// csv_path is non-empty, appends one result row (header on a new file).
sim::McResult run_mc(const sim::McConfig& cfg, std::ostream& report,
                     const std::string& csv_path = {}, int threads = 1);

/// Fits `data_path`, prints the fitted model and warnings to `report` and,
/// when json_path is non-empty, writes a JSON report there.
calib::FitReport run_calibration(const std::string& data_path, const AppConfig& cfg,
                                 std::uint64_t seed, std::ostream& report,
                                 const std::string& json_path = {}, int threads = 1);

}  // namespace tunnelpairs
