#pragma once

// Parameter sweeps over (v_dc, v_ac) and their CSV / SVG renderings.

#include <array>
#include <ostream>
#include <string>
#include <vector>

#include "tunnelpairs/config.hpp"

namespace tunnelpairs {

inline constexpr std::size_t kSweepOutputCount = 7;

struct SweepRow {
  double v_dc = 0.0;  // V
  double v_ac = 0.0;  // V
  double f0 = 0.0;    // Hz
  std::array<double, kSweepOutputCount> values{};  // indexed by SweepOutput, NaN if undefined

  double operator[](SweepOutput o) const { return values[static_cast<std::size_t>(o)]; }
};

/// Rounds to 12 significant digits, the precision of CSV inputs. Sweep
/// points are computed from canonical inputs so a CSV row can be recomputed
/// exactly from its own text.
double canonical(double x);

/// Shortest decimal text that reads back to the same double; "nan" for NaN.
std::string format_exact(double x);

/// Bias grid start, start + step, ... up to stop (inclusive within 1e-9 step).
std::vector<double> bias_grid(const SweepSpec& s);

SweepRow evaluate_point(const SweepSpec& s, double v_dc, double v_ac);

/// All rows, amplitude-major, in grid order regardless of `threads`.
std::vector<SweepRow> evaluate_sweep(const SweepSpec& s, int threads = 1);

void write_sweep_csv(std::ostream& out, const SweepSpec& s, const std::vector<SweepRow>& rows);

/// One panel per requested output versus v_dc in uV, one trace per v_ac.
void write_sweep_svg(std::ostream& out, const SweepSpec& s, const std::vector<SweepRow>& rows);

/// Evaluates the sweep and writes the CSV (and the plot when plot_path is
/// non-empty). Throws IoError when a file cannot be written.
std::vector<SweepRow> run_sweep(const SweepSpec& s, const std::string& csv_path,
                                const std::string& plot_path = {}, int threads = 1);

}  // namespace tunnelpairs
