#pragma once

// Recovery of setup parameters (gain, amplifier noise temperature, electron
// temperature, excitation-line attenuation) from photo-assisted noise curves
// by least squares on Kelvin-referred noise temperatures.

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace tunnelpairs::calib {

struct CalibrationModel {
  double gain = 1.0;          // dimensionless
  double t_amp = 0.0;         // K
  double t_electron = 0.02;   // K
  double attenuation = 1.0;   // v_ac at the sample = attenuation * v_gen
};

inline constexpr std::array<const char*, 4> kParameterNames{"gain", "t_amp", "t_electron",
                                                            "attenuation"};

struct Bounds {
  static constexpr double gain_min = 1e-2, gain_max = 1e2;
  static constexpr double t_amp_min = 0.0, t_amp_max = 100.0;
  static constexpr double t_electron_min = 1e-3, t_electron_max = 10.0;
  static constexpr double attenuation_min = 1e-6, attenuation_max = 1.0;
};

/// Throws ConfigurationError outside the bounds above.
void validate(const CalibrationModel& m);

/// Measured noise temperatures on a (v_gen, v_dc) grid at one detection
/// frequency. t_noise is stored amplitude-major: t_noise[a * v_dc.size() + i].
struct NoiseCurve {
  std::vector<double> v_dc;   // V, strictly increasing
  std::vector<double> v_gen;  // V, generator amplitudes, strictly increasing
  double frequency = 0.0;     // Hz
  std::vector<double> t_noise;  // K

  std::size_t size() const { return t_noise.size(); }
  double at(std::size_t amplitude, std::size_t bias) const {
    return t_noise[amplitude * v_dc.size() + bias];
  }
};

/// Throws InputError on non-increasing grids, size mismatch, or
/// non-finite / non-positive temperatures.
void validate(const NoiseCurve& c);

/// gain * (S(f; v_dc, attenuation v_gen, t_electron) R / 2 k_B + t_amp) on
/// the grid, amplitude-major like NoiseCurve::t_noise.
std::vector<double> forward_model(const CalibrationModel& m, double resistance,
                                  const std::vector<double>& v_dc,
                                  const std::vector<double>& v_gen, double f, double f0);

/// Synthetic curve from forward_model.
NoiseCurve synthesize_curve(const CalibrationModel& m, double resistance,
                            const std::vector<double>& v_dc, const std::vector<double>& v_gen,
                            double f, double f0);

struct FitOptions {
  int starts = 8;
  double jitter = 0.5;  // relative half-width of the start distribution
  std::uint64_t seed = 0;
  int max_evaluations = 20000;  // per start
  double rel_tol = 1e-10;
  int threads = 1;
};

struct FitReport {
  CalibrationModel model;
  double objective = 0.0;     // sum of squared residuals, K^2
  double residual_rms = 0.0;  // K
  int evaluations = 0;        // all starts
  int best_start = -1;
  bool converged = false;
  // A parameter the data do not constrain (zero sensitivity) stays at its
  // initial value and is reported here.
  std::array<bool, 4> identifiable{true, true, true, true};
  std::vector<std::string> warnings;
  std::vector<double> best_history;  // winning start, best objective per iteration
};

/// Every start exhausted its evaluation budget. Carries the best point seen.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, FitReport best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const FitReport& best() const noexcept { return best_; }

 private:
  FitReport best_;
};

/// Multi-start bounded simplex fit. Throws InputError for fewer than four
/// points per parameter, ConfigurationError for an initial guess outside
/// the bounds, IdentifiabilityError for a constant curve, ConvergenceError
/// when no start converges.
FitReport fit(const NoiseCurve& data, double resistance, double f0,
              const CalibrationModel& initial, const FitOptions& opts = {});

}  // namespace tunnelpairs::calib
