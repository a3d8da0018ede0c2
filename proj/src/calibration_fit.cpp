#include "tunnelpairs/calibration_fit.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <cmath>
#include <mutex>
#include <random>
#include <thread>

#include "tunnelpairs/constants.hpp"
#include "tunnelpairs/errors.hpp"
#include "tunnelpairs/junction_noise.hpp"
#include "tunnelpairs/nelder_mead.hpp"

namespace tunnelpairs::calib {

namespace {

constexpr std::size_t kParams = 4;

// Fit coordinates: log gain, t_amp, log t_electron, attenuation. Logs put
// the scale parameters on a footing comparable to the others.
std::array<double, kParams> to_coords(const CalibrationModel& m) {
  return {std::log(m.gain), m.t_amp, std::log(m.t_electron), m.attenuation};
}

CalibrationModel from_coords(const std::array<double, kParams>& u) {
  return {std::exp(u[0]), u[1], std::exp(u[2]), u[3]};
}

const std::array<double, kParams> kLower{std::log(Bounds::gain_min), Bounds::t_amp_min,
                                         std::log(Bounds::t_electron_min),
                                         Bounds::attenuation_min};
const std::array<double, kParams> kUpper{std::log(Bounds::gain_max), Bounds::t_amp_max,
                                         std::log(Bounds::t_electron_max),
                                         Bounds::attenuation_max};

void require_increasing(const std::vector<double>& v, const char* name) {
  if (v.empty()) throw InputError(std::string("noise curve: empty ") + name + " grid");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) throw InputError(std::string("noise curve: non-finite ") + name);
    if (i > 0 && !(v[i] > v[i - 1])) {
      throw InputError(std::string("noise curve: ") + name + " grid must be strictly increasing");
    }
  }
}

double sum_squares(const std::vector<double>& pred, const std::vector<double>& data) {
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double r = pred[i] - data[i];
    acc += r * r;
  }
  return acc;
}

struct StartResult {
  NelderMeadResult nm;
  CalibrationModel model;
};

}  // namespace

void validate(const CalibrationModel& m) {
  auto in = [](double v, double lo, double hi) { return std::isfinite(v) && v >= lo && v <= hi; };
  if (!in(m.gain, Bounds::gain_min, Bounds::gain_max)) {
    throw ConfigurationError("calibration: gain outside [1e-2, 1e2]");
  }
  if (!in(m.t_amp, Bounds::t_amp_min, Bounds::t_amp_max)) {
    throw ConfigurationError("calibration: t_amp outside [0, 100] K");
  }
  if (!in(m.t_electron, Bounds::t_electron_min, Bounds::t_electron_max)) {
    throw ConfigurationError("calibration: t_electron outside [1 mK, 10 K]");
  }
  if (!(m.attenuation > 0.0) || !(m.attenuation <= 1.0)) {
    throw ConfigurationError("calibration: attenuation outside (0, 1]");
  }
}

void validate(const NoiseCurve& c) {
  require_increasing(c.v_dc, "v_dc");
  require_increasing(c.v_gen, "v_gen");
  if (c.v_gen.front() < 0.0) throw InputError("noise curve: negative generator amplitude");
  if (!(c.frequency > 0.0) || !std::isfinite(c.frequency)) {
    throw InputError("noise curve: detection frequency must be > 0");
  }
  if (c.t_noise.size() != c.v_dc.size() * c.v_gen.size()) {
    throw InputError("noise curve: expected one temperature per (v_gen, v_dc) point");
  }
  for (double t : c.t_noise) {
    if (!std::isfinite(t) || !(t > 0.0)) {
      throw InputError("noise curve: temperatures must be finite and > 0");
    }
  }
}

std::vector<double> forward_model(const CalibrationModel& m, double resistance,
                                  const std::vector<double>& v_dc,
                                  const std::vector<double>& v_gen, double f, double f0) {
  const Junction j{resistance, m.t_electron};
  validate(j);
  std::vector<double> out;
  out.reserve(v_dc.size() * v_gen.size());
  for (double vg : v_gen) {
    Drive d{0.0, m.attenuation * vg, f0};
    validate(d);
    const SidebandWeights w(drive_parameter(d));
    for (double v : v_dc) {
      d.v_dc = v;
      out.push_back(m.gain * (noise_temperature(j, photo_assisted_s(j, d, f, w)) + m.t_amp));
    }
  }
  return out;
}

NoiseCurve synthesize_curve(const CalibrationModel& m, double resistance,
                            const std::vector<double>& v_dc, const std::vector<double>& v_gen,
                            double f, double f0) {
  NoiseCurve c{v_dc, v_gen, f, forward_model(m, resistance, v_dc, v_gen, f, f0)};
  validate(c);
  return c;
}

FitReport fit(const NoiseCurve& data, double resistance, double f0,
              const CalibrationModel& initial, const FitOptions& opts) {
  validate(data);
  validate(initial);
  validate(Junction{resistance, initial.t_electron});
  if (!(f0 > 0.0)) throw InputError("calibration: f0 must be > 0");
  if (data.size() < 4 * kParams) {
    throw InputError("calibration: need at least 16 data points for 4 parameters");
  }
  if (opts.starts < 1) throw InputError("calibration: need at least one start");
  const auto [lo, hi] = std::minmax_element(data.t_noise.begin(), data.t_noise.end());
  if (*hi - *lo <= 1e-12 * *hi) {
    throw IdentifiabilityError("calibration: constant noise curve, parameters are not identifiable");
  }

  auto predict = [&](const CalibrationModel& m) {
    return forward_model(m, resistance, data.v_dc, data.v_gen, data.frequency, f0);
  };

  // Sensitivity of the prediction to each coordinate at the initial guess.
  FitReport report;
  const auto u0 = to_coords(initial);
  std::array<double, kParams> column_norm{};
  for (std::size_t p = 0; p < kParams; ++p) {
    const double h = 1e-4 * std::max(1.0, std::abs(u0[p]));
    auto up = u0, down = u0;
    up[p] = std::min(u0[p] + h, kUpper[p]);
    down[p] = std::max(u0[p] - h, kLower[p]);
    const auto a = predict(from_coords(up)), b = predict(from_coords(down));
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double d = (a[i] - b[i]) / (up[p] - down[p]);
      acc += d * d;
    }
    column_norm[p] = std::sqrt(acc);
  }
  const double largest = *std::max_element(column_norm.begin(), column_norm.end());
  std::vector<std::size_t> free;
  for (std::size_t p = 0; p < kParams; ++p) {
    report.identifiable[p] = column_norm[p] > 1e-9 * largest;
    if (report.identifiable[p]) {
      free.push_back(p);
    } else {
      report.warnings.push_back(std::string(kParameterNames[p]) +
                                " is not identifiable from these data; held at its initial value");
    }
  }

  double data_scale = 0.0;
  for (double t : data.t_noise) data_scale += t * t;

  std::vector<double> lower, upper, step;
  for (std::size_t p : free) {
    lower.push_back(kLower[p]);
    upper.push_back(kUpper[p]);
    step.push_back(p == 1 ? 0.1 * std::max(initial.t_amp, 1.0) : 0.1);
  }
  const NelderMead minimizer(lower, upper);
  NelderMeadOptions nm_opts;
  nm_opts.max_evaluations = opts.max_evaluations;
  nm_opts.rel_tol = opts.rel_tol;
  nm_opts.abs_tol = 1e-22 * data_scale;

  std::vector<StartResult> results(static_cast<std::size_t>(opts.starts));
  auto work = [&](int s) {
    std::seed_seq seq{static_cast<std::uint32_t>(opts.seed), static_cast<std::uint32_t>(opts.seed >> 32),
                      static_cast<std::uint32_t>(s)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> jitter(-opts.jitter, opts.jitter);
    CalibrationModel start = initial;
    start.gain *= 1.0 + jitter(rng);
    start.t_amp *= 1.0 + jitter(rng);
    start.t_electron *= 1.0 + jitter(rng);
    start.attenuation *= 1.0 + jitter(rng);
    const auto us = to_coords(start);
    std::vector<double> x0;
    for (std::size_t p : free) x0.push_back(us[p]);
    auto objective = [&](const std::vector<double>& x) {
      auto u = u0;
      for (std::size_t i = 0; i < free.size(); ++i) u[free[i]] = x[i];
      return sum_squares(predict(from_coords(u)), data.t_noise);
    };
    StartResult r;
    r.nm = minimizer.minimize(objective, x0, step, nm_opts);
    auto u = u0;
    for (std::size_t i = 0; i < free.size(); ++i) u[free[i]] = r.nm.x[i];
    r.model = from_coords(u);
    results[static_cast<std::size_t>(s)] = std::move(r);
  };

  const int n_threads = std::clamp(opts.threads, 1, opts.starts);
  if (n_threads == 1) {
    for (int s = 0; s < opts.starts; ++s) work(s);
  } else {
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) {
      pool.emplace_back([&] {
        try {
          for (int s = next++; s < opts.starts; s = next++) work(s);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  // Lowest objective wins; ties go to the lower start index.
  int best = -1, best_any = 0;
  for (int s = 0; s < opts.starts; ++s) {
    const auto& r = results[static_cast<std::size_t>(s)];
    report.evaluations += r.nm.evaluations;
    if (r.nm.value < results[static_cast<std::size_t>(best_any)].nm.value) best_any = s;
    if (r.nm.converged &&
        (best < 0 || r.nm.value < results[static_cast<std::size_t>(best)].nm.value)) {
      best = s;
    }
  }
  const int chosen = best >= 0 ? best : best_any;
  const auto& win = results[static_cast<std::size_t>(chosen)];
  report.model = win.model;
  report.objective = win.nm.value;
  report.residual_rms = std::sqrt(win.nm.value / static_cast<double>(data.size()));
  report.best_start = chosen;
  report.converged = best >= 0;
  report.best_history = win.nm.best_history;
  if (!report.converged) {
    throw ConvergenceError("calibration: no start converged within " +
                               std::to_string(opts.max_evaluations) + " evaluations",
                           report);
  }
  return report;
}

}  // namespace tunnelpairs::calib
