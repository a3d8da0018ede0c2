#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "tunnelpairs/calibration_fit.hpp"
#include "tunnelpairs/errors.hpp"
#include "tunnelpairs/nelder_mead.hpp"

using namespace tunnelpairs;
using namespace tunnelpairs::calib;

namespace {

constexpr double kR = 23.6;
constexpr double kF = 6e9;
constexpr double kF0 = 11.6e9;

std::vector<double> grid(double lo, double hi, double step) {
  std::vector<double> v;
  const int n = static_cast<int>(std::lround((hi - lo) / step));
  for (int i = 0; i <= n; ++i) v.push_back(lo + i * step);
  return v;
}

const std::vector<double> kAmplitudes{0.0, 60e-6, 120e-6, 180e-6};

double rel(double a, double b) { return std::abs(a / b - 1.0); }

void check_close(const CalibrationModel& got, const CalibrationModel& want, double tol) {
  CHECK(rel(got.gain, want.gain) < tol);
  CHECK(rel(got.t_amp, want.t_amp) < tol);
  CHECK(rel(got.t_electron, want.t_electron) < tol);
  CHECK(rel(got.attenuation, want.attenuation) < tol);
}

}  // namespace

TEST_CASE("nelder-mead finds the minimum of a bounded quadratic") {
  const NelderMead nm({-5.0, -5.0}, {5.0, 0.5});
  auto f = [](const std::vector<double>& x) {
    return (x[0] - 1.0) * (x[0] - 1.0) + 10.0 * (x[1] - 2.0) * (x[1] - 2.0);
  };
  const auto r = nm.minimize(f, {0.0, 0.0}, {0.5, 0.5});
  CHECK(r.converged);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(r.x[1] == 0.5);  // pinned at the upper bound
  for (std::size_t i = 1; i < r.best_history.size(); ++i) {
    CHECK(r.best_history[i] <= r.best_history[i - 1]);
  }
}

TEST_CASE("nelder-mead solves rosenbrock") {
  const NelderMead nm({-10.0, -10.0}, {10.0, 10.0});
  auto f = [](const std::vector<double>& x) {
    return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
  };
  NelderMeadOptions o;
  o.abs_tol = 1e-24;
  const auto r = nm.minimize(f, {-1.2, 1.0}, {0.2, 0.2}, o);
  CHECK(r.converged);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("forward model follows the shot-noise line at large bias") {
  const CalibrationModel m{1.0, 0.0, 0.02, 1.0};
  const std::vector<double> v{2e-3};
  const auto t = forward_model(m, kR, v, {0.0}, kF, kF0);
  const double line = oracle::kE * 2e-3L / (2.0L * oracle::kB);
  CHECK(t[0] == doctest::Approx(line).epsilon(1e-9));
}

TEST_CASE("forward model agrees with the series oracle") {
  const CalibrationModel m{1.3, 5.0, 0.02, 0.7};
  const auto v = grid(-100e-6, 100e-6, 25e-6);
  const auto t = forward_model(m, kR, v, kAmplitudes, kF, kF0);
  for (std::size_t a = 0; a < kAmplitudes.size(); ++a) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      const long double s =
          oracle::photo_s(kR, 0.02L, v[i], 0.7L * kAmplitudes[a], kF0, kF);
      const double want = static_cast<double>(1.3L * (s * kR / (2.0L * oracle::kB) + 5.0L));
      CHECK(oracle::rel_diff(t[a * v.size() + i], want) < 1e-10);
    }
  }
}

TEST_CASE("attenuation and generator amplitude enter only as a product") {
  const auto v = grid(-50e-6, 50e-6, 10e-6);
  const auto a = forward_model({1.0, 1.0, 0.05, 0.5}, kR, v, {80e-6}, kF, kF0);
  const auto b = forward_model({1.0, 1.0, 0.05, 1.0}, kR, v, {40e-6}, kF, kF0);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-14));
}

TEST_CASE("cold unbiased-drive curve has its kink at hf/e") {
  const auto v = grid(0.0, 60e-6, 0.5e-6);
  const auto t = forward_model({1.0, 0.0, 0.02, 1.0}, kR, v, {0.0}, kF, kF0);
  std::size_t peak = 1;
  for (std::size_t i = 1; i + 1 < t.size(); ++i) {
    if (t[i + 1] - 2 * t[i] + t[i - 1] > t[peak + 1] - 2 * t[peak] + t[peak - 1]) peak = i;
  }
  const double hf_e = static_cast<double>(oracle::kH * kF / oracle::kE);
  CHECK(std::abs(v[peak] - hf_e) < 1e-6);
}

TEST_CASE("noiseless round trip recovers the setup") {
  const CalibrationModel truth{1.3, 5.0, 0.02, 0.7};
  const auto data = synthesize_curve(truth, kR, grid(-200e-6, 200e-6, 5e-6), kAmplitudes, kF, kF0);
  const FitReport r = fit(data, kR, kF0, {1.0, 4.0, 0.03, 0.5});
  CHECK(r.converged);
  check_close(r.model, truth, 1e-3);
  CHECK(r.residual_rms < 1e-6);
  for (std::size_t i = 1; i < r.best_history.size(); ++i) {
    CHECK(r.best_history[i] <= r.best_history[i - 1]);
  }
}

TEST_CASE("noiseless round trip over random ground truths") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto v = grid(-200e-6, 200e-6, 10e-6);
  FitOptions o;
  o.starts = 3;
  for (int draw = 0; draw < 50; ++draw) {
    const CalibrationModel truth{std::exp(std::log(0.1) + u(rng) * std::log(100.0)),
                                 0.5 + 30.0 * u(rng), std::exp(std::log(0.005) + u(rng) * std::log(200.0)),
                                 0.2 + 0.8 * u(rng)};
    CalibrationModel guess = truth;
    guess.gain *= 0.8 + 0.4 * u(rng);
    guess.t_amp *= 0.8 + 0.4 * u(rng);
    guess.t_electron *= 0.8 + 0.4 * u(rng);
    guess.attenuation = std::min(1.0, guess.attenuation * (0.8 + 0.4 * u(rng)));
    o.seed = static_cast<std::uint64_t>(draw);
    const auto data = synthesize_curve(truth, kR, v, kAmplitudes, kF, kF0);
    INFO("draw ", draw);
    check_close(fit(data, kR, kF0, guess, o).model, truth, 1e-3);
  }
}

TEST_CASE("fit is invariant under a sign flip of the bias") {
  const CalibrationModel truth{1.3, 5.0, 0.05, 0.7};
  auto data = synthesize_curve(truth, kR, grid(-100e-6, 100e-6, 5e-6), kAmplitudes, kF, kF0);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (auto& t : data.t_noise) t *= 1.0 + 0.01 * g(rng);
  NoiseCurve flipped = data;
  const std::size_t n = data.v_dc.size();
  for (std::size_t i = 0; i < n; ++i) flipped.v_dc[i] = -data.v_dc[n - 1 - i];
  for (std::size_t a = 0; a < data.v_gen.size(); ++a) {
    for (std::size_t i = 0; i < n; ++i) flipped.t_noise[a * n + i] = data.at(a, n - 1 - i);
  }
  const CalibrationModel guess{1.0, 4.0, 0.03, 0.5};
  const FitReport a = fit(data, kR, kF0, guess), b = fit(flipped, kR, kF0, guess);
  CHECK(b.objective == doctest::Approx(a.objective).epsilon(1e-9));
  CHECK(rel(a.model.gain, b.model.gain) < 1e-6);
  CHECK(rel(a.model.t_amp, b.model.t_amp) < 1e-6);
  CHECK(rel(a.model.attenuation, b.model.attenuation) < 1e-6);
}

TEST_CASE("zero drive leaves the attenuation unidentifiable") {
  const CalibrationModel truth{1.3, 5.0, 0.02, 0.7};
  const auto data = synthesize_curve(truth, kR, grid(-200e-6, 200e-6, 5e-6), {0.0}, kF, kF0);
  const FitReport r = fit(data, kR, kF0, {1.0, 4.0, 0.03, 0.5});
  CHECK_FALSE(r.identifiable[3]);
  CHECK(r.identifiable[0]);
  REQUIRE(r.warnings.size() == 1);
  CHECK(r.warnings[0].find("attenuation") != std::string::npos);
  CHECK(r.model.attenuation == 0.5);
  CHECK(rel(r.model.gain, truth.gain) < 1e-3);
  CHECK(rel(r.model.t_amp, truth.t_amp) < 1e-3);
}

TEST_CASE("constant curve is rejected") {
  NoiseCurve c{grid(-100e-6, 100e-6, 10e-6), {0.0}, kF, {}};
  c.t_noise.assign(c.v_dc.size(), 7.0);
  CHECK_THROWS_AS(fit(c, kR, kF0, {}), IdentifiabilityError);
}

TEST_CASE("fit preconditions") {
  const auto small = synthesize_curve({}, kR, grid(0.0, 10e-6, 1e-6), {0.0}, kF, kF0);
  CHECK_THROWS_AS(fit(small, kR, kF0, {}), InputError);
  const auto ok = synthesize_curve({}, kR, grid(0.0, 40e-6, 2e-6), {0.0}, kF, kF0);
  CHECK_THROWS_AS(fit(ok, kR, kF0, {0.001, 1.0, 0.02, 1.0}), ConfigurationError);
  CHECK_THROWS_AS(fit(ok, kR, kF0, {1.0, 1.0, 0.02, 0.0}), ConfigurationError);
  NoiseCurve bad = ok;
  bad.t_noise[3] = -1.0;
  CHECK_THROWS_AS(fit(bad, kR, kF0, {}), InputError);
  bad = ok;
  std::swap(bad.v_dc[0], bad.v_dc[1]);
  CHECK_THROWS_AS(fit(bad, kR, kF0, {}), InputError);
  bad = ok;
  bad.t_noise.pop_back();
  CHECK_THROWS_AS(fit(bad, kR, kF0, {}), InputError);
}

TEST_CASE("evaluation cap raises a convergence error with the best point") {
  const auto data = synthesize_curve({1.3, 5.0, 0.02, 0.7}, kR, grid(-100e-6, 100e-6, 10e-6),
                                     kAmplitudes, kF, kF0);
  FitOptions o;
  o.max_evaluations = 30;
  try {
    fit(data, kR, kF0, {1.0, 4.0, 0.03, 0.5}, o);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK_FALSE(e.best().converged);
    CHECK(std::isfinite(e.best().objective));
    CHECK_NOTHROW(validate(e.best().model));
  }
}

TEST_CASE("multi-start result does not depend on thread count") {
  const auto data = synthesize_curve({1.3, 5.0, 0.02, 0.7}, kR, grid(-100e-6, 100e-6, 10e-6),
                                     kAmplitudes, kF, kF0);
  FitOptions o;
  o.starts = 4;
  const FitReport a = fit(data, kR, kF0, {1.0, 4.0, 0.03, 0.5}, o);
  o.threads = 3;
  const FitReport b = fit(data, kR, kF0, {1.0, 4.0, 0.03, 0.5}, o);
  CHECK(a.objective == b.objective);
  CHECK(a.best_start == b.best_start);
  CHECK(a.model.t_electron == b.model.t_electron);
}
