#pragma once

// Bounded Nelder-Mead simplex minimizer. Bounds are enforced by projecting
// every trial point onto the box, so the objective is only ever evaluated
// inside it.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace tunnelpairs {

struct NelderMeadOptions {
  int max_evaluations = 20000;
  // Stop when the best value moved by less than rel_tol |f| + abs_tol over
  // n + 1 iterations and the simplex values agree to the same tolerance.
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
  // Fresh simplices built around the converged point; the run ends when a
  // restart no longer improves the best value.
  int max_restarts = 4;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = std::numeric_limits<double>::infinity();
  int evaluations = 0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> best_history;  // best value after each iteration
};

class NelderMead {
 public:
  using Objective = std::function<double(const std::vector<double>&)>;

  NelderMead(std::vector<double> lower, std::vector<double> upper)
      : lower_(std::move(lower)), upper_(std::move(upper)) {}

  NelderMeadResult minimize(const Objective& f, std::vector<double> x0,
                            const std::vector<double>& step,
                            const NelderMeadOptions& opts = {}) const {
    const std::size_t n = x0.size();
    NelderMeadResult out;
    auto eval = [&](std::vector<double>& x) {
      project(x);
      ++out.evaluations;
      const double v = f(x);
      return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    project(x0);
    out.x = x0;
    out.value = eval(out.x);
    for (int restart = 0; restart <= opts.max_restarts; ++restart) {
      const double before = out.value;
      std::vector<std::vector<double>> simplex(n + 1, out.x);
      std::vector<double> values(n + 1, out.value);
      for (std::size_t i = 0; i < n; ++i) {
        auto& v = simplex[i + 1];
        v[i] += step[i];
        // Step inward when the vertex would sit on the bound.
        if (v[i] > upper_[i]) v[i] = out.x[i] - step[i];
        values[i + 1] = eval(v);
      }
      const bool ok = run(simplex, values, opts, out, eval);
      const std::size_t best = argmin(values);
      if (values[best] <= out.value) {
        out.value = values[best];
        out.x = simplex[best];
      }
      if (!ok) return out;
      const double tol = opts.rel_tol * std::abs(out.value) + opts.abs_tol;
      if (restart > 0 && before - out.value <= tol) break;
    }
    out.converged = true;
    return out;
  }

 private:
  template <class Eval>
  bool run(std::vector<std::vector<double>>& s, std::vector<double>& fv,
           const NelderMeadOptions& opts, NelderMeadResult& out, Eval& eval) const {
    const std::size_t n = s.size() - 1;
    std::vector<double> history;
    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), xr(n), xe(n), xc(n);
    while (true) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
      const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];
      history.push_back(fv[best]);
      out.best_history.push_back(fv[best]);
      ++out.iterations;

      const double tol = opts.rel_tol * std::abs(fv[best]) + opts.abs_tol;
      if (history.size() > n + 1 &&
          history[history.size() - n - 2] - fv[best] <= tol && fv[worst] - fv[best] <= tol) {
        return true;
      }
      if (out.evaluations >= opts.max_evaluations) return false;

      std::fill(centroid.begin(), centroid.end(), 0.0);
      for (std::size_t i : order) {
        if (i == worst) continue;
        for (std::size_t d = 0; d < n; ++d) centroid[d] += s[i][d] / static_cast<double>(n);
      }
      for (std::size_t d = 0; d < n; ++d) xr[d] = centroid[d] + (centroid[d] - s[worst][d]);
      const double fr = eval(xr);
      if (fr < fv[best]) {
        for (std::size_t d = 0; d < n; ++d) xe[d] = centroid[d] + 2.0 * (centroid[d] - s[worst][d]);
        const double fe = eval(xe);
        if (fe < fr) {
          s[worst] = xe;
          fv[worst] = fe;
        } else {
          s[worst] = xr;
          fv[worst] = fr;
        }
        continue;
      }
      if (fr < fv[second]) {
        s[worst] = xr;
        fv[worst] = fr;
        continue;
      }
      const bool outside = fr < fv[worst];
      for (std::size_t d = 0; d < n; ++d) {
        xc[d] = outside ? centroid[d] + 0.5 * (xr[d] - centroid[d])
                        : centroid[d] + 0.5 * (s[worst][d] - centroid[d]);
      }
      const double fc = eval(xc);
      if (fc < std::min(fr, fv[worst])) {
        s[worst] = xc;
        fv[worst] = fc;
        continue;
      }
      for (std::size_t i : order) {
        if (i == best) continue;
        for (std::size_t d = 0; d < n; ++d) s[i][d] = s[best][d] + 0.5 * (s[i][d] - s[best][d]);
        fv[i] = eval(s[i]);
      }
    }
  }

  void project(std::vector<double>& x) const {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lower_[i], upper_[i]);
  }

  static std::size_t argmin(const std::vector<double>& v) {
    return static_cast<std::size_t>(std::min_element(v.begin(), v.end()) - v.begin());
  }

  std::vector<double> lower_, upper_;
};

}  // namespace tunnelpairs
