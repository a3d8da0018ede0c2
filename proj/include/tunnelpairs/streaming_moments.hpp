#pragma once

#include <array>
#include <cstdint>

namespace tunnelpairs {

/// Single-pass bivariate mean / variance / covariance (Welford update,
/// Chan et al. pairwise merge). Variances and covariance are population
/// moments (divide by n), matching G2 = <xy> - <x><y>.
class CovarianceAccumulator {
 public:
  void push(double x, double y) {
    ++n_;
    const double dx = x - mean_x_;
    mean_x_ += dx / static_cast<double>(n_);
    const double dy = y - mean_y_;
    mean_y_ += dy / static_cast<double>(n_);
    m2_x_ += dx * (x - mean_x_);
    m2_y_ += dy * (y - mean_y_);
    c_xy_ += dx * (y - mean_y_);
  }

  /// Accumulator of a batch already reduced to its means and centered
  /// second moments (sums of squared / crossed deviations).
  static CovarianceAccumulator from_moments(std::uint64_t n, double mean_x, double mean_y,
                                            double m2_x, double m2_y, double c_xy) {
    CovarianceAccumulator a;
    a.n_ = n;
    a.mean_x_ = mean_x;
    a.mean_y_ = mean_y;
    a.m2_x_ = m2_x;
    a.m2_y_ = m2_y;
    a.c_xy_ = c_xy;
    return a;
  }

  void merge(const CovarianceAccumulator& o) {
    if (o.n_ == 0) return;
    if (n_ == 0) {
      *this = o;
      return;
    }
    const double na = static_cast<double>(n_), nb = static_cast<double>(o.n_);
    const double n = na + nb;
    const double dx = o.mean_x_ - mean_x_;
    const double dy = o.mean_y_ - mean_y_;
    m2_x_ += o.m2_x_ + dx * dx * na * nb / n;
    m2_y_ += o.m2_y_ + dy * dy * na * nb / n;
    c_xy_ += o.c_xy_ + dx * dy * na * nb / n;
    mean_x_ += dx * nb / n;
    mean_y_ += dy * nb / n;
    n_ += o.n_;
  }

  std::uint64_t count() const { return n_; }
  double mean_x() const { return mean_x_; }
  double mean_y() const { return mean_y_; }
  double variance_x() const { return n_ ? m2_x_ / static_cast<double>(n_) : 0.0; }
  double variance_y() const { return n_ ? m2_y_ / static_cast<double>(n_) : 0.0; }
  double covariance() const { return n_ ? c_xy_ / static_cast<double>(n_) : 0.0; }

 private:
  std::uint64_t n_ = 0;
  double mean_x_ = 0.0, mean_y_ = 0.0;
  double m2_x_ = 0.0, m2_y_ = 0.0, c_xy_ = 0.0;
};

/// Multivariate version for block statistics: mean vector and co-moment
/// matrix of D-dimensional observations.
template <std::size_t D>
class VectorMoments {
 public:
  using Vec = std::array<double, D>;

  void push(const Vec& v) {
    ++n_;
    Vec delta{};
    for (std::size_t i = 0; i < D; ++i) {
      delta[i] = v[i] - mean_[i];
      mean_[i] += delta[i] / static_cast<double>(n_);
    }
    for (std::size_t i = 0; i < D; ++i) {
      for (std::size_t k = 0; k < D; ++k) m2_[i][k] += delta[i] * (v[k] - mean_[k]);
    }
  }

  void merge(const VectorMoments& o) {
    if (o.n_ == 0) return;
    if (n_ == 0) {
      *this = o;
      return;
    }
    const double na = static_cast<double>(n_), nb = static_cast<double>(o.n_);
    const double n = na + nb;
    Vec delta{};
    for (std::size_t i = 0; i < D; ++i) delta[i] = o.mean_[i] - mean_[i];
    for (std::size_t i = 0; i < D; ++i) {
      for (std::size_t k = 0; k < D; ++k) {
        m2_[i][k] += o.m2_[i][k] + delta[i] * delta[k] * na * nb / n;
      }
    }
    for (std::size_t i = 0; i < D; ++i) mean_[i] += delta[i] * nb / n;
    n_ += o.n_;
  }

  std::uint64_t count() const { return n_; }
  const Vec& mean() const { return mean_; }
  // Unbiased sample covariance (divide by n - 1).
  double covariance(std::size_t i, std::size_t k) const {
    return n_ > 1 ? m2_[i][k] / static_cast<double>(n_ - 1) : 0.0;
  }

 private:
  std::uint64_t n_ = 0;
  Vec mean_{};
  std::array<Vec, D> m2_{};
};

}  // namespace tunnelpairs
