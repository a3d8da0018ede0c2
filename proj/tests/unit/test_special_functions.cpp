#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "tunnelpairs/special_functions.hpp"

using namespace tunnelpairs;

TEST_CASE("bessel_j at the origin") {
  CHECK(bessel_j(0, 0.0) == 1.0);
  CHECK(bessel_j(1, 0.0) == 0.0);
  CHECK(bessel_j(-7, 0.0) == 0.0);
}

TEST_CASE("bessel_j matches the ascending series") {
  CHECK(bessel_j(0, 1.0) == doctest::Approx(0.765197686557966551).epsilon(1e-14));
  CHECK(std::abs(bessel_j(0, 2.404826)) < 1e-6);
  for (int n = 0; n <= 30; ++n) {
    for (double z : {1e-9, 1e-3, 0.1, 0.4585, 1.0, 2.5, 5.0, 9.7}) {
      const double expected = static_cast<double>(oracle::bessel_series(n, z));
      CHECK(std::abs(bessel_j(n, z) - expected) < 1e-12);
    }
  }
}

TEST_CASE("bessel_j at large argument and order") {
  // Oracle values from the series are unreliable here; use the addition
  // theorem sum J_n^2 = 1 and known high-order smallness instead.
  double sum = 0.0;
  const auto seq = bessel_j_sequence(200, 50.0);
  for (std::size_t n = 0; n < seq.size(); ++n) sum += (n == 0 ? 1.0 : 2.0) * seq[n] * seq[n];
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(bessel_j(200, 50.0)) < 1e-60);
  // J_0(50) = 0.05581232766925181...
  CHECK(bessel_j(0, 50.0) == doctest::Approx(0.0558123276692518).epsilon(1e-11));
}

TEST_CASE("bessel_j reflection identities are exact") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> zdist(-20.0, 20.0);
  std::uniform_int_distribution<int> ndist(0, 60);
  for (int i = 0; i < 500; ++i) {
    const double z = zdist(rng);
    const int n = ndist(rng);
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    CHECK(bessel_j(-n, z) == sign * bessel_j(n, z));
    CHECK(bessel_j(n, -z) == sign * bessel_j(n, z));
  }
}

TEST_CASE("bessel recurrence residual and normalization") {
  for (double z = 0.1; z <= 10.0; z += 0.1) {
    for (int n = 1; n <= 20; ++n) {
      const double r = bessel_j(n - 1, z) + bessel_j(n + 1, z) - 2.0 * n / z * bessel_j(n, z);
      CHECK(std::abs(r) < 1e-10);
    }
    const int N = sideband_cutoff(z);
    double sum = 0.0;
    for (int n = -N; n <= N; ++n) sum += bessel_j(n, z) * bessel_j(n, z);
    CHECK(std::abs(sum - 1.0) < 1e-10);
  }
}

TEST_CASE("bessel_j rejects unsupported domain") {
  CHECK_THROWS_AS(bessel_j(201, 1.0), DomainError);
  CHECK_THROWS_AS(bessel_j(-201, 1.0), DomainError);
  CHECK_THROWS_AS(bessel_j(0, 50.5), DomainError);
  CHECK_THROWS_AS(bessel_j(0, std::nan("")), DomainError);
}

TEST_CASE("coth_stable") {
  CHECK(coth_stable(1e-9) == doctest::Approx(1e9).epsilon(1e-12));
  CHECK(coth_stable(50.0) == 1.0);
  CHECK(coth_stable(-50.0) == -1.0);
  const double expected = static_cast<double>(oracle::coth_ld(0.048L));
  CHECK(coth_stable(0.048) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(coth_stable(0.048) == doctest::Approx(20.850).epsilon(1e-4));
  CHECK_THROWS_AS(coth_stable(0.0), DomainError);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> logx(-9.0, 1.5);
  for (int i = 0; i < 500; ++i) {
    const double x = std::pow(10.0, logx(rng));
    CHECK(coth_stable(-x) == -coth_stable(x));
    const double ref = static_cast<double>(oracle::coth_ld(x));
    CHECK(oracle::rel_diff(coth_stable(x), ref) < 1e-12);
  }
}

TEST_CASE("band_average") {
  const DetectionBand b{4.4e9, 0.65e9, BandPolicy::center};
  CHECK(band_average([](double) { return 2.0; }, b) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(band_average([](double f) { return f; }, b) == doctest::Approx(4.4e9).epsilon(1e-14));
  const DetectionBand unit{2.0, 2.0, BandPolicy::average};
  CHECK(band_average([](double f) { return f * f; }, unit) ==
        doctest::Approx(13.0 / 3.0).epsilon(1e-14));
  // degree 31 is integrated exactly: mean of x^31 over [1,3] = (3^32 - 1) / 64
  const double exact = (std::pow(3.0, 32) - 1.0) / 64.0;
  CHECK(band_average([](double f) { return std::pow(f, 31); }, unit) ==
        doctest::Approx(exact).epsilon(1e-12));
}

TEST_CASE("band_average is linear in the integrand") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  const DetectionBand b{7.2e9, 0.38e9, BandPolicy::average};
  auto g = [](double f) { return std::sin(f * 1e-9); };
  auto h = [](double f) { return std::exp(-f * 1e-10); };
  for (int i = 0; i < 500; ++i) {
    const double a = u(rng), c = u(rng);
    const double lhs = band_average([&](double f) { return a * g(f) + c * h(f); }, b);
    const double rhs = a * band_average(g, b) + c * band_average(h, b);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * (std::abs(a) + std::abs(c)));
  }
}

TEST_CASE("band_average rejects bad input") {
  const DetectionBand b{1.0, 0.5, BandPolicy::average};
  CHECK_THROWS_AS(band_average([](double) { return std::nan(""); }, b), EvaluationError);
  CHECK_THROWS_AS(band_average([](double) { return 1.0; }, DetectionBand{1.0, 0.0}),
                  ConfigurationError);
  CHECK_THROWS_AS(band_average([](double) { return 1.0; }, DetectionBand{1.0, 3.0}),
                  ConfigurationError);
}
