// Randomized invariant checks for the analytic model.

#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "tunnelpairs/constants.hpp"
#include "tunnelpairs/junction_noise.hpp"

using namespace tunnelpairs;

namespace {

struct Draw {
  Junction j;
  Drive d;
  DetectionBand b1, b2;
};

class ParameterGenerator {
 public:
  explicit ParameterGenerator(std::uint64_t seed) : rng_(seed) {}

  Draw next() {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Draw p;
    p.j.resistance = 10.0 + 90.0 * u(rng_);
    p.j.temperature = std::pow(10.0, -3.0 + 3.0 * u(rng_));
    const double f1 = 3e9 + 3e9 * u(rng_);
    const double f2 = f1 + 1.5e9 + 3e9 * u(rng_);
    p.d.f0 = f1 + f2;
    p.d.v_dc = (u(rng_) - 0.5) * 400e-6;
    p.d.v_ac = 200e-6 * u(rng_);
    p.b1 = {f1, 0.6e9, BandPolicy::center};
    p.b2 = {f2, 0.6e9, BandPolicy::center};
    return p;
  }

 private:
  std::mt19937_64 rng_;
};

constexpr int kDraws = 500;

}  // namespace

TEST_CASE("x_correlator is odd in v_dc and c4 even") {
  ParameterGenerator gen(101);
  for (int i = 0; i < kDraws; ++i) {
    const Draw p = gen.next();
    Drive flipped = p.d;
    flipped.v_dc = -p.d.v_dc;
    const double x = x_correlator(p.j, p.d, p.b1.f_center);
    const double xf = x_correlator(p.j, flipped, p.b1.f_center);
    CHECK(std::abs(x + xf) <= 1e-10 * std::abs(x));
    CHECK(c4(p.j, p.d, p.b1, p.b2) == doctest::Approx(c4(p.j, flipped, p.b1, p.b2)).epsilon(1e-10));
  }
}

TEST_CASE("x_correlator vanishes without dc or ac bias") {
  ParameterGenerator gen(102);
  for (int i = 0; i < kDraws; ++i) {
    Draw p = gen.next();
    Drive no_dc = p.d, no_ac = p.d;
    no_dc.v_dc = 0.0;
    no_ac.v_ac = 0.0;
    CHECK(x_correlator(p.j, no_dc, p.b1.f_center) == 0.0);
    CHECK(x_correlator(p.j, no_ac, p.b1.f_center) == 0.0);
  }
}

TEST_CASE("spectral density never falls below the vacuum floor") {
  ParameterGenerator gen(103);
  for (int i = 0; i < kDraws; ++i) {
    const Draw p = gen.next();
    for (double f : {p.b1.f_center, p.b2.f_center, p.b1.lower(), p.b2.upper()}) {
      const double floor = kSI.h * f / p.j.resistance;
      CHECK(photo_assisted_s(p.j, p.d, f) >= floor - 1e-12 * floor);
    }
  }
}

TEST_CASE("semiclassical Cauchy-Schwarz bound holds, emission bound is violated") {
  ParameterGenerator gen(104);
  for (int i = 0; i < kDraws; ++i) {
    const Draw p = gen.next();
    const double f1 = p.b1.f_center;
    const double x = x_correlator(p.j, p.d, f1);
    const double s1 = photo_assisted_s(p.j, p.d, f1);
    const double s2 = photo_assisted_s(p.j, p.d, p.d.f0 - f1);
    CHECK(x * x <= s1 * s2 * (1.0 + 1e-12));
  }

  // Operating regime: 20 mK, 22 uV drive, low dc bias.
  const Junction j{23.6, 0.020};
  int violations = 0;
  int squeezed = 0;
  for (double vdc = 1e-6; vdc <= 40e-6; vdc += 1e-6) {
    const Drive d{vdc, 22e-6, 11.6e9};
    const double x = x_correlator(j, d, 4.4e9);
    const double em1 = emission_noise(j, d, 4.4e9);
    const double em2 = emission_noise(j, d, 7.2e9);
    const PairStats s = pair_stats(j, d, {4.4e9, 0.65e9}, {7.2e9, 0.38e9});
    // X^2 > S_em1 S_em2 is the same statement as <dn1 dn2> > <n1><n2>.
    CHECK((x * x > em1 * em2) == (s.g2 > 2.0));
    if (x * x > em1 * em2) ++violations;
    if (s.nrf < 1.0) ++squeezed;
  }
  CHECK(violations > 0);
  CHECK(squeezed > 0);
}

TEST_CASE("g2 >= 1 and clipped pair probability in [0, 1]") {
  ParameterGenerator gen(105);
  for (int i = 0; i < kDraws; ++i) {
    const Draw p = gen.next();
    const PairStats s = pair_stats(p.j, p.d, p.b1, p.b2);
    CHECK(s.n1 >= 0.0);
    CHECK(s.n2 >= 0.0);
    if (!std::isnan(s.g2)) CHECK(s.g2 >= 1.0 - 1e-12);
    if (!std::isnan(s.p_pair_given_2)) {
      CHECK(s.p_pair_given_2 >= 0.0);
      CHECK(s.p_pair_given_2 <= 1.0);
      // Field-operator Cauchy-Schwarz: <dn1 dn2> <= (n1 + 1/2)(n2 + 1/2).
      CHECK(s.p_pair_unclipped <= s.n1 + (s.n1 + 0.5) * (s.n2 + 0.5) / s.n2 + 1e-9);
    }
  }
}

TEST_CASE("unclipped pairing probability exceeds one in the low-occupation regime") {
  // Regression: the analytic model gives <n1 n2> > <n2> near V_dc ~ 25 uV at
  // V_ac = 22 uV even though both occupations are well below 0.3.
  const PairStats s = pair_stats({23.6, 0.020}, {25e-6, 22e-6, 11.6e9}, {4.4e9, 0.65e9},
                                 {7.2e9, 0.38e9});
  CHECK(s.low_occupation());
  CHECK(s.p_pair_unclipped > 1.05);
  CHECK(s.p_pair_given_2 == 1.0);
}

TEST_CASE("photo-assisted noise grows monotonically with ac drive at zero dc bias") {
  const Junction j{23.6, 0.020};
  for (double f = 4e9; f <= 8e9; f += 0.25e9) {
    double prev = s0_equilibrium(j, f);
    CHECK(photo_assisted_s(j, {0.0, 1e-12, 11.6e9}, f) == doctest::Approx(prev).epsilon(1e-12));
    for (double vac = 1e-6; vac <= 100e-6; vac += 1e-6) {
      const double s = photo_assisted_s(j, {0.0, vac, 11.6e9}, f);
      CHECK(s >= prev * (1.0 - 1e-14));
      prev = s;
    }
  }
}

TEST_CASE("c4 kinks sit at the sideband thresholds when the junction is cold") {
  // Singular voltages of the sideband sum: e V = h |f1 + n f0|.
  const Junction j{23.6, 1e-5};
  const DetectionBand b1{4.4e9, 0.65e9}, b2{7.2e9, 0.38e9};
  const double step = 0.5e-6;
  std::vector<double> v, c;
  for (int i = 0; i <= 200; ++i) {
    v.push_back(i * step);
    c.push_back(c4(j, {i * step, 22e-6, 11.6e9}, b1, b2));
  }
  std::vector<double> extrema;
  std::vector<double> d2(c.size(), 0.0);
  for (std::size_t i = 1; i + 1 < c.size(); ++i) d2[i] = c[i + 1] - 2 * c[i] + c[i - 1];
  for (std::size_t i = 2; i + 2 < c.size(); ++i) {
    if ((d2[i] - d2[i - 1]) * (d2[i + 1] - d2[i]) < 0) extrema.push_back(v[i]);
  }
  for (double f : {4.4e9, 7.2e9, 16.0e9, 18.8e9}) {
    const double target = kSI.h * f / kSI.e;
    bool found = false;
    for (double e : extrema) found = found || std::abs(e - target) <= step;
    CHECK_MESSAGE(found, "no extremum near " << target * 1e6 << " uV");
  }
}
