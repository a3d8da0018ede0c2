#include <charconv>
#include <cstring>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "tunnelpairs/commands.hpp"
#include "tunnelpairs/errors.hpp"
#include "tunnelpairs/junction_noise.hpp"
#include "tunnelpairs/sweep.hpp"

using namespace tunnelpairs;

namespace {

SweepSpec operating_spec() {
  SweepSpec s;
  s.junction = {23.6, 0.020};
  s.drive = {0.0, 0.0, 11.6e9};
  s.band1 = {4.4e9, 0.65e9};
  s.band2 = {7.2e9, 0.38e9};
  s.v_dc_start = 0.0;
  s.v_dc_stop = 100e-6;
  s.v_dc_step = 0.5e-6;
  s.v_ac = {0.0, 22e-6};
  s.outputs = {SweepOutput::g2,         SweepOutput::nrf,       SweepOutput::n1,
               SweepOutput::n2,         SweepOutput::p_pair,    SweepOutput::pair_rate,
               SweepOutput::g2_kelvin2};
  return s;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

double to_double(const std::string& s) {
  if (s == "nan") return NAN;
  double v = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

}  // namespace

TEST_CASE("bias grid covers the range in order") {
  const auto g = bias_grid(operating_spec());
  REQUIRE(g.size() == 201);
  CHECK(g.front() == 0.0);
  CHECK(g[33] == 1.65e-5);
  CHECK(g.back() == 1e-4);
}

TEST_CASE("csv round trip reproduces every row from its inputs") {
  const SweepSpec s = operating_spec();
  std::ostringstream out;
  write_sweep_csv(out, s, evaluate_sweep(s));
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "v_dc_V,v_ac_V,f0_Hz,g2,nrf,n1,n2,p_pair,pair_rate_per_s,g2_K2");
  int rows = 0;
  while (std::getline(in, line)) {
    const auto f = split(line);
    REQUIRE(f.size() == 10);
    SweepSpec again = s;
    again.drive.f0 = to_double(f[2]);
    const SweepRow r = evaluate_point(again, to_double(f[0]), to_double(f[1]));
    for (std::size_t k = 0; k < s.outputs.size(); ++k) {
      const double stored = to_double(f[3 + k]);
      const double fresh = r[s.outputs[k]];
      if (std::isnan(stored)) {
        CHECK(std::isnan(fresh));
        continue;
      }
      CHECK(std::abs(fresh - stored) <= 1e-12 * std::abs(stored));
    }
    ++rows;
  }
  CHECK(rows == 402);
}

TEST_CASE("sweep reproduces the operating-point statistics") {
  const SweepSpec s = operating_spec();
  const SweepRow r = evaluate_point(s, 16e-6, 22e-6);
  const Drive d{16e-6, 22e-6, 11.6e9};
  CHECK(r[SweepOutput::g2] == g2(s.junction, d, s.band1, s.band2));
  CHECK(r[SweepOutput::pair_rate] == doctest::Approx(pair_rate(s.junction, d, s.band1, s.band2, 200e6)));
}

TEST_CASE("row order and values do not depend on thread count") {
  const SweepSpec s = operating_spec();
  const auto a = evaluate_sweep(s, 1), b = evaluate_sweep(s, 4);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].v_dc == b[i].v_dc);
    CHECK(a[i].v_ac == b[i].v_ac);
    CHECK(std::memcmp(a[i].values.data(), b[i].values.data(), sizeof(a[i].values)) == 0);
  }
}

TEST_CASE("plot is a pure view of the rows") {
  const SweepSpec s = operating_spec();
  const auto rows = evaluate_sweep(s);
  std::ostringstream before, svg, after;
  write_sweep_csv(before, s, rows);
  write_sweep_svg(svg, s, rows);
  write_sweep_csv(after, s, rows);
  CHECK(before.str() == after.str());
  const std::string text = svg.str();
  CHECK(text.rfind("<svg", 0) == 0);
  CHECK(text.find("</svg>") != std::string::npos);
  // One trace per amplitude and panel (the zero-drive g2 trace is split at its NaN).
  std::size_t polylines = 0;
  for (auto p = text.find("<polyline"); p != std::string::npos; p = text.find("<polyline", p + 1)) ++polylines;
  CHECK(polylines >= 2 * s.outputs.size());
}

TEST_CASE("format_exact is loss-free") {
  for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300, 0.0}) {
    CHECK(to_double(format_exact(v)) == v);
  }
  CHECK(format_exact(NAN) == "nan");
  CHECK(canonical(0.1 + 0.2) == 0.3);
}

TEST_CASE("noise curve csv round trip") {
  calib::NoiseCurve c{{-1e-5, 0.0, 1e-5}, {0.0, 5e-5}, 6e9, {1, 2, 3, 4, 5, 6}};
  std::ostringstream out;
  write_noise_curve(out, c);
  std::istringstream in(out.str());
  const auto back = read_noise_curve(in);
  CHECK(back.v_dc == c.v_dc);
  CHECK(back.v_gen == c.v_gen);
  CHECK(back.t_noise == c.t_noise);
  CHECK(back.frequency == c.frequency);
}

TEST_CASE("noise curve schema violations name row and column") {
  auto error_at = [](const std::string& text) {
    std::istringstream in(text);
    try {
      read_noise_curve(in);
    } catch (const ParseError& e) {
      return std::pair{e.line(), e.column()};
    }
    return std::pair{-1, -1};
  };
  const std::string h = "v_dc_V,v_gen_V,f_Hz,t_noise_K\n";
  CHECK(error_at("v_dc,v_gen,f,t\n0,0,6e9,1\n") == std::pair{1, 1});
  CHECK(error_at(h + "0,0,6e9,1\n1e-6,0,6e9,x\n") == std::pair{3, 4});
  CHECK(error_at(h + "0,0,6e9\n") == std::pair{2, 3});
  CHECK(error_at(h + "0,0,6e9,1,5\n") == std::pair{2, 4});
  CHECK(error_at(h + "0,0,6e9,1\n1e-6,0,7e9,1\n") == std::pair{3, 3});
  CHECK(error_at(h + "0,0,6e9,-1\n") == std::pair{2, 4});
  CHECK(error_at(h + "0,0,6e9,1\n0,0,6e9,1\n").first == 3);
  CHECK(error_at(h + "0,0,6e9,1\n1e-6,1e-5,6e9,1\n").first == 3);  // incomplete grid
}

TEST_CASE("mc report is deterministic") {
  sim::McConfig c;
  c.n_windows = 2048;
  c.amp_noise_temperature = {0.1, 0.1};
  std::ostringstream a, b;
  run_mc(c, a);
  run_mc(c, b, {}, 2);
  CHECK(a.str() == b.str());
  CHECK(a.str().find("g2_analytic") != std::string::npos);
}
