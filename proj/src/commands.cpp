#include "tunnelpairs/commands.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tunnelpairs/errors.hpp"
#include "tunnelpairs/sweep.hpp"

namespace tunnelpairs {

namespace {

constexpr const char* kCurveHeader = "v_dc_V,v_gen_V,f_Hz,t_noise_K";
constexpr const char* kMcHeader =
    "source,seed,n_windows,bins_per_band,g2_est_K2,g2_err_K2,g2_analytic_K2,mean_p1_K,"
    "mean_p2_K,var_p1_K2,var_p2_K2,n_samples";

std::string strip(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::string sci(double v, int digits) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*e", digits, v);
  return buf;
}

const char* source_name(sim::SourceMode m) {
  return m == sim::SourceMode::junction ? "junction" : "thermal_control";
}

}  // namespace

calib::NoiseCurve read_noise_curve(std::istream& in) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!strip(line).empty()) break;
  }
  if (strip(line) != kCurveHeader) {
    throw ParseError(std::string("expected header '") + kCurveHeader + "'", line_no, 1);
  }
  struct Point {
    double v_dc, v_gen, t;
  };
  std::vector<Point> points;
  std::vector<int> lines;
  double frequency = 0.0;
  while (std::getline(in, line)) {
    ++line_no;
    if (strip(line).empty()) continue;
    std::array<double, 4> field{};
    std::size_t start = 0;
    for (int col = 0; col < 4; ++col) {
      const auto comma = line.find(',', start);
      if ((comma == std::string::npos) != (col == 3)) {
        throw ParseError("expected 4 comma-separated fields", line_no, col + 1);
      }
      const std::string text =
          strip(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), field[col]);
      if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty() ||
          !std::isfinite(field[col])) {
        throw ParseError("field " + std::to_string(col + 1) + " is not a finite number: '" + text + "'",
                         line_no, col + 1);
      }
      start = comma + 1;
    }
    if (!(field[3] > 0.0)) throw ParseError("t_noise_K must be > 0", line_no, 4);
    if (!(field[2] > 0.0)) throw ParseError("f_Hz must be > 0", line_no, 3);
    if (field[1] < 0.0) throw ParseError("v_gen_V must be >= 0", line_no, 2);
    if (points.empty()) {
      frequency = field[2];
    } else if (field[2] != frequency) {
      throw ParseError("all rows must share one detection frequency", line_no, 3);
    }
    points.push_back({field[0], field[1], field[3]});
    lines.push_back(line_no);
  }
  if (points.empty()) throw ParseError("no data rows", line_no, 1);

  std::set<double> dc, gen;
  for (const Point& p : points) {
    dc.insert(p.v_dc);
    gen.insert(p.v_gen);
  }
  calib::NoiseCurve c;
  c.v_dc.assign(dc.begin(), dc.end());
  c.v_gen.assign(gen.begin(), gen.end());
  c.frequency = frequency;
  c.t_noise.assign(c.v_dc.size() * c.v_gen.size(), 0.0);
  std::map<double, std::size_t> dc_index, gen_index;
  for (std::size_t i = 0; i < c.v_dc.size(); ++i) dc_index[c.v_dc[i]] = i;
  for (std::size_t i = 0; i < c.v_gen.size(); ++i) gen_index[c.v_gen[i]] = i;
  std::vector<bool> seen(c.t_noise.size(), false);
  for (std::size_t k = 0; k < points.size(); ++k) {
    const std::size_t idx = gen_index[points[k].v_gen] * c.v_dc.size() + dc_index[points[k].v_dc];
    if (seen[idx]) throw ParseError("duplicate (v_dc, v_gen) point", lines[k], 1);
    seen[idx] = true;
    c.t_noise[idx] = points[k].t;
  }
  if (points.size() != c.t_noise.size()) {
    throw ParseError("rows do not cover the full v_dc x v_gen grid (" + std::to_string(points.size()) +
                         " of " + std::to_string(c.t_noise.size()) + " points)",
                     line_no, 1);
  }
  return c;
}

calib::NoiseCurve load_noise_curve(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read data file '" + path + "'");
  return read_noise_curve(in);
}

void write_noise_curve(std::ostream& out, const calib::NoiseCurve& c) {
  out << kCurveHeader << '\n';
  for (std::size_t a = 0; a < c.v_gen.size(); ++a) {
    for (std::size_t i = 0; i < c.v_dc.size(); ++i) {
      out << format_exact(c.v_dc[i]) << ',' << format_exact(c.v_gen[a]) << ','
          << format_exact(c.frequency) << ',' << format_exact(c.at(a, i)) << '\n';
    }
  }
}

sim::McResult run_mc(const sim::McConfig& cfg, std::ostream& report, const std::string& csv_path,
                     int threads) {
  const sim::McResult r = sim::run_experiment(cfg, threads);
  const double analytic = sim::predicted_g2_kelvin2(cfg);
  const auto mean = sim::predicted_mean_power(cfg);
  report << "source        " << source_name(cfg.source_mode) << '\n'
         << "seed          " << cfg.seed << '\n'
         << "n_windows     " << cfg.n_windows << '\n'
         << "g2_est        " << sci(r.g2_est, 6) << " +/- " << sci(r.g2_err, 3) << " K^2\n"
         << "g2_analytic   " << sci(analytic, 6) << " K^2\n"
         << "residual      " << sci((r.g2_est - analytic) / r.g2_err, 3) << " sigma\n"
         << "mean_p1       " << sci(r.mean_p1, 6) << " K (expected " << sci(mean[0], 6) << ")\n"
         << "mean_p2       " << sci(r.mean_p2, 6) << " K (expected " << sci(mean[1], 6) << ")\n"
         << "var_p1        " << sci(r.var_p1, 6) << " K^2\n"
         << "var_p2        " << sci(r.var_p2, 6) << " K^2\n"
         << "n_samples     " << r.n_samples_used << '\n';
  if (!csv_path.empty()) {
    std::error_code ec;
    const bool fresh = !std::filesystem::exists(csv_path, ec) || std::filesystem::file_size(csv_path, ec) == 0;
    std::ofstream f(csv_path, std::ios::app | std::ios::binary);
    if (!f) throw IoError("cannot write '" + csv_path + "'");
    if (fresh) f << kMcHeader << '\n';
    f << source_name(cfg.source_mode) << ',' << cfg.seed << ',' << cfg.n_windows << ','
      << cfg.bins_per_band << ',' << format_exact(r.g2_est) << ',' << format_exact(r.g2_err) << ','
      << format_exact(analytic) << ',' << format_exact(r.mean_p1) << ',' << format_exact(r.mean_p2)
      << ',' << format_exact(r.var_p1) << ',' << format_exact(r.var_p2) << ',' << r.n_samples_used
      << '\n';
    if (!f.flush()) throw IoError("cannot write '" + csv_path + "'");
  }
  return r;
}

calib::FitReport run_calibration(const std::string& data_path, const AppConfig& cfg,
                                 std::uint64_t seed, std::ostream& report,
                                 const std::string& json_path, int threads) {
  const calib::NoiseCurve data = load_noise_curve(data_path);
  const CalibrationSettings settings = cfg.calibration.value_or(CalibrationSettings{});
  calib::FitOptions opts;
  opts.seed = seed;
  opts.starts = settings.starts;
  opts.threads = threads;
  const calib::FitReport fit =
      calib::fit(data, cfg.junction.resistance, cfg.drive.f0, settings.initial, opts);

  const auto& m = fit.model;
  report << "gain          " << sci(m.gain, 6) << '\n'
         << "t_amp         " << sci(m.t_amp, 6) << " K\n"
         << "t_electron    " << sci(m.t_electron, 6) << " K\n"
         << "attenuation   " << sci(m.attenuation, 6) << '\n'
         << "residual_rms  " << sci(fit.residual_rms, 3) << " K\n"
         << "points        " << data.size() << '\n'
         << "evaluations   " << fit.evaluations << '\n';
  for (const auto& w : fit.warnings) report << "warning: " << w << '\n';

  if (!json_path.empty()) {
    nlohmann::ordered_json j;
    j["model"] = {{"gain", m.gain},
                  {"t_amp_K", m.t_amp},
                  {"t_electron_K", m.t_electron},
                  {"attenuation", m.attenuation}};
    nlohmann::ordered_json ident;
    for (std::size_t p = 0; p < 4; ++p) ident[calib::kParameterNames[p]] = fit.identifiable[p];
    j["identifiable"] = ident;
    j["warnings"] = fit.warnings;
    j["objective_K2"] = fit.objective;
    j["residual_rms_K"] = fit.residual_rms;
    j["points"] = data.size();
    j["evaluations"] = fit.evaluations;
    j["best_start"] = fit.best_start;
    j["converged"] = fit.converged;
    j["seed"] = seed;
    j["resistance_ohm"] = cfg.junction.resistance;
    j["f0_Hz"] = cfg.drive.f0;
    j["frequency_Hz"] = data.frequency;
    std::ofstream f(json_path, std::ios::binary);
    if (!f || !(f << j.dump(2) << '\n') || !f.flush()) {
      throw IoError("cannot write '" + json_path + "'");
    }
  }
  return fit;
}

}  // namespace tunnelpairs
