#include "tunnelpairs/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "tunnelpairs/errors.hpp"
#include "tunnelpairs/junction_noise.hpp"

namespace tunnelpairs {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::array<const char*, 8> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                          "#ff7f0e", "#17becf", "#8c564b", "#e377c2"};

const char* axis_label(SweepOutput o) {
  switch (o) {
    case SweepOutput::g2: return "g\xE2\x82\x82";
    case SweepOutput::nrf: return "NRF";
    case SweepOutput::n1: return "\xE2\x9F\xA8n\xE2\x82\x81\xE2\x9F\xA9";
    case SweepOutput::n2: return "\xE2\x9F\xA8n\xE2\x82\x82\xE2\x9F\xA9";
    case SweepOutput::p_pair: return "P(1|2)";
    case SweepOutput::pair_rate: return "pair rate (1/s)";
    case SweepOutput::g2_kelvin2: return "G\xE2\x82\x82 (K\xC2\xB2)";
  }
  return "";
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Tick positions at 1, 2 or 5 times a power of ten, about five per axis.
std::vector<double> nice_ticks(double lo, double hi) {
  const double raw = (hi - lo) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step) {
    ticks.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  }
  return ticks;
}

}  // namespace

double canonical(double x) {
  if (!std::isfinite(x)) return x;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  double v = 0.0;
  std::from_chars(buf, buf + std::char_traits<char>::length(buf), v);
  return v;
}

std::string format_exact(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::vector<double> bias_grid(const SweepSpec& s) {
  validate(s);
  const auto n = static_cast<long>(std::floor((s.v_dc_stop - s.v_dc_start) / s.v_dc_step + 1e-9));
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(n + 1));
  for (long i = 0; i <= n; ++i) v.push_back(canonical(s.v_dc_start + static_cast<double>(i) * s.v_dc_step));
  return v;
}

SweepRow evaluate_point(const SweepSpec& s, double v_dc, double v_ac) {
  SweepRow row;
  row.v_dc = canonical(v_dc);
  row.v_ac = canonical(v_ac);
  row.f0 = canonical(s.drive.f0);
  const Drive d{row.v_dc, row.v_ac, row.f0};
  const PairStats p = pair_stats(s.junction, d, s.band1, s.band2);
  auto set = [&](SweepOutput o, double v) { row.values[static_cast<std::size_t>(o)] = v; };
  set(SweepOutput::g2, p.g2);
  set(SweepOutput::nrf, p.nrf);
  set(SweepOutput::n1, p.n1);
  set(SweepOutput::n2, p.n2);
  set(SweepOutput::p_pair, p.p_pair_given_2);
  set(SweepOutput::pair_rate,
      std::isnan(p.p_pair_given_2) ? kNaN : p.n2 * p.p_pair_given_2 * s.pair_bandwidth);
  set(SweepOutput::g2_kelvin2, p.g2_kelvin2);
  return row;
}

std::vector<SweepRow> evaluate_sweep(const SweepSpec& s, int threads) {
  const std::vector<double> bias = bias_grid(s);
  // The sum-frequency check uses the canonical f0 that rows will carry.
  SweepSpec spec = s;
  spec.drive.f0 = canonical(s.drive.f0);
  check_pair_configuration(spec.drive, spec.band1, spec.band2);
  const std::size_t total = bias.size() * s.v_ac.size();
  std::vector<SweepRow> rows(total);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  constexpr std::size_t kChunk = 64;
  auto work = [&] {
    try {
      for (std::size_t c = next.fetch_add(kChunk); c < total; c = next.fetch_add(kChunk)) {
        for (std::size_t i = c; i < std::min(total, c + kChunk); ++i) {
          rows[i] = evaluate_point(spec, bias[i % bias.size()], s.v_ac[i / bias.size()]);
        }
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = total;
    }
  };
  const int n = std::max(1, std::min(threads, 256));
  if (n == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return rows;
}

void write_sweep_csv(std::ostream& out, const SweepSpec& s, const std::vector<SweepRow>& rows) {
  out << "v_dc_V,v_ac_V,f0_Hz";
  for (SweepOutput o : s.outputs) out << ',' << column_name(o);
  out << '\n';
  for (const SweepRow& r : rows) {
    out << format_exact(r.v_dc) << ',' << format_exact(r.v_ac) << ',' << format_exact(r.f0);
    for (SweepOutput o : s.outputs) out << ',' << format_exact(r[o]);
    out << '\n';
  }
}

void write_sweep_svg(std::ostream& out, const SweepSpec& s, const std::vector<SweepRow>& rows) {
  const double width = 760, panel_h = 280, left = 90, right = 150, top = 30, bottom = 50;
  const double plot_w = width - left - right, plot_h = panel_h - top - bottom;
  const double height = panel_h * static_cast<double>(s.outputs.size());
  const double x_lo = s.v_dc_start * 1e6, x_hi = s.v_dc_stop * 1e6;
  const std::size_t per_trace = s.v_ac.empty() ? 0 : rows.size() / s.v_ac.size();

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
      << num(height) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t p = 0; p < s.outputs.size(); ++p) {
    const SweepOutput o = s.outputs[p];
    const double y0 = panel_h * static_cast<double>(p);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const SweepRow& r : rows) {
      if (std::isfinite(r[o])) {
        lo = std::min(lo, r[o]);
        hi = std::max(hi, r[o]);
      }
    }
    if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
    if (hi - lo <= 1e-12 * std::max(std::abs(hi), 1e-300)) {
      const double pad = std::abs(hi) > 0 ? 0.05 * std::abs(hi) : 1.0;
      lo -= pad;
      hi += pad;
    }
    const double margin = 0.05 * (hi - lo);
    lo -= margin;
    hi += margin;
    auto px = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * plot_w; };
    auto py = [&](double y) { return y0 + top + (hi - y) / (hi - lo) * plot_h; };

    out << "<g>\n<rect x=\"" << num(left) << "\" y=\"" << num(y0 + top) << "\" width=\""
        << num(plot_w) << "\" height=\"" << num(plot_h) << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double t : nice_ticks(x_lo, x_hi)) {
      out << "<line x1=\"" << num(px(t)) << "\" y1=\"" << num(y0 + top + plot_h) << "\" x2=\""
          << num(px(t)) << "\" y2=\"" << num(y0 + top + plot_h + 5) << "\" stroke=\"black\"/>"
          << "<text x=\"" << num(px(t)) << "\" y=\"" << num(y0 + top + plot_h + 18)
          << "\" text-anchor=\"middle\">" << num(t) << "</text>\n";
    }
    for (double t : nice_ticks(lo, hi)) {
      out << "<line x1=\"" << num(left - 5) << "\" y1=\"" << num(py(t)) << "\" x2=\"" << num(left)
          << "\" y2=\"" << num(py(t)) << "\" stroke=\"black\"/>"
          << "<text x=\"" << num(left - 8) << "\" y=\"" << num(py(t) + 4)
          << "\" text-anchor=\"end\">" << num(t) << "</text>\n";
    }
    out << "<text x=\"" << num(left + plot_w / 2) << "\" y=\"" << num(y0 + panel_h - 8)
        << "\" text-anchor=\"middle\">dc bias (\xC2\xB5V)</text>\n";
    out << "<text transform=\"translate(18," << num(y0 + top + plot_h / 2)
        << ") rotate(-90)\" text-anchor=\"middle\">" << axis_label(o) << "</text>\n";

    for (std::size_t a = 0; a < s.v_ac.size(); ++a) {
      const char* color = kPalette[a % kPalette.size()];
      std::string points;
      auto flush = [&] {
        if (!points.empty()) {
          out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\""
              << points << "\"/>\n";
        }
        points.clear();
      };
      for (std::size_t i = 0; i < per_trace; ++i) {
        const SweepRow& r = rows[a * per_trace + i];
        if (!std::isfinite(r[o])) {
          flush();
          continue;
        }
        points += num(px(r.v_dc * 1e6)) + "," + num(py(r[o])) + " ";
      }
      flush();
      const double ly = y0 + top + 14 + 16 * static_cast<double>(a);
      out << "<line x1=\"" << num(left + plot_w + 10) << "\" y1=\"" << num(ly) << "\" x2=\""
          << num(left + plot_w + 30) << "\" y2=\"" << num(ly) << "\" stroke=\"" << color
          << "\" stroke-width=\"2\"/><text x=\"" << num(left + plot_w + 35) << "\" y=\""
          << num(ly + 4) << "\">V<tspan dy=\"4\" font-size=\"9\">ac</tspan><tspan dy=\"-4\"> = " << num(s.v_ac[a] * 1e6)
          << " \xC2\xB5V</tspan></text>\n";
    }
    out << "</g>\n";
  }
  out << "</svg>\n";
}

std::vector<SweepRow> run_sweep(const SweepSpec& s, const std::string& csv_path,
                                const std::string& plot_path, int threads) {
  std::vector<SweepRow> rows = evaluate_sweep(s, threads);
  std::ostringstream csv;
  write_sweep_csv(csv, s, rows);
  std::ofstream f(csv_path, std::ios::binary);
  if (!f || !(f << csv.str()) || !f.flush()) throw IoError("cannot write '" + csv_path + "'");
  if (!plot_path.empty()) {
    std::ofstream svg(plot_path, std::ios::binary);
    if (!svg) throw IoError("cannot write '" + plot_path + "'");
    write_sweep_svg(svg, s, rows);
    if (!svg.flush()) throw IoError("cannot write '" + plot_path + "'");
  }
  return rows;
}

}  // namespace tunnelpairs
