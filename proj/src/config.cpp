#include "tunnelpairs/config.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <utility>

#include "tunnelpairs/errors.hpp"

namespace tunnelpairs {

namespace {

struct Unit {
  const char* name;
  double scale;
};

const std::vector<Unit>& units_for(Dimension d) {
  static const std::vector<Unit> voltage{{"V", 1.0}, {"mV", 1e-3}, {"uV", 1e-6},
                                         {"\xC2\xB5V", 1e-6}, {"nV", 1e-9}};
  static const std::vector<Unit> frequency{{"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}, {"GHz", 1e9}};
  static const std::vector<Unit> temperature{{"K", 1.0}, {"mK", 1e-3}, {"uK", 1e-6}};
  static const std::vector<Unit> resistance{{"ohm", 1.0}, {"kohm", 1e3}};
  static const std::vector<Unit> time{{"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"ns", 1e-9},
                                      {"ps", 1e-12}};
  static const std::vector<Unit> none{};
  switch (d) {
    case Dimension::voltage: return voltage;
    case Dimension::frequency: return frequency;
    case Dimension::temperature: return temperature;
    case Dimension::resistance: return resistance;
    case Dimension::time: return time;
    case Dimension::none: return none;
  }
  return none;
}

const char* dimension_name(Dimension d) {
  switch (d) {
    case Dimension::voltage: return "voltage (V, mV, uV, nV)";
    case Dimension::frequency: return "frequency (Hz, kHz, MHz, GHz)";
    case Dimension::temperature: return "temperature (K, mK, uK)";
    case Dimension::resistance: return "resistance (ohm, kohm)";
    case Dimension::time: return "time (s, ms, us, ns, ps)";
    case Dimension::none: return "dimensionless";
  }
  return "";
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// A comma-separated value with the 1-based column where each item starts.
std::vector<std::pair<std::string, int>> split_list(const std::string& value, int column) {
  std::vector<std::pair<std::string, int>> items;
  std::size_t start = 0;
  while (true) {
    const auto comma = value.find(',', start);
    const std::string raw = value.substr(start, comma == std::string::npos ? std::string::npos
                                                                            : comma - start);
    const auto lead = raw.find_first_not_of(" \t");
    items.emplace_back(trim(raw), column + static_cast<int>(start) +
                                      static_cast<int>(lead == std::string::npos ? 0 : lead));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return items;
}

std::uint64_t parse_unsigned(const std::string& text, int line, int column) {
  // Accepts plain integers and powers of two written 2^N.
  const auto caret = text.find('^');
  auto parse = [&](const std::string& t) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty()) {
      throw ParseError("expected a non-negative integer, got '" + text + "'", line, column);
    }
    return v;
  };
  if (caret == std::string::npos) return parse(text);
  const std::uint64_t base = parse(text.substr(0, caret));
  const std::uint64_t exponent = parse(text.substr(caret + 1));
  if (base != 2 || exponent > 62) {
    throw ParseError("only powers 2^N with N <= 62 are supported, got '" + text + "'", line, column);
  }
  return std::uint64_t{1} << exponent;
}

int parse_int(const std::string& text, int line, int column) {
  const std::uint64_t v = parse_unsigned(text, line, column);
  if (v > 1'000'000'000) throw ParseError("integer out of range: " + text, line, column);
  return static_cast<int>(v);
}

struct Entry {
  std::string value;
  int line;
  int column;
};

using Section = std::map<std::string, Entry>;

// Allowed keys per section with their dimension; nullopt marks a key whose
// value is not a quantity (names, integers, lists handled by the reader).
const std::map<std::string, std::map<std::string, std::optional<Dimension>>>& schema() {
  static const std::map<std::string, std::map<std::string, std::optional<Dimension>>> s{
      {"junction", {{"resistance", Dimension::resistance}, {"temperature", Dimension::temperature}}},
      {"drive",
       {{"f0", Dimension::frequency}, {"v_dc", Dimension::voltage}, {"v_ac", Dimension::voltage}}},
      {"band1", {{"center", Dimension::frequency}, {"bandwidth", Dimension::frequency}}},
      {"band2", {{"center", Dimension::frequency}, {"bandwidth", Dimension::frequency}}},
      {"sweep",
       {{"v_dc_start", Dimension::voltage},
        {"v_dc_stop", Dimension::voltage},
        {"v_dc_step", Dimension::voltage},
        {"v_ac", std::nullopt},
        {"outputs", std::nullopt},
        {"band_policy", std::nullopt},
        {"pair_bandwidth", Dimension::frequency}}},
      {"mc",
       {{"bins_per_band", std::nullopt},
        {"amp_noise_temperature", std::nullopt},
        {"detector_time_constant", Dimension::time},
        {"sample_rate", Dimension::frequency},
        {"oversample", std::nullopt},
        {"n_windows", std::nullopt},
        {"seed", std::nullopt},
        {"crosstalk", std::nullopt},
        {"source", std::nullopt},
        {"source_temperature", Dimension::temperature}}},
      {"calibration",
       {{"gain", Dimension::none},
        {"t_amp", Dimension::temperature},
        {"t_electron", Dimension::temperature},
        {"attenuation", Dimension::none},
        {"starts", std::nullopt}}},
  };
  return s;
}

class Reader {
 public:
  explicit Reader(std::map<std::string, Section> sections) : sections_(std::move(sections)) {}

  bool has(const std::string& section) const { return sections_.count(section) != 0; }

  const Entry* find(const std::string& section, const std::string& key) const {
    const auto s = sections_.find(section);
    if (s == sections_.end()) return nullptr;
    const auto e = s->second.find(key);
    return e == s->second.end() ? nullptr : &e->second;
  }

  const Entry& require(const std::string& section, const std::string& key) const {
    const Entry* e = find(section, key);
    if (!e) throw ParseError("missing key '" + key + "' in [" + section + "]", section_line(section));
    return *e;
  }

  double quantity(const std::string& section, const std::string& key) const {
    const Entry& e = require(section, key);
    return parse_quantity(e.value, *schema().at(section).at(key), e.line, e.column);
  }

  double quantity_or(const std::string& section, const std::string& key, double fallback,
                     Dimension dim) const {
    const Entry* e = find(section, key);
    return e ? parse_quantity(e->value, dim, e->line, e->column) : fallback;
  }

  int section_line(const std::string& section) const {
    const auto s = sections_.find(section);
    if (s == sections_.end() || s->second.empty()) return 0;
    int line = s->second.begin()->second.line;
    for (const auto& [k, e] : s->second) line = std::min(line, e.line);
    return line;
  }

 private:
  std::map<std::string, Section> sections_;
};


}  // namespace

double parse_quantity(const std::string& text, Dimension dim, int line, int column) {
  const std::string t = trim(text);
  double value = 0.0;
  const char* begin = t.data();
  const char* end = t.data() + t.size();
  if (!t.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || t.empty()) {
    throw ParseError("expected a number, got '" + t + "'", line, column);
  }
  if (!std::isfinite(value)) throw ParseError("value must be finite: '" + t + "'", line, column);
  const std::string unit = trim(std::string(ptr, end));
  const char* unit_start = ptr;
  while (unit_start != end && (*unit_start == ' ' || *unit_start == '\t')) ++unit_start;
  const int unit_column = column + static_cast<int>(unit_start - t.data());
  if (dim == Dimension::none) {
    if (!unit.empty()) {
      throw ParseError("unexpected unit '" + unit + "' on a dimensionless value", line, unit_column);
    }
    return value;
  }
  if (unit.empty()) {
    throw ParseError(std::string("missing unit, expected ") + dimension_name(dim), line, unit_column);
  }
  for (const Unit& u : units_for(dim)) {
    if (unit == u.name) return value * u.scale;
  }
  throw ParseError("unit '" + unit + "' is not a " + dimension_name(dim), line, unit_column);
}

const char* column_name(SweepOutput o) {
  switch (o) {
    case SweepOutput::g2: return "g2";
    case SweepOutput::nrf: return "nrf";
    case SweepOutput::n1: return "n1";
    case SweepOutput::n2: return "n2";
    case SweepOutput::p_pair: return "p_pair";
    case SweepOutput::pair_rate: return "pair_rate_per_s";
    case SweepOutput::g2_kelvin2: return "g2_K2";
  }
  return "";
}

std::optional<SweepOutput> parse_output_name(const std::string& s) {
  static const std::map<std::string, SweepOutput> names{
      {"g2", SweepOutput::g2},           {"nrf", SweepOutput::nrf},
      {"n1", SweepOutput::n1},           {"n2", SweepOutput::n2},
      {"p_pair", SweepOutput::p_pair},   {"pair_rate", SweepOutput::pair_rate},
      {"g2_kelvin2", SweepOutput::g2_kelvin2}};
  const auto it = names.find(s);
  if (it == names.end()) return std::nullopt;
  return it->second;
}

void validate(const SweepSpec& s) {
  validate(s.junction);
  check_pair_configuration(s.drive, s.band1, s.band2);
  if (!(s.v_dc_step > 0.0)) throw ConfigurationError("sweep: v_dc_step must be > 0");
  if (!(s.v_dc_start < s.v_dc_stop)) throw ConfigurationError("sweep: v_dc_start must be < v_dc_stop");
  if ((s.v_dc_stop - s.v_dc_start) / s.v_dc_step > 1e7) {
    throw ConfigurationError("sweep: more than 1e7 bias points");
  }
  if (s.v_ac.empty()) throw ConfigurationError("sweep: v_ac list is empty");
  for (double v : s.v_ac) {
    if (!(v >= 0.0)) throw ConfigurationError("sweep: v_ac amplitudes must be >= 0");
  }
  if (s.outputs.empty()) throw ConfigurationError("sweep: no outputs requested");
  if (!(s.pair_bandwidth > 0.0)) throw ConfigurationError("sweep: pair_bandwidth must be > 0");
}

AppConfig parse_config(std::istream& in) {
  std::map<std::string, Section> sections;
  std::string current;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find_first_of("#;");
    const std::string line = raw.substr(0, hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const int indent = static_cast<int>(line.find_first_not_of(" \t")) + 1;
    if (t.front() == '[') {
      if (t.back() != ']') throw ParseError("unterminated section header", line_no, indent);
      current = trim(t.substr(1, t.size() - 2));
      if (!schema().count(current)) {
        throw ParseError("unknown section [" + current + "]", line_no, indent + 1);
      }
      if (sections.count(current)) {
        throw ParseError("duplicate section [" + current + "]", line_no, indent + 1);
      }
      sections[current];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_no, indent);
    if (current.empty()) throw ParseError("key outside of any section", line_no, indent);
    const std::string key = trim(line.substr(0, eq));
    if (!schema().at(current).count(key)) {
      throw ParseError("unknown key '" + key + "' in [" + current + "]", line_no, indent);
    }
    if (sections[current].count(key)) {
      throw ParseError("duplicate key '" + key + "' in [" + current + "]", line_no, indent);
    }
    const std::string rest = line.substr(eq + 1);
    const auto lead = rest.find_first_not_of(" \t");
    const int value_column = static_cast<int>(eq) + 2 + static_cast<int>(lead == std::string::npos ? 0 : lead);
    const std::string value = trim(rest);
    if (value.empty()) throw ParseError("empty value for '" + key + "'", line_no, value_column);
    sections[current][key] = Entry{value, line_no, value_column};
  }

  const Reader r(std::move(sections));
  AppConfig cfg;
  for (const char* s : {"junction", "drive"}) {
    if (!r.has(s)) throw ParseError(std::string("missing section [") + s + "]", 0);
  }
  cfg.junction = {r.quantity("junction", "resistance"), r.quantity("junction", "temperature")};
  cfg.drive = {r.quantity_or("drive", "v_dc", 0.0, Dimension::voltage),
               r.quantity_or("drive", "v_ac", 0.0, Dimension::voltage), r.quantity("drive", "f0")};
  const bool need_bands = r.has("sweep") || r.has("mc");
  for (const char* b : {"band1", "band2"}) {
    if (need_bands && !r.has(b)) {
      throw ParseError(std::string("missing section [") + b + "], required by [sweep] and [mc]", 0);
    }
  }
  if (r.has("band1")) cfg.band1 = {r.quantity("band1", "center"), r.quantity("band1", "bandwidth")};
  if (r.has("band2")) cfg.band2 = {r.quantity("band2", "center"), r.quantity("band2", "bandwidth")};

  if (r.has("sweep")) {
    SweepSpec s;
    s.junction = cfg.junction;
    s.drive = cfg.drive;
    s.band1 = cfg.band1;
    s.band2 = cfg.band2;
    s.v_dc_start = r.quantity_or("sweep", "v_dc_start", s.v_dc_start, Dimension::voltage);
    s.v_dc_stop = r.quantity_or("sweep", "v_dc_stop", s.v_dc_stop, Dimension::voltage);
    s.v_dc_step = r.quantity_or("sweep", "v_dc_step", s.v_dc_step, Dimension::voltage);
    s.pair_bandwidth = r.quantity_or("sweep", "pair_bandwidth", s.pair_bandwidth, Dimension::frequency);
    const Entry& vac = r.require("sweep", "v_ac");
    for (const auto& [item, col] : split_list(vac.value, vac.column)) {
      s.v_ac.push_back(parse_quantity(item, Dimension::voltage, vac.line, col));
    }
    const Entry& outs = r.require("sweep", "outputs");
    std::set<SweepOutput> chosen;
    for (const auto& [item, col] : split_list(outs.value, outs.column)) {
      const auto o = parse_output_name(item);
      if (!o) {
        throw ParseError("unknown output '" + item +
                             "' (expected g2, nrf, n1, n2, p_pair, pair_rate, g2_kelvin2)",
                         outs.line, col);
      }
      chosen.insert(*o);
    }
    s.outputs.assign(chosen.begin(), chosen.end());
    if (const Entry* p = r.find("sweep", "band_policy")) {
      if (p->value == "center") {
        s.band1.policy = s.band2.policy = BandPolicy::center;
      } else if (p->value == "average") {
        s.band1.policy = s.band2.policy = BandPolicy::average;
      } else {
        throw ParseError("band_policy must be 'center' or 'average'", p->line, p->column);
      }
    }
    cfg.sweep = std::move(s);
  }

  if (r.has("mc")) {
    sim::McConfig m;
    m.junction = cfg.junction;
    m.drive = cfg.drive;
    m.band1 = cfg.band1;
    m.band2 = cfg.band2;
    if (const Entry* e = r.find("mc", "bins_per_band")) m.bins_per_band = parse_int(e->value, e->line, e->column);
    if (const Entry* e = r.find("mc", "oversample")) m.oversample = parse_int(e->value, e->line, e->column);
    if (const Entry* e = r.find("mc", "n_windows")) m.n_windows = parse_unsigned(e->value, e->line, e->column);
    if (const Entry* e = r.find("mc", "seed")) m.seed = parse_unsigned(e->value, e->line, e->column);
    m.detector_time_constant =
        r.quantity_or("mc", "detector_time_constant", m.detector_time_constant, Dimension::time);
    m.sample_rate = r.quantity_or("mc", "sample_rate", m.sample_rate, Dimension::frequency);
    m.source_temperature =
        r.quantity_or("mc", "source_temperature", m.source_temperature, Dimension::temperature);
    if (const Entry* e = r.find("mc", "amp_noise_temperature")) {
      const auto items = split_list(e->value, e->column);
      if (items.size() > 2) throw ParseError("amp_noise_temperature takes one or two values", e->line, e->column);
      m.amp_noise_temperature[0] = parse_quantity(items[0].first, Dimension::temperature, e->line, items[0].second);
      m.amp_noise_temperature[1] = items.size() == 2
          ? parse_quantity(items[1].first, Dimension::temperature, e->line, items[1].second)
          : m.amp_noise_temperature[0];
    }
    if (const Entry* e = r.find("mc", "crosstalk")) {
      const auto items = split_list(e->value, e->column);
      std::vector<double> v;
      for (const auto& [item, col] : items) v.push_back(parse_quantity(item, Dimension::none, e->line, col));
      if (v.size() == 1) {
        m.crosstalk = {{{1.0, v[0]}, {v[0], 1.0}}};
      } else if (v.size() == 4) {
        m.crosstalk = {{{v[0], v[1]}, {v[2], v[3]}}};
      } else {
        throw ParseError("crosstalk takes one symmetric leakage or four matrix entries (row-major)",
                         e->line, e->column);
      }
    }
    if (const Entry* e = r.find("mc", "source")) {
      if (e->value == "junction") {
        m.source_mode = sim::SourceMode::junction;
      } else if (e->value == "thermal_control") {
        m.source_mode = sim::SourceMode::thermal_control;
      } else {
        throw ParseError("source must be 'junction' or 'thermal_control'", e->line, e->column);
      }
    }
    cfg.mc = m;
  }

  if (r.has("calibration")) {
    CalibrationSettings c;
    c.initial.gain = r.quantity_or("calibration", "gain", c.initial.gain, Dimension::none);
    c.initial.t_amp = r.quantity_or("calibration", "t_amp", c.initial.t_amp, Dimension::temperature);
    c.initial.t_electron =
        r.quantity_or("calibration", "t_electron", c.initial.t_electron, Dimension::temperature);
    c.initial.attenuation =
        r.quantity_or("calibration", "attenuation", c.initial.attenuation, Dimension::none);
    if (const Entry* e = r.find("calibration", "starts")) c.starts = parse_int(e->value, e->line, e->column);
    cfg.calibration = c;
  }
  return cfg;
}

AppConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  return parse_config(in);
}

}  // namespace tunnelpairs
