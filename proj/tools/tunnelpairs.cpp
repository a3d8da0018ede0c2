// tunnelpairs: sweeps of the analytic photon-pair statistics, the detection
// Monte Carlo, and the photo-assisted noise calibration fit.
//
// Exit codes: 0 ok, 2 configuration / parse / input error, 3 numerical or
// model error, 4 I/O error.

#include <chrono>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tunnelpairs/calibration_fit.hpp"
#include "tunnelpairs/commands.hpp"
#include "tunnelpairs/config.hpp"
#include "tunnelpairs/errors.hpp"
#include "tunnelpairs/sweep.hpp"

namespace {

enum Exit { kOk = 0, kConfig = 2, kNumerical = 3, kIo = 4 };

struct Options {
  std::string config;
  std::string out;
  std::string plot;
  std::string data;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::optional<std::string> band_policy;
};

tunnelpairs::AppConfig load(const Options& o, std::string& source) {
  source = o.config;
  tunnelpairs::AppConfig cfg = tunnelpairs::load_config(o.config);
  return cfg;
}

int cmd_sweep(const Options& o, std::string& source) {
  auto cfg = load(o, source);
  if (!cfg.sweep) throw tunnelpairs::ConfigurationError("config has no [sweep] section");
  auto spec = *cfg.sweep;
  if (o.band_policy) {
    const auto p = *o.band_policy == "average" ? tunnelpairs::BandPolicy::average
                                               : tunnelpairs::BandPolicy::center;
    spec.band1.policy = spec.band2.policy = p;
  }
  const auto rows = tunnelpairs::run_sweep(spec, o.out, o.plot, o.threads);
  std::cerr << "wrote " << rows.size() << " rows to " << o.out << '\n';
  return kOk;
}

int cmd_mc(const Options& o, std::string& source) {
  auto cfg = load(o, source);
  if (!cfg.mc) throw tunnelpairs::ConfigurationError("config has no [mc] section");
  auto mc = *cfg.mc;
  if (o.seed) mc.seed = *o.seed;
  const auto t0 = std::chrono::steady_clock::now();
  tunnelpairs::run_mc(mc, std::cout, o.out, o.threads);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cerr << "runtime " << seconds << " s\n";
  return kOk;
}

int cmd_calibrate(const Options& o, std::string& source) {
  const auto cfg = load(o, source);
  source = o.data;
  tunnelpairs::run_calibration(o.data, cfg, o.seed.value_or(0), std::cout, o.out, o.threads);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Photon-pair statistics of an ac+dc biased tunnel junction"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config, "Configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", o.out, "Output file (sweep CSV, mc CSV to append to, calibrate JSON)");
  app.add_option("--plot", o.plot, "SVG plot of the sweep");
  app.add_option("--seed", o.seed, "Random seed (mc, calibrate multi-start)");
  app.add_option("--threads", o.threads, "Worker threads")->check(CLI::Range(1, 1024));
  app.add_option("--band-policy", o.band_policy, "Band reduction for sweeps")
      ->check(CLI::IsMember({"center", "average"}));

  auto* sweep = app.add_subcommand("sweep", "Analytic statistics over a (v_dc, v_ac) grid");
  auto* mc = app.add_subcommand("mc", "Monte Carlo of the power-correlation measurement");
  auto* calibrate = app.add_subcommand("calibrate", "Fit setup parameters to noise curves");
  calibrate->add_option("--data", o.data, "NoiseCurve CSV")->required();
  for (auto* s : {sweep, mc, calibrate}) s->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfig;
  }

  std::string source = "<arguments>";
  try {
    if (o.config.empty()) throw tunnelpairs::ConfigurationError("--config is required");
    if (sweep->parsed()) {
      if (o.out.empty()) throw tunnelpairs::ConfigurationError("sweep needs --out");
      return cmd_sweep(o, source);
    }
    if (mc->parsed()) return cmd_mc(o, source);
    return cmd_calibrate(o, source);
  } catch (const tunnelpairs::ParseError& e) {
    std::cerr << source << ':' << e.line() << ':' << e.column() << ": error: " << e.what() << '\n';
    return kConfig;
  } catch (const tunnelpairs::ConfigurationError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const tunnelpairs::InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kConfig;
  } catch (const tunnelpairs::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const tunnelpairs::calib::ConvergenceError& e) {
    std::cerr << "numerical error: " << e.what() << " (best objective "
              << e.best().objective << " K^2)\n";
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  }
}
