#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "tunnelpairs/calibration_fit.hpp"
#include "tunnelpairs/config.hpp"
#include "tunnelpairs/constants.hpp"
#include "tunnelpairs/detection_sim.hpp"
#include "tunnelpairs/errors.hpp"
#include "tunnelpairs/junction_noise.hpp"
#include "tunnelpairs/special_functions.hpp"
#include "tunnelpairs/sweep.hpp"

namespace py = pybind11;
using namespace tunnelpairs;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const Array& a) {
  return {a.data(), a.data() + a.size()};
}

// Fresh contiguous array; built from explicit shape and strides.
Array empty_array(std::vector<py::ssize_t> shape) {
  std::vector<py::ssize_t> strides(shape.size(), sizeof(double));
  for (std::size_t i = shape.size(); i-- > 1;) strides[i - 1] = strides[i] * shape[i];
  return Array(std::move(shape), std::move(strides));
}

Array to_array(const std::vector<double>& v) {
  Array out = empty_array({static_cast<py::ssize_t>(v.size())});
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

void bind_errors(py::module_& m) {
  auto base = py::register_exception<std::runtime_error>(m, "TunnelPairsError");
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ConfigurationError>(m, "ConfigurationError", PyExc_ValueError);
  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<EvaluationError>(m, "EvaluationError", base.ptr());
  py::register_exception<UndefinedStatisticError>(m, "UndefinedStatisticError", base.ptr());
  py::register_exception<NumericalConsistencyError>(m, "NumericalConsistencyError", base.ptr());
  py::register_exception<ModelViolationError>(m, "ModelViolationError", base.ptr());
  py::register_exception<IdentifiabilityError>(m, "IdentifiabilityError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<calib::ConvergenceError>(m, "ConvergenceError", base.ptr());

  // ParseError keeps its location.
  static py::handle parse_error = py::exception<ParseError>(m, "ParseError", base.ptr()).release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ParseError& e) {
      std::ostringstream msg;
      msg << e.line() << ':' << e.column() << ": " << e.what();
      py::object err = parse_error(msg.str());
      err.attr("line") = e.line();
      err.attr("column") = e.column();
      PyErr_SetObject(parse_error.ptr(), err.ptr());
    }
  });
}

void bind_model(py::module_& m) {
  py::enum_<BandPolicy>(m, "BandPolicy")
      .value("center", BandPolicy::center)
      .value("average", BandPolicy::average);

  py::class_<Junction>(m, "Junction")
      .def(py::init([](double r, double t) { return Junction{r, t}; }), py::arg("resistance"),
           py::arg("temperature"))
      .def_readwrite("resistance", &Junction::resistance)
      .def_readwrite("temperature", &Junction::temperature)
      .def("__repr__", [](const Junction& j) {
        return "Junction(resistance=" + std::to_string(j.resistance) +
               ", temperature=" + std::to_string(j.temperature) + ")";
      });

  py::class_<Drive>(m, "Drive")
      .def(py::init([](double v_dc, double v_ac, double f0) { return Drive{v_dc, v_ac, f0}; }),
           py::arg("v_dc"), py::arg("v_ac"), py::arg("f0"))
      .def_readwrite("v_dc", &Drive::v_dc)
      .def_readwrite("v_ac", &Drive::v_ac)
      .def_readwrite("f0", &Drive::f0);

  py::class_<DetectionBand>(m, "DetectionBand")
      .def(py::init([](double fc, double bw, BandPolicy p) { return DetectionBand{fc, bw, p}; }),
           py::arg("f_center"), py::arg("bandwidth"), py::arg("policy") = BandPolicy::center)
      .def_readwrite("f_center", &DetectionBand::f_center)
      .def_readwrite("bandwidth", &DetectionBand::bandwidth)
      .def_readwrite("policy", &DetectionBand::policy);

  py::class_<PairStats>(m, "PairStats")
      .def_readonly("n1", &PairStats::n1)
      .def_readonly("n2", &PairStats::n2)
      .def_readonly("covariance", &PairStats::covariance)
      .def_readonly("c4", &PairStats::c4)
      .def_readonly("g2_kelvin2", &PairStats::g2_kelvin2)
      .def_readonly("g2", &PairStats::g2)
      .def_readonly("nrf", &PairStats::nrf)
      .def_readonly("p_pair_given_2", &PairStats::p_pair_given_2)
      .def_readonly("p_pair_unclipped", &PairStats::p_pair_unclipped)
      .def("low_occupation", &PairStats::low_occupation);

  m.attr("E_CHARGE") = kSI.e;
  m.attr("H_PLANCK") = kSI.h;
  m.attr("K_BOLTZMANN") = kSI.k_B;

  m.def("bessel_j", &bessel_j, py::arg("n"), py::arg("z"));
  m.def("coth_stable", &coth_stable, py::arg("x"));

  m.def("s0_equilibrium", &s0_equilibrium, py::arg("junction"), py::arg("f"));
  m.def("photo_assisted_s", py::overload_cast<const Junction&, const Drive&, double>(&photo_assisted_s),
        py::arg("junction"), py::arg("drive"), py::arg("f"));
  m.def("x_correlator", py::overload_cast<const Junction&, const Drive&, double>(&x_correlator),
        py::arg("junction"), py::arg("drive"), py::arg("f"));
  m.def("photon_number", &photon_number, py::arg("junction"), py::arg("drive"), py::arg("band"));
  m.def("c4", &c4, py::arg("junction"), py::arg("drive"), py::arg("band1"), py::arg("band2"));
  m.def("g2_kelvin2", &g2_kelvin2, py::arg("junction"), py::arg("drive"), py::arg("band1"),
        py::arg("band2"));
  m.def("g2", &g2, py::arg("junction"), py::arg("drive"), py::arg("band1"), py::arg("band2"));
  m.def("nrf", &nrf, py::arg("junction"), py::arg("drive"), py::arg("band1"), py::arg("band2"));
  m.def("pair_probability", &pair_probability, py::arg("junction"), py::arg("drive"),
        py::arg("band1"), py::arg("band2"));
  m.def("pair_rate", &pair_rate, py::arg("junction"), py::arg("drive"), py::arg("band1"),
        py::arg("band2"), py::arg("bandwidth"));
  m.def("pair_stats", &pair_stats, py::arg("junction"), py::arg("drive"), py::arg("band1"),
        py::arg("band2"));
}

void bind_sim(py::module_& m) {
  py::enum_<sim::SourceMode>(m, "SourceMode")
      .value("junction", sim::SourceMode::junction)
      .value("thermal_control", sim::SourceMode::thermal_control);

  py::class_<sim::McConfig>(m, "McConfig")
      .def(py::init<>())
      .def_readwrite("junction", &sim::McConfig::junction)
      .def_readwrite("drive", &sim::McConfig::drive)
      .def_readwrite("band1", &sim::McConfig::band1)
      .def_readwrite("band2", &sim::McConfig::band2)
      .def_readwrite("bins_per_band", &sim::McConfig::bins_per_band)
      .def_readwrite("amp_noise_temperature", &sim::McConfig::amp_noise_temperature)
      .def_readwrite("detector_time_constant", &sim::McConfig::detector_time_constant)
      .def_readwrite("sample_rate", &sim::McConfig::sample_rate)
      .def_readwrite("oversample", &sim::McConfig::oversample)
      .def_readwrite("n_windows", &sim::McConfig::n_windows)
      .def_readwrite("seed", &sim::McConfig::seed)
      .def_readwrite("crosstalk", &sim::McConfig::crosstalk)
      .def_readwrite("source_mode", &sim::McConfig::source_mode)
      .def_readwrite("source_temperature", &sim::McConfig::source_temperature);

  py::class_<sim::McResult>(m, "McResult")
      .def_readonly("mean_p1", &sim::McResult::mean_p1)
      .def_readonly("mean_p2", &sim::McResult::mean_p2)
      .def_readonly("var_p1", &sim::McResult::var_p1)
      .def_readonly("var_p2", &sim::McResult::var_p2)
      .def_readonly("g2_est", &sim::McResult::g2_est)
      .def_readonly("g2_err", &sim::McResult::g2_err)
      .def_readonly("n_samples_used", &sim::McResult::n_samples_used)
      .def_readonly("effective_samples", &sim::McResult::effective_samples)
      .def_readonly("source_mode", &sim::McResult::source_mode);

  py::class_<sim::SpurCorrected>(m, "SpurCorrected")
      .def_readonly("g2", &sim::SpurCorrected::g2)
      .def_readonly("g2_err", &sim::SpurCorrected::g2_err)
      .def_readonly("spur", &sim::SpurCorrected::spur);

  m.def("run_experiment", &sim::run_experiment, py::arg("config"), py::arg("threads") = 1,
        py::call_guard<py::gil_scoped_release>());
  m.def("predicted_g2_kelvin2", &sim::predicted_g2_kelvin2, py::arg("config"));
  m.def("predicted_mean_power", &sim::predicted_mean_power, py::arg("config"));
  m.def(
      "detect_power",
      [](const Array& re, const Array& im, double rate, double tau, double sample_rate) {
        if (re.size() != im.size()) throw InputError("real and imaginary parts differ in length");
        sim::Envelope env;
        env.rate = rate;
        env.samples.resize(static_cast<std::size_t>(re.size()));
        for (py::ssize_t i = 0; i < re.size(); ++i) env.samples[static_cast<std::size_t>(i)] = {re.data()[i], im.data()[i]};
        return to_array(sim::detect_power(env, tau, sample_rate));
      },
      py::arg("real"), py::arg("imag"), py::arg("rate"), py::arg("time_constant"),
      py::arg("sample_rate"));
  m.def(
      "estimate_g2",
      [](const Array& p1, const Array& p2, double tau, double sample_rate) {
        sim::EstimatorOptions o;
        o.time_constant = tau;
        o.sample_rate = sample_rate;
        return sim::estimate_g2(to_vector(p1), to_vector(p2), o);
      },
      py::arg("p1"), py::arg("p2"), py::arg("time_constant") = 0.0, py::arg("sample_rate") = 0.0);
  m.def("calibrate_spur", &sim::calibrate_spur, py::arg("control"), py::arg("measurement"));
}

void bind_calibration(py::module_& m) {
  py::class_<calib::CalibrationModel>(m, "CalibrationModel")
      .def(py::init([](double gain, double t_amp, double t_electron, double attenuation) {
             return calib::CalibrationModel{gain, t_amp, t_electron, attenuation};
           }),
           py::arg("gain") = 1.0, py::arg("t_amp") = 0.0, py::arg("t_electron") = 0.02,
           py::arg("attenuation") = 1.0)
      .def_readwrite("gain", &calib::CalibrationModel::gain)
      .def_readwrite("t_amp", &calib::CalibrationModel::t_amp)
      .def_readwrite("t_electron", &calib::CalibrationModel::t_electron)
      .def_readwrite("attenuation", &calib::CalibrationModel::attenuation);

  py::class_<calib::NoiseCurve>(m, "NoiseCurve")
      .def(py::init([](const Array& v_dc, const Array& v_gen, double f, const Array& t) {
             calib::NoiseCurve c{to_vector(v_dc), to_vector(v_gen), f, to_vector(t)};
             calib::validate(c);
             return c;
           }),
           py::arg("v_dc"), py::arg("v_gen"), py::arg("frequency"), py::arg("t_noise"))
      .def_property_readonly("v_dc", [](const calib::NoiseCurve& c) { return to_array(c.v_dc); })
      .def_property_readonly("v_gen", [](const calib::NoiseCurve& c) { return to_array(c.v_gen); })
      .def_readonly("frequency", &calib::NoiseCurve::frequency)
      .def_property_readonly("t_noise", [](const calib::NoiseCurve& c) {
        Array out = empty_array({static_cast<py::ssize_t>(c.v_gen.size()),
                                 static_cast<py::ssize_t>(c.v_dc.size())});
        std::copy(c.t_noise.begin(), c.t_noise.end(), out.mutable_data());
        return out;
      });

  py::class_<calib::FitReport>(m, "FitReport")
      .def_readonly("model", &calib::FitReport::model)
      .def_readonly("objective", &calib::FitReport::objective)
      .def_readonly("residual_rms", &calib::FitReport::residual_rms)
      .def_readonly("evaluations", &calib::FitReport::evaluations)
      .def_readonly("best_start", &calib::FitReport::best_start)
      .def_readonly("converged", &calib::FitReport::converged)
      .def_readonly("identifiable", &calib::FitReport::identifiable)
      .def_readonly("warnings", &calib::FitReport::warnings);

  m.def(
      "synthesize_curve",
      [](const calib::CalibrationModel& model, double r, const Array& v_dc, const Array& v_gen,
         double f, double f0) {
        return calib::synthesize_curve(model, r, to_vector(v_dc), to_vector(v_gen), f, f0);
      },
      py::arg("model"), py::arg("resistance"), py::arg("v_dc"), py::arg("v_gen"), py::arg("f"),
      py::arg("f0"));
  m.def(
      "fit",
      [](const calib::NoiseCurve& data, double r, double f0, const calib::CalibrationModel& initial,
         int starts, std::uint64_t seed, int threads) {
        calib::FitOptions o;
        o.starts = starts;
        o.seed = seed;
        o.threads = threads;
        py::gil_scoped_release release;
        return calib::fit(data, r, f0, initial, o);
      },
      py::arg("data"), py::arg("resistance"), py::arg("f0"), py::arg("initial"),
      py::arg("starts") = 8, py::arg("seed") = 0, py::arg("threads") = 1);
}

void bind_sweep(py::module_& m) {
  m.def(
      "sweep",
      [](const std::string& config_path, int threads) {
        const AppConfig cfg = load_config(config_path);
        if (!cfg.sweep) throw ConfigurationError("config has no [sweep] section");
        std::vector<SweepRow> rows;
        {
          py::gil_scoped_release release;
          rows = evaluate_sweep(*cfg.sweep, threads);
        }
        py::dict out;
        const auto column = [&](auto get) {
          Array a = empty_array({static_cast<py::ssize_t>(rows.size())});
          for (std::size_t i = 0; i < rows.size(); ++i) a.mutable_data()[i] = get(rows[i]);
          return a;
        };
        out["v_dc_V"] = column([](const SweepRow& r) { return r.v_dc; });
        out["v_ac_V"] = column([](const SweepRow& r) { return r.v_ac; });
        out["f0_Hz"] = column([](const SweepRow& r) { return r.f0; });
        for (SweepOutput o : cfg.sweep->outputs) {
          out[column_name(o)] = column([o](const SweepRow& r) { return r[o]; });
        }
        return out;
      },
      py::arg("config_path"), py::arg("threads") = 1,
      "Evaluates the [sweep] section of a config file; returns columns keyed like the CSV.");
}

}  // namespace

PYBIND11_MODULE(_tunnelpairs, m) {
  m.doc() = "Photon-pair statistics of an ac+dc biased tunnel junction";
  bind_errors(m);
  bind_model(m);
  bind_sim(m);
  bind_calibration(m);
  bind_sweep(m);
}
