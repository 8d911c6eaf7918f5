#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "rfflab/experiment.hpp"
#include "rfflab/io.hpp"

namespace py = pybind11;
using namespace rfflab;

namespace {

ExperimentConfig config_from_text(const std::string& text) {
  ExperimentConfig cfg = text.empty() ? ExperimentConfig{} : config_from_json(nlohmann::json::parse(text));
  cfg.validate();
  return cfg;
}

py::dict record_dict(const TrialRecord& r) {
  py::dict d;
  d["device"] = r.device;
  d["trial"] = r.trial;
  d["frame"] = r.frame;
  d["ebn0_db"] = r.ebn0_db;
  d["p"] = r.p;
  d["source"] = std::string(to_string(r.source));
  d["feature"] = py::make_tuple(r.feature.x, r.feature.y);
  d["b_hat"] = r.fingerprint.b_hat;
  d["frame_seed"] = r.seeds.frame_seed;
  d["channel_seed"] = r.seeds.channel_seed;
  d["skipped"] = r.skipped;
  return d;
}

py::list table_rows(const ResultsTable& table) {
  py::list rows;
  for (const auto& r : table.rows) {
    py::dict d;
    d["ebn0_db"] = r.ebn0_db;
    d["p"] = r.p;
    d["source"] = std::string(to_string(r.source));
    d["acc_mean"] = r.acc_mean;
    d["acc_std"] = r.acc_std;
    d["n_trials"] = r.n_trials;
    d["skips"] = r.skips;
    d["separability_mean"] = r.separability_mean;
    rows.append(d);
  }
  return rows;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Hammerstein RF fingerprinting of QPSK-OFDM transmitters";

  py::register_exception<Error>(m, "RfflabError", PyExc_RuntimeError);
  py::register_exception<InputSizeError>(m, "InputSizeError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DegeneracyError>(m, "DegeneracyError", PyExc_ArithmeticError);

  py::class_<FrameSpec>(m, "FrameSpec")
      .def(py::init([](Index n, Index cp, Index p, double drive) {
             FrameSpec s{n, cp, 1, p, drive};
             s.validate();
             return s;
           }),
           py::arg("n_subcarriers") = 2048, py::arg("cp_len") = 512,
           py::arg("n_payload_symbols") = 1, py::arg("drive_rms") = 1.0)
      .def_readwrite("n_subcarriers", &FrameSpec::n_subcarriers)
      .def_readwrite("cp_len", &FrameSpec::cp_len)
      .def_readwrite("n_payload_symbols", &FrameSpec::n_payload_symbols)
      .def_readwrite("drive_rms", &FrameSpec::drive_rms)
      .def_property_readonly("symbol_len", &FrameSpec::symbol_len)
      .def_property_readonly("frame_len", &FrameSpec::frame_len);

  py::class_<TransmitterProfile>(m, "TransmitterProfile")
      .def(py::init<std::string, CVector>(), py::arg("label"), py::arg("coeffs"))
      .def_readwrite("label", &TransmitterProfile::label)
      .def_readwrite("coeffs", &TransmitterProfile::coeffs)
      .def("__repr__", [](const TransmitterProfile& t) {
        return "<TransmitterProfile '" + t.label + "'>";
      });

  py::class_<BasisConfig>(m, "BasisConfig")
      .def(py::init([](int order, int n_taps) {
             BasisConfig c{order, n_taps};
             c.validate();
             return c;
           }),
           py::arg("order") = 7, py::arg("n_taps") = 9)
      .def_readwrite("order", &BasisConfig::order)
      .def_readwrite("n_taps", &BasisConfig::n_taps);

  m.def("default_transmitters", &default_transmitters);
  m.def("default_pilot", &default_pilot, py::arg("spec"));
  m.def("map_bits_to_qpsk",
        [](const std::vector<std::uint8_t>& bits, const FrameSpec& spec) {
          return map_bits_to_qpsk(bits, spec);
        },
        py::arg("bits"), py::arg("spec"));
  m.def("qpsk_hard_decision", &qpsk_hard_decision, py::arg("noisy_fd"));
  m.def("ofdm_modulate", &ofdm_modulate, py::arg("fd"), py::arg("spec"));
  m.def("ofdm_demodulate", &ofdm_demodulate, py::arg("rx"), py::arg("spec"));
  m.def("build_frame", &build_frame, py::arg("pilot"), py::arg("payloads"), py::arg("spec"));
  m.def("random_qpsk_symbol", &random_qpsk_symbol, py::arg("spec"), py::arg("seed"));

  m.def("apply_static_nonlinearity", &apply_static_nonlinearity, py::arg("u"), py::arg("profile"));
  m.def("fir_filter",
        [](const TimeSeries& x, const CVector& taps) { return fir_filter(x, ChannelRealization{taps}); },
        py::arg("x"), py::arg("taps"));
  m.def("draw_rayleigh_channel",
        [](Seed seed, int max_delay, int n_paths) {
          return draw_rayleigh_channel(seed, max_delay, n_paths).taps;
        },
        py::arg("seed"), py::arg("max_delay") = 8, py::arg("n_paths") = 5);
  m.def("awgn_variance",
        [](double rx_power, double ebn0_db, const FrameSpec& spec) {
          return awgn_variance(rx_power, NoiseSpec{ebn0_db}, spec);
        },
        py::arg("rx_power"), py::arg("ebn0_db"), py::arg("spec"));
  m.def("transmit",
        [](const TimeSeries& frame, const TransmitterProfile& profile, const CVector& taps,
           double ebn0_db, const FrameSpec& spec, Seed seed) {
          return transmit(frame, profile, ChannelRealization{taps}, NoiseSpec{ebn0_db}, spec, seed);
        },
        py::arg("frame"), py::arg("profile"), py::arg("taps"),
        py::arg("ebn0_db") = std::numeric_limits<double>::infinity(), py::arg("spec") = FrameSpec{},
        py::arg("seed") = 0);

  m.def("build_regression_matrix",
        [](const TimeSeries& u, const BasisConfig& cfg, const TimeSeries& history) {
          return build_regression_matrix(u, cfg, history).entries;
        },
        py::arg("u"), py::arg("cfg") = BasisConfig{}, py::arg("history") = TimeSeries());
  m.def("compute_ortho_transform",
        [](const TimeSeries& u, const BasisConfig& cfg) {
          return compute_ortho_transform(u, cfg).u_matrix;
        },
        py::arg("u"), py::arg("cfg") = BasisConfig{});
  m.def("ls_solve", &ls_solve, py::arg("a"), py::arg("d"));
  m.def("separate",
        [](const TimeSeries& u, const TimeSeries& d, const BasisConfig& cfg,
           const TimeSeries& history) {
          const auto sep = separate(u, d, cfg, FingerprintSource::payload, history);
          return py::make_tuple(sep.linear.h_hat, sep.fingerprint.b_hat);
        },
        py::arg("u"), py::arg("d"), py::arg("cfg") = BasisConfig{},
        py::arg("history") = TimeSeries(),
        "Returns (h_hat, b_hat) for input u and output d.");

  m.def("process_capture",
        [](const TimeSeries& rx, const FrameSpec& spec, const BasisConfig& cfg) {
          const auto cap = FrameCapture::from_frame(rx, default_pilot(spec), spec);
          const auto res = process_capture(cap, cfg);
          py::dict d;
          d["h_hat"] = res.pilot.channel.h_hat;
          d["b_hat_pilot"] = res.pilot.fingerprint.b_hat;
          d["b_hat_payload"] = res.payload.b_hat;
          d["judged"] = res.equalized.judged;
          return d;
        },
        py::arg("rx"), py::arg("spec"), py::arg("cfg") = BasisConfig{},
        "Two-stage processing of one received frame (default pilot).");

  m.def("knn_classify",
        [](const std::vector<std::tuple<double, double, std::string>>& train, double qx, double qy,
           int k) {
          std::vector<LabeledFeature> t;
          for (const auto& [x, y, label] : train) t.push_back({x, y, label});
          return knn_classify(t, qx, qy, k);
        },
        py::arg("train"), py::arg("qx"), py::arg("qy"), py::arg("k") = 3);

  m.def("read_iq_file", &read_iq_file, py::arg("path"));
  m.def("write_iq_file", &write_iq_file, py::arg("path"), py::arg("samples"));

  m.def("simulate_frame",
        [](const std::string& config_json, int device, double ebn0_db, int p, int trial,
           int frame) {
          const auto cfg = config_from_text(config_json);
          return simulate_frame(cfg, device, ebn0_db, p, trial, frame).rx;
        },
        py::arg("config_json"), py::arg("device"), py::arg("ebn0_db"), py::arg("p"),
        py::arg("trial") = 0, py::arg("frame") = 0);
  m.def("run_frame_sample",
        [](const std::string& config_json, int device, double ebn0_db, int p, int trial,
           int frame) {
          const auto cfg = config_from_text(config_json);
          const auto s = run_frame_sample(cfg, device, ebn0_db, p, trial, frame);
          return py::make_tuple(record_dict(s.payload), record_dict(s.pilot));
        },
        py::arg("config_json"), py::arg("device"), py::arg("ebn0_db"), py::arg("p"),
        py::arg("trial") = 0, py::arg("frame") = 0);
  m.def("run_sweep",
        [](const std::string& config_json, const std::string& out_dir) {
          const auto cfg = config_from_text(config_json);
          SweepResult sweep;
          {
            py::gil_scoped_release release;
            sweep = run_sweep(cfg);
          }
          if (!out_dir.empty()) emit_outputs(cfg, sweep, out_dir);
          py::dict d;
          d["rows"] = table_rows(sweep.table);
          d["csv"] = results_csv(sweep.table);
          d["seconds"] = sweep.seconds;
          return d;
        },
        py::arg("config_json") = "", py::arg("out_dir") = "");
  m.def("default_config_json", [] { return config_to_json(ExperimentConfig{}).dump(); });
  m.attr("RESULTS_CSV_HEADER") = kResultsCsvHeader;
}
