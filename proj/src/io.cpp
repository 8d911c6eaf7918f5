#include "rfflab/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

namespace rfflab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint32_t to_le(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  return ((v & 0xFFU) << 24) | ((v & 0xFF00U) << 8) | ((v >> 8) & 0xFF00U) | (v >> 24);
}

json complex_vector_to_json(const CVector& v) {
  json arr = json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back({v[i].real(), v[i].imag()});
  return arr;
}

CVector complex_vector_from_json(const json& arr) {
  if (!arr.is_array()) throw ConfigError("expected an array of [re, im] pairs");
  CVector v(static_cast<Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto& pair = arr[i];
    if (!pair.is_array() || pair.size() != 2) throw ConfigError("expected [re, im] pair");
    v[static_cast<Index>(i)] = Complex(pair[0].get<double>(), pair[1].get<double>());
  }
  return v;
}

std::string format_ebn0(double e) { return fmt::format("{:g}", e); }

// JSON has no infinity; a noiseless Eb/N0 travels as the string "inf" and an
// unknown one as null.
json ebn0_to_json(double e) {
  if (e == std::numeric_limits<double>::infinity()) return "inf";
  if (std::isnan(e)) return nullptr;
  return e;
}

double ebn0_from_json(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    throw ConfigError("ebn0_db: expected a number or \"inf\"");
  }
  return j.get<double>();
}

}  // namespace

void write_iq_file(const fs::path& path, const TimeSeries& samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("write_iq_file: cannot open " + path.string());
  std::vector<std::uint32_t> words(static_cast<std::size_t>(2 * samples.size()));
  for (Index n = 0; n < samples.size(); ++n) {
    const float re = static_cast<float>(samples[n].real());
    const float im = static_cast<float>(samples[n].imag());
    words[static_cast<std::size_t>(2 * n)] = to_le(std::bit_cast<std::uint32_t>(re));
    words[static_cast<std::size_t>(2 * n + 1)] = to_le(std::bit_cast<std::uint32_t>(im));
  }
  out.write(reinterpret_cast<const char*>(words.data()),
            static_cast<std::streamsize>(words.size() * sizeof(std::uint32_t)));
  if (!out) throw Error("write_iq_file: write failed for " + path.string());
}

TimeSeries read_iq_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("read_iq_file: cannot open " + path.string());
  const auto bytes = static_cast<std::size_t>(fs::file_size(path));
  if (bytes % 8 != 0) {
    throw InputSizeError("read_iq_file: " + path.string() + " holds " + std::to_string(bytes) +
                         " bytes, not a whole number of float32 I/Q pairs");
  }
  std::vector<std::uint32_t> words(bytes / 4);
  in.read(reinterpret_cast<char*>(words.data()), static_cast<std::streamsize>(bytes));
  TimeSeries out(static_cast<Index>(bytes / 8));
  for (Index n = 0; n < out.size(); ++n) {
    const float re = std::bit_cast<float>(to_le(words[static_cast<std::size_t>(2 * n)]));
    const float im = std::bit_cast<float>(to_le(words[static_cast<std::size_t>(2 * n + 1)]));
    out[n] = Complex(re, im);
  }
  return out;
}

FrameCapture ingest_iq_capture(const fs::path& path, const FrameSpec& spec,
                               const FdSymbolVector& pilot_fd) {
  const TimeSeries rx = read_iq_file(path);
  if (rx.size() != spec.frame_len()) {
    throw InputSizeError("ingest_iq_capture: " + path.string() + " expected " +
                         std::to_string(spec.frame_len()) + " complex samples, found " +
                         std::to_string(rx.size()));
  }
  return FrameCapture::from_frame(rx, pilot_fd, spec);
}

json to_json(const FingerprintRecord& rec) {
  json j;
  if (rec.device_label) j["device_label"] = *rec.device_label;
  j["source"] = std::string(to_string(rec.source));
  j["ebn0_db"] = ebn0_to_json(rec.ebn0_db);
  j["b_hat"] = complex_vector_to_json(rec.b_hat);
  j["seed"] = rec.seed;
  return j;
}

FingerprintRecord fingerprint_record_from_json(const json& j) {
  FingerprintRecord rec;
  if (j.contains("device_label") && !j["device_label"].is_null()) {
    rec.device_label = j["device_label"].get<std::string>();
  }
  rec.source = fingerprint_source_from_string(j.at("source").get<std::string>());
  if (j.contains("ebn0_db")) rec.ebn0_db = ebn0_from_json(j["ebn0_db"]);
  rec.b_hat = complex_vector_from_json(j.at("b_hat"));
  rec.seed = j.value("seed", Seed{0});
  return rec;
}

void write_fingerprints(std::ostream& out, const std::vector<FingerprintRecord>& records) {
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

std::vector<FingerprintRecord> read_fingerprints(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("read_fingerprints: cannot open " + path.string());
  std::vector<FingerprintRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(fingerprint_record_from_json(json::parse(line)));
  }
  return out;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  cfg.frame.n_subcarriers = j.value("n_subcarriers", cfg.frame.n_subcarriers);
  cfg.frame.cp_len = j.value("cp_len", cfg.frame.cp_len);
  cfg.frame.drive_rms = j.value("drive_rms", cfg.frame.drive_rms);
  cfg.poly_order = j.value("poly_order", cfg.poly_order);
  cfg.payload_counts = j.value("payload_counts", cfg.payload_counts);
  if (j.contains("ebn0_db")) {
    cfg.ebn0_db.clear();
    for (const auto& e : j["ebn0_db"]) cfg.ebn0_db.push_back(ebn0_from_json(e));
  }
  cfg.n_trials = j.value("n_trials", cfg.n_trials);
  cfg.samples_per_device = j.value("samples_per_device", cfg.samples_per_device);
  cfg.k = j.value("k", cfg.k);
  cfg.max_delay = j.value("max_delay", cfg.max_delay);
  cfg.n_paths = j.value("n_paths", cfg.n_paths);
  cfg.master_seed = j.value("master_seed", cfg.master_seed);
  cfg.n_threads = j.value("n_threads", cfg.n_threads);
  if (j.contains("channel_mode")) {
    const auto mode = j["channel_mode"].get<std::string>();
    if (mode == "per_sample") {
      cfg.channel_mode = ChannelMode::per_sample;
    } else if (mode == "per_trial") {
      cfg.channel_mode = ChannelMode::per_trial;
    } else {
      throw ConfigError("config: unknown channel_mode '" + mode + "'");
    }
  }
  if (j.contains("payload_combining")) {
    const auto mode = j["payload_combining"].get<std::string>();
    if (mode == "concatenate") {
      cfg.combining = PayloadCombining::concatenate;
    } else if (mode == "average") {
      cfg.combining = PayloadCombining::average;
    } else {
      throw ConfigError("config: unknown payload_combining '" + mode + "'");
    }
  }
  if (j.contains("transmitters")) {
    cfg.transmitters.clear();
    for (const auto& t : j["transmitters"]) {
      TransmitterProfile p{t.at("label").get<std::string>(), complex_vector_from_json(t.at("coeffs"))};
      p.validate();
      cfg.transmitters.push_back(std::move(p));
    }
  }
  return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["n_subcarriers"] = cfg.frame.n_subcarriers;
  j["cp_len"] = cfg.frame.cp_len;
  j["drive_rms"] = cfg.frame.drive_rms;
  j["poly_order"] = cfg.poly_order;
  j["payload_counts"] = cfg.payload_counts;
  j["ebn0_db"] = json::array();
  for (double e : cfg.ebn0_db) j["ebn0_db"].push_back(ebn0_to_json(e));
  j["n_trials"] = cfg.n_trials;
  j["samples_per_device"] = cfg.samples_per_device;
  j["k"] = cfg.k;
  j["max_delay"] = cfg.max_delay;
  j["n_paths"] = cfg.n_paths;
  j["master_seed"] = cfg.master_seed;
  j["n_threads"] = cfg.n_threads;
  j["channel_mode"] = cfg.channel_mode == ChannelMode::per_sample ? "per_sample" : "per_trial";
  j["payload_combining"] =
      cfg.combining == PayloadCombining::concatenate ? "concatenate" : "average";
  json tx = json::array();
  for (const auto& t : cfg.transmitters) {
    tx.push_back({{"label", t.label}, {"coeffs", complex_vector_to_json(t.coeffs)}});
  }
  j["transmitters"] = tx;
  return j;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("load_config: cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("load_config: " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

std::string results_csv(const ResultsTable& table) {
  std::string out = std::string(kResultsCsvHeader) + "\n";
  for (const auto& r : table.rows) {
    out += fmt::format("{},{},{},{:.6f},{:.6f},{},{}\n", format_ebn0(r.ebn0_db), r.p,
                       to_string(r.source), r.acc_mean, r.acc_std, r.n_trials, r.skips);
  }
  return out;
}

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                    "#8c564b"};

struct Frame2d {
  double x0, x1, y0, y1;
  double width = 640, height = 480, margin = 60;

  double px(double x) const { return margin + (x - x0) / (x1 - x0) * (width - 2 * margin); }
  double py(double y) const { return height - margin - (y - y0) / (y1 - y0) * (height - 2 * margin); }
};

std::string svg_open(const Frame2d& f, const std::string& title, const std::string& xlabel,
                     const std::string& ylabel) {
  std::string s = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:g}\" height=\"{:g}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<text x=\"{:g}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n"
      "<rect x=\"{:g}\" y=\"{:g}\" width=\"{:g}\" height=\"{:g}\" fill=\"none\" stroke=\"black\"/>\n"
      "<text x=\"{:g}\" y=\"{:g}\" text-anchor=\"middle\">{}</text>\n"
      "<text x=\"16\" y=\"{:g}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:g})\">{}</text>\n",
      f.width, f.height, f.width / 2, title, f.margin, f.margin, f.width - 2 * f.margin,
      f.height - 2 * f.margin, f.width / 2, f.height - 16, xlabel, f.height / 2, f.height / 2,
      ylabel);
  for (int i = 0; i <= 4; ++i) {
    const double x = f.x0 + (f.x1 - f.x0) * i / 4.0;
    const double y = f.y0 + (f.y1 - f.y0) * i / 4.0;
    s += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{:.3g}</text>\n",
                     f.px(x), f.height - f.margin + 16, x);
    s += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.3g}</text>\n",
                     f.margin - 4, f.py(y) + 4, y);
  }
  return s;
}

}  // namespace

std::string scatter_svg(const CellResult& payload, const CellResult& pilot,
                        const std::string& title) {
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto* cell : {&payload, &pilot}) {
    for (const auto& cls : cell->samples) {
      for (const auto& f : cls) {
        x0 = std::min(x0, f.x);
        x1 = std::max(x1, f.x);
        y0 = std::min(y0, f.y);
        y1 = std::max(y1, f.y);
      }
    }
  }
  if (!(x1 > x0)) { x0 -= 1; x1 += 1; }
  if (!(y1 > y0)) { y0 -= 1; y1 += 1; }
  Frame2d f{x0, x1, y0, y1};
  std::string s = svg_open(f, title, "Re(b3)", "Im(b3)");
  // Payload as circles, pilot as squares; colour by device.
  for (std::size_t d = 0; d < payload.samples.size(); ++d) {
    const char* colour = kPalette[d % std::size(kPalette)];
    for (const auto& p : payload.samples[d]) {
      s += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"{}\"/>\n", f.px(p.x),
                       f.py(p.y), colour);
    }
    for (const auto& p : pilot.samples[d]) {
      s += fmt::format(
          "<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"6\" height=\"6\" fill=\"none\" stroke=\"{}\"/>\n",
          f.px(p.x) - 3, f.py(p.y) - 3, colour);
    }
  }
  s += "</svg>\n";
  return s;
}

std::string rate_curve_svg(const ExperimentConfig& cfg, const ResultsTable& table) {
  double e0 = *std::min_element(cfg.ebn0_db.begin(), cfg.ebn0_db.end());
  double e1 = *std::max_element(cfg.ebn0_db.begin(), cfg.ebn0_db.end());
  if (!(e1 > e0)) { e0 -= 1; e1 += 1; }
  Frame2d f{e0, e1, 0.4, 1.0};
  std::string s = svg_open(f, "3-NN classification rate", "Eb/N0 (dB)", "accuracy");
  auto curve = [&](FingerprintSource src, int p, const char* colour, const std::string& name,
                   int slot) {
    std::string pts;
    for (double e : cfg.ebn0_db) {
      const auto& r = table.row(e, src, p);
      pts += fmt::format("{:.2f},{:.2f} ", f.px(e), f.py(r.acc_mean));
    }
    s += fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"{}/>\n",
                     pts, colour, src == FingerprintSource::pilot ? " stroke-dasharray=\"6 3\"" : "");
    s += fmt::format("<text x=\"{:g}\" y=\"{:g}\" fill=\"{}\">{}</text>\n", f.width - f.margin - 120,
                     f.height - f.margin - 16.0 * (slot + 1), colour, name);
  };
  int slot = 0;
  for (std::size_t i = 0; i < cfg.payload_counts.size(); ++i) {
    const int p = cfg.payload_counts[i];
    curve(FingerprintSource::payload, p, kPalette[i % std::size(kPalette)],
          fmt::format("payload p={}", p), slot++);
  }
  curve(FingerprintSource::pilot, 0, "black", "preamble", slot);
  s += "</svg>\n";
  return s;
}

std::vector<fs::path> emit_outputs(const ExperimentConfig& cfg, const SweepResult& sweep,
                                   const fs::path& out_dir) {
  fs::create_directories(out_dir);
  std::vector<fs::path> written;
  auto write = [&](const fs::path& name, const std::string& text) {
    const fs::path path = out_dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("emit_outputs: cannot write " + path.string());
    out << text;
    written.push_back(path);
  };
  write("results.csv", results_csv(sweep.table));
  if (!sweep.trials.empty() && !sweep.table.rows.empty()) {
    const auto& first = sweep.trials.front();
    for (double e : cfg.ebn0_db) {
      const auto& pilot = first.cell(e, FingerprintSource::pilot, 0);
      for (int p : cfg.payload_counts) {
        const auto& payload = first.cell(e, FingerprintSource::payload, p);
        write(fmt::format("scatter_ebn0_{}_p_{}.svg", format_ebn0(e), p),
              scatter_svg(payload, pilot,
                          fmt::format("b3 features, Eb/N0 {} dB, payload p={} vs preamble",
                                      format_ebn0(e), p)));
      }
    }
    write("rates.svg", rate_curve_svg(cfg, sweep.table));
  }
  return written;
}

}  // namespace rfflab
