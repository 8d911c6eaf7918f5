#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include "rfflab/experiment.hpp"
#include "rfflab/io.hpp"
#include "rfflab/seeds.hpp"

namespace fs = std::filesystem;
using namespace rfflab;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
};

ExperimentConfig resolve_config(const Globals& g) {
  ExperimentConfig cfg = g.config.empty() ? ExperimentConfig{} : load_config(g.config);
  if (g.seed) cfg.master_seed = *g.seed;
  cfg.validate();
  return cfg;
}

int device_index(const ExperimentConfig& cfg, const std::string& name) {
  for (std::size_t i = 0; i < cfg.transmitters.size(); ++i) {
    if (cfg.transmitters[i].label == name) return static_cast<int>(i);
  }
  try {
    const int idx = std::stoi(name);
    if (idx >= 0 && idx < static_cast<int>(cfg.transmitters.size())) return idx;
  } catch (const std::exception&) {
  }
  throw ConfigError("unknown device '" + name + "'");
}

double parse_ebn0(const std::string& text) {
  if (text == "inf") return std::numeric_limits<double>::infinity();
  return std::stod(text);
}

int cmd_simulate(const Globals& g, const std::string& device, const std::string& ebn0, int p,
                 int trial, int frame) {
  const ExperimentConfig cfg = resolve_config(g);
  const int dev = device_index(cfg, device);
  const SimulatedFrame sim = simulate_frame(cfg, dev, parse_ebn0(ebn0), p, trial, frame);
  fs::create_directories(g.out);
  const fs::path iq = fs::path(g.out) / "frame.iq";
  write_iq_file(iq, sim.rx);

  nlohmann::json meta;
  meta["device_label"] = cfg.transmitters[static_cast<std::size_t>(dev)].label;
  meta["n_subcarriers"] = cfg.frame.n_subcarriers;
  meta["cp_len"] = cfg.frame.cp_len;
  meta["n_payload_symbols"] = p;
  meta["ebn0_db"] = ebn0 == "inf" ? nlohmann::json("inf") : nlohmann::json(parse_ebn0(ebn0));
  meta["samples"] = sim.rx.size();
  meta["frame_seed"] = sim.seeds.frame_seed;
  meta["channel_seed"] = sim.seeds.channel_seed;
  nlohmann::json taps = nlohmann::json::array();
  for (Index l = 0; l < sim.channel.taps.size(); ++l) {
    taps.push_back({sim.channel.taps[l].real(), sim.channel.taps[l].imag()});
  }
  meta["channel"] = taps;
  std::ofstream(fs::path(g.out) / "frame.json") << meta.dump(2) << '\n';
  fmt::print("{} ({} samples)\n", iq.string(), sim.rx.size());
  return 0;
}

int cmd_extract(const Globals& g, const std::vector<std::string>& files,
                const std::string& label, const std::string& ebn0) {
  const ExperimentConfig cfg = resolve_config(g);
  const Seed seed = g.seed.value_or(0);
  const double e = ebn0.empty() ? std::numeric_limits<double>::quiet_NaN() : parse_ebn0(ebn0);
  std::vector<FingerprintRecord> records;
  for (const auto& file : files) {
    const TimeSeries rx = read_iq_file(file);
    const Index sym = cfg.frame.symbol_len();
    if (rx.size() < 2 * sym || rx.size() % sym != 0) {
      throw InputSizeError(fmt::format("{}: {} samples is not a whole frame of {}-sample symbols",
                                       file, rx.size(), sym));
    }
    FrameSpec spec = cfg.frame;
    spec.n_payload_symbols = rx.size() / sym - 1;
    const FrameCapture cap = ingest_iq_capture(file, spec, default_pilot(spec));
    const PipelineResult res =
        process_capture(cap, cfg.basis(), cfg.combining == PayloadCombining::average);
    std::optional<std::string> dev;
    if (!label.empty()) dev = label;
    records.push_back({dev, FingerprintSource::payload, e, res.payload.b_hat, seed});
    records.push_back({dev, FingerprintSource::pilot, e, res.pilot.fingerprint.b_hat, seed});
  }
  fs::create_directories(g.out);
  const fs::path path = fs::path(g.out) / "fingerprints.jsonl";
  std::ofstream out(path, std::ios::app);
  write_fingerprints(out, records);
  fmt::print("{} records appended to {}\n", records.size(), path.string());
  return 0;
}

int cmd_classify(const Globals& g, const std::vector<std::string>& files) {
  const ExperimentConfig cfg = resolve_config(g);
  std::map<FingerprintSource, std::map<std::string, std::vector<LabeledFeature>>> by_source;
  for (const auto& file : files) {
    for (const auto& rec : read_fingerprints(file)) {
      if (!rec.device_label) continue;
      const auto f = feature_from_fingerprint(Fingerprint{rec.b_hat});
      by_source[rec.source][*rec.device_label].push_back({f.x, f.y, *rec.device_label});
    }
  }
  if (by_source.empty()) throw InputSizeError("classify: no labelled fingerprints");
  const Seed split = derive_seed(cfg.master_seed, {tag(Stream::split)});
  fmt::print("source,n_per_class,accuracy\n");
  for (auto& [source, classes] : by_source) {
    std::size_t n = std::numeric_limits<std::size_t>::max();
    for (const auto& [name, feats] : classes) n = std::min(n, feats.size());
    n -= n % 2;
    if (classes.size() < 2 || n < 2) {
      std::cerr << "skipping " << to_string(source) << ": need two labelled classes\n";
      continue;
    }
    SamplesByClass samples;
    for (auto& [name, feats] : classes) samples.emplace_back(feats.begin(), feats.begin() + static_cast<std::ptrdiff_t>(n));
    const int k = std::min<int>(cfg.k, static_cast<int>(n / 2 * samples.size()));
    fmt::print("{},{},{:.6f}\n", to_string(source), n, evaluate_split(samples, k, split));
  }
  return 0;
}

int cmd_sweep(const Globals& g, int trials, int threads, bool quiet) {
  ExperimentConfig cfg = resolve_config(g);
  if (trials > 0) cfg.n_trials = trials;
  if (threads >= 0) cfg.n_threads = threads;
  const auto sweep = run_sweep(cfg, [quiet](int done, int total) {
    if (!quiet) std::cerr << fmt::format("\rtrial {}/{}", done, total) << std::flush;
  });
  if (!quiet) std::cerr << '\n';
  const auto files = emit_outputs(cfg, sweep, g.out);
  std::cout << results_csv(sweep.table);
  std::cerr << fmt::format("{} files in {} ({:.1f} s)\n", files.size(), g.out, sweep.seconds);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hammerstein RF fingerprinting of QPSK-OFDM transmitters"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "JSON experiment configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "master seed (overrides the configuration)");
  app.add_option("--out", g.out, "output directory");

  auto* sim = app.add_subcommand("simulate", "simulate one frame into an IQ file");
  std::string device = "0";
  std::string ebn0 = "inf";
  int p = 1;
  int trial = 0;
  int frame = 0;
  sim->add_option("--device", device, "transmitter label or index");
  sim->add_option("--ebn0", ebn0, "Eb/N0 in dB, or inf");
  sim->add_option("--payload", p, "payload OFDM symbols")->check(CLI::PositiveNumber);
  sim->add_option("--trial", trial, "trial index");
  sim->add_option("--frame", frame, "frame index");

  auto* ext = app.add_subcommand("extract", "fingerprint IQ captures (JSON lines)");
  std::vector<std::string> iq_files;
  std::string label;
  std::string ext_ebn0;
  ext->add_option("files", iq_files, "IQ files")->required()->check(CLI::ExistingFile);
  ext->add_option("--label", label, "device label stored with every record");
  ext->add_option("--ebn0", ext_ebn0, "Eb/N0 stored with every record");

  auto* cls = app.add_subcommand("classify", "k-NN accuracy from fingerprint files");
  std::vector<std::string> fp_files;
  cls->add_option("files", fp_files, "JSON-lines fingerprint files")
      ->required()
      ->check(CLI::ExistingFile);

  auto* sw = app.add_subcommand("sweep", "full Monte Carlo sweep");
  int trials = 0;
  int threads = -1;
  bool quiet = false;
  sw->add_option("--trials", trials, "override the number of trials");
  sw->add_option("--threads", threads, "worker threads (0: all cores)");
  sw->add_flag("--quiet", quiet, "no progress output");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*sim) return cmd_simulate(g, device, ebn0, p, trial, frame);
    if (*ext) return cmd_extract(g, iq_files, label, ext_ebn0);
    if (*cls) return cmd_classify(g, fp_files);
    if (*sw) return cmd_sweep(g, trials, threads, quiet);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
