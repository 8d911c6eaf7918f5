#include "rfflab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <numeric>
#include <thread>

#include "rfflab/seeds.hpp"

namespace rfflab {
namespace {

constexpr int kMaxAttempts = 16;
// Above this cond(Psi) the structured normal equations hand over to QR.
constexpr double kNormalEquationCondLimit = 1e3;

FrameSpec spec_with_payload(const ExperimentConfig& cfg, int n_payload) {
  FrameSpec spec = cfg.frame;
  spec.n_payload_symbols = n_payload;
  return spec;
}

TrialRecord make_record(const ExperimentConfig& cfg, int device, int trial, int frame,
                        double ebn0_db, int p, Fingerprint fp, const SeedTrail& seeds) {
  TrialRecord r;
  r.device = cfg.transmitters[static_cast<std::size_t>(device)].label;
  r.trial = trial;
  r.frame = frame;
  r.ebn0_db = ebn0_db;
  r.p = p;
  r.source = fp.source;
  r.feature = feature_from_fingerprint(fp);
  r.fingerprint = std::move(fp);
  r.seeds = seeds;
  r.skipped = seeds.attempt > 0;
  return r;
}

// LS for h given b°, with the collapsed regressor s = rows * b° built from
// the basis rows (history included) instead of the full Psi.
LinearEstimate collapsed_channel(const CMatrix& rows, int n_taps, const Fingerprint& fp,
                                 const OrthoTransform& t, const TimeSeries& d) {
  const CVector b_orth = t.u_matrix.triangularView<Eigen::Upper>().solve(fp.b_hat);
  const CVector s = rows * b_orth;
  const Index hist = n_taps - 1;
  const Index m = d.size();
  CMatrix collapsed(m, n_taps);
  for (int l = 0; l < n_taps; ++l) collapsed.col(l) = s.segment(hist - l, m);
  return LinearEstimate{ls_solve(collapsed, d)};
}

}  // namespace

int ExperimentConfig::max_payload() const {
  return payload_counts.empty() ? 0 : *std::max_element(payload_counts.begin(), payload_counts.end());
}

void ExperimentConfig::validate() const {
  FrameSpec probe = frame;
  probe.n_payload_symbols = 1;
  probe.validate();
  basis().validate();
  if (payload_counts.empty()) throw ConfigError("config: payload_counts must not be empty");
  for (int p : payload_counts) {
    if (p <= 0) throw ConfigError("config: payload counts must be positive");
  }
  if (ebn0_db.empty()) throw ConfigError("config: ebn0_db must not be empty");
  for (double e : ebn0_db) {
    if (!std::isfinite(e) && e != std::numeric_limits<double>::infinity()) {
      throw ConfigError("config: ebn0_db entries must be finite or +inf");
    }
  }
  if (n_trials <= 0) throw ConfigError("config: n_trials must be positive");
  if (samples_per_device < 2 || samples_per_device % 2 != 0) {
    throw ConfigError("config: samples_per_device must be a positive even number");
  }
  if (k < 1 || k > samples_per_device / 2 * static_cast<int>(transmitters.size())) {
    throw ConfigError("config: k out of range");
  }
  if (transmitters.size() < 2) throw ConfigError("config: need at least two transmitters");
  for (const auto& t : transmitters) {
    t.validate();
    if (t.order() != poly_order) {
      throw ConfigError("config: transmitter '" + t.label + "' has order " +
                        std::to_string(t.order()) + ", estimator order is " +
                        std::to_string(poly_order));
    }
  }
  if (n_paths < 1 || n_paths > max_delay + 1) {
    throw ConfigError("config: n_paths must lie in [1, max_delay + 1]");
  }
  if (n_threads < 0) throw ConfigError("config: n_threads must be >= 0");
}

SimulatedFrame simulate_frame(const ExperimentConfig& cfg, int device, double ebn0_db,
                              int n_payload, int trial, int frame, int attempt) {
  const FrameSpec spec = spec_with_payload(cfg, n_payload);
  const auto& profile = cfg.transmitters.at(static_cast<std::size_t>(device));
  const auto t = static_cast<std::uint64_t>(trial);
  const auto dev = static_cast<std::uint64_t>(device);
  const auto att = static_cast<std::uint64_t>(attempt);

  SimulatedFrame out;
  out.seeds.attempt = attempt;
  out.seeds.frame_seed =
      derive_seed(cfg.master_seed, {t, dev, static_cast<std::uint64_t>(frame), att});
  out.seeds.channel_seed =
      cfg.channel_mode == ChannelMode::per_sample
          ? derive_seed(out.seeds.frame_seed, {tag(Stream::channel)})
          : derive_seed(cfg.master_seed, {t, dev, att, tag(Stream::channel)});
  out.channel = draw_rayleigh_channel(out.seeds.channel_seed, cfg.max_delay, cfg.n_paths);

  for (int j = 0; j < n_payload; ++j) {
    out.payload_fd.push_back(random_qpsk_symbol(
        spec, derive_seed(out.seeds.frame_seed,
                          {tag(Stream::payload_bits), static_cast<std::uint64_t>(j)})));
  }
  const TimeSeries wave = build_frame(default_pilot(spec), out.payload_fd, spec);
  const TimeSeries clean = fir_filter(apply_static_nonlinearity(wave, profile), out.channel);

  const Index sym = spec.symbol_len();
  const double variance = awgn_variance(mean_power(clean.head(sym)), NoiseSpec{ebn0_db}, spec);
  out.rx.resize(clean.size());
  for (int s = 0; s <= n_payload; ++s) {
    const Seed noise_seed =
        derive_seed(out.seeds.frame_seed, {tag(Stream::noise), static_cast<std::uint64_t>(s)});
    out.rx.segment(s * sym, sym) = add_noise(clean.segment(s * sym, sym), variance, noise_seed);
  }
  return out;
}

FrameSample run_frame_sample(const ExperimentConfig& cfg, int device, double ebn0_db, int p,
                             int trial, int frame) {
  const FrameSpec spec = spec_with_payload(cfg, p);
  const BasisConfig basis = cfg.basis();
  const FdSymbolVector pilot = default_pilot(spec);
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const SimulatedFrame sim = simulate_frame(cfg, device, ebn0_db, p, trial, frame, attempt);
    const FrameCapture cap = FrameCapture::from_frame(sim.rx, pilot, spec);
    try {
      PipelineResult res =
          process_capture(cap, basis, cfg.combining == PayloadCombining::average);
      FrameSample out;
      out.skipped = attempt;
      out.payload =
          make_record(cfg, device, trial, frame, ebn0_db, p, std::move(res.payload), sim.seeds);
      out.pilot = make_record(cfg, device, trial, frame, ebn0_db, 0,
                              std::move(res.pilot.fingerprint), sim.seeds);
      return out;
    } catch (const SpectralNullError&) {
      continue;
    }
  }
  throw Error("run_frame_sample: every redraw hit a spectral null");
}

SweepContext SweepContext::make(const ExperimentConfig& cfg) {
  const FrameSpec spec = spec_with_payload(cfg, 1);
  const BasisConfig basis = cfg.basis();
  SweepContext ctx;
  ctx.pilot_fd = default_pilot(spec);
  ctx.pilot_wave = pilot_waveform(ctx.pilot_fd, spec);
  ctx.pilot_transform = compute_ortho_transform(ctx.pilot_wave, basis);
  ctx.pilot_rows = orthogonal_basis_rows(ctx.pilot_wave, TimeSeries::Zero(basis.n_taps - 1),
                                         basis.order, ctx.pilot_transform);
  return ctx;
}

FrameGroup run_frame_group(const ExperimentConfig& cfg, const SweepContext& ctx, int device,
                           double ebn0_db, int trial, int frame) {
  const int pmax = cfg.max_payload();
  const FrameSpec spec = spec_with_payload(cfg, pmax);
  const BasisConfig basis = cfg.basis();
  const int taps = basis.n_taps;
  const Index hist = taps - 1;
  const Index sym = spec.symbol_len();

  std::vector<int> counts = cfg.payload_counts;
  std::sort(counts.begin(), counts.end());
  counts.erase(std::unique(counts.begin(), counts.end()), counts.end());

  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const SimulatedFrame sim = simulate_frame(cfg, device, ebn0_db, pmax, trial, frame, attempt);
    const FrameCapture cap = FrameCapture::from_frame(sim.rx, ctx.pilot_fd, spec);

    // Stage 1: pilot.
    PilotEstimate pilot;
    DelayedBlockNormalEquations pilot_ne(ctx.pilot_rows, taps);
    pilot_ne.accumulate(0, sym, cap.pilot_rx);
    const double pilot_cond = pilot_ne.condition_number();
    if (pilot_cond > kNormalEquationCondLimit) {
      pilot = estimate_from_pilot(cap, basis);
    } else {
      KronVector kv{pilot_ne.solve(), taps, basis.n_basis()};
      pilot.fingerprint = separate_nonlinear(kv, ctx.pilot_transform, FingerprintSource::pilot);
      pilot.fingerprint.condition_number = pilot_cond;
      pilot.channel = collapsed_channel(ctx.pilot_rows, taps, pilot.fingerprint,
                                        ctx.pilot_transform, cap.pilot_rx);
    }

    EqualizedPayload eq;
    try {
      eq = equalize_and_demod(cap, pilot.channel);
    } catch (const SpectralNullError&) {
      continue;
    }

    // Stage 2: payload, every p from one incremental accumulation.
    std::vector<std::pair<int, Fingerprint>> by_count;
    const TimeSeries reference = regenerate_reference(eq, spec);
    const TimeSeries history = ctx.pilot_wave.tail(hist);
    if (cfg.combining == PayloadCombining::average) {
      for (int p : counts) {
        FrameSpec sub = spec_with_payload(cfg, p);
        FrameCapture sub_cap{cap.pilot_rx, cap.payload_rx.head(p * sym), cap.pilot_fd, sub};
        EqualizedPayload sub_eq{{eq.soft.begin(), eq.soft.begin() + p},
                                {eq.judged.begin(), eq.judged.begin() + p}};
        by_count.emplace_back(p, extract_payload_fingerprint_averaged(sub_cap, sub_eq, basis));
      }
    } else {
      const OrthoTransform u_t = compute_ortho_transform(reference.head(sym), basis);
      DelayedBlockNormalEquations ne(
          orthogonal_basis_rows(reference, history, basis.order, u_t), taps);
      Index done = 0;
      for (int p : counts) {
        ne.accumulate(done, p * sym, cap.payload_rx);
        done = p * sym;
        const double cond = ne.condition_number();
        Fingerprint fp;
        if (cond > kNormalEquationCondLimit) {
          fp = separate(reference.head(done), cap.payload_rx.head(done), basis,
                        FingerprintSource::payload, history)
                   .fingerprint;
        } else {
          fp = separate_nonlinear(KronVector{ne.solve(), taps, basis.n_basis()}, u_t,
                                  FingerprintSource::payload);
          fp.condition_number = cond;
        }
        by_count.emplace_back(p, std::move(fp));
      }
    }

    FrameGroup group;
    group.skipped = attempt;
    group.pilot = make_record(cfg, device, trial, frame, ebn0_db, 0,
                              std::move(pilot.fingerprint), sim.seeds);
    for (int p : cfg.payload_counts) {
      auto it = std::find_if(by_count.begin(), by_count.end(),
                             [p](const auto& e) { return e.first == p; });
      group.payload.push_back(
          make_record(cfg, device, trial, frame, ebn0_db, p, it->second, sim.seeds));
    }
    return group;
  }
  throw Error("run_frame_group: every redraw hit a spectral null");
}

const CellResult& TrialResult::cell(double ebn0_db, FingerprintSource source, int p) const {
  for (const auto& c : cells) {
    if (c.ebn0_db == ebn0_db && c.source == source &&
        (source == FingerprintSource::pilot || c.p == p)) {
      return c;
    }
  }
  throw ConfigError("TrialResult: no such cell");
}

const ResultRow& ResultsTable::row(double ebn0_db, FingerprintSource source, int p) const {
  for (const auto& r : rows) {
    if (r.ebn0_db == ebn0_db && r.source == source &&
        (source == FingerprintSource::pilot || r.p == p)) {
      return r;
    }
  }
  throw ConfigError("ResultsTable: no such row");
}

TrialResult run_trial(const ExperimentConfig& cfg, const SweepContext& ctx, int trial) {
  const std::size_t n_dev = cfg.transmitters.size();
  const std::size_t n_p = cfg.payload_counts.size();
  TrialResult result;
  result.trial = trial;
  const Seed split_seed =
      derive_seed(cfg.master_seed, {static_cast<std::uint64_t>(trial), tag(Stream::split)});

  for (double ebn0 : cfg.ebn0_db) {
    // Cells: payload counts in config order, then the pilot baseline.
    std::vector<CellResult> cells(n_p + 1);
    for (std::size_t c = 0; c <= n_p; ++c) {
      cells[c].ebn0_db = ebn0;
      cells[c].p = c < n_p ? cfg.payload_counts[c] : 0;
      cells[c].source = c < n_p ? FingerprintSource::payload : FingerprintSource::pilot;
      cells[c].samples.resize(n_dev);
    }
    for (std::size_t d = 0; d < n_dev; ++d) {
      for (int f = 0; f < cfg.samples_per_device; ++f) {
        FrameGroup g = run_frame_group(cfg, ctx, static_cast<int>(d), ebn0, trial, f);
        for (std::size_t c = 0; c <= n_p; ++c) {
          const TrialRecord& r = c < n_p ? g.payload[c] : g.pilot;
          cells[c].samples[d].push_back(LabeledFeature{r.feature.x, r.feature.y, r.device});
          cells[c].skips += g.skipped;
        }
      }
    }
    for (auto& cell : cells) {
      cell.accuracy = evaluate_split(cell.samples, cfg.k, split_seed);
      cell.separability = separability_ratio(cell.samples[0], cell.samples[1]);
      result.cells.push_back(std::move(cell));
    }
  }
  return result;
}

ResultsTable aggregate(const std::vector<TrialResult>& trials) {
  ResultsTable table;
  if (trials.empty()) return table;
  const std::size_t n_cells = trials.front().cells.size();
  for (std::size_t c = 0; c < n_cells; ++c) {
    ResultRow row;
    const auto& first = trials.front().cells[c];
    row.ebn0_db = first.ebn0_db;
    row.p = first.p;
    row.source = first.source;
    row.n_trials = static_cast<int>(trials.size());
    double sum = 0.0;
    double sep = 0.0;
    for (const auto& t : trials) {
      sum += t.cells[c].accuracy;
      sep += t.cells[c].separability;
      row.skips += t.cells[c].skips;
    }
    row.acc_mean = sum / static_cast<double>(trials.size());
    row.separability_mean = sep / static_cast<double>(trials.size());
    double ss = 0.0;
    for (const auto& t : trials) ss += std::pow(t.cells[c].accuracy - row.acc_mean, 2);
    row.acc_std = trials.size() > 1 ? std::sqrt(ss / static_cast<double>(trials.size() - 1)) : 0.0;
    table.rows.push_back(row);
  }
  return table;
}

SweepResult run_sweep(const ExperimentConfig& cfg, const ProgressFn& progress) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const SweepContext ctx = SweepContext::make(cfg);
  SweepResult result;
  result.trials.resize(static_cast<std::size_t>(cfg.n_trials));

  unsigned workers = cfg.n_threads > 0 ? static_cast<unsigned>(cfg.n_threads)
                                       : std::max(1U, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(cfg.n_trials));

  std::atomic<int> next{0};
  std::atomic<int> done{0};
  std::mutex progress_mutex;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (int t = next++; t < cfg.n_trials; t = next++) {
      try {
        result.trials[static_cast<std::size_t>(t)] = run_trial(cfg, ctx, t);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = cfg.n_trials;
        return;
      }
      const int finished = ++done;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(finished, cfg.n_trials);
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);

  result.table = aggregate(result.trials);
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace rfflab
