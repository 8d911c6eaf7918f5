#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rfflab/classifier.hpp"
#include "rfflab/common.hpp"
#include "rfflab/device_channel.hpp"
#include "rfflab/ofdm.hpp"
#include "rfflab/pipeline.hpp"
#include "rfflab/poly_basis.hpp"

namespace rfflab {

enum class ChannelMode { per_sample, per_trial };
enum class PayloadCombining { concatenate, average };

/// Monte Carlo experiment definition. Defaults reproduce the reference
/// two-transmitter study.
struct ExperimentConfig {
  FrameSpec frame{2048, 512, 1, 1, 0.5};
  int poly_order = 7;
  std::vector<int> payload_counts{1, 2, 4, 8};
  std::vector<double> ebn0_db{0.0, 5.0, 10.0, 15.0, 20.0};
  int n_trials = 100;
  int samples_per_device = 66;
  int k = 3;
  int max_delay = 8;
  int n_paths = 5;
  std::vector<TransmitterProfile> transmitters = default_transmitters();
  Seed master_seed = 1;
  ChannelMode channel_mode = ChannelMode::per_sample;
  PayloadCombining combining = PayloadCombining::concatenate;
  int n_threads = 0;  // 0: hardware concurrency

  BasisConfig basis() const { return BasisConfig{poly_order, max_delay + 1}; }
  int max_payload() const;
  void validate() const;
};

/// Everything needed to reproduce one frame sample.
struct SeedTrail {
  Seed frame_seed = 0;  // derived from (master, trial, device, frame, attempt)
  Seed channel_seed = 0;
  int attempt = 0;
};

struct TrialRecord {
  std::string device;
  int trial = 0;
  int frame = 0;
  double ebn0_db = 0.0;
  int p = 0;  // payload symbols; 0 on pilot records
  FingerprintSource source = FingerprintSource::payload;
  Feature feature;
  Fingerprint fingerprint;
  SeedTrail seeds;
  bool skipped = false;  // an earlier draw hit a spectral null and was replaced
};

/// Noisy received frame plus the ground truth it was built from.
struct SimulatedFrame {
  TimeSeries rx;
  std::vector<FdSymbolVector> payload_fd;
  ChannelRealization channel;
  SeedTrail seeds;
};

/// Builds and transmits one frame of `n_payload` symbols. Payload bits and
/// noise are drawn per OFDM symbol from seeds that do not depend on
/// n_payload, and the noise variance is referenced to the received pilot
/// symbol, so a shorter frame is an exact prefix of a longer one.
SimulatedFrame simulate_frame(const ExperimentConfig& cfg, int device, double ebn0_db,
                              int n_payload, int trial, int frame, int attempt = 0);

struct FrameSample {
  TrialRecord payload;
  TrialRecord pilot;
  int skipped = 0;  // spectral-null redraws
};

/// One frame through the full QR-based pipeline.
FrameSample run_frame_sample(const ExperimentConfig& cfg, int device, double ebn0_db, int p,
                             int trial, int frame);

/// Shared pilot-side quantities (fixed pilot waveform and its transform).
struct SweepContext {
  FdSymbolVector pilot_fd;
  TimeSeries pilot_wave;
  OrthoTransform pilot_transform;
  CMatrix pilot_rows;  // orthogonal basis rows with L zero-history rows

  static SweepContext make(const ExperimentConfig& cfg);
};

struct FrameGroup {
  TrialRecord pilot;
  std::vector<TrialRecord> payload;  // one per cfg.payload_counts entry
  int skipped = 0;
};

/// All payload counts of one (device, ebn0, trial, frame) cell from a single
/// frame of max(p) payload symbols, solved incrementally with structured
/// normal equations. Matches run_frame_sample for every p.
FrameGroup run_frame_group(const ExperimentConfig& cfg, const SweepContext& ctx, int device,
                           double ebn0_db, int trial, int frame);

struct CellResult {
  double ebn0_db = 0.0;
  int p = 0;
  FingerprintSource source = FingerprintSource::payload;
  SamplesByClass samples;
  double accuracy = 0.0;
  double separability = 0.0;
  int skips = 0;
};

struct TrialResult {
  int trial = 0;
  std::vector<CellResult> cells;  // ordered as ResultsTable rows

  const CellResult& cell(double ebn0_db, FingerprintSource source, int p) const;
};

TrialResult run_trial(const ExperimentConfig& cfg, const SweepContext& ctx, int trial);

struct ResultRow {
  double ebn0_db = 0.0;
  int p = 0;
  FingerprintSource source = FingerprintSource::payload;
  double acc_mean = 0.0;
  double acc_std = 0.0;
  int n_trials = 0;
  int skips = 0;
  double separability_mean = 0.0;  // not part of the CSV schema
};

struct ResultsTable {
  std::vector<ResultRow> rows;

  const ResultRow& row(double ebn0_db, FingerprintSource source, int p) const;
};

struct SweepResult {
  ResultsTable table;
  std::vector<TrialResult> trials;
  double seconds = 0.0;
};

using ProgressFn = std::function<void(int done, int total)>;

/// Runs every trial (concurrently when n_threads != 1) and aggregates.
SweepResult run_sweep(const ExperimentConfig& cfg, const ProgressFn& progress = {});

ResultsTable aggregate(const std::vector<TrialResult>& trials);

}  // namespace rfflab
