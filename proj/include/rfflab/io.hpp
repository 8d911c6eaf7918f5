#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rfflab/common.hpp"
#include "rfflab/experiment.hpp"
#include "rfflab/pipeline.hpp"
#include "rfflab/separation.hpp"

namespace rfflab {

// Raw IQ: interleaved I, Q as little-endian IEEE float32, no header.

void write_iq_file(const std::filesystem::path& path, const TimeSeries& samples);
TimeSeries read_iq_file(const std::filesystem::path& path);

/// Reads a frame of spec.frame_len() complex samples and splits it. A file of
/// the wrong size raises InputSizeError naming expected and found counts.
FrameCapture ingest_iq_capture(const std::filesystem::path& path, const FrameSpec& spec,
                               const FdSymbolVector& pilot_fd);

/// One JSON-lines fingerprint record.
struct FingerprintRecord {
  std::optional<std::string> device_label;
  FingerprintSource source = FingerprintSource::payload;
  double ebn0_db = 0.0;
  CVector b_hat;
  Seed seed = 0;
};

nlohmann::json to_json(const FingerprintRecord& rec);
FingerprintRecord fingerprint_record_from_json(const nlohmann::json& j);
void write_fingerprints(std::ostream& out, const std::vector<FingerprintRecord>& records);
std::vector<FingerprintRecord> read_fingerprints(const std::filesystem::path& path);

/// Experiment configuration as JSON. Missing keys keep their defaults.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::filesystem::path& path);

inline constexpr const char* kResultsCsvHeader = "ebn0_db,p,source,acc_mean,acc_std,n_trials,skips";

/// Results CSV; pilot rows carry p = 0. Output is a pure function of the
/// table, so identical runs give identical bytes.
std::string results_csv(const ResultsTable& table);

/// Feature scatter (pilot and payload p, all devices) as SVG.
std::string scatter_svg(const CellResult& payload, const CellResult& pilot, const std::string& title);

/// Accuracy-vs-Eb/N0 curves for every payload count and the pilot baseline.
std::string rate_curve_svg(const ExperimentConfig& cfg, const ResultsTable& table);

/// Writes results.csv, scatter_ebn0_<e>_p_<p>.svg for every grid cell (from
/// the first trial) and rates.svg into `out_dir`. Returns the written paths.
std::vector<std::filesystem::path> emit_outputs(const ExperimentConfig& cfg,
                                                const SweepResult& sweep,
                                                const std::filesystem::path& out_dir);

}  // namespace rfflab
