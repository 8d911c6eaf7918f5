// Acceptance suite: one PASS/FAIL line per criterion. Runs the full default
// Monte Carlo sweep, so expect it to take a while on few cores.

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "rfflab/experiment.hpp"
#include "rfflab/io.hpp"
#include "rfflab/seeds.hpp"

using namespace rfflab;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kInf = std::numeric_limits<double>::infinity();

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  int id;
  bool ok;
  std::string what;
};
std::vector<Verdict> verdicts;

void report(int id, bool ok, const std::string& what) {
  verdicts.push_back({id, ok, what});
  fmt::print(stderr, "  criterion {} done\n", id);
}

EqualizedPayload truth_payload(const SimulatedFrame& sim) {
  return EqualizedPayload{{sim.payload_fd.begin(), sim.payload_fd.end()}, sim.payload_fd};
}

void noiseless_recovery(const ExperimentConfig& cfg) {
  const auto t0 = Clock::now();
  const BasisConfig basis = cfg.basis();
  FrameSpec spec = cfg.frame;
  spec.n_payload_symbols = 1;
  double worst_u = 0.0;
  double worst_p = 0.0;
  for (std::size_t dev = 0; dev < cfg.transmitters.size(); ++dev) {
    const CVector& b = cfg.transmitters[dev].coeffs;
    for (int seed = 0; seed < 20; ++seed) {
      const auto sim = simulate_frame(cfg, static_cast<int>(dev), kInf, 1, 1000 + seed, 0);
      const auto cap = FrameCapture::from_frame(sim.rx, default_pilot(spec), spec);
      const auto pilot = estimate_from_pilot(cap, basis);
      const auto payload = extract_payload_fingerprint(cap, truth_payload(sim), basis);
      worst_p = std::max(worst_p, (pilot.fingerprint.b_hat - b).cwiseAbs().maxCoeff());
      worst_u = std::max(worst_u, (payload.b_hat - b).cwiseAbs().maxCoeff());
    }
  }
  const double secs = seconds_since(t0);
  report(1, worst_u < 1e-5 && worst_p < 1e-6 && secs < 10.0,
         fmt::format("noiseless recovery over 20 seeds x {} transmitters: max|b_u - b| = {:.2e} "
                     "(< 1e-5), max|b_p - b| = {:.2e} (< 1e-6), {:.2f} s (< 10 s)",
                     cfg.transmitters.size(), worst_u, worst_p, secs));
}

void structural_suite(const ExperimentConfig& cfg) {
  const auto t0 = Clock::now();
  FrameSpec spec = cfg.frame;
  const BasisConfig basis = cfg.basis();
  const auto sim = simulate_frame(cfg, 0, kInf, 1, 7, 0);
  const TimeSeries u = pilot_waveform(default_pilot(spec), spec);

  const OrthoTransform t = compute_ortho_transform(u, basis);
  const CMatrix q = basis_rows(u, basis.order) * t.u_matrix;
  const double ortho = (q.adjoint() * q - CMatrix::Identity(t.dim(), t.dim())).cwiseAbs().maxCoeff();

  const RegressionMatrix phi = build_regression_matrix(u, basis);
  const RegressionMatrix psi = orthogonal_regression_matrix(phi, t);
  const KronVector kv = estimate_kron_vector(psi, sim.rx.head(spec.symbol_len()));
  Eigen::JacobiSVD<CMatrix> svd(kv.reshaped());
  const double rank1 = svd.singularValues()[1] / svd.singularValues()[0];

  const CVector h = sim.channel.taps;
  const CVector& b = cfg.transmitters[1].coeffs;
  CVector hb(h.size() * b.size());
  CVector hbo(h.size() * b.size());
  const CVector bo = t.inverse() * b;
  for (Index l = 0; l < h.size(); ++l) {
    hb.segment(l * b.size(), b.size()) = h[l] * b;
    hbo.segment(l * b.size(), b.size()) = h[l] * bo;
  }
  const CVector lhs = phi.entries * hb;
  const double equiv = (lhs - psi.entries * hbo).norm() / lhs.norm();

  double roundtrip = 0.0;
  for (Seed s = 0; s < 8; ++s) {
    const auto fd = random_qpsk_symbol(spec, s);
    roundtrip = std::max(
        roundtrip, (ofdm_demodulate(ofdm_modulate(fd, spec), spec) - fd).cwiseAbs().maxCoeff());
  }

  ExperimentConfig small = cfg;
  small.payload_counts = {1, 2};
  small.ebn0_db = {0.0, 20.0};
  small.n_trials = 2;
  small.samples_per_device = 6;
  small.master_seed = 2024;
  const std::string csv_a = results_csv(run_sweep(small).table);
  const std::string csv_b = results_csv(run_sweep(small).table);
  const bool same = csv_a == csv_b;

  const double secs = seconds_since(t0);
  report(8,
         ortho < 1e-10 && rank1 < 1e-8 && equiv < 1e-10 && roundtrip < 1e-12 && same && secs < 5.0,
         fmt::format("structure: orthogonality {:.1e}, sigma2/sigma1 {:.1e}, representation {:.1e}, "
                     "round trip {:.1e}, identical CSV {}, {:.2f} s (< 5 s)",
                     ortho, rank1, equiv, roundtrip, same ? "yes" : "no", secs));
}

void error_monotonicity(const ExperimentConfig& cfg) {
  const BasisConfig basis = cfg.basis();
  FrameSpec spec = cfg.frame;
  spec.n_payload_symbols = 1;
  const double fractions[] = {0.0, 0.01, 0.05, 0.10};
  double err[4] = {};
  const int trials = 50;
  const double ebn0 = 10.0;
  for (int trial = 0; trial < trials; ++trial) {
    const int dev = trial % 2;
    const auto sim = simulate_frame(cfg, dev, ebn0, 1, 5000 + trial, 0);
    const auto cap = FrameCapture::from_frame(sim.rx, default_pilot(spec), spec);
    const auto pilot = estimate_from_pilot(cap, basis);
    EqualizedPayload base;
    try {
      base = equalize_and_demod(cap, pilot.channel);
    } catch (const SpectralNullError&) {
      continue;
    }
    const Complex b3 = cfg.transmitters[static_cast<std::size_t>(dev)].coeffs[1];
    for (int i = 0; i < 4; ++i) {
      EqualizedPayload eq = base;
      inject_symbol_errors(
          eq, fractions[i],
          derive_seed(sim.seeds.frame_seed, {tag(Stream::symbol_errors), static_cast<std::uint64_t>(i)}));
      err[i] += std::abs(extract_payload_fingerprint(cap, eq, basis).b_hat[1] - b3) / trials;
    }
  }
  report(9, err[0] < err[1] && err[1] < err[2] && err[2] < err[3],
         fmt::format("injected flips 0/1/5/10% at {} dB, p=1, {} trials: mean |b3_u - b3| = "
                     "{:.4f} / {:.4f} / {:.4f} / {:.4f} (strictly increasing)",
                     ebn0, trials, err[0], err[1], err[2], err[3]));
}

void sweep_criteria(const ExperimentConfig& cfg, const fs::path& out_dir) {
  fmt::print("running the full sweep: {} Eb/N0 x {} payload counts x {} trials x {} frames\n",
             cfg.ebn0_db.size(), cfg.payload_counts.size(), cfg.n_trials,
             cfg.samples_per_device * static_cast<int>(cfg.transmitters.size()));
  std::fflush(stdout);
  const auto sweep = run_sweep(cfg, [](int done, int total) {
    if (done % 10 == 0 || done == total) {
      fmt::print(stderr, "  trial {}/{}\n", done, total);
    }
  });
  emit_outputs(cfg, sweep, out_dir);
  fmt::print("results written to {}\n{}", (out_dir / "results.csv").string(),
             results_csv(sweep.table));

  const auto& table = sweep.table;
  auto acc = [&](double e, int p) { return table.row(e, FingerprintSource::payload, p); };
  auto pilot = [&](double e) { return table.row(e, FingerprintSource::pilot, 0); };

  const double a0 = acc(0.0, 8).acc_mean;
  report(2, std::abs(a0 - 0.80) <= 0.08,
         fmt::format("0 dB, p=8 payload accuracy {:.4f} (target 0.80 +/- 0.08)", a0));

  bool ok3 = true;
  std::string s3;
  for (double e : cfg.ebn0_db) {
    if (e < 10.0) continue;
    const double a = acc(e, 8).acc_mean;
    ok3 = ok3 && a >= 0.97;
    s3 += fmt::format(" {:g} dB: {:.4f}", e, a);
  }
  report(3, ok3, "p=8 payload accuracy >= 0.97 at >= 10 dB:" + s3);

  const double a20 = acc(20.0, 1).acc_mean;
  report(4, a20 >= 0.95, fmt::format("20 dB, p=1 payload accuracy {:.4f} (>= 0.95)", a20));

  bool ok5 = true;
  std::string s5;
  for (double e : cfg.ebn0_db) {
    const double base = pilot(e).acc_mean;
    for (int p : {2, 4, 8}) {
      if (acc(e, p).acc_mean < base - 0.02) {
        ok5 = false;
        s5 += fmt::format(" [{:g} dB p={} {:.4f} < preamble {:.4f} - 0.02]", e, p,
                          acc(e, p).acc_mean, base);
      }
    }
    for (std::size_t i = 0; i + 1 < cfg.payload_counts.size(); ++i) {
      const int p0 = cfg.payload_counts[i];
      const int p1 = cfg.payload_counts[i + 1];
      if (acc(e, p1).acc_mean < acc(e, p0).acc_mean - 0.02) {
        ok5 = false;
        s5 += fmt::format(" [{:g} dB p={} {:.4f} < p={} {:.4f} - 0.02]", e, p1, acc(e, p1).acc_mean,
                          p0, acc(e, p0).acc_mean);
      }
    }
  }
  const bool fast = sweep.seconds <= 1800.0;
  report(5, ok5 && fast,
         fmt::format("ordering vs preamble and in p{}; sweep {:.0f} s (<= 1800 s)",
                     ok5 ? " holds" : " violated:" + s5, sweep.seconds));

  bool ok6 = true;
  std::string s6;
  auto floor_check = [&](const ResultRow& r, const std::string& name) {
    const double se = r.acc_std / std::sqrt(static_cast<double>(r.n_trials));
    const bool ok = r.acc_mean > 0.5 + 3.0 * se;
    ok6 = ok6 && ok;
    s6 += fmt::format(" {} {:.4f} (> {:.4f})", name, r.acc_mean, 0.5 + 3.0 * se);
  };
  for (int p : cfg.payload_counts) floor_check(acc(0.0, p), fmt::format("p={}", p));
  floor_check(pilot(0.0), "preamble");
  report(6, ok6, "0 dB above chance:" + s6);

  const double sp = pilot(10.0).separability_mean;
  const double s1 = acc(10.0, 1).separability_mean;
  const double s8 = acc(10.0, 8).separability_mean;
  report(7, s1 < sp && s8 > sp,
         fmt::format("10 dB separability: p=1 {:.3f} < preamble {:.3f} < p=8 {:.3f}", s1, sp, s8));
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path out_dir = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_out");
  const ExperimentConfig cfg;
  cfg.validate();

  noiseless_recovery(cfg);
  structural_suite(cfg);
  error_monotonicity(cfg);
  sweep_criteria(cfg, out_dir);

  std::sort(verdicts.begin(), verdicts.end(),
            [](const Verdict& a, const Verdict& b) { return a.id < b.id; });
  int failures = 0;
  for (const auto& v : verdicts) {
    fmt::print("criterion {}: {}  {}\n", v.id, v.ok ? "PASS" : "FAIL", v.what);
    failures += v.ok ? 0 : 1;
  }
  fmt::print("{} of {} criteria failed\n", failures, verdicts.size());
  return failures == 0 ? 0 : 1;
}
