#include "rfflab/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "rfflab/fft.hpp"

namespace rfflab {

FrameCapture FrameCapture::from_frame(const TimeSeries& rx, const FdSymbolVector& pilot_fd,
                                      const FrameSpec& spec) {
  spec.validate();
  if (rx.size() != spec.frame_len()) {
    throw InputSizeError("FrameCapture: expected " + std::to_string(spec.frame_len()) +
                         " samples, found " + std::to_string(rx.size()));
  }
  if (pilot_fd.size() != spec.n_subcarriers) {
    throw InputSizeError("FrameCapture: pilot has " + std::to_string(pilot_fd.size()) +
                         " subcarriers, spec has " + std::to_string(spec.n_subcarriers));
  }
  const auto sym = spec.symbol_len();
  return FrameCapture{rx.head(sym), rx.tail(rx.size() - sym), pilot_fd, spec};
}

Index FrameCapture::n_payload_symbols() const { return payload_rx.size() / spec.symbol_len(); }

TimeSeries pilot_waveform(const FdSymbolVector& pilot_fd, const FrameSpec& spec) {
  return ofdm_modulate(pilot_fd, spec) * spec.drive_rms;
}

PilotEstimate estimate_from_pilot(const FrameCapture& cap, const BasisConfig& cfg) {
  if (cap.pilot_rx.size() != cap.spec.symbol_len()) {
    throw InputSizeError("estimate_from_pilot: pilot portion must hold one OFDM symbol");
  }
  Separation sep =
      separate(pilot_waveform(cap.pilot_fd, cap.spec), cap.pilot_rx, cfg, FingerprintSource::pilot);
  return PilotEstimate{std::move(sep.linear), std::move(sep.fingerprint)};
}

EqualizedPayload equalize_and_demod(const FrameCapture& cap, const LinearEstimate& h_hat) {
  const auto& spec = cap.spec;
  const Index n = spec.n_subcarriers;
  const Index sym = spec.symbol_len();
  if (cap.payload_rx.size() == 0 || cap.payload_rx.size() % sym != 0) {
    throw InputSizeError("equalize_and_demod: payload length " +
                         std::to_string(cap.payload_rx.size()) +
                         " is not a positive multiple of " + std::to_string(sym));
  }
  const CVector response = frequency_response(h_hat.h_hat, n);
  const double peak = response.cwiseAbs().maxCoeff();
  for (Index k = 0; k < n; ++k) {
    if (!(std::abs(response[k]) >= 1e-12 * peak) || peak == 0.0) {
      throw SpectralNullError("equalize_and_demod: channel estimate has a spectral null at bin " +
                                  std::to_string(k),
                              k);
    }
  }
  EqualizedPayload eq;
  const Index count = cap.payload_rx.size() / sym;
  for (Index j = 0; j < count; ++j) {
    const CVector bins = ofdm_demodulate(cap.payload_rx.segment(j * sym, sym), spec);
    CVector soft = bins.cwiseQuotient(response);
    eq.judged.push_back(qpsk_hard_decision(soft));
    eq.soft.push_back(std::move(soft));
  }
  return eq;
}

TimeSeries regenerate_reference(const EqualizedPayload& eq, const FrameSpec& spec) {
  if (eq.judged.empty()) throw InputSizeError("regenerate_reference: no payload symbols");
  const Index sym = spec.symbol_len();
  TimeSeries ref(sym * static_cast<Index>(eq.judged.size()));
  for (std::size_t j = 0; j < eq.judged.size(); ++j) {
    ref.segment(static_cast<Index>(j) * sym, sym) = ofdm_modulate(eq.judged[j], spec);
  }
  ref *= spec.drive_rms;
  return ref;
}

namespace {

TimeSeries pilot_history(const FrameCapture& cap, const BasisConfig& cfg) {
  const TimeSeries pilot = pilot_waveform(cap.pilot_fd, cap.spec);
  const Index len = std::min<Index>(cfg.n_taps - 1, pilot.size());
  return pilot.tail(len);
}

}  // namespace

Fingerprint extract_payload_fingerprint(const FrameCapture& cap, const EqualizedPayload& eq,
                                        const BasisConfig& cfg) {
  const TimeSeries reference = regenerate_reference(eq, cap.spec);
  if (reference.size() != cap.payload_rx.size()) {
    throw InputSizeError("extract_payload_fingerprint: reference and payload lengths differ");
  }
  return separate(reference, cap.payload_rx, cfg, FingerprintSource::payload,
                  pilot_history(cap, cfg))
      .fingerprint;
}

Fingerprint extract_payload_fingerprint_averaged(const FrameCapture& cap,
                                                 const EqualizedPayload& eq,
                                                 const BasisConfig& cfg) {
  const TimeSeries reference = regenerate_reference(eq, cap.spec);
  if (reference.size() != cap.payload_rx.size()) {
    throw InputSizeError("extract_payload_fingerprint: reference and payload lengths differ");
  }
  const Index sym = cap.spec.symbol_len();
  const Index hist_len = cfg.n_taps - 1;
  TimeSeries history = pilot_history(cap, cfg);
  CVector sum = CVector::Zero(cfg.n_basis());
  double cond = 0.0;
  const Index count = reference.size() / sym;
  for (Index j = 0; j < count; ++j) {
    const TimeSeries u = reference.segment(j * sym, sym);
    Fingerprint fp = separate(u, cap.payload_rx.segment(j * sym, sym), cfg,
                              FingerprintSource::payload, history)
                         .fingerprint;
    sum += fp.b_hat;
    cond = std::max(cond, fp.condition_number);
    history = u.tail(std::min<Index>(hist_len, sym));
  }
  return Fingerprint{sum / static_cast<double>(count), FingerprintSource::payload, cond};
}

Feature feature_from_fingerprint(const Fingerprint& fp) {
  if (fp.b_hat.size() < 2) {
    throw InputSizeError("feature_from_fingerprint: fingerprint needs at least two coefficients");
  }
  return Feature{fp.b_hat[1].real(), fp.b_hat[1].imag()};
}

void inject_symbol_errors(EqualizedPayload& eq, double fraction, Seed seed) {
  if (fraction < 0.0 || fraction > 1.0) {
    throw ConfigError("inject_symbol_errors: fraction must lie in [0, 1]");
  }
  std::vector<std::pair<std::size_t, Index>> slots;
  for (std::size_t j = 0; j < eq.judged.size(); ++j) {
    for (Index k = 0; k < eq.judged[j].size(); ++k) slots.emplace_back(j, k);
  }
  const auto flips = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(slots.size())));
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> turn(1, 3);
  for (std::size_t i = 0; i < flips; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, slots.size() - 1);
    std::swap(slots[i], slots[pick(rng)]);
    auto [j, k] = slots[i];
    // Rotation by a nonzero multiple of 90 degrees lands on another QPSK point.
    Complex& s = eq.judged[j][k];
    for (int r = turn(rng); r > 0; --r) s = Complex(-s.imag(), s.real());
  }
}

double symbol_error_rate(const EqualizedPayload& eq, const std::vector<FdSymbolVector>& truth) {
  if (truth.size() != eq.judged.size()) {
    throw InputSizeError("symbol_error_rate: symbol counts differ");
  }
  Index errors = 0;
  Index total = 0;
  for (std::size_t j = 0; j < truth.size(); ++j) {
    for (Index k = 0; k < truth[j].size(); ++k) {
      errors += std::abs(truth[j][k] - eq.judged[j][k]) > 1e-9 ? 1 : 0;
    }
    total += truth[j].size();
  }
  return total == 0 ? 0.0 : static_cast<double>(errors) / static_cast<double>(total);
}

PipelineResult process_capture(const FrameCapture& cap, const BasisConfig& cfg,
                               bool average_per_symbol) {
  PilotEstimate pilot = estimate_from_pilot(cap, cfg);
  EqualizedPayload eq = equalize_and_demod(cap, pilot.channel);
  Fingerprint payload = average_per_symbol ? extract_payload_fingerprint_averaged(cap, eq, cfg)
                                           : extract_payload_fingerprint(cap, eq, cfg);
  return PipelineResult{std::move(pilot), std::move(eq), std::move(payload)};
}

}  // namespace rfflab
