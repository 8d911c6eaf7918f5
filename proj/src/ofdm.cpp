#include "rfflab/ofdm.hpp"

#include <random>
#include <string>

#include "rfflab/fft.hpp"

namespace rfflab {

void FrameSpec::validate() const {
  if (n_subcarriers <= 0) throw ConfigError("FrameSpec: n_subcarriers must be positive");
  if (cp_len < 0 || cp_len >= n_subcarriers) {
    throw ConfigError("FrameSpec: cp_len must satisfy 0 <= cp_len < n_subcarriers");
  }
  if (n_pilot_symbols != 1) throw ConfigError("FrameSpec: block-type pilot requires one pilot symbol");
  if (n_payload_symbols <= 0) throw ConfigError("FrameSpec: n_payload_symbols must be positive");
  if (!(drive_rms > 0.0) || !std::isfinite(drive_rms)) {
    throw ConfigError("FrameSpec: drive_rms must be positive and finite");
  }
}

FdSymbolVector map_bits_to_qpsk(std::span<const std::uint8_t> bits, const FrameSpec& spec) {
  const auto n = spec.n_subcarriers;
  if (static_cast<Index>(bits.size()) != 2 * n) {
    throw InputSizeError("map_bits_to_qpsk: expected " + std::to_string(2 * n) + " bits, got " +
                         std::to_string(bits.size()));
  }
  FdSymbolVector out(n);
  for (Index k = 0; k < n; ++k) {
    const double im = bits[2 * k] ? -1.0 : 1.0;
    const double re = bits[2 * k + 1] ? -1.0 : 1.0;
    out[k] = Complex(re, im) * M_SQRT1_2;
  }
  return out;
}

FdSymbolVector qpsk_hard_decision(const CVector& noisy_fd) {
  FdSymbolVector out(noisy_fd.size());
  for (Index k = 0; k < noisy_fd.size(); ++k) {
    const double re = noisy_fd[k].real() < 0.0 ? -1.0 : 1.0;
    const double im = noisy_fd[k].imag() < 0.0 ? -1.0 : 1.0;
    out[k] = Complex(re, im) * M_SQRT1_2;
  }
  return out;
}

bool is_qpsk(const CVector& fd, double tol) {
  for (Index k = 0; k < fd.size(); ++k) {
    if (std::abs(std::abs(fd[k].real()) - M_SQRT1_2) > tol) return false;
    if (std::abs(std::abs(fd[k].imag()) - M_SQRT1_2) > tol) return false;
  }
  return true;
}

TimeSeries ofdm_modulate(const FdSymbolVector& fd, const FrameSpec& spec) {
  const auto n = spec.n_subcarriers;
  if (fd.size() != n) {
    throw InputSizeError("ofdm_modulate: expected " + std::to_string(n) + " subcarriers, got " +
                         std::to_string(fd.size()));
  }
  const CVector body = unitary_idft(fd);
  TimeSeries out(spec.symbol_len());
  out.head(spec.cp_len) = body.tail(spec.cp_len);
  out.tail(n) = body;
  return out;
}

CVector ofdm_demodulate(const TimeSeries& rx, const FrameSpec& spec) {
  if (rx.size() != spec.symbol_len()) {
    throw InputSizeError("ofdm_demodulate: expected " + std::to_string(spec.symbol_len()) +
                         " samples, got " + std::to_string(rx.size()));
  }
  return unitary_dft(rx.tail(spec.n_subcarriers));
}

TimeSeries build_frame(const FdSymbolVector& pilot, const std::vector<FdSymbolVector>& payloads,
                       const FrameSpec& spec) {
  if (payloads.empty() || static_cast<Index>(payloads.size()) != spec.n_payload_symbols) {
    throw InputSizeError("build_frame: expected " + std::to_string(spec.n_payload_symbols) +
                         " payload symbols, got " + std::to_string(payloads.size()));
  }
  const auto sym = spec.symbol_len();
  TimeSeries frame(sym * (1 + static_cast<Index>(payloads.size())));
  frame.head(sym) = ofdm_modulate(pilot, spec);
  for (std::size_t j = 0; j < payloads.size(); ++j) {
    frame.segment(sym * static_cast<Index>(j + 1), sym) = ofdm_modulate(payloads[j], spec);
  }
  frame *= spec.drive_rms;
  return frame;
}

std::vector<std::uint8_t> random_bits(Index count, Seed seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(count));
  std::uint64_t word = 0;
  for (Index i = 0; i < count; ++i) {
    if (i % 64 == 0) word = rng();
    bits[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>((word >> (i % 64)) & 1U);
  }
  return bits;
}

FdSymbolVector random_qpsk_symbol(const FrameSpec& spec, Seed seed) {
  return map_bits_to_qpsk(random_bits(2 * spec.n_subcarriers, seed), spec);
}

FdSymbolVector default_pilot(const FrameSpec& spec) { return random_qpsk_symbol(spec, kPilotSeed); }

}  // namespace rfflab
