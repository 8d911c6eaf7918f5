#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "rfflab/common.hpp"

namespace rfflab {

/// OFDM dimensioning for a block-pilot frame: one pilot symbol followed by
/// `n_payload_symbols` payload symbols, each N subcarriers plus a cyclic
/// prefix of `cp_len` samples.
struct FrameSpec {
  Index n_subcarriers = 2048;
  Index cp_len = 512;
  Index n_pilot_symbols = 1;
  Index n_payload_symbols = 1;
  // RMS amplitude of the transmitted time-domain waveform. The modulator is
  // unitary; frames and regenerated references are scaled by this value so
  // the transmitter nonlinearity sees a fixed, known drive level.
  double drive_rms = 1.0;

  Index symbol_len() const noexcept { return n_subcarriers + cp_len; }
  Index frame_len() const noexcept {
    return (n_pilot_symbols + n_payload_symbols) * symbol_len();
  }

  /// Throws ConfigError when the dimensions are inconsistent.
  void validate() const;
};

/// Seed of the fixed pseudorandom pilot symbol shared by transmitter and
/// receiver.
inline constexpr Seed kPilotSeed = 0x50494C4F54ULL;  // "PILOT"


/// Gray QPSK, two bits per subcarrier:
/// 00 -> (+1+i)/sqrt2, 01 -> (-1+i)/sqrt2, 11 -> (-1-i)/sqrt2, 10 -> (+1-i)/sqrt2.
FdSymbolVector map_bits_to_qpsk(std::span<const std::uint8_t> bits, const FrameSpec& spec);

/// Nearest QPSK point per element; a zero component decides as +1.
FdSymbolVector qpsk_hard_decision(const CVector& noisy_fd);

/// True when every element is one of the four unit-power QPSK points.
bool is_qpsk(const CVector& fd, double tol = 1e-12);

/// Unitary IDFT followed by a cyclic prefix of spec.cp_len samples.
TimeSeries ofdm_modulate(const FdSymbolVector& fd, const FrameSpec& spec);

/// Strips the cyclic prefix of one received symbol and applies the
/// unitary DFT.
CVector ofdm_demodulate(const TimeSeries& rx, const FrameSpec& spec);

/// Modulated pilot followed by the modulated payload symbols, scaled by
/// spec.drive_rms. Length (1 + p)(N + N_cp).
TimeSeries build_frame(const FdSymbolVector& pilot, const std::vector<FdSymbolVector>& payloads,
                       const FrameSpec& spec);

/// Uniform random bits, deterministic in `seed`.
std::vector<std::uint8_t> random_bits(Index count, Seed seed);

/// Random QPSK symbol vector of spec.n_subcarriers entries.
FdSymbolVector random_qpsk_symbol(const FrameSpec& spec, Seed seed);

/// The pilot symbol used by every simulated and ingested frame.
FdSymbolVector default_pilot(const FrameSpec& spec);

}  // namespace rfflab
