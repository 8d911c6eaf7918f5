#pragma once

#include <limits>
#include <string>
#include <vector>

#include "rfflab/common.hpp"
#include "rfflab/ofdm.hpp"

namespace rfflab {

/// Static odd-order nonlinearity of a transmitter,
/// x0 = sum_p b_{2p-1} u |u|^{2(p-1)}, with b_1 = 1.
struct TransmitterProfile {
  std::string label;
  CVector coeffs;  // [b1, b3, ..., bP]

  int order() const noexcept { return 2 * static_cast<int>(coeffs.size()) - 1; }

  /// Throws ConfigError unless coeffs is non-empty and b1 == 1.
  void validate() const;
};

/// The two transmitters used in the reference experiments.
std::vector<TransmitterProfile> default_transmitters();

/// Combined linear channel: transmitter memory cascaded with multipath.
struct ChannelRealization {
  CVector taps;  // h_0 .. h_L

  int order() const noexcept { return static_cast<int>(taps.size()) - 1; }
  Index nonzero_taps() const;
};

/// Eb/N0 in dB. +infinity means noiseless.
struct NoiseSpec {
  double ebn0_db = std::numeric_limits<double>::infinity();

  static NoiseSpec noiseless() { return {}; }
  bool is_noiseless() const noexcept { return ebn0_db == std::numeric_limits<double>::infinity(); }
};

TimeSeries apply_static_nonlinearity(const TimeSeries& u, const TransmitterProfile& profile);

/// Causal FIR with zero initial history, truncated to the input length.
TimeSeries fir_filter(const TimeSeries& x, const ChannelRealization& ch);

/// Rayleigh multipath draw: tap 0 always occupied, n_paths - 1 further delays
/// drawn without replacement from 1..max_delay, i.i.d. circular Gaussian
/// gains, normalized to unit total power.
ChannelRealization draw_rayleigh_channel(Seed seed, int max_delay = 8, int n_paths = 5);

/// Per-sample complex noise variance for a received power `rx_power`:
/// rx_power (N + N_cp) / (2 N rho), rho = 10^(Eb/N0 / 10). The cyclic prefix
/// overhead is charged to the information bits (2 bits per subcarrier).
double awgn_variance(double rx_power, const NoiseSpec& noise, const FrameSpec& spec);

/// Adds circular complex Gaussian noise of the given per-sample variance.
TimeSeries add_noise(const TimeSeries& x, double variance, Seed seed);

/// Adds AWGN at noise.ebn0_db referenced to the mean power of x.
TimeSeries add_awgn(const TimeSeries& x, const NoiseSpec& noise, const FrameSpec& spec, Seed seed);

double mean_power(const TimeSeries& x);

/// Hammerstein transmitter + channel: add_awgn(fir_filter(nonlinearity(frame))).
TimeSeries transmit(const TimeSeries& frame, const TransmitterProfile& profile,
                    const ChannelRealization& ch, const NoiseSpec& noise, const FrameSpec& spec,
                    Seed seed);

}  // namespace rfflab
