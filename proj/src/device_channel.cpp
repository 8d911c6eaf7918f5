#include "rfflab/device_channel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace rfflab {

void TransmitterProfile::validate() const {
  if (coeffs.size() == 0) throw ConfigError("TransmitterProfile '" + label + "': no coefficients");
  if (std::abs(coeffs[0] - Complex(1.0, 0.0)) > 1e-12) {
    throw ConfigError("TransmitterProfile '" + label + "': b1 must equal 1");
  }
  for (Index i = 0; i < coeffs.size(); ++i) {
    if (!std::isfinite(coeffs[i].real()) || !std::isfinite(coeffs[i].imag())) {
      throw ConfigError("TransmitterProfile '" + label + "': non-finite coefficient");
    }
  }
}

std::vector<TransmitterProfile> default_transmitters() {
  TransmitterProfile tx1{"transmitter-1", CVector(4)};
  tx1.coeffs << Complex(1.0, 0.0), Complex(-0.0735, -0.0114), Complex(-0.0986, 0.0590),
      Complex(-0.0547, -0.0055);
  TransmitterProfile tx2{"transmitter-2", CVector(4)};
  tx2.coeffs << Complex(1.0, 0.0), Complex(-0.0910, 0.1580), Complex(0.2503, 0.0286),
      Complex(0.0155, 0.0025);
  return {tx1, tx2};
}

Index ChannelRealization::nonzero_taps() const {
  Index count = 0;
  for (Index i = 0; i < taps.size(); ++i) count += taps[i] != Complex(0.0, 0.0) ? 1 : 0;
  return count;
}

TimeSeries apply_static_nonlinearity(const TimeSeries& u, const TransmitterProfile& profile) {
  const auto& b = profile.coeffs;
  TimeSeries out(u.size());
  for (Index n = 0; n < u.size(); ++n) {
    const double mag2 = std::norm(u[n]);
    // Horner in |u|^2.
    Complex gain = b[b.size() - 1];
    for (Index p = b.size() - 2; p >= 0; --p) gain = gain * mag2 + b[p];
    out[n] = u[n] * gain;
  }
  return out;
}

TimeSeries fir_filter(const TimeSeries& x, const ChannelRealization& ch) {
  const auto& h = ch.taps;
  TimeSeries y = TimeSeries::Zero(x.size());
  for (Index l = 0; l < h.size(); ++l) {
    if (h[l] == Complex(0.0, 0.0) || l >= x.size()) continue;
    y.tail(x.size() - l) += h[l] * x.head(x.size() - l);
  }
  return y;
}

ChannelRealization draw_rayleigh_channel(Seed seed, int max_delay, int n_paths) {
  if (max_delay < 0 || n_paths < 1) {
    throw ConfigError("draw_rayleigh_channel: need max_delay >= 0 and n_paths >= 1");
  }
  if (n_paths > max_delay + 1) {
    throw ConfigError("draw_rayleigh_channel: n_paths (" + std::to_string(n_paths) +
                      ") exceeds max_delay + 1 (" + std::to_string(max_delay + 1) + ")");
  }
  std::mt19937_64 rng(seed);
  std::vector<int> delays(static_cast<std::size_t>(max_delay));
  std::iota(delays.begin(), delays.end(), 1);
  std::shuffle(delays.begin(), delays.end(), rng);
  delays.resize(static_cast<std::size_t>(n_paths - 1));
  delays.insert(delays.begin(), 0);
  std::sort(delays.begin(), delays.end());

  std::normal_distribution<double> gauss(0.0, M_SQRT1_2);
  ChannelRealization ch{CVector::Zero(max_delay + 1)};
  for (int d : delays) ch.taps[d] = Complex(gauss(rng), gauss(rng));
  ch.taps /= ch.taps.norm();
  return ch;
}

double awgn_variance(double rx_power, const NoiseSpec& noise, const FrameSpec& spec) {
  if (std::isnan(noise.ebn0_db) || noise.ebn0_db == -std::numeric_limits<double>::infinity()) {
    throw ConfigError("NoiseSpec: ebn0_db must be a real number or +inf");
  }
  if (noise.is_noiseless()) return 0.0;
  constexpr double kBitsPerSymbol = 2.0;
  const double rho = std::pow(10.0, noise.ebn0_db / 10.0);
  return rx_power * static_cast<double>(spec.symbol_len()) /
         (kBitsPerSymbol * static_cast<double>(spec.n_subcarriers) * rho);
}

TimeSeries add_noise(const TimeSeries& x, double variance, Seed seed) {
  if (variance <= 0.0) return x;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, std::sqrt(variance / 2.0));
  TimeSeries y(x.size());
  for (Index n = 0; n < x.size(); ++n) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    y[n] = x[n] + Complex(re, im);
  }
  return y;
}

double mean_power(const TimeSeries& x) {
  return x.size() == 0 ? 0.0 : x.squaredNorm() / static_cast<double>(x.size());
}

TimeSeries add_awgn(const TimeSeries& x, const NoiseSpec& noise, const FrameSpec& spec, Seed seed) {
  return add_noise(x, awgn_variance(mean_power(x), noise, spec), seed);
}

TimeSeries transmit(const TimeSeries& frame, const TransmitterProfile& profile,
                    const ChannelRealization& ch, const NoiseSpec& noise, const FrameSpec& spec,
                    Seed seed) {
  return add_awgn(fir_filter(apply_static_nonlinearity(frame, profile), ch), noise, spec, seed);
}

}  // namespace rfflab
