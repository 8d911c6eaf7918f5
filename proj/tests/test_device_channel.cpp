#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "rfflab/device_channel.hpp"
#include "rfflab/ofdm.hpp"

using namespace rfflab;

namespace {

std::vector<Complex> coeffs_of(const TransmitterProfile& t) {
  return {t.coeffs.data(), t.coeffs.data() + t.coeffs.size()};
}

TimeSeries ofdm_frame(Seed seed, double drive = 0.5) {
  FrameSpec spec;
  spec.drive_rms = drive;
  return build_frame(default_pilot(spec), {random_qpsk_symbol(spec, seed)}, spec);
}

}  // namespace

TEST_CASE("identity profile passes the input through") {
  TransmitterProfile lin{"linear", CVector::Zero(4)};
  lin.coeffs[0] = 1.0;
  const auto u = ofdm_frame(1);
  CHECK((apply_static_nonlinearity(u, lin) - u).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("table transmitters at u = 1") {
  const auto tx = default_transmitters();
  REQUIRE(tx.size() == 2);
  TimeSeries one(1);
  one[0] = 1.0;
  const Complex y1 = apply_static_nonlinearity(one, tx[0])[0];
  const Complex y2 = apply_static_nonlinearity(one, tx[1])[0];
  // Hand sums of the coefficient columns.
  CHECK(std::abs(y1 - Complex(1.0 - 0.0735 - 0.0986 - 0.0547, -0.0114 + 0.0590 - 0.0055)) < 1e-12);
  CHECK(std::abs(y2 - Complex(1.0 - 0.0910 + 0.2503 + 0.0155, 0.1580 + 0.0286 + 0.0025)) < 1e-12);
  CHECK(std::abs(y1 - Complex(0.7732, 0.0421)) < 1e-12);
  CHECK(std::abs(y2 - Complex(1.1748, 0.1891)) < 1e-12);
}

TEST_CASE("nonlinearity matches direct evaluation") {
  const auto tx = default_transmitters();
  const auto u = ofdm_frame(4, 0.7);
  for (const auto& t : tx) {
    const auto y = apply_static_nonlinearity(u, t);
    double worst = 0.0;
    for (Index n = 0; n < u.size(); ++n) {
      worst = std::max(worst, std::abs(y[n] - oracle::polynomial(u[n], coeffs_of(t))));
    }
    CHECK(worst < 1e-13);
  }
}

TEST_CASE("constant envelope input collapses to a scalar gain") {
  const auto tx = default_transmitters()[0];
  TimeSeries u(8);
  for (Index n = 0; n < 8; ++n) u[n] = std::polar(1.0, 0.4 * static_cast<double>(n));
  const auto y = apply_static_nonlinearity(u, tx);
  const Complex gain = tx.coeffs.sum();
  CHECK((y - gain * u).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("profile validation") {
  TransmitterProfile bad{"bad", CVector::Ones(4)};
  bad.coeffs[0] = 0.9;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_NOTHROW(default_transmitters()[1].validate());
}

TEST_CASE("fir filter examples") {
  TimeSeries x(3);
  x << Complex(1, 2), Complex(3, 4), Complex(5, 6);
  CHECK((fir_filter(x, ChannelRealization{CVector::Ones(1)}) - x).norm() == 0.0);

  CVector delay(2);
  delay << 0.0, 1.0;
  const auto y = fir_filter(x, ChannelRealization{delay});
  CHECK(y[0] == Complex(0, 0));
  CHECK(y[1] == x[0]);
  CHECK(y[2] == x[1]);

  CVector h(2);
  h << Complex(0.6, 0), Complex(0, 0.8);
  TimeSeries imp = TimeSeries::Zero(3);
  imp[0] = 1.0;
  const auto r = fir_filter(imp, ChannelRealization{h});
  CHECK(std::abs(r[0] - Complex(0.6, 0)) < 1e-15);
  CHECK(std::abs(r[1] - Complex(0, 0.8)) < 1e-15);
  CHECK(std::abs(r[2]) == 0.0);
}

TEST_CASE("fir filter matches direct convolution") {
  std::mt19937_64 rng(3);
  const CVector x = oracle::random_complex(300, rng);
  const CVector h = oracle::random_complex(9, rng);
  CHECK((fir_filter(x, ChannelRealization{h}) - oracle::convolve(x, h)).cwiseAbs().maxCoeff() <
        1e-12);
}

TEST_CASE("rayleigh channel draws") {
  const auto single = draw_rayleigh_channel(17, 0, 1);
  REQUIRE(single.taps.size() == 1);
  CHECK(std::abs(std::abs(single.taps[0]) - 1.0) < 1e-12);

  for (Seed s = 0; s < 200; ++s) {
    const auto ch = draw_rayleigh_channel(s);
    REQUIRE(ch.taps.size() == 9);
    CHECK(ch.nonzero_taps() == 5);
    CHECK(ch.taps[0] != Complex(0, 0));
    CHECK(std::abs(ch.taps.squaredNorm() - 1.0) < 1e-12);
  }
  CHECK((draw_rayleigh_channel(42).taps - draw_rayleigh_channel(42).taps).norm() == 0.0);
  CHECK((draw_rayleigh_channel(42).taps - draw_rayleigh_channel(43).taps).norm() > 0.0);
  CHECK_THROWS_AS(draw_rayleigh_channel(1, 3, 5), ConfigError);
}

TEST_CASE("noise variance convention") {
  FrameSpec spec;
  CHECK(awgn_variance(1.0, NoiseSpec{0.0}, spec) == doctest::Approx(2560.0 / 4096.0));
  CHECK(awgn_variance(1.0, NoiseSpec{0.0}, spec) == doctest::Approx(0.625));
  CHECK(awgn_variance(2.0, NoiseSpec{10.0}, spec) == doctest::Approx(2.0 * 0.0625));
  CHECK(awgn_variance(1.0, NoiseSpec{}, spec) == 0.0);

  const auto x = ofdm_frame(1);
  CHECK((add_awgn(x, NoiseSpec{}, spec, 3) - x).norm() == 0.0);
}

TEST_CASE("empirical noise variance") {
  FrameSpec spec;
  const TimeSeries x = TimeSeries::Zero(1'000'000);
  const double var = awgn_variance(1.0, NoiseSpec{0.0}, spec);
  const auto y = add_noise(x, var, 8);
  CHECK(std::abs(y.squaredNorm() / 1e6 - var) < 0.01 * var);
  // Circular: real and imaginary halves carry half each.
  CHECK(std::abs(y.real().squaredNorm() / 1e6 - var / 2) < 0.01 * var);
}

TEST_CASE("transmit composes the three stages") {
  FrameSpec spec;
  spec.drive_rms = 0.5;
  const auto frame = ofdm_frame(5);
  const auto tx = default_transmitters()[1];
  const auto ch = draw_rayleigh_channel(9);

  TransmitterProfile lin{"linear", CVector::Zero(4)};
  lin.coeffs[0] = 1.0;
  CHECK((transmit(frame, lin, ChannelRealization{CVector::Ones(1)}, NoiseSpec{}, spec, 1) - frame)
            .norm() == 0.0);

  const auto clean = transmit(frame, tx, ch, NoiseSpec{}, spec, 1);
  CHECK((clean - fir_filter(apply_static_nonlinearity(frame, tx), ch)).cwiseAbs().maxCoeff() ==
        0.0);

  const auto memoryless = transmit(frame, tx, ChannelRealization{CVector::Ones(1)}, NoiseSpec{},
                                   spec, 1);
  double worst = 0.0;
  for (Index n = 0; n < frame.size(); ++n) {
    worst = std::max(worst, std::abs(memoryless[n] - oracle::polynomial(frame[n], coeffs_of(tx))));
  }
  CHECK(worst < 1e-13);

  const auto noisy = transmit(frame, tx, ch, NoiseSpec{5.0}, spec, 2);
  const double var = awgn_variance(mean_power(clean), NoiseSpec{5.0}, spec);
  const double emp = (noisy - clean).squaredNorm() / static_cast<double>(frame.size());
  CHECK(std::abs(emp - var) < 0.05 * var);
}
