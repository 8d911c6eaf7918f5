#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace rfflab {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using Index = Eigen::Index;

/// Discrete-time complex baseband samples.
using TimeSeries = CVector;

/// Frequency-domain values of one OFDM symbol, one entry per subcarrier.
using FdSymbolVector = CVector;

using Seed = std::uint64_t;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A sequence had the wrong length for the requested operation.
class InputSizeError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration values (counts, orders, channel shape).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The regression basis collapsed (e.g. constant-envelope input) or the
/// leading Kronecker block vanished.
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

class SingularityError : public Error {
 public:
  SingularityError(const std::string& what, Index estimated_rank)
      : Error(what), rank_(estimated_rank) {}
  Index estimated_rank() const noexcept { return rank_; }

 private:
  Index rank_;
};

/// Channel frequency response has a (near) zero bin; the frame cannot be
/// equalized.
class SpectralNullError : public Error {
 public:
  SpectralNullError(const std::string& what, Index bin) : Error(what), bin_(bin) {}
  Index bin() const noexcept { return bin_; }

 private:
  Index bin_;
};

}  // namespace rfflab
