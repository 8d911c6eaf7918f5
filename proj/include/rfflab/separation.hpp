#pragma once

#include <string_view>
#include <vector>

#include "rfflab/common.hpp"
#include "rfflab/poly_basis.hpp"

namespace rfflab {

/// Joint estimate of h kron b° laid out as L + 1 blocks [h_0 b°, ..., h_L b°].
struct KronVector {
  CVector values;
  int n_taps = 0;
  int n_basis = 0;

  /// (L + 1) x K matrix whose row l is h_l b°^T; rank one for an exact model.
  CMatrix reshaped() const;
};

enum class FingerprintSource { pilot, payload };

std::string_view to_string(FingerprintSource source);
FingerprintSource fingerprint_source_from_string(std::string_view name);

/// Estimated nonlinear coefficients b^ = [1, b^_3, ..., b^_P].
struct Fingerprint {
  CVector b_hat;
  FingerprintSource source = FingerprintSource::payload;
  double condition_number = 0.0;  // of the regression matrix used
};

struct LinearEstimate {
  CVector h_hat;
};

struct LeastSquaresResult {
  CVector solution;
  Index rank = 0;
  double condition_estimate = 0.0;  // max |R_ii| / min |R_ii|
};

/// Least squares through Householder QR. Throws SingularityError when A is
/// rank deficient.
LeastSquaresResult solve_least_squares(const CMatrix& a, const CVector& d);

/// argmin_w ||A w - d||_2.
CVector ls_solve(const CMatrix& a, const CVector& d);

KronVector estimate_kron_vector(const RegressionMatrix& psi, const TimeSeries& d);

/// First block h_0 b°, mapped back by U and normalized so b^_1 = 1.
Fingerprint separate_nonlinear(const KronVector& kv, const OrthoTransform& t,
                               FingerprintSource source = FingerprintSource::payload);

/// Collapses each delayed block of Psi against b° = U^{-1} b^ and solves the
/// remaining (L + 1)-column problem for h^.
LinearEstimate separate_linear(const RegressionMatrix& psi, const Fingerprint& fp,
                               const OrthoTransform& t, const TimeSeries& d);

struct Separation {
  LinearEstimate linear;
  Fingerprint fingerprint;
};

/// Phi -> U -> Psi -> h^_b° -> b^ -> h^ for input u and output d.
Separation separate(const TimeSeries& u, const TimeSeries& d, const BasisConfig& cfg,
                    FingerprintSource source = FingerprintSource::payload,
                    const TimeSeries& history = TimeSeries());

/// Normal equations of the delayed-block regression, accumulated from the
/// per-sample basis rows without materializing Psi. The Gram matrix is built
/// from lag correlations of the K basis sequences (2L + 1 lags) plus exact
/// window-edge corrections, so it equals Psi^H Psi for the same rows.
///
/// `rows` holds the orthogonalized basis of [history (n_taps - 1 samples); u],
/// i.e. row n_taps - 1 + n is sample n of the regression window.
class DelayedBlockNormalEquations {
 public:
  DelayedBlockNormalEquations(CMatrix rows, int n_taps);

  /// Adds regression rows [row_begin, row_end) with outputs d(row_begin..row_end-1),
  /// where `d` is indexed like the regression window.
  void accumulate(Index row_begin, Index row_end, const TimeSeries& d);

  const CMatrix& gram() const noexcept { return gram_; }
  const CVector& rhs() const noexcept { return rhs_; }

  /// Sqrt of the eigenvalue spread of the Gram matrix, i.e. cond(Psi).
  double condition_number() const;

  /// Cholesky solve of Gram w = rhs.
  CVector solve() const;

 private:
  CMatrix rows_;
  // Row-major real and imaginary parts of rows_ for the lag-correlation kernel.
  std::vector<double> re_;
  std::vector<double> im_;
  int n_taps_;
  int n_basis_;
  CMatrix gram_;
  CVector rhs_;
};

}  // namespace rfflab
