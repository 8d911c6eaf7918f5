#pragma once

#include "rfflab/common.hpp"

namespace rfflab {

/// Odd polynomial order P and number of FIR taps L + 1 of the Hammerstein
/// regression.
struct BasisConfig {
  int order = 7;
  int n_taps = 9;

  int n_basis() const noexcept { return (order + 1) / 2; }
  Index n_columns() const noexcept { return static_cast<Index>(n_taps) * n_basis(); }
  void validate() const;
};

/// Delayed-block regression matrix [Phi_0, Phi_1, ..., Phi_L]. Block l holds
/// the basis of the input delayed by l samples.
struct RegressionMatrix {
  CMatrix entries;
  int n_taps = 0;
  int n_basis = 0;

  auto block(int l) const { return entries.middleCols(static_cast<Index>(l) * n_basis, n_basis); }
};

/// Upper-triangular U with Phi_0 U having orthonormal columns.
struct OrthoTransform {
  CMatrix u_matrix;

  Index dim() const noexcept { return u_matrix.rows(); }
  /// U^{-1}, by triangular solve.
  CMatrix inverse() const;
};

/// [u, u|u|^2, ..., u|u|^{P-1}].
CVector conventional_basis(Complex u, int order);

/// Per-sample conventional basis rows (u.size() x (P+1)/2).
CMatrix basis_rows(const TimeSeries& u, int order);

/// Builds Phi. Rows whose delayed input precedes the window read from
/// `history` (the samples immediately before u, oldest first); without
/// history they are zero.
RegressionMatrix build_regression_matrix(const TimeSeries& u, const BasisConfig& cfg,
                                         const TimeSeries& history = TimeSeries());

/// Thin QR of the zero-delay conventional block, R with positive real
/// diagonal, U = R^{-1}. Constant-envelope input makes the basis collinear and
/// raises DegeneracyError.
OrthoTransform compute_ortho_transform(const TimeSeries& u, const BasisConfig& cfg);

/// Psi = Phi (I_{L+1} kron U).
RegressionMatrix orthogonal_regression_matrix(const RegressionMatrix& phi, const OrthoTransform& t);

/// Orthogonalized per-sample basis rows of [history; u], (history + u) x K.
CMatrix orthogonal_basis_rows(const TimeSeries& u, const TimeSeries& history, int order,
                              const OrthoTransform& t);

}  // namespace rfflab
