#include "rfflab/poly_basis.hpp"

#include <cmath>
#include <string>

namespace rfflab {

void BasisConfig::validate() const {
  if (order < 1 || order % 2 == 0) {
    throw ConfigError("BasisConfig: order must be a positive odd integer, got " +
                      std::to_string(order));
  }
  if (n_taps < 1) throw ConfigError("BasisConfig: n_taps must be >= 1");
}

CMatrix OrthoTransform::inverse() const {
  return u_matrix.triangularView<Eigen::Upper>().solve(CMatrix::Identity(dim(), dim()));
}

CVector conventional_basis(Complex u, int order) {
  const int k = (order + 1) / 2;
  CVector out(k);
  const double mag2 = std::norm(u);
  Complex term = u;
  for (int p = 0; p < k; ++p) {
    out[p] = term;
    term *= mag2;
  }
  return out;
}

CMatrix basis_rows(const TimeSeries& u, int order) {
  const int k = (order + 1) / 2;
  CMatrix rows(u.size(), k);
  for (Index n = 0; n < u.size(); ++n) {
    const double mag2 = std::norm(u[n]);
    Complex term = u[n];
    for (int p = 0; p < k; ++p) {
      rows(n, p) = term;
      term *= mag2;
    }
  }
  return rows;
}

RegressionMatrix build_regression_matrix(const TimeSeries& u, const BasisConfig& cfg,
                                         const TimeSeries& history) {
  cfg.validate();
  const Index m = u.size();
  const int taps = cfg.n_taps;
  const int k = cfg.n_basis();
  if (m <= taps - 1) {
    throw InputSizeError("build_regression_matrix: signal length " + std::to_string(m) +
                         " must exceed the FIR order " + std::to_string(taps - 1));
  }
  const CMatrix base = basis_rows(u, cfg.order);
  const CMatrix hist = basis_rows(history, cfg.order);

  RegressionMatrix phi{CMatrix::Zero(m, cfg.n_columns()), taps, k};
  for (int l = 0; l < taps; ++l) {
    auto blk = phi.entries.middleCols(static_cast<Index>(l) * k, k);
    blk.bottomRows(m - l) = base.topRows(m - l);
    // Rows 0..l-1 see samples before the window.
    const Index avail = std::min<Index>(l, hist.rows());
    if (avail > 0) blk.middleRows(l - avail, avail) = hist.bottomRows(avail);
  }
  return phi;
}

OrthoTransform compute_ortho_transform(const TimeSeries& u, const BasisConfig& cfg) {
  cfg.validate();
  const int k = cfg.n_basis();
  if (u.size() < k) {
    throw InputSizeError("compute_ortho_transform: need at least " + std::to_string(k) +
                         " samples, got " + std::to_string(u.size()));
  }
  const CMatrix phi0 = basis_rows(u, cfg.order);
  Eigen::HouseholderQR<CMatrix> qr(phi0);
  CMatrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();

  // Rank check: a collinear basis leaves tiny trailing diagonal entries.
  double max_diag = 0.0;
  for (int i = 0; i < k; ++i) max_diag = std::max(max_diag, std::abs(r(i, i)));
  if (max_diag == 0.0) throw DegeneracyError("compute_ortho_transform: all-zero input");
  for (int i = 0; i < k; ++i) {
    // Column i of R relative to the column's own norm.
    const double col = r.col(i).norm();
    if (std::abs(r(i, i)) <= 1e-9 * col) {
      throw DegeneracyError(
          "compute_ortho_transform: polynomial basis is rank deficient (column " +
          std::to_string(i) +
          " collinear with lower orders); constant-envelope input such as raw QPSK "
          "constellation points cannot identify the nonlinearity");
    }
  }
  // Force a positive real diagonal: R <- D R with D_ii = conj(r_ii)/|r_ii|.
  for (int i = 0; i < k; ++i) {
    const Complex phase = std::conj(r(i, i)) / std::abs(r(i, i));
    r.row(i) *= phase;
    r(i, i) = Complex(r(i, i).real(), 0.0);
  }
  OrthoTransform t;
  t.u_matrix = r.triangularView<Eigen::Upper>().solve(CMatrix::Identity(k, k));
  return t;
}

RegressionMatrix orthogonal_regression_matrix(const RegressionMatrix& phi, const OrthoTransform& t) {
  if (t.dim() != phi.n_basis) {
    throw InputSizeError("orthogonal_regression_matrix: transform dimension " +
                         std::to_string(t.dim()) + " does not match block width " +
                         std::to_string(phi.n_basis));
  }
  RegressionMatrix psi{CMatrix(phi.entries.rows(), phi.entries.cols()), phi.n_taps, phi.n_basis};
  for (int l = 0; l < phi.n_taps; ++l) {
    const Index c0 = static_cast<Index>(l) * phi.n_basis;
    psi.entries.middleCols(c0, phi.n_basis).noalias() =
        phi.entries.middleCols(c0, phi.n_basis) * t.u_matrix;
  }
  return psi;
}

CMatrix orthogonal_basis_rows(const TimeSeries& u, const TimeSeries& history, int order,
                              const OrthoTransform& t) {
  TimeSeries joined(history.size() + u.size());
  joined << history, u;
  CMatrix rows = basis_rows(joined, order);
  return rows * t.u_matrix;
}

}  // namespace rfflab
