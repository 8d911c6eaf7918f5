#include "rfflab/separation.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace rfflab {

CMatrix KronVector::reshaped() const {
  CMatrix out(n_taps, n_basis);
  for (int l = 0; l < n_taps; ++l) {
    out.row(l) = values.segment(static_cast<Index>(l) * n_basis, n_basis).transpose();
  }
  return out;
}

std::string_view to_string(FingerprintSource source) {
  return source == FingerprintSource::pilot ? "pilot" : "payload";
}

FingerprintSource fingerprint_source_from_string(std::string_view name) {
  if (name == "pilot") return FingerprintSource::pilot;
  if (name == "payload") return FingerprintSource::payload;
  throw ConfigError("unknown fingerprint source '" + std::string(name) + "'");
}

LeastSquaresResult solve_least_squares(const CMatrix& a, const CVector& d) {
  if (a.rows() != d.size()) {
    throw InputSizeError("ls_solve: matrix has " + std::to_string(a.rows()) +
                         " rows but the observation has " + std::to_string(d.size()));
  }
  if (a.rows() < a.cols()) {
    throw InputSizeError("ls_solve: underdetermined system (" + std::to_string(a.rows()) + " x " +
                         std::to_string(a.cols()) + ")");
  }
  const Index n = a.cols();
  Eigen::HouseholderQR<CMatrix> qr(a);
  const auto& packed = qr.matrixQR();

  double max_diag = 0.0;
  double min_diag = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < n; ++i) {
    const double v = std::abs(packed(i, i));
    max_diag = std::max(max_diag, v);
    min_diag = std::min(min_diag, v);
  }
  const double tol = 1e-12 * std::max<double>(1.0, static_cast<double>(a.rows()));
  if (n > 0 && !(min_diag > tol * max_diag)) {
    Eigen::ColPivHouseholderQR<CMatrix> piv(a);
    const Index rank = piv.rank();
    throw SingularityError("ls_solve: regression matrix is rank deficient (estimated rank " +
                               std::to_string(rank) + " of " + std::to_string(n) + ")",
                           rank);
  }
  LeastSquaresResult result;
  result.solution = qr.solve(d);
  result.rank = n;
  result.condition_estimate = n > 0 ? max_diag / min_diag : 1.0;
  return result;
}

CVector ls_solve(const CMatrix& a, const CVector& d) { return solve_least_squares(a, d).solution; }

namespace {

KronVector kron_from_solution(CVector values, const RegressionMatrix& psi) {
  return KronVector{std::move(values), psi.n_taps, psi.n_basis};
}

}  // namespace

KronVector estimate_kron_vector(const RegressionMatrix& psi, const TimeSeries& d) {
  return kron_from_solution(ls_solve(psi.entries, d), psi);
}

Fingerprint separate_nonlinear(const KronVector& kv, const OrthoTransform& t,
                               FingerprintSource source) {
  if (t.dim() != kv.n_basis) {
    throw InputSizeError("separate_nonlinear: transform dimension does not match the basis size");
  }
  // Normalized after U so b^_1 = 1 exactly.
  CVector b = t.u_matrix * kv.values.head(kv.n_basis);
  const double tol = 1e-12 * kv.values.norm();
  if (!(std::abs(b[0]) > tol)) {
    throw DegeneracyError(
        "separate_nonlinear: leading coefficient of the first Kronecker block vanished "
        "(h_0 ~ 0); the fingerprint cannot be normalized");
  }
  b /= b[0];
  b[0] = Complex(1.0, 0.0);
  return Fingerprint{std::move(b), source, 0.0};
}

LinearEstimate separate_linear(const RegressionMatrix& psi, const Fingerprint& fp,
                               const OrthoTransform& t, const TimeSeries& d) {
  if (fp.b_hat.size() != psi.n_basis) {
    throw InputSizeError("separate_linear: fingerprint length does not match the basis size");
  }
  const CVector b_orth = t.u_matrix.triangularView<Eigen::Upper>().solve(fp.b_hat);
  CMatrix collapsed(psi.entries.rows(), psi.n_taps);
  for (int l = 0; l < psi.n_taps; ++l) collapsed.col(l).noalias() = psi.block(l) * b_orth;
  return LinearEstimate{ls_solve(collapsed, d)};
}

Separation separate(const TimeSeries& u, const TimeSeries& d, const BasisConfig& cfg,
                    FingerprintSource source, const TimeSeries& history) {
  if (u.size() != d.size()) {
    throw InputSizeError("separate: input has " + std::to_string(u.size()) +
                         " samples, output has " + std::to_string(d.size()));
  }
  if (u.size() <= cfg.n_columns()) {
    throw InputSizeError("separate: need more than " + std::to_string(cfg.n_columns()) +
                         " samples, got " + std::to_string(u.size()));
  }
  const RegressionMatrix phi = build_regression_matrix(u, cfg, history);
  const OrthoTransform t = compute_ortho_transform(u, cfg);
  const RegressionMatrix psi = orthogonal_regression_matrix(phi, t);
  const LeastSquaresResult ls = solve_least_squares(psi.entries, d);
  Fingerprint fp = separate_nonlinear(kron_from_solution(ls.solution, psi), t, source);
  fp.condition_number = ls.condition_estimate;
  LinearEstimate lin = separate_linear(psi, fp, t, d);
  return Separation{std::move(lin), std::move(fp)};
}

namespace {

// Accumulates sum_q conj(x(q))^T x(q + d) for every lag d in [0, n_lags),
// with rows stored row-major as separate real and imaginary arrays.
template <Index K>
void lag_kernel(const double* re, const double* im, Index first, Index count, Index n_lags,
                double* acc_re, double* acc_im) {
  for (Index lag_i = 0; lag_i < n_lags; ++lag_i) {
    const Index shift = lag_i;
    for (Index i = 0; i < K; ++i) {
      double sr[K] = {};
      double si[K] = {};
      for (Index q = first; q < first + count; ++q) {
        const double a = re[q * K + i];
        const double b = im[q * K + i];
        const double* yr = re + (q + shift) * K;
        const double* yi = im + (q + shift) * K;
        for (Index j = 0; j < K; ++j) {
          sr[j] += a * yr[j] + b * yi[j];
          si[j] += a * yi[j] - b * yr[j];
        }
      }
      for (Index j = 0; j < K; ++j) {
        acc_re[lag_i * K * K + i * K + j] += sr[j];
        acc_im[lag_i * K * K + i * K + j] += si[j];
      }
    }
  }
}

void lag_kernel_dyn(const double* re, const double* im, Index first, Index count, Index n_lags,
                    Index k, double* acc_re, double* acc_im) {
  for (Index q = first; q < first + count; ++q) {
    for (Index lag_i = 0; lag_i < n_lags; ++lag_i) {
      const Index y = q + lag_i;
      for (Index i = 0; i < k; ++i) {
        for (Index j = 0; j < k; ++j) {
          const Index at = lag_i * k * k + i * k + j;
          acc_re[at] += re[q * k + i] * re[y * k + j] + im[q * k + i] * im[y * k + j];
          acc_im[at] += re[q * k + i] * im[y * k + j] - im[q * k + i] * re[y * k + j];
        }
      }
    }
  }
}

}  // namespace

DelayedBlockNormalEquations::DelayedBlockNormalEquations(CMatrix rows, int n_taps)
    : rows_(std::move(rows)),
      n_taps_(n_taps),
      n_basis_(static_cast<int>(rows_.cols())),
      gram_(CMatrix::Zero(static_cast<Index>(n_taps) * rows_.cols(),
                          static_cast<Index>(n_taps) * rows_.cols())),
      rhs_(CVector::Zero(static_cast<Index>(n_taps) * rows_.cols())) {
  if (n_taps < 1) throw ConfigError("DelayedBlockNormalEquations: n_taps must be >= 1");
  if (rows_.rows() < n_taps - 1) {
    throw InputSizeError("DelayedBlockNormalEquations: basis rows shorter than the history");
  }
  const auto total = static_cast<std::size_t>(rows_.rows() * rows_.cols());
  re_.resize(total);
  im_.resize(total);
  for (Index r = 0; r < rows_.rows(); ++r) {
    for (Index c = 0; c < rows_.cols(); ++c) {
      const auto at = static_cast<std::size_t>(r * rows_.cols() + c);
      re_[at] = rows_(r, c).real();
      im_[at] = rows_(r, c).imag();
    }
  }
}

void DelayedBlockNormalEquations::accumulate(Index row_begin, Index row_end, const TimeSeries& d) {
  const Index hist = n_taps_ - 1;
  const Index window = rows_.rows() - hist;
  const Index k = n_basis_;
  if (row_begin < 0 || row_end > window || row_begin > row_end || d.size() < row_end) {
    throw InputSizeError("DelayedBlockNormalEquations: row range outside the regression window");
  }
  if (row_begin == row_end) return;
  // Sample n of the window lives at rows_ row hist + n.
  auto sample = [&](Index n) { return rows_.row(hist + n); };

  const Index count = row_end - row_begin;
  const Index core = count - hist;
  if (core <= 0) {
    // Short chunk: plain rank-one updates.
    CVector row(gram_.rows());
    for (Index n = row_begin; n < row_end; ++n) {
      for (int l = 0; l < n_taps_; ++l) row.segment(l * k, k) = sample(n - l).transpose();
      gram_.noalias() += row.conjugate() * row.transpose();
      rhs_.noalias() += row.conjugate() * d[n];
    }
    return;
  }

  // Block (l, m) sums conj(x(q))^T x(q + l - m) over q in [row_begin - l, row_end - 1 - l].
  // Split into the shared core [row_begin, row_end - 1 - L] and two edges.
  // Only l >= m is formed; the rest follows from Hermitian symmetry.
  const Index n_lags = hist + 1;
  std::vector<double> acc_re(static_cast<std::size_t>(n_lags * k * k), 0.0);
  std::vector<double> acc_im(acc_re.size(), 0.0);
  if (k == 4) {
    lag_kernel<4>(re_.data(), im_.data(), hist + row_begin, core, n_lags, acc_re.data(),
                  acc_im.data());
  } else {
    lag_kernel_dyn(re_.data(), im_.data(), hist + row_begin, core, n_lags, k, acc_re.data(),
                   acc_im.data());
  }
  std::vector<CMatrix> lag(static_cast<std::size_t>(n_lags), CMatrix(k, k));
  for (Index lag_i = 0; lag_i < n_lags; ++lag_i) {
    for (Index i = 0; i < k; ++i) {
      for (Index j = 0; j < k; ++j) {
        const auto at = static_cast<std::size_t>(lag_i * k * k + i * k + j);
        lag[static_cast<std::size_t>(lag_i)](i, j) = Complex(acc_re[at], acc_im[at]);
      }
    }
  }
  for (int l = 0; l < n_taps_; ++l) {
    for (int m = 0; m <= l; ++m) {
      const Index delta = l - m;
      CMatrix blk = lag[static_cast<std::size_t>(delta)];
      for (Index q = row_begin - l; q < row_begin; ++q) {
        blk.noalias() += sample(q).adjoint() * sample(q + delta);
      }
      for (Index q = row_end - hist; q < row_end - l; ++q) {
        blk.noalias() += sample(q).adjoint() * sample(q + delta);
      }
      gram_.block(l * k, m * k, k, k) += blk;
      if (m != l) gram_.block(m * k, l * k, k, k) += blk.adjoint();
    }
    rhs_.segment(l * k, k).noalias() +=
        rows_.middleRows(hist + row_begin - l, count).adjoint() * d.segment(row_begin, count);
  }
}

double DelayedBlockNormalEquations::condition_number() const {
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(gram_, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  if (ev.size() == 0) return 1.0;
  if (!(ev[0] > 0.0)) return std::numeric_limits<double>::infinity();
  return std::sqrt(ev[ev.size() - 1] / ev[0]);
}

CVector DelayedBlockNormalEquations::solve() const {
  Eigen::LLT<CMatrix> llt(gram_);
  if (llt.info() != Eigen::Success) {
    throw SingularityError("DelayedBlockNormalEquations: Gram matrix is not positive definite",
                           -1);
  }
  return llt.solve(rhs_);
}

}  // namespace rfflab
