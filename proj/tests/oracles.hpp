#pragma once

// Independent reference implementations used as test oracles. Kept naive on
// purpose: direct sums, explicit loops, no shared code with the library.

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using C = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

inline C polynomial(C u, const std::vector<C>& b) {
  C out = 0.0;
  for (std::size_t p = 0; p < b.size(); ++p) {
    out += b[p] * u * std::pow(std::abs(u), 2.0 * static_cast<double>(p));
  }
  return out;
}

inline CVec convolve(const CVec& x, const CVec& h) {
  CVec y = CVec::Zero(x.size());
  for (Eigen::Index n = 0; n < x.size(); ++n) {
    for (Eigen::Index l = 0; l < h.size() && l <= n; ++l) y[n] += h[l] * x[n - l];
  }
  return y;
}

inline CVec naive_idft(const CVec& fd) {
  const auto n = fd.size();
  CVec out(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    C acc = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      const double ang = 2.0 * std::numbers::pi * static_cast<double>(k * t) / static_cast<double>(n);
      acc += fd[k] * C(std::cos(ang), std::sin(ang));
    }
    out[t] = acc / std::sqrt(static_cast<double>(n));
  }
  return out;
}

// (A^H A)^{-1} A^H d
inline CVec normal_equations(const CMat& a, const CVec& d) {
  const CMat g = a.adjoint() * a;
  return g.inverse() * (a.adjoint() * d);
}

// Phi with explicit delayed copies of the conventional basis.
inline CMat regression(const CVec& u, int order, int n_taps) {
  const int k = (order + 1) / 2;
  CMat phi = CMat::Zero(u.size(), n_taps * k);
  for (int l = 0; l < n_taps; ++l) {
    for (Eigen::Index n = l; n < u.size(); ++n) {
      const C v = u[n - l];
      for (int p = 0; p < k; ++p) {
        phi(n, l * k + p) = v * std::pow(std::abs(v), 2.0 * p);
      }
    }
  }
  return phi;
}

inline CVec kron(const CVec& h, const CVec& b) {
  CVec out(h.size() * b.size());
  for (Eigen::Index i = 0; i < h.size(); ++i) out.segment(i * b.size(), b.size()) = h[i] * b;
  return out;
}

// Rank-one separation of a Kronecker vector reshaped (taps x basis):
// W ~ s u v^H with h ~ u and b° ~ conj(v).
struct RankOne {
  CVec h;
  CVec b_ortho;
  double sigma_ratio;
};

inline RankOne svd_rank_one(const CVec& kv, Eigen::Index n_taps, Eigen::Index n_basis) {
  CMat w(n_taps, n_basis);
  for (Eigen::Index l = 0; l < n_taps; ++l) w.row(l) = kv.segment(l * n_basis, n_basis).transpose();
  Eigen::JacobiSVD<CMat> svd(w, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  return {svd.matrixU().col(0), svd.matrixV().col(0).conjugate(), s.size() > 1 ? s[1] / s[0] : 0.0};
}

inline CVec random_complex(Eigen::Index n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  CVec v(n);
  for (auto& x : v) x = C(g(rng), g(rng));
  return v;
}

}  // namespace oracle
