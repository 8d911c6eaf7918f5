#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "rfflab/ofdm.hpp"
#include "rfflab/poly_basis.hpp"

using namespace rfflab;

namespace {

TimeSeries ofdm_signal(Seed seed, double drive = 0.5) {
  FrameSpec spec;
  return drive * ofdm_modulate(random_qpsk_symbol(spec, seed), spec);
}

double cond(const CMatrix& a) {
  Eigen::BDCSVD<CMatrix> svd(a);
  const auto& s = svd.singularValues();
  return s[0] / s[s.size() - 1];
}

}  // namespace

TEST_CASE("conventional basis values") {
  CHECK(conventional_basis(Complex(0, 0), 7).cwiseAbs().maxCoeff() == 0.0);
  const auto v = conventional_basis(Complex(1, 1), 7);
  REQUIRE(v.size() == 4);
  CHECK(std::abs(v[0] - Complex(1, 1)) < 1e-15);
  CHECK(std::abs(v[1] - Complex(2, 2)) < 1e-14);
  CHECK(std::abs(v[2] - Complex(4, 4)) < 1e-14);
  CHECK(std::abs(v[3] - Complex(8, 8)) < 1e-13);
  const Complex w = std::polar(1.0, 2.1);
  const auto c = conventional_basis(w, 7);
  CHECK((c.array() - w).abs().maxCoeff() < 1e-15);
}

TEST_CASE("basis config") {
  BasisConfig cfg;
  CHECK(cfg.n_basis() == 4);
  CHECK(cfg.n_columns() == 36);
  CHECK_THROWS_AS((BasisConfig{6, 9}.validate()), ConfigError);
  CHECK_THROWS_AS((BasisConfig{7, 0}.validate()), ConfigError);
}

TEST_CASE("small regression matrix by hand") {
  TimeSeries u(2);
  u << 1.0, 2.0;
  const auto phi = build_regression_matrix(u, BasisConfig{3, 2});
  CMatrix expect(2, 4);
  expect << 1, 1, 0, 0, 2, 8, 1, 1;
  CHECK((phi.entries - expect).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("regression matrix layout") {
  const auto u = ofdm_signal(1);
  const auto phi0 = build_regression_matrix(u, BasisConfig{7, 1});
  CHECK((phi0.entries - basis_rows(u, 7)).norm() == 0.0);

  const auto phi = build_regression_matrix(u, BasisConfig{7, 9});
  CHECK((phi.entries - oracle::regression(u, 7, 9)).cwiseAbs().maxCoeff() < 1e-13);
  for (int l = 1; l < 9; ++l) CHECK(phi.block(l).topRows(l).norm() == 0.0);
}

TEST_CASE("history fills the leading delayed rows") {
  const auto u = ofdm_signal(2);
  const TimeSeries hist = ofdm_signal(3).tail(8);
  const auto phi = build_regression_matrix(u, BasisConfig{7, 9}, hist);
  TimeSeries joined(8 + u.size());
  joined << hist, u;
  const auto full = oracle::regression(joined, 7, 9);
  CHECK((phi.entries - full.bottomRows(u.size())).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("ortho transform: single column") {
  const auto u = ofdm_signal(3);
  const auto t = compute_ortho_transform(u, BasisConfig{1, 1});
  REQUIRE(t.dim() == 1);
  CHECK(std::abs(t.u_matrix(0, 0) - Complex(1.0 / u.norm(), 0)) < 1e-15);
}

TEST_CASE("ortho transform whitens the zero-delay block") {
  for (Seed s = 0; s < 5; ++s) {
    const auto u = ofdm_signal(10 + s, 0.3 + 0.2 * static_cast<double>(s));
    BasisConfig cfg;
    const auto t = compute_ortho_transform(u, cfg);
    const CMatrix q = basis_rows(u, 7) * t.u_matrix;
    CHECK((q.adjoint() * q - CMatrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-10);
    // Upper triangular with a positive real diagonal.
    for (Index i = 0; i < 4; ++i) {
      CHECK(t.u_matrix(i, i).real() > 0.0);
      CHECK(t.u_matrix(i, i).imag() == doctest::Approx(0.0));
      for (Index j = 0; j < i; ++j) CHECK(std::abs(t.u_matrix(i, j)) == 0.0);
    }
    CHECK((t.u_matrix * t.inverse() - CMatrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("constellation points are degenerate") {
  FrameSpec spec;
  const TimeSeries fd = random_qpsk_symbol(spec, 4);
  CHECK_THROWS_AS(compute_ortho_transform(fd, BasisConfig{}), DegeneracyError);
  CHECK_THROWS_AS(compute_ortho_transform(TimeSeries::Zero(100), BasisConfig{}), DegeneracyError);
}

TEST_CASE("orthogonal regression matrix") {
  const auto u = ofdm_signal(5);
  const auto phi = build_regression_matrix(u, BasisConfig{7, 9});
  const auto same = orthogonal_regression_matrix(phi, OrthoTransform{CMatrix::Identity(4, 4)});
  CHECK((same.entries - phi.entries).norm() == 0.0);

  BasisConfig cfg0{7, 1};
  const auto t0 = compute_ortho_transform(u, cfg0);
  const auto psi0 = orthogonal_regression_matrix(build_regression_matrix(u, cfg0), t0);
  CHECK((psi0.entries.adjoint() * psi0.entries - CMatrix::Identity(4, 4)).cwiseAbs().maxCoeff() <
        1e-10);
}

TEST_CASE("representation equivalence") {
  std::mt19937_64 rng(77);
  for (Seed s = 0; s < 10; ++s) {
    const auto u = ofdm_signal(20 + s);
    BasisConfig cfg;
    const auto phi = build_regression_matrix(u, cfg);
    const auto t = compute_ortho_transform(u, cfg);
    const auto psi = orthogonal_regression_matrix(phi, t);
    const CVector h = oracle::random_complex(9, rng);
    CVector b = oracle::random_complex(4, rng, 0.1);
    b[0] = 1.0;
    const CVector lhs = phi.entries * oracle::kron(h, b);
    const CVector rhs = psi.entries * oracle::kron(h, t.inverse() * b);
    CHECK((lhs - rhs).norm() / lhs.norm() < 1e-10);
  }
}

TEST_CASE("orthogonalization does not worsen conditioning") {
  BasisConfig cfg;
  int better = 0;
  for (Seed s = 0; s < 20; ++s) {
    const auto u = ofdm_signal(40 + s);
    const auto phi = build_regression_matrix(u, cfg);
    const auto t = compute_ortho_transform(u, cfg);
    const auto psi = orthogonal_regression_matrix(phi, t);
    CHECK(cond(psi.block(0)) == doctest::Approx(1.0).epsilon(1e-9));
    if (cond(psi.entries) <= cond(phi.entries)) ++better;
  }
  CHECK(better == 20);
}

TEST_CASE("orthogonal basis rows") {
  const auto u = ofdm_signal(6);
  const TimeSeries hist = ofdm_signal(7).tail(8);
  const auto t = compute_ortho_transform(u, BasisConfig{});
  const auto rows = orthogonal_basis_rows(u, hist, 7, t);
  TimeSeries joined(8 + u.size());
  joined << hist, u;
  CHECK((rows - basis_rows(joined, 7) * t.u_matrix).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("short input is rejected") {
  TimeSeries u(3);
  u << 0.1, 0.5, 0.9;
  CHECK_THROWS_AS(build_regression_matrix(u, BasisConfig{7, 9}), InputSizeError);
}
