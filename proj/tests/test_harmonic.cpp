#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "helmddm/harmonic.hpp"
#include "helmddm/harness.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace helmddm;

using fixture::make_problem;

TEST(ImpedanceExtension, ZeroData) {
  const auto s = make_problem(4, 1, 2, 1.0, 0.0);
  const Subdomain& sub = s.decomp.subdomains[0];
  const Vector v = impedance_extension(sub, s.decomp.local[0], Vector::Zero(static_cast<Index>(sub.boundary_dofs().size())));
  EXPECT_EQ(v.cwiseAbs().maxCoeff(), 0.0);
}

TEST(ImpedanceExtension, MatchesDenseSolveAndInteriorRowsVanish) {
  // n = 4, M = 2, L = 1: each subdomain is 3 x 3 cells
  std::mt19937_64 rng(41);
  const auto s = make_problem(4, 1, 2, 1.0, 0.0);
  for (std::size_t l = 0; l < s.decomp.count(); ++l) {
    const Subdomain& sub = s.decomp.subdomains[l];
    const LocalOperators& ops = s.decomp.local[l];
    const auto trace = sub.boundary_dofs();
    const Vector lambda = oracle::random_vector(static_cast<Index>(trace.size()), rng);
    const Vector v = impedance_extension(sub, ops, lambda);
    Vector full = Vector::Zero(sub.size());
    for (std::size_t k = 0; k < trace.size(); ++k) full[trace[k]] = lambda[static_cast<Index>(k)];
    const Vector ref = oracle::complete_pivot_solve(to_dense(ops.impedance), Vector(to_dense(ops.boundary_mass) * full));
    EXPECT_LE((v - ref).norm(), 1e-12 * ref.norm());
    const Vector residual = csr_matvec(ops.impedance, v);
    for (int k = 0; k < sub.size(); ++k)
      if (!sub.on_boundary[static_cast<std::size_t>(k)]) EXPECT_LE(std::abs(residual[k]), 1e-12 * ref.norm());
  }
}

TEST(HarmonicBasis, DimensionsAndInvariants) {
  for (int p : {1, 2}) {
    const auto s = make_problem(8, p, 2, 2.0 * std::numbers::pi, 1.0, OverlapMode::generous);
    for (std::size_t l = 0; l < s.decomp.count(); ++l) {
      const HarmonicBasis hb = build_harmonic_basis(s.decomp, l);
      const Subdomain& sub = s.decomp.subdomains[l];
      const LocalOperators& ops = s.decomp.local[l];
      EXPECT_EQ(hb.dimension(), static_cast<Index>(sub.boundary_dofs().size()));
      // extension residual
      const DenseMatrix Mcols = mass_columns(ops.boundary_mass, hb.trace_dofs);
      const DenseMatrix A = to_dense(ops.impedance);
      EXPECT_LE((A * hb.H - Mcols).norm(), 1e-9 * (A.norm() * hb.H.norm() + Mcols.norm()));
      // G_S HPD, G_W HPSD
      EXPECT_LE((hb.gram_s - hb.gram_s.adjoint()).norm(), 1e-12 * hb.gram_s.norm());
      Eigen::LLT<DenseMatrix> llt(hb.gram_s);
      EXPECT_EQ(llt.info(), Eigen::Success);
      Eigen::SelfAdjointEigenSolver<DenseMatrix> es(0.5 * (hb.gram_w + hb.gram_w.adjoint()));
      EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10 * hb.gram_w.norm());
    }
  }
}

TEST(HarmonicBasis, HandCountOnTwoByTwoCells) {
  // M = 1 on n = 2: the boundary of a 2 x 2 block of cells
  for (int p : {1, 2}) {
    const auto s = make_problem(2, p, 1, 1.0, 0.0);
    const HarmonicBasis hb = build_harmonic_basis(s.decomp, 0);
    EXPECT_EQ(hb.dimension(), p == 1 ? 8 : 16);
  }
}

TEST(HarmonicBasis, NoInteriorGivesSquareFullRankBasis) {
  const auto s = make_problem(1, 1, 1, 1.0, 0.0);
  const HarmonicBasis hb = build_harmonic_basis(s.decomp, 0);
  EXPECT_EQ(hb.H.rows(), 4);
  EXPECT_EQ(hb.H.cols(), 4);
  Eigen::FullPivLU<DenseMatrix> lu(hb.gram_s);
  EXPECT_EQ(lu.rank(), 4);
  const DenseMatrix D = dirichlet_harmonic_basis(s.decomp.subdomains[0], s.decomp.local[0]);
  EXPECT_EQ((D - DenseMatrix::Identity(4, 4)).norm(), 0.0);
}

TEST(DirichletBasis, InteriorResidual) {
  const auto s = make_problem(8, 2, 2, 2.0 * std::numbers::pi, 1.0);
  for (std::size_t l = 0; l < s.decomp.count(); ++l) {
    const Subdomain& sub = s.decomp.subdomains[l];
    const DenseMatrix D = dirichlet_harmonic_basis(sub, s.decomp.local[l]);
    const DenseMatrix R = to_dense(s.decomp.local[l].impedance) * D;
    for (int k = 0; k < sub.size(); ++k)
      if (!sub.on_boundary[static_cast<std::size_t>(k)]) EXPECT_LE(R.row(k).norm(), 1e-9 * D.norm());
  }
}

TEST(DirichletBasis, SpansImpedanceHarmonicSpace) {
  for (int p : {1, 2})
    for (auto overlap : {OverlapMode::minimal, OverlapMode::generous}) {
      const auto s = make_problem(8, p, 2, 2.0 * std::numbers::pi, 1.0, overlap);
      for (std::size_t l = 0; l < s.decomp.count(); ++l) {
        const HarmonicBasis hb = build_harmonic_basis(s.decomp, l);
        const DenseMatrix D = dirichlet_harmonic_basis(s.decomp.subdomains[l], s.decomp.local[l]);
        EXPECT_LE(max_principal_angle(hb.H, D), 1e-7) << "p=" << p << " l=" << l;
      }
    }
}

TEST(PrincipalAngle, Oracle) {
  std::mt19937_64 rng(42);
  const DenseMatrix X = oracle::random_matrix(10, 3, rng);
  const DenseMatrix G = oracle::random_matrix(3, 3, rng);
  EXPECT_LE(max_principal_angle(X, X * G), 1e-10);
  DenseMatrix E = DenseMatrix::Zero(4, 1), F = DenseMatrix::Zero(4, 1);
  E(0, 0) = 1.0;
  F(0, 0) = std::cos(0.3);
  F(1, 0) = std::sin(0.3);
  EXPECT_NEAR(max_principal_angle(E, F), 0.3, 1e-12);
}
