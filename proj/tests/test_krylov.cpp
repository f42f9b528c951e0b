#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "helmddm/krylov.hpp"
#include "helmddm/precond.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace helmddm;

namespace {

auto dense_op(const DenseMatrix& A) {
  return [&A](const Vector& x) -> Vector { return A * x; };
}

const auto identity = [](const Vector& x) -> Vector { return x; };

}  // namespace

TEST(Gmres, IdentityConvergesInOneStep) {
  std::mt19937_64 rng(71);
  const Vector b = oracle::random_vector(12, rng);
  const KrylovResult res = gmres(identity, identity, b, GmresOptions{});
  EXPECT_TRUE(res.converged);
  EXPECT_EQ(res.iterations, 1);
  EXPECT_LE((res.solution - b).norm(), 1e-14 * b.norm());
  ASSERT_EQ(res.residual_history.size(), 2u);
  EXPECT_EQ(res.residual_history[0], 1.0);
}

TEST(Gmres, TwoDistinctEigenvaluesTakeTwoSteps) {
  DenseMatrix A = DenseMatrix::Zero(2, 2);
  A(0, 0) = 1.0;
  A(1, 1) = 2.0;
  Vector b(2);
  b << 1.0, 1.0;
  const KrylovResult res = gmres(dense_op(A), identity, b, GmresOptions{1e-12, 10});
  EXPECT_TRUE(res.converged);
  EXPECT_EQ(res.iterations, 2);
  EXPECT_NEAR(std::abs(res.solution[1] - 0.5), 0.0, 1e-14);
}

TEST(Gmres, RandomSystemMatchesDirectSolve) {
  std::mt19937_64 rng(72);
  const int n = 30;
  DenseMatrix A = oracle::random_matrix(n, n, rng);
  A += 8.0 * DenseMatrix::Identity(n, n);
  const Vector b = oracle::random_vector(n, rng);
  const KrylovResult res = gmres(dense_op(A), identity, b, GmresOptions{1e-12, 100});
  EXPECT_TRUE(res.converged);
  EXPECT_LE(res.iterations, n);
  const Vector ref = oracle::complete_pivot_solve(A, b);
  EXPECT_LE((res.solution - ref).norm(), 1e-8 * ref.norm());
}

TEST(Gmres, ZeroRightHandSide) {
  DenseMatrix A = DenseMatrix::Identity(3, 3);
  const KrylovResult res = gmres(dense_op(A), identity, Vector::Zero(3), GmresOptions{});
  EXPECT_TRUE(res.converged);
  EXPECT_EQ(res.iterations, 0);
  EXPECT_EQ(res.solution.norm(), 0.0);
  EXPECT_EQ(res.residual_history, std::vector<double>{0.0});
}

TEST(Gmres, HistoriesAndArnoldiRelation) {
  std::mt19937_64 rng(73);
  const int n = 40;
  const DenseMatrix A = oracle::random_matrix(n, n, rng) + 3.0 * DenseMatrix::Identity(n, n);
  const DenseMatrix P = oracle::random_matrix(n, n, rng) * 0.1 + DenseMatrix::Identity(n, n);
  const Vector b = oracle::random_vector(n, rng);
  for (bool preconditioned : {false, true}) {
    GmresOptions opt{1e-10, 25};
    opt.keep_basis = true;
    const KrylovResult res = preconditioned ? gmres(dense_op(A), dense_op(P), b, opt) : gmres(dense_op(A), identity, b, opt);
    for (std::size_t k = 1; k < res.preconditioned_history.size(); ++k)
      EXPECT_LE(res.preconditioned_history[k], res.preconditioned_history[k - 1] * (1.0 + 1e-12));
    if (!preconditioned) {
      for (std::size_t k = 1; k < res.residual_history.size(); ++k)
        EXPECT_LE(res.residual_history[k], res.residual_history[k - 1] * (1.0 + 1e-10));
      for (std::size_t k = 0; k < res.residual_history.size(); ++k)
        EXPECT_NEAR(res.residual_history[k], res.preconditioned_history[k], 1e-10);
    }
    const DenseMatrix& V = res.basis;
    const DenseMatrix& H = res.hessenberg;
    const Index k = res.iterations;
    ASSERT_EQ(H.cols(), k);
    const DenseMatrix PA = preconditioned ? DenseMatrix(P * A) : A;
    const DenseMatrix lhs = PA * V.leftCols(k);
    const DenseMatrix rhs = V.leftCols(H.rows()) * H;
    EXPECT_LE((lhs - rhs).norm(), 1e-8 * lhs.norm());
    EXPECT_LE((V.adjoint() * V - DenseMatrix::Identity(V.cols(), V.cols())).norm(), 1e-10);
  }
}

TEST(Gmres, RecordedIteratesEndAtSolution) {
  std::mt19937_64 rng(74);
  const DenseMatrix A = oracle::random_matrix(10, 10, rng) + 4.0 * DenseMatrix::Identity(10, 10);
  const Vector b = oracle::random_vector(10, rng);
  GmresOptions opt{1e-10, 20};
  opt.record_iterates = true;
  const KrylovResult res = gmres(dense_op(A), identity, b, opt);
  ASSERT_EQ(static_cast<int>(res.iterates.size()), res.iterations);
  EXPECT_EQ(res.iterates.back(), res.solution);
  for (std::size_t k = 0; k < res.iterates.size(); ++k)
    EXPECT_NEAR((b - A * res.iterates[k]).norm() / b.norm(), res.residual_history[k + 1], 1e-12);
}

TEST(Gmres, MaxitStopsUnconverged) {
  std::mt19937_64 rng(75);
  const DenseMatrix A = oracle::random_matrix(20, 20, rng);
  const Vector b = oracle::random_vector(20, rng);
  const KrylovResult res = gmres(dense_op(A), identity, b, GmresOptions{1e-12, 3});
  EXPECT_FALSE(res.converged);
  EXPECT_EQ(res.iterations, 3);
  EXPECT_EQ(res.residual_history.size(), 4u);
}

TEST(Gmres, Breakdown) {
  DenseMatrix A = DenseMatrix::Zero(2, 2);
  A(0, 1) = 1.0;
  Vector b(2);
  b << 1.0, 0.0;
  const KrylovResult res = gmres(dense_op(A), identity, b, GmresOptions{1e-8, 10});
  EXPECT_TRUE(res.breakdown);
  EXPECT_FALSE(res.converged);
  EXPECT_EQ(res.iterations, 1);
  EXPECT_TRUE(res.solution.allFinite());
  EXPECT_EQ(res.residual_history.back(), 1.0);
}

TEST(Gmres, InvalidArguments) {
  const Vector b = Vector::Ones(2);
  EXPECT_THROW(gmres(identity, identity, b, GmresOptions{0.0, 10}), Error);
  EXPECT_THROW(gmres(identity, identity, b, GmresOptions{1e-6, 0}), Error);
}

TEST(Gmres, SingleSubdomainPreconditioner) {
  const auto s = fixture::make_problem(8, 2, 1, 2.0 * std::numbers::pi, 0.0);
  const Preconditioner pre(s.decomp, s.sys.A_eps);
  const KrylovResult res = gmres([&](const Vector& x) { return csr_matvec(s.sys.A_eps, x); }, pre, s.sys.rhs,
                                 GmresOptions{1e-6, 100});
  EXPECT_TRUE(res.converged);
  EXPECT_LE(res.iterations, 2);
}
