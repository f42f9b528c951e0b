#pragma once

// Complex dense/sparse kernels shared by every other module.
//
// Storage is Eigen: DenseMatrix is a column-major complex matrix and
// SparseMatrix a compressed row-major (CSR) complex matrix. Factorizations
// wrap Eigen's LU kernels and add the singularity checks the solvers rely on.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

namespace helmddm {

using Complex = std::complex<double>;
using Index = Eigen::Index;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXcd;
using SparseMatrix = Eigen::SparseMatrix<Complex, Eigen::RowMajor, int>;
using ColumnSparseMatrix = Eigen::SparseMatrix<Complex, Eigen::ColMajor, int>;
using Triplet = Eigen::Triplet<Complex, int>;

inline constexpr Complex kI{0.0, 1.0};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class SingularMatrixError : public Error {
 public:
  SingularMatrixError(Index pivot, double magnitude, double reference)
      : Error(describe(pivot, magnitude, reference)), pivot_(pivot), magnitude_(magnitude) {}

  Index pivot() const noexcept { return pivot_; }
  double magnitude() const noexcept { return magnitude_; }

 private:
  static std::string describe(Index pivot, double magnitude, double reference) {
    std::ostringstream os;
    os << "singular matrix: pivot " << pivot << " has magnitude " << magnitude
       << " (reference scale " << reference << ")";
    return os.str();
  }
  Index pivot_;
  double magnitude_;
};

class NotHermitianError : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefiniteError : public Error {
 public:
  using Error::Error;
};

/// Relative pivot threshold below which a factorization is declared singular.
inline constexpr double kPivotTolerance = 1e-14;

inline void require_dims(bool ok, const char* what) {
  if (!ok) throw DimensionError(std::string("dimension mismatch: ") + what);
}

/// y = A x, one floating-point sum per row in stored column order.
inline Vector csr_matvec(const SparseMatrix& A, const Vector& x) {
  require_dims(A.cols() == x.size(), "csr_matvec");
  Vector y(A.rows());
  const int* offsets = A.outerIndexPtr();
  const int* columns = A.innerIndexPtr();
  const Complex* values = A.valuePtr();
  const bool compressed = A.isCompressed();
  for (Index row = 0; row < A.rows(); ++row) {
    const int begin = offsets[row];
    const int end = compressed ? offsets[row + 1] : begin + A.innerNonZeroPtr()[row];
    Complex sum{0.0, 0.0};
    for (int k = begin; k < end; ++k) sum += values[k] * x[columns[k]];
    y[row] = sum;
  }
  return y;
}

/// Builds a finalized CSR matrix; duplicate triplets are summed.
inline SparseMatrix make_sparse(Index rows, Index cols, const std::vector<Triplet>& triplets) {
  SparseMatrix A(rows, cols);
  A.setFromTriplets(triplets.begin(), triplets.end());
  A.makeCompressed();
  return A;
}

inline double max_abs_entry(const SparseMatrix& A) {
  double m = 0.0;
  for (Index k = 0; k < A.nonZeros(); ++k) m = std::max(m, std::abs(A.valuePtr()[k]));
  return m;
}

inline double max_abs_entry(const DenseMatrix& A) {
  return A.size() == 0 ? 0.0 : A.cwiseAbs().maxCoeff();
}

/// Row-pivoted dense LU. Construction throws SingularMatrixError when a pivot
/// falls below kPivotTolerance times the largest entry of the matrix.
class DenseLU {
 public:
  DenseLU() = default;

  explicit DenseLU(const DenseMatrix& A) {
    require_dims(A.rows() == A.cols(), "DenseLU requires a square matrix");
    n_ = A.rows();
    if (n_ == 0) return;
    lu_.compute(A);
    const double scale = max_abs_entry(A);
    const auto diag = lu_.matrixLU().diagonal();
    for (Index k = 0; k < n_; ++k) {
      const double pivot = std::abs(diag[k]);
      if (!(pivot >= kPivotTolerance * scale) || scale == 0.0)
        throw SingularMatrixError(k, pivot, scale);
    }
  }

  Index size() const noexcept { return n_; }

  Vector solve(const Vector& b) const {
    require_dims(b.size() == n_, "DenseLU::solve");
    if (n_ == 0) return Vector(0);
    return lu_.solve(b);
  }

  DenseMatrix solve(const DenseMatrix& B) const {
    require_dims(B.rows() == n_, "DenseLU::solve");
    if (n_ == 0) return DenseMatrix(0, B.cols());
    return lu_.solve(B);
  }

 private:
  Index n_ = 0;
  Eigen::PartialPivLU<DenseMatrix> lu_;
};

namespace detail {

// Exposes the diagonal of U, which SparseLU keeps inside its supernodal L store.
class PivotCheckedSparseLU
    : public Eigen::SparseLU<ColumnSparseMatrix, Eigen::COLAMDOrdering<int>> {
 public:
  double min_abs_pivot(Index* where) const {
    double best = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < this->cols(); ++j) {
      double value = 0.0;
      for (SCMatrix::InnerIterator it(m_Lstore, j); it; ++it) {
        if (it.row() < j) continue;
        if (it.row() == j) value = std::abs(it.value());
        break;
      }
      if (value < best) {
        best = value;
        if (where) *where = j;
      }
    }
    return best;
  }
};

}  // namespace detail

/// Fill-reducing (COLAMD) sparse LU with threshold row pivoting.
class SparseLU {
 public:
  SparseLU() = default;

  explicit SparseLU(const SparseMatrix& A) { factor(A); }

  SparseLU(const SparseLU&) = delete;
  SparseLU& operator=(const SparseLU&) = delete;
  SparseLU(SparseLU&&) = default;
  SparseLU& operator=(SparseLU&&) = default;

  Index size() const noexcept { return n_; }

  Vector solve(const Vector& b) const {
    require_dims(b.size() == n_, "SparseLU::solve");
    if (n_ == 0) return Vector(0);
    return lu_->solve(b);
  }

  DenseMatrix solve(const DenseMatrix& B) const {
    require_dims(B.rows() == n_, "SparseLU::solve");
    if (n_ == 0) return DenseMatrix(0, B.cols());
    return lu_->solve(B);
  }

 private:
  void factor(const SparseMatrix& A) {
    require_dims(A.rows() == A.cols(), "SparseLU requires a square matrix");
    n_ = A.rows();
    if (n_ == 0) return;
    ColumnSparseMatrix column_major = A;
    column_major.makeCompressed();
    lu_ = std::make_unique<detail::PivotCheckedSparseLU>();
    lu_->compute(column_major);
    const double scale = max_abs_entry(A);
    if (lu_->info() != Eigen::Success) {
      // Eigen reports the failing column at the end of its message.
      const std::string msg = lu_->lastErrorMessage();
      const auto digits = msg.find_last_not_of("0123456789");
      const Index column = digits + 1 < msg.size() ? std::stol(msg.substr(digits + 1)) : -1;
      throw SingularMatrixError(column, 0.0, scale);
    }
    Index where = 0;
    const double pivot = lu_->min_abs_pivot(&where);
    if (!(pivot >= kPivotTolerance * scale) || scale == 0.0)
      throw SingularMatrixError(where, pivot, scale);
  }

  Index n_ = 0;
  std::unique_ptr<detail::PivotCheckedSparseLU> lu_;
};

enum class EigenOrdering { ascending, ascending_real_part };

struct EigenPairs {
  Vector values;
  DenseMatrix vectors;  // column j pairs with values[j]
  EigenOrdering ordering = EigenOrdering::ascending;

  Index size() const noexcept { return values.size(); }
};

namespace detail {

inline double hermitian_defect(const DenseMatrix& A) {
  return (A - A.adjoint()).norm();
}

inline void require_hermitian(const DenseMatrix& A, const char* name) {
  const double scale = A.norm();
  if (hermitian_defect(A) > 1e-8 * scale)
    throw NotHermitianError(std::string(name) + " is not Hermitian");
}

}  // namespace detail

/// All eigenpairs of A x = lambda B x for Hermitian A and Hermitian positive
/// definite B. Eigenvalues are real and ascending; eigenvectors B-orthonormal.
inline EigenPairs eig_hermitian_definite(const DenseMatrix& A, const DenseMatrix& B) {
  require_dims(A.rows() == A.cols() && B.rows() == B.cols() && A.rows() == B.rows(),
               "eig_hermitian_definite");
  detail::require_hermitian(A, "A");
  detail::require_hermitian(B, "B");
  const Index n = A.rows();
  EigenPairs result;
  result.ordering = EigenOrdering::ascending;
  if (n == 0) {
    result.values.resize(0);
    result.vectors.resize(0, 0);
    return result;
  }

  const DenseMatrix Bh = 0.5 * (B + B.adjoint());
  const DenseMatrix Ah = 0.5 * (A + A.adjoint());
  Eigen::LLT<DenseMatrix> chol(Bh);
  const double scale = Bh.diagonal().real().cwiseAbs().maxCoeff();
  if (chol.info() != Eigen::Success) throw NotPositiveDefiniteError("B is not positive definite");
  const DenseMatrix L = chol.matrixL();
  for (Index k = 0; k < n; ++k) {
    const double pivot = std::norm(L(k, k));
    if (!(pivot > kPivotTolerance * scale))
      throw NotPositiveDefiniteError("Cholesky pivot breakdown in B");
  }

  // C = L^{-1} A L^{-H}
  DenseMatrix C = L.triangularView<Eigen::Lower>().solve(Ah);
  C = L.triangularView<Eigen::Lower>().solve(C.adjoint().eval()).adjoint().eval();
  C = 0.5 * (C + C.adjoint());
  Eigen::SelfAdjointEigenSolver<DenseMatrix> solver(C);
  if (solver.info() != Eigen::Success) throw Error("Hermitian eigensolver did not converge");

  result.values = solver.eigenvalues().cast<Complex>();
  result.vectors = L.adjoint().triangularView<Eigen::Upper>().solve(solver.eigenvectors());
  return result;
}

/// Finite eigenpairs of A x = lambda B x for arbitrary A and Hermitian
/// positive semi-definite B. Directions where B's eigenvalues fall below
/// null_tol * lambda_max(B) are deflated by eliminating them from A (Schur
/// complement), so every returned pair satisfies the full pencil equation.
/// Eigenvalues are sorted by ascending real part, eigenvectors B-normalized.
inline EigenPairs eig_general(const DenseMatrix& A, const DenseMatrix& B, double null_tol = 1e-10) {
  require_dims(A.rows() == A.cols() && B.rows() == B.cols() && A.rows() == B.rows(),
               "eig_general");
  detail::require_hermitian(B, "B");
  const Index n = A.rows();
  EigenPairs result;
  result.ordering = EigenOrdering::ascending_real_part;
  if (n == 0) {
    result.values.resize(0);
    result.vectors.resize(0, 0);
    return result;
  }

  const DenseMatrix Bh = 0.5 * (B + B.adjoint());
  Eigen::SelfAdjointEigenSolver<DenseMatrix> bsolver(Bh);
  if (bsolver.info() != Eigen::Success) throw Error("eigensolver for B did not converge");
  const RealVector& mu = bsolver.eigenvalues();
  const double mu_max = mu.maxCoeff();
  if (!(mu_max > 0.0)) throw NotPositiveDefiniteError("B is entirely null");

  std::vector<Index> kept, dropped;
  for (Index k = 0; k < n; ++k) (mu[k] > null_tol * mu_max ? kept : dropped).push_back(k);
  const Index r = static_cast<Index>(kept.size());
  const Index z = static_cast<Index>(dropped.size());

  DenseMatrix U(n, r), N(n, z);
  RealVector lambda_b(r);
  for (Index k = 0; k < r; ++k) {
    U.col(k) = bsolver.eigenvectors().col(kept[k]);
    lambda_b[k] = mu[kept[k]];
  }
  for (Index k = 0; k < z; ++k) N.col(k) = bsolver.eigenvectors().col(dropped[k]);

  DenseMatrix schur = U.adjoint() * A * U;
  DenseMatrix null_lift;  // maps range coordinates y to null coordinates
  if (z > 0) {
    const DenseMatrix ann = N.adjoint() * A * N;
    const DenseLU ann_lu(ann);
    null_lift = -ann_lu.solve(DenseMatrix(N.adjoint() * A * U));
    schur += U.adjoint() * A * N * null_lift;
  }

  const RealVector inv_sqrt = lambda_b.cwiseSqrt().cwiseInverse();
  const DenseMatrix standard = inv_sqrt.asDiagonal() * schur * inv_sqrt.asDiagonal();
  Eigen::ComplexEigenSolver<DenseMatrix> solver(standard);
  if (solver.info() != Eigen::Success) throw Error("complex eigensolver did not converge");

  std::vector<Index> order(static_cast<std::size_t>(r));
  std::iota(order.begin(), order.end(), Index{0});
  const Vector& ev = solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (ev[a].real() != ev[b].real()) return ev[a].real() < ev[b].real();
    return ev[a].imag() < ev[b].imag();
  });

  result.values.resize(r);
  result.vectors.resize(n, r);
  for (Index k = 0; k < r; ++k) {
    const Index src = order[static_cast<std::size_t>(k)];
    Vector w = solver.eigenvectors().col(src);
    w /= w.norm();
    const Vector y = inv_sqrt.asDiagonal() * w;
    Vector x = U * y;
    if (z > 0) x += N * (null_lift * y);
    result.values[k] = ev[src];
    result.vectors.col(k) = x;
  }
  return result;
}

/// sqrt(Re(v* S v)) for Hermitian positive definite S.
inline double weighted_norm(const SparseMatrix& S, const Vector& v) {
  require_dims(S.rows() == v.size() && S.cols() == v.size(), "weighted_norm");
  const Complex q = v.dot(csr_matvec(S, v));
  if (std::abs(q.imag()) > 1e-10 * std::abs(q) + 1e-300)
    throw NotHermitianError("weighted_norm: v*Sv has a significant imaginary part");
  return std::sqrt(std::max(0.0, q.real()));
}

/// (u, w)_S = w* S u.
inline Complex weighted_inner(const SparseMatrix& S, const Vector& u, const Vector& w) {
  require_dims(S.rows() == u.size() && w.size() == u.size(), "weighted_inner");
  return w.dot(csr_matvec(S, u));
}

inline DenseMatrix to_dense(const SparseMatrix& A) { return DenseMatrix(A); }

}  // namespace helmddm
