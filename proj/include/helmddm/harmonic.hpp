#pragma once

// Local discrete Helmholtz-harmonic spaces. A harmonic function on a
// subdomain is the impedance extension E(lambda) of boundary data lambda:
//
//   a_l(E(lambda), w) = <lambda, w>_{boundary of the subdomain}  for all local w.

#include <vector>

#include "helmddm/decomp.hpp"
#include "helmddm/linalg.hpp"

namespace helmddm {

struct HarmonicBasis {
  int subdomain = 0;
  std::vector<int> trace_dofs;  // local indices of the boundary DOFs
  DenseMatrix H;                // column j = extension of the j-th nodal trace function
  DenseMatrix gram_s;           // H* S_l H
  DenseMatrix gram_w;           // (W H)* S_l (W H), W = diag(chi_l)

  Index dimension() const noexcept { return H.cols(); }
};

/// Columns of the boundary mass matrix at the given local DOFs.
inline DenseMatrix mass_columns(const SparseMatrix& mass, const std::vector<int>& columns) {
  DenseMatrix out = DenseMatrix::Zero(mass.rows(), static_cast<Index>(columns.size()));
  for (Index row = 0; row < mass.outerSize(); ++row)
    for (SparseMatrix::InnerIterator it(mass, row); it; ++it) {
      const auto pos = std::lower_bound(columns.begin(), columns.end(), static_cast<int>(it.col()));
      if (pos != columns.end() && *pos == it.col())
        out(row, static_cast<Index>(pos - columns.begin())) = it.value();
    }
  return out;
}

/// Solves A_l v = M_boundary lambda for boundary data given at the trace DOFs.
inline Vector impedance_extension(const Subdomain& sub, const LocalOperators& ops, const Vector& lambda_trace) {
  const std::vector<int> trace = sub.boundary_dofs();
  require_dims(lambda_trace.size() == static_cast<Index>(trace.size()), "impedance_extension");
  Vector lambda = Vector::Zero(sub.size());
  for (std::size_t k = 0; k < trace.size(); ++k) lambda[trace[k]] = lambda_trace[static_cast<Index>(k)];
  return ops.factor.solve(Vector(csr_matvec(ops.boundary_mass, lambda)));
}

inline HarmonicBasis build_harmonic_basis(const Decomposition& decomp, std::size_t l) {
  if (decomp.local.size() != decomp.subdomains.size()) throw Error("subdomains are not factorized");
  const Subdomain& sub = decomp.subdomains[l];
  const LocalOperators& ops = decomp.local[l];
  HarmonicBasis basis;
  basis.subdomain = static_cast<int>(l);
  basis.trace_dofs = sub.boundary_dofs();
  basis.H = ops.factor.solve(mass_columns(ops.boundary_mass, basis.trace_dofs));
  const DenseMatrix SH = ops.weighted_h1 * basis.H;
  basis.gram_s = basis.H.adjoint() * SH;
  const auto w = decomp.pou.weights[l].cast<Complex>().asDiagonal();
  const DenseMatrix WH = w * basis.H;
  basis.gram_w = WH.adjoint() * (ops.weighted_h1 * WH);
  return basis;
}

/// Rows/columns subset of a sparse matrix; index lists must be ascending.
inline SparseMatrix submatrix(const SparseMatrix& A, const std::vector<int>& rows, const std::vector<int>& cols) {
  std::vector<int> col_pos(static_cast<std::size_t>(A.cols()), -1);
  for (std::size_t k = 0; k < cols.size(); ++k) col_pos[static_cast<std::size_t>(cols[k])] = static_cast<int>(k);
  std::vector<Triplet> trip;
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (SparseMatrix::InnerIterator it(A, rows[r]); it; ++it) {
      const int c = col_pos[static_cast<std::size_t>(it.col())];
      if (c >= 0) trip.emplace_back(static_cast<int>(r), c, it.value());
    }
  return make_sparse(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()), trip);
}

/// Harmonic extensions of nodal Dirichlet data on the whole subdomain
/// boundary: boundary values e_j, interior values -A_II^{-1} A_IB e_j.
/// Throws SingularMatrixError when the interior block is singular.
inline DenseMatrix dirichlet_harmonic_basis(const Subdomain& sub, const LocalOperators& ops) {
  const std::vector<int> boundary = sub.boundary_dofs();
  std::vector<int> interior;
  for (int k = 0; k < sub.size(); ++k)
    if (!sub.on_boundary[static_cast<std::size_t>(k)]) interior.push_back(k);
  const Index m = static_cast<Index>(boundary.size());
  DenseMatrix basis = DenseMatrix::Zero(sub.size(), m);
  for (Index j = 0; j < m; ++j) basis(boundary[static_cast<std::size_t>(j)], j) = 1.0;
  if (interior.empty()) return basis;

  const SparseLU interior_lu(submatrix(ops.impedance, interior, interior));
  const DenseMatrix coupling = DenseMatrix(submatrix(ops.impedance, interior, boundary));
  const DenseMatrix values = -interior_lu.solve(coupling);
  for (std::size_t r = 0; r < interior.size(); ++r) basis.row(interior[r]) = values.row(static_cast<Index>(r));
  return basis;
}

}  // namespace helmddm
