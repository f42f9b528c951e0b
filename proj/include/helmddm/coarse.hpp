#pragma once

// Coarse spaces for the two-level preconditioner and the Galerkin coarse
// operator A0 = Z* A Z.
//
//   spectral  weighted-prolonged eigenvectors of (G_W, G_S) on each local
//             harmonic space with eigenvalue >= rho^2
//   economic  harmonic extensions of a 1D quadratic space on the interior
//             boundary Gamma_l, no eigenproblems
//   grid      P1 hat functions of a coarse structured grid
//   dtn       Dirichlet-to-Neumann eigenvectors with Re(lambda) <= rho^2
//   hgeneo    eigenvectors of (Neumann Helmholtz, chi-weighted stiffness)
//             with Re(lambda) <= rho^2

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "helmddm/decomp.hpp"
#include "helmddm/fem.hpp"
#include "helmddm/harmonic.hpp"
#include "helmddm/linalg.hpp"

namespace helmddm {

enum class CoarseKind { none, spectral, economic, grid, dtn, hgeneo };

inline std::string_view to_string(CoarseKind kind) {
  switch (kind) {
    case CoarseKind::none: return "none";
    case CoarseKind::spectral: return "spectral";
    case CoarseKind::economic: return "economic";
    case CoarseKind::grid: return "grid";
    case CoarseKind::dtn: return "dtn";
    case CoarseKind::hgeneo: return "hgeneo";
  }
  return "none";
}

inline CoarseKind parse_coarse_kind(std::string_view s) {
  for (CoarseKind k : {CoarseKind::none, CoarseKind::spectral, CoarseKind::economic, CoarseKind::grid,
                       CoarseKind::dtn, CoarseKind::hgeneo})
    if (s == to_string(k)) return k;
  throw Error("unknown coarse space kind: " + std::string(s));
}

/// Threshold selection by rho, or a fixed number of local vectors.
struct SelectionRule {
  double rho = 0.5;
  std::optional<int> fixed_count;
};

struct SpectralSelection {
  int subdomain = 0;
  double rho = 0.0;
  RealVector eigenvalues;    // ascending
  DenseMatrix eigenvectors;  // harmonic-basis coordinates, G_S-orthonormal
  int cut_index = 1;         // 1-based m_l^rho; selected are cut_index..m_l
  std::vector<int> selected; // 0-based

  int selected_count() const noexcept { return static_cast<int>(selected.size()); }
};

inline SpectralSelection build_spectral_local(const HarmonicBasis& basis, const SelectionRule& rule) {
  const EigenPairs pairs = eig_hermitian_definite(basis.gram_w, basis.gram_s);
  SpectralSelection sel;
  sel.subdomain = basis.subdomain;
  sel.rho = rule.rho;
  sel.eigenvalues = pairs.values.real();
  sel.eigenvectors = pairs.vectors;
  const int m = static_cast<int>(pairs.size());
  int first = m;  // 0-based first selected index
  if (rule.fixed_count) {
    first = std::max(0, m - *rule.fixed_count);
  } else {
    const double threshold = rule.rho * rule.rho;
    for (int i = 0; i < m; ++i)
      if (sel.eigenvalues[i] >= threshold) {
        first = i;
        break;
      }
  }
  sel.cut_index = first + 1;
  for (int i = first; i < m; ++i) sel.selected.push_back(i);
  return sel;
}

/// G_S-orthogonal projection of harmonic coordinates onto the selected span.
inline Vector project_pi_rho(const SpectralSelection& sel, const DenseMatrix& gram_s, const Vector& coords) {
  require_dims(coords.size() == gram_s.rows(), "project_pi_rho");
  Vector out = Vector::Zero(coords.size());
  const Vector g = gram_s * coords;
  for (const int i : sel.selected) {
    const auto xi = sel.eigenvectors.col(i);
    out += xi.dot(g) * xi;
  }
  return out;
}

struct CoarseSpace {
  CoarseKind kind = CoarseKind::none;
  ColumnSparseMatrix Z;  // global DOFs x n_c
  DenseMatrix A0;        // Z* A Z
  DenseLU A0_lu;
  std::vector<int> per_subdomain;
  int max_local_size = 0;

  Index size() const noexcept { return Z.cols(); }
  double ratio() const noexcept {
    return max_local_size > 0 ? static_cast<double>(size()) / max_local_size : 0.0;
  }
};

/// Forms A0 = Z* A Z and factors it; a singular A0 raises SingularMatrixError
/// carrying the offending pivot index.
inline void finalize_coarse_space(CoarseSpace& cs, const SparseMatrix& A) {
  require_dims(cs.Z.rows() == A.rows(), "coarse basis rows");
  if (cs.size() == 0) {
    cs.A0.resize(0, 0);
    cs.A0_lu = DenseLU();
    return;
  }
  const ColumnSparseMatrix AZ = A * cs.Z;
  const ColumnSparseMatrix ZAZ = ColumnSparseMatrix(cs.Z.adjoint()) * AZ;
  cs.A0 = DenseMatrix(ZAZ);
  cs.A0_lu = DenseLU(cs.A0);
}

inline CoarseSpace empty_coarse_space(const Decomposition& decomp) {
  CoarseSpace cs;
  cs.Z.resize(decomp.global_size, 0);
  cs.per_subdomain.assign(decomp.count(), 0);
  cs.max_local_size = decomp.max_local_size();
  return cs;
}

/// Z E_0^* r solved on the coarse space: Z A0^{-1} Z* r.
inline Vector coarse_solve(const CoarseSpace& cs, const Vector& r) {
  require_dims(r.size() == cs.Z.rows(), "coarse_solve");
  if (cs.size() == 0) return Vector::Zero(r.size());
  const Vector y = cs.Z.adjoint() * r;
  const Vector c = cs.A0_lu.solve(y);
  return cs.Z * c;
}

namespace detail {

/// Appends columns prolong(l, weight(l, local_columns[:, j])) to the triplet list.
inline int append_weighted_columns(const Decomposition& decomp, std::size_t l, const DenseMatrix& local_columns,
                                   int first_column, std::vector<Triplet>& trip) {
  const Subdomain& sub = decomp.subdomains[l];
  const RealVector& chi = decomp.pou.weights[l];
  for (Index j = 0; j < local_columns.cols(); ++j)
    for (int k = 0; k < sub.size(); ++k) {
      const Complex v = chi[k] * local_columns(k, j);
      if (v != Complex(0.0, 0.0))
        trip.emplace_back(sub.dofs[static_cast<std::size_t>(k)], first_column + static_cast<int>(j), v);
    }
  return first_column + static_cast<int>(local_columns.cols());
}

inline ColumnSparseMatrix make_basis(Index rows, int cols, const std::vector<Triplet>& trip) {
  ColumnSparseMatrix Z(rows, cols);
  Z.setFromTriplets(trip.begin(), trip.end());
  Z.makeCompressed();
  return Z;
}

/// Indices with Re(lambda) <= rho^2 (ties included) or the m smallest.
inline std::vector<int> select_smallest_real(const Vector& values, const SelectionRule& rule) {
  std::vector<int> out;
  const int m = static_cast<int>(values.size());
  if (rule.fixed_count) {
    for (int i = 0; i < std::min(m, *rule.fixed_count); ++i) out.push_back(i);
    return out;
  }
  const double threshold = rule.rho * rule.rho;
  for (int i = 0; i < m; ++i)
    if (values[i].real() <= threshold) out.push_back(i);
  return out;
}

}  // namespace detail

inline std::vector<SpectralSelection> select_spectral(const std::vector<HarmonicBasis>& bases,
                                                      const SelectionRule& rule) {
  std::vector<SpectralSelection> out;
  out.reserve(bases.size());
  for (const auto& b : bases) out.push_back(build_spectral_local(b, rule));
  return out;
}

inline std::vector<HarmonicBasis> build_harmonic_bases(const Decomposition& decomp) {
  std::vector<HarmonicBasis> out;
  out.reserve(decomp.count());
  for (std::size_t l = 0; l < decomp.count(); ++l) out.push_back(build_harmonic_basis(decomp, l));
  return out;
}

inline CoarseSpace build_coarse_spectral(const Decomposition& decomp, const std::vector<HarmonicBasis>& bases,
                                         const std::vector<SpectralSelection>& selections, const SparseMatrix& A) {
  CoarseSpace cs = empty_coarse_space(decomp);
  cs.kind = CoarseKind::spectral;
  std::vector<Triplet> trip;
  int column = 0;
  for (std::size_t l = 0; l < decomp.count(); ++l) {
    const SpectralSelection& sel = selections[l];
    DenseMatrix local(bases[l].H.rows(), sel.selected_count());
    for (int k = 0; k < sel.selected_count(); ++k)
      local.col(k) = bases[l].H * sel.eigenvectors.col(sel.selected[static_cast<std::size_t>(k)]);
    column = detail::append_weighted_columns(decomp, l, local, column, trip);
    cs.per_subdomain[l] = sel.selected_count();
  }
  cs.Z = detail::make_basis(decomp.global_size, column, trip);
  finalize_coarse_space(cs, A);
  return cs;
}

inline CoarseSpace build_coarse_spectral(const Decomposition& decomp, const SelectionRule& rule,
                                         const SparseMatrix& A) {
  const auto bases = build_harmonic_bases(decomp);
  return build_coarse_spectral(decomp, bases, select_spectral(bases, rule), A);
}

struct EconomicParams {
  int nu = 1;  // intervals of the 1D coarse trace mesh on [0, 1]
};

/// Quadratic Lagrange basis on [0, 1] with nu intervals; node k sits at k / (2 nu).
/// On a periodic space node 2 nu is identified with node 0.
inline double quadratic_trace_basis(int k, double t, int nu, bool periodic) {
  t = std::clamp(t, 0.0, 1.0);
  const int e = std::min(static_cast<int>(std::floor(t * nu)), nu - 1);
  const double s = t * nu - e;
  const double left = (1.0 - s) * (1.0 - 2.0 * s);
  const double right = s * (2.0 * s - 1.0);
  const double mid = 4.0 * s * (1.0 - s);
  int right_node = 2 * e + 2;
  if (periodic && right_node == 2 * nu) right_node = 0;
  double value = 0.0;
  if (k == 2 * e) value += left;
  if (k == 2 * e + 1) value += mid;
  if (k == right_node) value += right;
  return value;
}

inline int trace_space_dimension(int nu, bool periodic) { return periodic ? 2 * nu : 2 * nu + 1; }

/// One connected piece of the interior boundary Gamma_l, traversed
/// counterclockwise around the subdomain, with an arclength parameter in
/// [0, 1] for each DOF on it.
struct TraceCurve {
  bool closed = false;
  std::vector<std::pair<int, double>> dof_parameters;  // (local DOF, t)
};

inline std::vector<TraceCurve> interior_boundary_curves(const Mesh& mesh, const DofMap& dofs, const Subdomain& sub) {
  std::map<int, EdgeRef> outgoing;
  std::map<int, int> incoming_count;
  for (const EdgeRef& e : sub.cut_edges) {
    const auto [a, b] = mesh.edge_vertices(e);
    outgoing[a] = e;
    ++incoming_count[b];
  }
  auto lexicographic_less = [&](int u, int v) {
    const Point& pu = mesh.vertices[static_cast<std::size_t>(u)];
    const Point& pv = mesh.vertices[static_cast<std::size_t>(v)];
    return pu.x != pv.x ? pu.x < pv.x : pu.y < pv.y;
  };

  std::vector<std::pair<int, bool>> starts;  // (start vertex, closed)
  for (const auto& [v, e] : outgoing)
    if (incoming_count.find(v) == incoming_count.end()) starts.emplace_back(v, false);

  std::map<int, char> visited;
  auto walk = [&](int start, bool closed) {
    std::vector<EdgeRef> chain;
    int v = start;
    while (true) {
      const auto it = outgoing.find(v);
      if (it == outgoing.end() || visited.count(v)) break;
      visited[v] = 1;
      chain.push_back(it->second);
      v = mesh.edge_vertices(it->second)[1];
      if (closed && v == start) break;
    }
    TraceCurve curve;
    curve.closed = closed;
    double total = 0.0;
    for (const EdgeRef& e : chain) total += mesh.edge_length(e);
    double s = 0.0;
    for (std::size_t k = 0; k < chain.size(); ++k) {
      const EdgeRef& e = chain[k];
      const double len = mesh.edge_length(e);
      const auto ed = dofs.edge_dofs(e);
      curve.dof_parameters.emplace_back(sub.local_index(ed[0]), s / total);
      if (ed.size() == 3) curve.dof_parameters.emplace_back(sub.local_index(ed[2]), (s + 0.5 * len) / total);
      s += len;
      if (k + 1 == chain.size() && !closed) curve.dof_parameters.emplace_back(sub.local_index(ed[1]), 1.0);
    }
    return curve;
  };

  std::vector<TraceCurve> curves;
  std::sort(starts.begin(), starts.end(), [&](const auto& a, const auto& b) { return lexicographic_less(a.first, b.first); });
  for (const auto& [v, closed] : starts) curves.push_back(walk(v, closed));
  while (true) {
    std::optional<int> smallest;
    for (const auto& [v, e] : outgoing)
      if (!visited.count(v) && (!smallest || lexicographic_less(v, *smallest))) smallest = v;
    if (!smallest) break;
    curves.push_back(walk(*smallest, true));
  }
  return curves;
}

/// Trace data of the economic space on one subdomain: one column per 1D
/// basis function per interior-boundary curve, zero off Gamma_l.
inline DenseMatrix economic_trace_data(const Mesh& mesh, const DofMap& dofs, const Subdomain& sub,
                                       const EconomicParams& ep) {
  const auto curves = interior_boundary_curves(mesh, dofs, sub);
  int columns = 0;
  for (const auto& c : curves) columns += trace_space_dimension(ep.nu, c.closed);
  DenseMatrix data = DenseMatrix::Zero(sub.size(), columns);
  int col = 0;
  for (const auto& c : curves) {
    const int dim = trace_space_dimension(ep.nu, c.closed);
    for (int k = 0; k < dim; ++k, ++col)
      for (const auto& [dof, t] : c.dof_parameters) data(dof, col) = quadratic_trace_basis(k, t, ep.nu, c.closed);
  }
  return data;
}

inline CoarseSpace build_coarse_economic(const Decomposition& decomp, const Mesh& mesh, const DofMap& dofs,
                                         const EconomicParams& ep, const SparseMatrix& A) {
  if (ep.nu < 1) throw Error("economic coarse space needs nu >= 1");
  if (decomp.local.size() != decomp.count()) throw Error("subdomains are not factorized");
  CoarseSpace cs = empty_coarse_space(decomp);
  cs.kind = CoarseKind::economic;
  std::vector<Triplet> trip;
  int column = 0;
  for (std::size_t l = 0; l < decomp.count(); ++l) {
    const Subdomain& sub = decomp.subdomains[l];
    if (sub.cut_edges.empty()) continue;
    const DenseMatrix lambda = economic_trace_data(mesh, dofs, sub, ep);
    const DenseMatrix load = decomp.local[l].cut_mass * lambda;
    const DenseMatrix ext = decomp.local[l].factor.solve(load);
    column = detail::append_weighted_columns(decomp, l, ext, column, trip);
    cs.per_subdomain[l] = static_cast<int>(ext.cols());
  }
  cs.Z = detail::make_basis(decomp.global_size, column, trip);
  finalize_coarse_space(cs, A);
  return cs;
}

/// Fine-grid nodal interpolants of the P1 hat functions of a structured
/// coarse grid with `intervals` cells per side (same diagonal split).
inline ColumnSparseMatrix coarse_grid_interpolation(int intervals, const DofMap& dofs) {
  const int nc = intervals;
  std::vector<Triplet> trip;
  auto vertex = [nc](int i, int j) { return j * (nc + 1) + i; };
  for (int d = 0; d < dofs.count; ++d) {
    const Point& x = dofs.coords[static_cast<std::size_t>(d)];
    const double X = x.x * nc, Y = x.y * nc;
    const int ci = std::min(static_cast<int>(std::floor(X)), nc - 1);
    const int cj = std::min(static_cast<int>(std::floor(Y)), nc - 1);
    const double xi = X - ci, eta = Y - cj;
    std::array<std::pair<int, double>, 3> values{};
    if (xi >= eta) {
      values = {{{vertex(ci, cj), 1.0 - xi}, {vertex(ci + 1, cj), xi - eta}, {vertex(ci + 1, cj + 1), eta}}};
    } else {
      values = {{{vertex(ci, cj), 1.0 - eta}, {vertex(ci + 1, cj + 1), xi}, {vertex(ci, cj + 1), eta - xi}}};
    }
    for (const auto& [v, w] : values)
      if (std::abs(w) > 1e-14) trip.emplace_back(d, v, Complex(w, 0.0));
  }
  return detail::make_basis(dofs.count, (nc + 1) * (nc + 1), trip);
}

inline CoarseSpace build_coarse_grid(int intervals, const Decomposition& decomp, const Mesh& mesh,
                                     const DofMap& dofs, const SparseMatrix& A) {
  if (intervals < 1 || intervals > mesh.n) throw Error("coarse grid must have between 1 and n intervals");
  CoarseSpace cs = empty_coarse_space(decomp);
  cs.kind = CoarseKind::grid;
  cs.Z = coarse_grid_interpolation(intervals, dofs);
  finalize_coarse_space(cs, A);
  return cs;
}

/// DtN eigenpairs of one subdomain in harmonic-basis coordinates:
/// (H* A_neumann H) xi = lambda (H* M_Gamma H) xi.
inline EigenPairs dtn_local_pairs(const HarmonicBasis& basis, const LocalOperators& ops, double null_tol = 1e-10) {
  const DenseMatrix a = basis.H.adjoint() * (ops.neumann * basis.H);
  const DenseMatrix b = basis.H.adjoint() * (ops.cut_mass * basis.H);
  return eig_general(a, 0.5 * (b + b.adjoint()), null_tol);
}

inline CoarseSpace build_coarse_dtn(const Decomposition& decomp, const std::vector<HarmonicBasis>& bases,
                                    const SelectionRule& rule, const SparseMatrix& A) {
  CoarseSpace cs = empty_coarse_space(decomp);
  cs.kind = CoarseKind::dtn;
  std::vector<Triplet> trip;
  int column = 0;
  for (std::size_t l = 0; l < decomp.count(); ++l) {
    if (decomp.subdomains[l].cut_edges.empty()) continue;
    const EigenPairs pairs = dtn_local_pairs(bases[l], decomp.local[l]);
    const auto chosen = detail::select_smallest_real(pairs.values, rule);
    DenseMatrix local(bases[l].H.rows(), static_cast<Index>(chosen.size()));
    for (std::size_t k = 0; k < chosen.size(); ++k)
      local.col(static_cast<Index>(k)) = bases[l].H * pairs.vectors.col(chosen[k]);
    column = detail::append_weighted_columns(decomp, l, local, column, trip);
    cs.per_subdomain[l] = static_cast<int>(chosen.size());
  }
  cs.Z = detail::make_basis(decomp.global_size, column, trip);
  finalize_coarse_space(cs, A);
  return cs;
}

/// HGenEO eigenpairs over all local DOFs: A_neumann xi = lambda (W K W) xi.
inline EigenPairs hgeneo_local_pairs(const Decomposition& decomp, std::size_t l, double null_tol = 1e-10) {
  const LocalOperators& ops = decomp.local[l];
  const DenseMatrix a = to_dense(ops.neumann);
  const auto w = decomp.pou.weights[l].cast<Complex>().asDiagonal();
  const DenseMatrix b = w * to_dense(ops.stiffness) * w;
  return eig_general(a, 0.5 * (b + b.adjoint()), null_tol);
}

inline CoarseSpace build_coarse_hgeneo(const Decomposition& decomp, const SelectionRule& rule,
                                       const SparseMatrix& A) {
  if (decomp.local.size() != decomp.count()) throw Error("subdomains are not factorized");
  CoarseSpace cs = empty_coarse_space(decomp);
  cs.kind = CoarseKind::hgeneo;
  std::vector<Triplet> trip;
  int column = 0;
  for (std::size_t l = 0; l < decomp.count(); ++l) {
    const EigenPairs pairs = hgeneo_local_pairs(decomp, l);
    const auto chosen = detail::select_smallest_real(pairs.values, rule);
    DenseMatrix local(decomp.subdomains[l].size(), static_cast<Index>(chosen.size()));
    for (std::size_t k = 0; k < chosen.size(); ++k) local.col(static_cast<Index>(k)) = pairs.vectors.col(chosen[k]);
    column = detail::append_weighted_columns(decomp, l, local, column, trip);
    cs.per_subdomain[l] = static_cast<int>(chosen.size());
  }
  cs.Z = detail::make_basis(decomp.global_size, column, trip);
  finalize_coarse_space(cs, A);
  return cs;
}

}  // namespace helmddm
