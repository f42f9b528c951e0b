#pragma once

// Overlapping box decomposition of the unit square, restriction/prolongation
// maps and the partition of unity behind the weight operators.

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "helmddm/fem.hpp"
#include "helmddm/linalg.hpp"

namespace helmddm {

enum class OverlapMode { minimal, generous };

struct DecompParams {
  int per_side = 1;  // M; there are M^2 subdomains
  OverlapMode overlap = OverlapMode::generous;
  std::optional<int> fixed_layers;  // overrides the overlap mode

  /// Element layers added around each box. Generous overlap grows each side
  /// by L so that neighbours share about 2L layers, i.e. a quarter of d.
  int layers(int n) const {
    if (fixed_layers) {
      if (*fixed_layers < 1) throw Error("overlap needs at least one layer");
      return *fixed_layers;
    }
    if (overlap == OverlapMode::minimal) return 1;
    return std::max(1, static_cast<int>(std::lround(static_cast<double>(n) / (8.0 * per_side))));
  }
};

/// Half-open range of square cells [i0, i1) x [j0, j1).
struct CellBox {
  int i0 = 0, i1 = 0, j0 = 0, j1 = 0;

  bool overlaps(const CellBox& o) const {
    return i0 < o.i1 && o.i0 < i1 && j0 < o.j1 && o.j0 < j1;
  }
};

struct Subdomain {
  int index = 0;
  CellBox core;  // the non-overlapping box
  CellBox box;   // after overlap growth
  std::vector<int> cells;  // triangles, ascending
  std::vector<int> dofs;   // global DOF indices, ascending
  std::vector<char> on_boundary;        // DOF lies on the subdomain boundary
  std::vector<char> cut_boundary;       // DOF lies on the closure of the interior boundary
  std::vector<char> physical_boundary;  // DOF lies on a boundary edge shared with the square
  std::vector<EdgeRef> boundary_edges;
  std::vector<EdgeRef> cut_edges;
  std::vector<EdgeRef> physical_edges;

  int size() const noexcept { return static_cast<int>(dofs.size()); }

  int local_index(int global) const {
    const auto it = std::lower_bound(dofs.begin(), dofs.end(), global);
    if (it == dofs.end() || *it != global) return -1;
    return static_cast<int>(it - dofs.begin());
  }

  LocalNumbering numbering() const { return LocalNumbering(&dofs); }

  /// Local indices of DOFs on the subdomain boundary, ascending.
  std::vector<int> boundary_dofs() const {
    std::vector<int> out;
    for (int k = 0; k < size(); ++k)
      if (on_boundary[static_cast<std::size_t>(k)]) out.push_back(k);
    return out;
  }

  std::vector<int> cut_dofs() const {
    std::vector<int> out;
    for (int k = 0; k < size(); ++k)
      if (cut_boundary[static_cast<std::size_t>(k)]) out.push_back(k);
    return out;
  }
};

inline void mark_edge_dofs(const DofMap& dofs, const Subdomain& sub, std::span<const EdgeRef> edges,
                           std::vector<char>& flags) {
  for (const EdgeRef& e : edges)
    for (const int g : dofs.edge_dofs(e)) flags[static_cast<std::size_t>(sub.local_index(g))] = 1;
}

/// Boxes aligned to the cell grid, box (a, b) covering cell columns
/// [floor(a n / M), floor((a + 1) n / M)), each grown `layers` times by every
/// cell sharing a vertex with the current set. Subdomain l = b * M + a.
inline std::vector<Subdomain> build_decomposition(const Mesh& mesh, const DofMap& dofs, const DecompParams& dp) {
  const int n = mesh.n;
  const int M = dp.per_side;
  if (M < 1) throw Error("need at least one subdomain per side");
  if (M > n) throw Error("more subdomains per side than mesh intervals");
  const int layers = dp.layers(n);
  const int p = dofs.order;

  std::vector<Subdomain> out;
  out.reserve(static_cast<std::size_t>(M * M));
  for (int b = 0; b < M; ++b) {
    for (int a = 0; a < M; ++a) {
      Subdomain sub;
      sub.index = b * M + a;
      sub.core = {a * n / M, (a + 1) * n / M, b * n / M, (b + 1) * n / M};
      sub.box = {std::max(0, sub.core.i0 - layers), std::min(n, sub.core.i1 + layers),
                 std::max(0, sub.core.j0 - layers), std::min(n, sub.core.j1 + layers)};
      const CellBox& bx = sub.box;
      for (int j = bx.j0; j < bx.j1; ++j)
        for (int i = bx.i0; i < bx.i1; ++i) {
          sub.cells.push_back(mesh.triangle_index(i, j, 0));
          sub.cells.push_back(mesh.triangle_index(i, j, 1));
        }
      std::sort(sub.cells.begin(), sub.cells.end());
      for (int y = p * bx.j0; y <= p * bx.j1; ++y)
        for (int x = p * bx.i0; x <= p * bx.i1; ++x) sub.dofs.push_back(dofs.index(x, y));

      sub.boundary_edges = boundary_edges_of(mesh, sub.cells);
      for (const EdgeRef& e : sub.boundary_edges)
        (edge_on_domain_boundary(mesh, e) ? sub.physical_edges : sub.cut_edges).push_back(e);

      const auto size = static_cast<std::size_t>(sub.size());
      sub.on_boundary.assign(size, 0);
      sub.cut_boundary.assign(size, 0);
      sub.physical_boundary.assign(size, 0);
      mark_edge_dofs(dofs, sub, sub.boundary_edges, sub.on_boundary);
      mark_edge_dofs(dofs, sub, sub.cut_edges, sub.cut_boundary);
      mark_edge_dofs(dofs, sub, sub.physical_edges, sub.physical_boundary);
      out.push_back(std::move(sub));
    }
  }
  return out;
}

struct PartitionOfUnity {
  std::vector<RealVector> weights;  // chi_l at the DOFs of subdomain l
};

/// theta_l(x) = min(L + 1, hop distance from x to the nearest cut-boundary DOF
/// of subdomain l), hops taken between DOFs sharing a triangle;
/// chi_l = theta_l / sum_j theta_j.
inline PartitionOfUnity build_pou(const std::vector<Subdomain>& subdomains, const DofMap& dofs, int layers) {
  const int cap = layers + 1;
  std::vector<std::vector<int>> theta(subdomains.size());
  std::vector<int> total(static_cast<std::size_t>(dofs.count), 0);

  for (std::size_t l = 0; l < subdomains.size(); ++l) {
    const Subdomain& sub = subdomains[l];
    const auto size = static_cast<std::size_t>(sub.size());
    std::vector<std::vector<int>> adjacency(size);
    for (const int t : sub.cells) {
      const auto c = dofs.cell(t);
      for (const int gi : c) {
        const int li = sub.local_index(gi);
        for (const int gj : c)
          if (gj != gi) adjacency[static_cast<std::size_t>(li)].push_back(sub.local_index(gj));
      }
    }
    std::vector<int> dist(size, cap);
    std::deque<int> queue;
    for (std::size_t k = 0; k < size; ++k)
      if (sub.cut_boundary[k]) {
        dist[k] = 0;
        queue.push_back(static_cast<int>(k));
      }
    while (!queue.empty()) {
      const int k = queue.front();
      queue.pop_front();
      const int next = dist[static_cast<std::size_t>(k)] + 1;
      if (next >= cap) continue;
      for (const int m : adjacency[static_cast<std::size_t>(k)]) {
        if (dist[static_cast<std::size_t>(m)] > next) {
          dist[static_cast<std::size_t>(m)] = next;
          queue.push_back(m);
        }
      }
    }
    for (std::size_t k = 0; k < size; ++k) total[static_cast<std::size_t>(sub.dofs[k])] += dist[k];
    theta[l] = std::move(dist);
  }

  for (int g = 0; g < dofs.count; ++g)
    if (total[static_cast<std::size_t>(g)] == 0)
      throw Error("partition of unity undefined: DOF " + std::to_string(g) + " has no positive weight");

  PartitionOfUnity pou;
  pou.weights.resize(subdomains.size());
  for (std::size_t l = 0; l < subdomains.size(); ++l) {
    const Subdomain& sub = subdomains[l];
    RealVector w(sub.size());
    for (int k = 0; k < sub.size(); ++k)
      w[k] = static_cast<double>(theta[l][static_cast<std::size_t>(k)]) /
             static_cast<double>(total[static_cast<std::size_t>(sub.dofs[static_cast<std::size_t>(k)])]);
    pou.weights[l] = std::move(w);
  }
  return pou;
}

/// R_l: pick the subdomain's DOFs.
inline Vector restrict_to(const Subdomain& sub, const Vector& global) {
  Vector local(sub.size());
  for (int k = 0; k < sub.size(); ++k) local[k] = global[sub.dofs[static_cast<std::size_t>(k)]];
  return local;
}

/// global += E_l local.
inline void add_prolonged(const Subdomain& sub, const Vector& local, Vector& global) {
  require_dims(local.size() == sub.size(), "prolong");
  for (int k = 0; k < sub.size(); ++k) global[sub.dofs[static_cast<std::size_t>(k)]] += local[k];
}

/// E_l: zero extension.
inline Vector prolong(const Subdomain& sub, const Vector& local, Index global_size) {
  Vector global = Vector::Zero(global_size);
  add_prolonged(sub, local, global);
  return global;
}

/// Nodal multiplication by chi_l.
inline Vector weight(const RealVector& chi, const Vector& local) {
  require_dims(chi.size() == local.size(), "weight");
  return chi.cast<Complex>().cwiseProduct(local);
}

/// Matrices and factorization of one subdomain problem.
struct LocalOperators {
  SparseMatrix impedance;      // A_{eps,l}: impedance on the whole subdomain boundary
  SparseMatrix neumann;        // impedance only on the physical part of the boundary
  SparseMatrix weighted_h1;    // S_l = K_l + kappa^2 M_l
  SparseMatrix stiffness;      // K_l
  SparseMatrix boundary_mass;  // on the whole subdomain boundary
  SparseMatrix cut_mass;       // on the interior boundary
  SparseLU factor;             // of `impedance`
};

inline LocalOperators build_local_operators(const ProblemParams& params, const Mesh& mesh, const DofMap& dofs,
                                            const Subdomain& sub) {
  if (sub.dofs.empty() || sub.cells.empty()) throw Error("empty subdomain");
  const LocalNumbering numbering = sub.numbering();
  VolumeForms forms = assemble_volume_forms(mesh, dofs, sub.cells, numbering);
  LocalOperators ops;
  ops.boundary_mass = assemble_boundary_mass_on(mesh, dofs, sub.boundary_edges, numbering);
  ops.cut_mass = assemble_boundary_mass_on(mesh, dofs, sub.cut_edges, numbering);
  const SparseMatrix physical_mass = assemble_boundary_mass_on(mesh, dofs, sub.physical_edges, numbering);
  ops.impedance = helmholtz_operator(params, forms.stiffness, forms.mass, ops.boundary_mass);
  ops.neumann = helmholtz_operator(params, forms.stiffness, forms.mass, physical_mass);
  ops.weighted_h1 = weighted_h1_operator(params, forms.stiffness, forms.mass);
  ops.stiffness = std::move(forms.stiffness);
  ops.factor = SparseLU(ops.impedance);
  return ops;
}

struct Decomposition {
  DecompParams params;
  int layers = 1;
  Index global_size = 0;
  std::vector<Subdomain> subdomains;
  PartitionOfUnity pou;
  std::vector<LocalOperators> local;  // empty until factorized

  std::size_t count() const noexcept { return subdomains.size(); }

  /// Largest local DOF count over all subdomains.
  int max_local_size() const {
    int m = 0;
    for (const auto& s : subdomains) m = std::max(m, s.size());
    return m;
  }

  /// #Lambda(l): subdomains sharing at least one cell with l, itself included.
  int neighbour_count(std::size_t l) const {
    int c = 0;
    for (const auto& s : subdomains) c += s.box.overlaps(subdomains[l].box) ? 1 : 0;
    return c;
  }
};

/// Geometry and partition of unity only.
inline Decomposition decompose(const Mesh& mesh, const DofMap& dofs, const DecompParams& dp) {
  Decomposition d;
  d.params = dp;
  d.layers = dp.layers(mesh.n);
  d.global_size = dofs.count;
  d.subdomains = build_decomposition(mesh, dofs, dp);
  d.pou = build_pou(d.subdomains, dofs, d.layers);
  return d;
}

/// Geometry, partition of unity and factorized local impedance problems.
inline Decomposition decompose(const ProblemParams& params, const Mesh& mesh, const DofMap& dofs,
                               const DecompParams& dp) {
  Decomposition d = decompose(mesh, dofs, dp);
  d.local.reserve(d.subdomains.size());
  for (const Subdomain& sub : d.subdomains) d.local.push_back(build_local_operators(params, mesh, dofs, sub));
  return d;
}

}  // namespace helmddm
