#pragma once

// Structured triangulation of the unit square, P1/P2 nodal spaces and the
// sesquilinear forms of the Helmholtz problem with absorption:
//
//   a(u, v) = (grad u, grad v) - (kappa^2 + i eps)(u, v) - i kappa <u, v>_boundary
//
// Every square cell (i, j) is split by the diagonal from (i/n, j/n) to
// ((i+1)/n, (j+1)/n). Degrees of freedom of order p live on the uniform
// lattice of (p n + 1)^2 points, so P2 midpoints need no separate numbering.

#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "helmddm/linalg.hpp"

namespace helmddm {

struct ProblemParams {
  double kappa = 1.0;
  double epsilon = 0.0;

  void validate() const {
    if (!(kappa > 0.0)) throw Error("kappa must be positive");
    if (!(epsilon >= 0.0)) throw Error("epsilon must be nonnegative");
  }
};

struct MeshParams {
  int n = 1;
  int order = 1;
  double gamma = 0.0;  // pollution exponent, metadata only
};

/// n = ceil(kappa^{(2p+1)/(2p)}), capped at n_max.
inline int auto_mesh_intervals(double kappa, int order, int n_max) {
  const double exponent = (2.0 * order + 1.0) / (2.0 * order);
  const int n = static_cast<int>(std::ceil(std::pow(kappa, exponent) - 1e-9));
  return std::clamp(n, 1, std::max(1, n_max));
}

struct Point {
  double x = 0.0;
  double y = 0.0;
};

enum class Side : std::uint8_t { bottom, right, top, left };

inline Point outward_normal(Side side) {
  switch (side) {
    case Side::bottom: return {0.0, -1.0};
    case Side::right: return {1.0, 0.0};
    case Side::top: return {0.0, 1.0};
    case Side::left: return {-1.0, 0.0};
  }
  return {};
}

/// Local edge k of a triangle joins local vertices k and (k + 1) % 3.
struct EdgeRef {
  int triangle = 0;
  int local_edge = 0;
};

struct BoundaryEdge {
  EdgeRef edge;
  Side side = Side::bottom;
};

struct Mesh {
  int n = 1;
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<BoundaryEdge> boundary;

  double h() const noexcept { return 1.0 / n; }
  int vertex_index(int i, int j) const noexcept { return j * (n + 1) + i; }
  /// Triangle `upper` (0 = below the diagonal, 1 = above) of square cell (i, j).
  int triangle_index(int i, int j, int upper) const noexcept { return 2 * (j * n + i) + upper; }
  int triangle_count() const noexcept { return static_cast<int>(triangles.size()); }

  std::array<int, 2> edge_vertices(EdgeRef e) const {
    const auto& t = triangles[static_cast<std::size_t>(e.triangle)];
    return {t[static_cast<std::size_t>(e.local_edge)],
            t[static_cast<std::size_t>((e.local_edge + 1) % 3)]};
  }

  double edge_length(EdgeRef e) const {
    const auto [a, b] = edge_vertices(e);
    return std::hypot(vertices[b].x - vertices[a].x, vertices[b].y - vertices[a].y);
  }
};

struct DofMap {
  int order = 1;
  int lattice = 1;  // order * n; DOFs sit at (a, b) / lattice for 0 <= a, b <= lattice
  int count = 0;
  int dofs_per_cell = 3;
  std::vector<int> cell_dofs;  // dofs_per_cell entries per triangle
  std::vector<Point> coords;
  std::vector<char> on_boundary;

  int index(int a, int b) const noexcept { return b * (lattice + 1) + a; }
  int lattice_x(int dof) const noexcept { return dof % (lattice + 1); }
  int lattice_y(int dof) const noexcept { return dof / (lattice + 1); }

  std::span<const int> cell(int t) const {
    return {cell_dofs.data() + static_cast<std::size_t>(t) * dofs_per_cell,
            static_cast<std::size_t>(dofs_per_cell)};
  }

  /// Endpoint DOFs of the edge followed by its midpoint DOF for P2.
  std::vector<int> edge_dofs(EdgeRef e) const {
    const auto c = cell(e.triangle);
    std::vector<int> out{c[static_cast<std::size_t>(e.local_edge)],
                         c[static_cast<std::size_t>((e.local_edge + 1) % 3)]};
    if (order == 2) out.push_back(c[static_cast<std::size_t>(3 + e.local_edge)]);
    return out;
  }
};

inline std::pair<Mesh, DofMap> build_mesh(const MeshParams& mp) {
  if (mp.n < 1) throw Error("mesh needs at least one interval per side");
  if (mp.order != 1 && mp.order != 2) throw Error("polynomial order must be 1 or 2");
  const int n = mp.n;
  Mesh mesh;
  mesh.n = n;
  mesh.vertices.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      mesh.vertices.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});

  mesh.triangles.resize(static_cast<std::size_t>(2 * n * n));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int v00 = mesh.vertex_index(i, j), v10 = mesh.vertex_index(i + 1, j);
      const int v11 = mesh.vertex_index(i + 1, j + 1), v01 = mesh.vertex_index(i, j + 1);
      mesh.triangles[static_cast<std::size_t>(mesh.triangle_index(i, j, 0))] = {v00, v10, v11};
      mesh.triangles[static_cast<std::size_t>(mesh.triangle_index(i, j, 1))] = {v00, v11, v01};
    }
  }
  // Lower triangles own the bottom (edge 0) and right (edge 1) sides of their
  // square; upper triangles own the top (edge 1) and left (edge 2) sides.
  for (int i = 0; i < n; ++i) {
    mesh.boundary.push_back({{mesh.triangle_index(i, 0, 0), 0}, Side::bottom});
    mesh.boundary.push_back({{mesh.triangle_index(i, n - 1, 1), 1}, Side::top});
  }
  for (int j = 0; j < n; ++j) {
    mesh.boundary.push_back({{mesh.triangle_index(n - 1, j, 0), 1}, Side::right});
    mesh.boundary.push_back({{mesh.triangle_index(0, j, 1), 2}, Side::left});
  }

  DofMap dofs;
  dofs.order = mp.order;
  dofs.lattice = mp.order * n;
  dofs.count = (dofs.lattice + 1) * (dofs.lattice + 1);
  dofs.dofs_per_cell = mp.order == 1 ? 3 : 6;
  dofs.coords.resize(static_cast<std::size_t>(dofs.count));
  dofs.on_boundary.assign(static_cast<std::size_t>(dofs.count), 0);
  for (int b = 0; b <= dofs.lattice; ++b) {
    for (int a = 0; a <= dofs.lattice; ++a) {
      const int d = dofs.index(a, b);
      dofs.coords[static_cast<std::size_t>(d)] = {static_cast<double>(a) / dofs.lattice,
                                                  static_cast<double>(b) / dofs.lattice};
      dofs.on_boundary[static_cast<std::size_t>(d)] =
          (a == 0 || b == 0 || a == dofs.lattice || b == dofs.lattice) ? 1 : 0;
    }
  }
  const int p = mp.order;
  dofs.cell_dofs.reserve(mesh.triangles.size() * static_cast<std::size_t>(dofs.dofs_per_cell));
  for (const auto& t : mesh.triangles) {
    std::array<std::array<int, 2>, 3> lat{};
    for (int k = 0; k < 3; ++k) {
      const int v = t[static_cast<std::size_t>(k)];
      lat[static_cast<std::size_t>(k)] = {p * (v % (n + 1)), p * (v / (n + 1))};
    }
    for (int k = 0; k < 3; ++k)
      dofs.cell_dofs.push_back(dofs.index(lat[static_cast<std::size_t>(k)][0], lat[static_cast<std::size_t>(k)][1]));
    if (p == 2) {
      for (int k = 0; k < 3; ++k) {
        const auto& a = lat[static_cast<std::size_t>(k)];
        const auto& b = lat[static_cast<std::size_t>((k + 1) % 3)];
        dofs.cell_dofs.push_back(dofs.index((a[0] + b[0]) / 2, (a[1] + b[1]) / 2));
      }
    }
  }
  return {std::move(mesh), std::move(dofs)};
}

namespace quadrature {

struct TrianglePoint {
  std::array<double, 3> bary;
  double weight;  // fraction of the triangle area
};

/// Six-point rule, exact for polynomials of degree 4.
inline const std::array<TrianglePoint, 6>& triangle_degree4() {
  static const std::array<TrianglePoint, 6> rule = [] {
    const double a1 = 0.445948490915965, b1 = 0.108103018168070, w1 = 0.223381589678011;
    const double a2 = 0.091576213509771, b2 = 0.816847572980459, w2 = 0.109951743655322;
    return std::array<TrianglePoint, 6>{{{{b1, a1, a1}, w1},
                                         {{a1, b1, a1}, w1},
                                         {{a1, a1, b1}, w1},
                                         {{b2, a2, a2}, w2},
                                         {{a2, b2, a2}, w2},
                                         {{a2, a2, b2}, w2}}};
  }();
  return rule;
}

struct LinePoint {
  double t;       // position in [0, 1]
  double weight;  // fraction of the segment length
};

inline const std::array<LinePoint, 3>& gauss3() {
  static const std::array<LinePoint, 3> rule = [] {
    const double s = 0.5 * std::sqrt(3.0 / 5.0);
    return std::array<LinePoint, 3>{{{0.5 - s, 5.0 / 18.0}, {0.5, 8.0 / 18.0}, {0.5 + s, 5.0 / 18.0}}};
  }();
  return rule;
}

inline const std::array<LinePoint, 5>& gauss5() {
  static const std::array<LinePoint, 5> rule = [] {
    const double x1 = std::sqrt(5.0 - 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
    const double x2 = std::sqrt(5.0 + 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
    const double w0 = 128.0 / 225.0;
    const double w1 = (322.0 + 13.0 * std::sqrt(70.0)) / 900.0;
    const double w2 = (322.0 - 13.0 * std::sqrt(70.0)) / 900.0;
    return std::array<LinePoint, 5>{{{0.5 * (1.0 - x2), 0.5 * w2},
                                     {0.5 * (1.0 - x1), 0.5 * w1},
                                     {0.5, 0.5 * w0},
                                     {0.5 * (1.0 + x1), 0.5 * w1},
                                     {0.5 * (1.0 + x2), 0.5 * w2}}};
  }();
  return rule;
}

}  // namespace quadrature

/// 1D Lagrange basis on an edge parametrized by t in [0, 1], ordered as
/// DofMap::edge_dofs: start, end, midpoint.
inline std::array<double, 3> edge_basis(int order, double t) {
  if (order == 1) return {1.0 - t, t, 0.0};
  return {(1.0 - t) * (1.0 - 2.0 * t), t * (2.0 * t - 1.0), 4.0 * t * (1.0 - t)};
}

struct ElementMatrices {
  Eigen::MatrixXd stiffness;
  Eigen::MatrixXd mass;
};

struct TriangleGeometry {
  double area = 0.0;
  std::array<std::array<double, 2>, 3> grad_bary{};  // gradients of the barycentric coordinates
};

inline TriangleGeometry triangle_geometry(const Mesh& mesh, int t) {
  const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
  const Point& p0 = mesh.vertices[static_cast<std::size_t>(tri[0])];
  const Point& p1 = mesh.vertices[static_cast<std::size_t>(tri[1])];
  const Point& p2 = mesh.vertices[static_cast<std::size_t>(tri[2])];
  const double det = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
  TriangleGeometry g;
  g.area = 0.5 * det;
  g.grad_bary[0] = {(p1.y - p2.y) / det, (p2.x - p1.x) / det};
  g.grad_bary[1] = {(p2.y - p0.y) / det, (p0.x - p2.x) / det};
  g.grad_bary[2] = {(p0.y - p1.y) / det, (p1.x - p0.x) / det};
  return g;
}

/// Values of the local nodal basis at barycentric point `l`.
inline void local_basis(int order, const std::array<double, 3>& l, double* values) {
  if (order == 1) {
    values[0] = l[0];
    values[1] = l[1];
    values[2] = l[2];
    return;
  }
  for (int k = 0; k < 3; ++k) {
    values[k] = l[static_cast<std::size_t>(k)] * (2.0 * l[static_cast<std::size_t>(k)] - 1.0);
    values[3 + k] = 4.0 * l[static_cast<std::size_t>(k)] * l[static_cast<std::size_t>((k + 1) % 3)];
  }
}

inline ElementMatrices element_matrices(const Mesh& mesh, int t, int order) {
  const TriangleGeometry g = triangle_geometry(mesh, t);
  const auto& gb = g.grad_bary;
  ElementMatrices em;
  if (order == 1) {
    em.stiffness.resize(3, 3);
    em.mass.resize(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        em.stiffness(i, j) = g.area * (gb[static_cast<std::size_t>(i)][0] * gb[static_cast<std::size_t>(j)][0] +
                                       gb[static_cast<std::size_t>(i)][1] * gb[static_cast<std::size_t>(j)][1]);
        em.mass(i, j) = g.area / 12.0 * (i == j ? 2.0 : 1.0);
      }
    return em;
  }

  em.stiffness = Eigen::MatrixXd::Zero(6, 6);
  em.mass = Eigen::MatrixXd::Zero(6, 6);
  for (const auto& qp : quadrature::triangle_degree4()) {
    const auto& l = qp.bary;
    std::array<double, 6> phi{};
    local_basis(2, l, phi.data());
    std::array<std::array<double, 2>, 6> grad{};
    for (std::size_t k = 0; k < 3; ++k) {
      const std::size_t k1 = (k + 1) % 3;
      for (std::size_t c = 0; c < 2; ++c) {
        grad[k][c] = (4.0 * l[k] - 1.0) * gb[k][c];
        grad[3 + k][c] = 4.0 * (l[k1] * gb[k][c] + l[k] * gb[k1][c]);
      }
    }
    const double w = qp.weight * g.area;
    for (std::size_t i = 0; i < 6; ++i)
      for (std::size_t j = 0; j < 6; ++j) {
        em.stiffness(static_cast<Index>(i), static_cast<Index>(j)) +=
            w * (grad[i][0] * grad[j][0] + grad[i][1] * grad[j][1]);
        em.mass(static_cast<Index>(i), static_cast<Index>(j)) += w * phi[i] * phi[j];
      }
  }
  return em;
}

/// 1D mass matrix of an edge, ordered as DofMap::edge_dofs.
inline Eigen::MatrixXd edge_mass(double length, int order) {
  const int m = order + 1;
  Eigen::MatrixXd em = Eigen::MatrixXd::Zero(m, m);
  for (const auto& qp : quadrature::gauss3()) {
    const auto phi = edge_basis(order, qp.t);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        em(i, j) += qp.weight * length * phi[static_cast<std::size_t>(i)] * phi[static_cast<std::size_t>(j)];
  }
  return em;
}

/// Maps global DOF indices to positions in a sorted local DOF list. A null
/// list means the identity (global numbering).
class LocalNumbering {
 public:
  LocalNumbering() = default;
  explicit LocalNumbering(const std::vector<int>* sorted_globals) : globals_(sorted_globals) {}

  int operator()(int global) const {
    if (!globals_) return global;
    const auto it = std::lower_bound(globals_->begin(), globals_->end(), global);
    if (it == globals_->end() || *it != global) return -1;
    return static_cast<int>(it - globals_->begin());
  }

  int size(const DofMap& dofs) const {
    return globals_ ? static_cast<int>(globals_->size()) : dofs.count;
  }

 private:
  const std::vector<int>* globals_ = nullptr;
};

struct VolumeForms {
  SparseMatrix stiffness;  // (grad u, grad v)
  SparseMatrix mass;       // (u, v)
};

inline VolumeForms assemble_volume_forms(const Mesh& mesh, const DofMap& dofs, std::span<const int> cells,
                                         LocalNumbering numbering = {}) {
  const int size = numbering.size(dofs);
  std::vector<Triplet> k_trip, m_trip;
  const std::size_t per = static_cast<std::size_t>(dofs.dofs_per_cell);
  k_trip.reserve(cells.size() * per * per);
  m_trip.reserve(cells.size() * per * per);
  std::vector<int> local(per);
  for (const int t : cells) {
    const ElementMatrices em = element_matrices(mesh, t, dofs.order);
    const auto c = dofs.cell(t);
    for (std::size_t i = 0; i < per; ++i) {
      local[i] = numbering(c[i]);
      if (local[i] < 0) throw Error("cell DOF missing from the local numbering");
    }
    for (std::size_t i = 0; i < per; ++i)
      for (std::size_t j = 0; j < per; ++j) {
        k_trip.emplace_back(local[i], local[j], em.stiffness(static_cast<Index>(i), static_cast<Index>(j)));
        m_trip.emplace_back(local[i], local[j], em.mass(static_cast<Index>(i), static_cast<Index>(j)));
      }
  }
  return {make_sparse(size, size, k_trip), make_sparse(size, size, m_trip)};
}

/// 1D mass matrix of the trace space on the given edges.
inline SparseMatrix assemble_boundary_mass_on(const Mesh& mesh, const DofMap& dofs, std::span<const EdgeRef> edges,
                                              LocalNumbering numbering = {}) {
  const int size = numbering.size(dofs);
  std::vector<Triplet> trip;
  for (const EdgeRef& e : edges) {
    const Eigen::MatrixXd em = edge_mass(mesh.edge_length(e), dofs.order);
    const auto ed = dofs.edge_dofs(e);
    std::vector<int> local(ed.size());
    for (std::size_t i = 0; i < ed.size(); ++i) {
      local[i] = numbering(ed[i]);
      if (local[i] < 0) throw Error("edge DOF missing from the local numbering");
    }
    for (std::size_t i = 0; i < ed.size(); ++i)
      for (std::size_t j = 0; j < ed.size(); ++j)
        trip.emplace_back(local[i], local[j], em(static_cast<Index>(i), static_cast<Index>(j)));
  }
  return make_sparse(size, size, trip);
}

/// Edges belonging to exactly one triangle of the cell set, oriented as in
/// that triangle (counterclockwise around the set).
inline std::vector<EdgeRef> boundary_edges_of(const Mesh& mesh, std::span<const int> cells) {
  std::map<std::pair<int, int>, std::pair<EdgeRef, int>> seen;
  for (const int t : cells) {
    for (int k = 0; k < 3; ++k) {
      const EdgeRef e{t, k};
      auto [a, b] = mesh.edge_vertices(e);
      auto key = std::minmax(a, b);
      auto [it, inserted] = seen.try_emplace({key.first, key.second}, e, 0);
      ++it->second.second;
    }
  }
  std::vector<EdgeRef> out;
  for (const auto& [key, entry] : seen)
    if (entry.second == 1) out.push_back(entry.first);
  return out;
}

/// True when both endpoints of the edge lie on the same side of the unit square.
inline bool edge_on_domain_boundary(const Mesh& mesh, EdgeRef e) {
  const auto [a, b] = mesh.edge_vertices(e);
  const int n = mesh.n;
  const int ai = a % (n + 1), aj = a / (n + 1), bi = b % (n + 1), bj = b / (n + 1);
  return (ai == 0 && bi == 0) || (ai == n && bi == n) || (aj == 0 && bj == 0) || (aj == n && bj == n);
}

/// K - (kappa^2 + i eps) M - i kappa B.
inline SparseMatrix helmholtz_operator(const ProblemParams& params, const SparseMatrix& stiffness,
                                       const SparseMatrix& mass, const SparseMatrix& impedance_mass) {
  const double k = params.kappa;
  SparseMatrix A = stiffness - Complex(k * k, params.epsilon) * mass - Complex(0.0, k) * impedance_mass;
  A.makeCompressed();
  return A;
}

/// K + kappa^2 M, the Gram matrix of the kappa-weighted H1 inner product.
inline SparseMatrix weighted_h1_operator(const ProblemParams& params, const SparseMatrix& stiffness,
                                         const SparseMatrix& mass) {
  SparseMatrix S = stiffness + Complex(params.kappa * params.kappa, 0.0) * mass;
  S.makeCompressed();
  return S;
}

inline Complex plane_wave(double kappa, const Point& direction, const Point& x) {
  return std::exp(kI * kappa * (direction.x * x.x + direction.y * x.y));
}

/// Boundary load <g, phi_i> for the impedance data g = du/dn - i kappa u of
/// the plane wave u = exp(i kappa x.d), integrated with 5-point Gauss per edge.
inline Vector plane_wave_rhs(const ProblemParams& params, const Mesh& mesh, const DofMap& dofs,
                             const Point& direction) {
  if (std::abs(std::hypot(direction.x, direction.y) - 1.0) > 1e-12)
    throw Error("plane-wave direction must be a unit vector");
  Vector rhs = Vector::Zero(dofs.count);
  const double k = params.kappa;
  for (const BoundaryEdge& be : mesh.boundary) {
    const auto [a, b] = mesh.edge_vertices(be.edge);
    const Point pa = mesh.vertices[static_cast<std::size_t>(a)];
    const Point pb = mesh.vertices[static_cast<std::size_t>(b)];
    const double length = std::hypot(pb.x - pa.x, pb.y - pa.y);
    const Point nrm = outward_normal(be.side);
    const double dn = direction.x * nrm.x + direction.y * nrm.y;
    const auto ed = dofs.edge_dofs(be.edge);
    for (const auto& qp : quadrature::gauss5()) {
      const Point x{pa.x + qp.t * (pb.x - pa.x), pa.y + qp.t * (pb.y - pa.y)};
      const Complex g = kI * k * (dn - 1.0) * plane_wave(k, direction, x);
      const auto phi = edge_basis(dofs.order, qp.t);
      for (std::size_t i = 0; i < ed.size(); ++i)
        rhs[ed[i]] += qp.weight * length * g * phi[i];
    }
  }
  return rhs;
}

inline Point default_plane_wave_direction() {
  const double c = 1.0 / std::sqrt(2.0);
  return {c, c};
}

struct AssembledSystem {
  SparseMatrix A_eps;      // complex symmetric Helmholtz operator
  SparseMatrix S_1k;       // kappa-weighted H1 Gram matrix
  SparseMatrix M_bdry;     // mass on the whole boundary of the square
  SparseMatrix stiffness;
  SparseMatrix mass;
  Vector rhs;
};

inline AssembledSystem assemble_global(const ProblemParams& params, const Mesh& mesh, const DofMap& dofs,
                                       const Point& direction = default_plane_wave_direction()) {
  params.validate();
  std::vector<int> cells(static_cast<std::size_t>(mesh.triangle_count()));
  std::iota(cells.begin(), cells.end(), 0);
  VolumeForms forms = assemble_volume_forms(mesh, dofs, cells);
  std::vector<EdgeRef> edges;
  edges.reserve(mesh.boundary.size());
  for (const auto& be : mesh.boundary) edges.push_back(be.edge);
  AssembledSystem sys;
  sys.M_bdry = assemble_boundary_mass_on(mesh, dofs, edges);
  sys.A_eps = helmholtz_operator(params, forms.stiffness, forms.mass, sys.M_bdry);
  sys.S_1k = weighted_h1_operator(params, forms.stiffness, forms.mass);
  sys.stiffness = std::move(forms.stiffness);
  sys.mass = std::move(forms.mass);
  sys.rhs = plane_wave_rhs(params, mesh, dofs, direction);
  return sys;
}

/// Local operator of a subdomain: the Helmholtz form on its cells with the
/// impedance term on its whole boundary (cut and physical parts).
inline SparseMatrix assemble_local_impedance(const ProblemParams& params, const Mesh& mesh, const DofMap& dofs,
                                             const std::vector<int>& subdomain_dofs,
                                             std::span<const int> subdomain_cells) {
  if (subdomain_dofs.empty() || subdomain_cells.empty()) throw Error("empty subdomain");
  const LocalNumbering numbering(&subdomain_dofs);
  const VolumeForms forms = assemble_volume_forms(mesh, dofs, subdomain_cells, numbering);
  const auto edges = boundary_edges_of(mesh, subdomain_cells);
  const SparseMatrix bm = assemble_boundary_mass_on(mesh, dofs, edges, numbering);
  return helmholtz_operator(params, forms.stiffness, forms.mass, bm);
}

/// h * sqrt(sum over all nodes of |v(x)|^2).
inline double discrete_l2_norm(const Mesh& mesh, const DofMap& dofs, const Vector& v) {
  require_dims(v.size() == dofs.count, "discrete_l2_norm");
  return mesh.h() * v.norm();
}

inline Vector interpolate(const DofMap& dofs, const std::function<Complex(const Point&)>& f) {
  Vector v(dofs.count);
  for (int d = 0; d < dofs.count; ++d) v[d] = f(dofs.coords[static_cast<std::size_t>(d)]);
  return v;
}

/// ||u_h - f||_{L2} evaluated with the degree-4 triangle rule.
inline double l2_error(const Mesh& mesh, const DofMap& dofs, const Vector& uh,
                       const std::function<Complex(const Point&)>& f) {
  require_dims(uh.size() == dofs.count, "l2_error");
  double sum = 0.0;
  std::array<double, 6> phi{};
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const TriangleGeometry g = triangle_geometry(mesh, t);
    const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
    const auto c = dofs.cell(t);
    for (const auto& qp : quadrature::triangle_degree4()) {
      Point x{};
      for (std::size_t k = 0; k < 3; ++k) {
        x.x += qp.bary[k] * mesh.vertices[static_cast<std::size_t>(tri[k])].x;
        x.y += qp.bary[k] * mesh.vertices[static_cast<std::size_t>(tri[k])].y;
      }
      local_basis(dofs.order, qp.bary, phi.data());
      Complex value{0.0, 0.0};
      for (std::size_t i = 0; i < c.size(); ++i) value += uh[c[i]] * phi[i];
      sum += qp.weight * g.area * std::norm(value - f(x));
    }
  }
  return std::sqrt(sum);
}

}  // namespace helmddm
