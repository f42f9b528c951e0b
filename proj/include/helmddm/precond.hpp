#pragma once

// One-level weighted additive Schwarz preconditioner with impedance local
// problems, and its hybrid two-level extension
//
//   B1^{-1} = sum_l D_l E_l A_l^{-1} R_l
//   B^{-1}  = (I - Q A) B1^{-1} + Q,    Q = Z A0^{-1} Z*.

#include <random>
#include <vector>

#include "helmddm/coarse.hpp"
#include "helmddm/decomp.hpp"
#include "helmddm/linalg.hpp"

namespace helmddm {

enum class PreconditionerMode { one_level, hybrid_two_level };

class Preconditioner {
 public:
  /// One-level preconditioner.
  Preconditioner(const Decomposition& decomp, const SparseMatrix& A)
      : decomp_(&decomp), A_(&A), mode_(PreconditionerMode::one_level) {
    check();
  }

  /// Hybrid two-level preconditioner; an empty coarse space reduces it to one level.
  Preconditioner(const Decomposition& decomp, const SparseMatrix& A, const CoarseSpace& coarse)
      : decomp_(&decomp), A_(&A), coarse_(&coarse), mode_(PreconditionerMode::hybrid_two_level) {
    check();
    require_dims(coarse.Z.rows() == A.rows(), "coarse basis");
  }

  PreconditionerMode mode() const noexcept { return mode_; }
  const Decomposition& decomposition() const noexcept { return *decomp_; }
  const SparseMatrix& matrix() const noexcept { return *A_; }
  const CoarseSpace* coarse() const noexcept { return coarse_; }

  Vector apply(const Vector& r) const {
    return mode_ == PreconditionerMode::one_level ? apply_one_level(r) : apply_hybrid(r);
  }

  Vector operator()(const Vector& r) const { return apply(r); }

  /// Subdomain contributions are summed in ascending subdomain order.
  Vector apply_one_level(const Vector& r) const {
    require_dims(r.size() == decomp_->global_size, "preconditioner input");
    Vector z = Vector::Zero(r.size());
    for (std::size_t l = 0; l < decomp_->count(); ++l) {
      const Subdomain& sub = decomp_->subdomains[l];
      const Vector local = decomp_->local[l].factor.solve(restrict_to(sub, r));
      add_prolonged(sub, weight(decomp_->pou.weights[l], local), z);
    }
    return z;
  }

  Vector apply_hybrid(const Vector& r) const {
    Vector w = apply_one_level(r);
    if (!coarse_ || coarse_->size() == 0) return w;
    const Vector c1 = coarse_solve(*coarse_, csr_matvec(*A_, w));
    const Vector c2 = coarse_solve(*coarse_, r);
    return w - c1 + c2;
  }

 private:
  void check() const {
    if (decomp_->local.size() != decomp_->count()) throw Error("subdomains are not factorized");
    require_dims(A_->rows() == decomp_->global_size, "global matrix");
  }

  const Decomposition* decomp_;
  const SparseMatrix* A_;
  const CoarseSpace* coarse_ = nullptr;
  PreconditionerMode mode_;
};

/// Coarse a-projection P0 v = Z A0^{-1} Z* A v.
inline Vector coarse_projection(const CoarseSpace& cs, const SparseMatrix& A, const Vector& v) {
  return coarse_solve(cs, csr_matvec(A, v));
}

struct ProjectionDiagnostics {
  int samples = 0;
  double max_norm_ratio = 0.0;  // max ||P v||_{1,k} over unit v
  double min_field_of_values = 0.0;  // min |(v, P v)_{1,k}| over unit v
  double max_identity_residual = 0.0;  // max ||P v - ((I - P0) v_d + v)|| / ||v||
};

namespace detail {

inline Vector random_complex_vector(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  for (Index k = 0; k < n; ++k) v[k] = Complex(normal(rng), normal(rng));
  return v;
}

}  // namespace detail

/// Samples the preconditioned operator P = B^{-1} A on random vectors of
/// unit weighted norm, and checks P v = (I - P0) v_d + v with
/// v_d = sum_l D_l E_l (A_l^{-1} R_l A v - R_l v) computed independently.
inline ProjectionDiagnostics diagnostics_global_projection(const Preconditioner& pre, const SparseMatrix& S_1k,
                                                           int sample_count, std::uint64_t seed) {
  const Decomposition& decomp = pre.decomposition();
  const SparseMatrix& A = pre.matrix();
  const CoarseSpace* cs = pre.coarse();
  std::mt19937_64 rng(seed);
  ProjectionDiagnostics out;
  out.samples = sample_count;
  out.min_field_of_values = std::numeric_limits<double>::infinity();
  for (int s = 0; s < sample_count; ++s) {
    Vector v = detail::random_complex_vector(A.rows(), rng);
    v /= weighted_norm(S_1k, v);
    const Vector Av = csr_matvec(A, v);
    const Vector Pv = pre.apply(Av);
    out.max_norm_ratio = std::max(out.max_norm_ratio, weighted_norm(S_1k, Pv));
    out.min_field_of_values = std::min(out.min_field_of_values, std::abs(weighted_inner(S_1k, Pv, v)));

    Vector v_d = Vector::Zero(v.size());
    for (std::size_t l = 0; l < decomp.count(); ++l) {
      const Subdomain& sub = decomp.subdomains[l];
      const Vector local_projection = decomp.local[l].factor.solve(restrict_to(sub, Av));
      add_prolonged(sub, weight(decomp.pou.weights[l], local_projection - restrict_to(sub, v)), v_d);
    }
    Vector rhs = v_d + v;
    if (cs && cs->size() > 0) rhs -= coarse_projection(*cs, A, v_d);
    out.max_identity_residual = std::max(out.max_identity_residual, weighted_norm(S_1k, Pv - rhs));
  }
  if (sample_count == 0) out.min_field_of_values = 0.0;
  return out;
}

}  // namespace helmddm
