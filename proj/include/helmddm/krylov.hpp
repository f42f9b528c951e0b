#pragma once

// Full (unrestarted) left-preconditioned GMRES with modified Gram-Schmidt.
// Convergence is declared on the true relative residual ||b - A x_k|| / ||b||
// of the iterate reconstructed at every step.

#include <cmath>
#include <vector>

#include "helmddm/linalg.hpp"

namespace helmddm {

struct GmresOptions {
  double tol = 1e-6;
  int maxit = 1000;
  bool record_iterates = false;  // keep x_k of every step
  bool keep_basis = false;       // keep V_{k+1} and the Hessenberg matrix
};

struct KrylovResult {
  Vector solution;
  int iterations = 0;
  std::vector<double> residual_history;        // true relative residuals, entry 0 is x_0 = 0
  std::vector<double> preconditioned_history;  // ||B^{-1}(b - A x_k)|| / ||B^{-1} b||
  bool converged = false;
  bool breakdown = false;
  std::vector<Vector> iterates;
  DenseMatrix basis;       // n x (k+1) when keep_basis
  DenseMatrix hessenberg;  // (k+1) x k when keep_basis
};

namespace detail {

struct Givens {
  double c = 1.0;
  Complex s{0.0, 0.0};

  static Givens zeroing(Complex a, Complex b) {
    Givens g;
    if (b == Complex(0.0, 0.0)) return g;
    if (a == Complex(0.0, 0.0)) {
      g.c = 0.0;
      g.s = 1.0;
      return g;
    }
    const double t = std::hypot(std::abs(a), std::abs(b));
    g.c = std::abs(a) / t;
    g.s = (a / std::abs(a)) * std::conj(b) / t;
    return g;
  }

  void apply(Complex& x, Complex& y) const {
    const Complex xn = c * x + s * y;
    const Complex yn = -std::conj(s) * x + c * y;
    x = xn;
    y = yn;
  }
};

}  // namespace detail

/// Solves A x = b with left preconditioner B^{-1} from the zero initial guess.
/// `apply_A` and `apply_B` are callables Vector(const Vector&).
template <class ApplyA, class ApplyB>
KrylovResult gmres(ApplyA&& apply_A, ApplyB&& apply_B, const Vector& b, const GmresOptions& opt) {
  if (!(opt.tol > 0.0)) throw Error("gmres tolerance must be positive");
  if (opt.maxit < 1) throw Error("gmres needs maxit >= 1");
  const Index n = b.size();
  KrylovResult res;
  res.solution = Vector::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    res.converged = true;
    res.residual_history = {0.0};
    res.preconditioned_history = {0.0};
    return res;
  }
  res.residual_history.push_back(1.0);
  res.preconditioned_history.push_back(1.0);

  Vector r0 = apply_B(b);
  const double beta = r0.norm();
  if (beta == 0.0) {
    res.breakdown = true;
    return res;
  }

  const int m = opt.maxit;
  std::vector<Vector> V;
  V.reserve(static_cast<std::size_t>(std::min(m, 1024) + 1));
  V.push_back(r0 / beta);
  DenseMatrix R = DenseMatrix::Zero(m + 1, m);  // rotated Hessenberg
  DenseMatrix H;                                // raw Hessenberg, only when kept
  if (opt.keep_basis) H = DenseMatrix::Zero(m + 1, m);
  std::vector<detail::Givens> rotations;
  Vector g = Vector::Zero(m + 1);
  g[0] = beta;

  for (int k = 0; k < m; ++k) {
    Vector w = apply_B(apply_A(V[static_cast<std::size_t>(k)]));
    const double w_norm_initial = w.norm();
    for (int j = 0; j <= k; ++j) {
      const Complex h = V[static_cast<std::size_t>(j)].dot(w);
      R(j, k) = h;
      w -= h * V[static_cast<std::size_t>(j)];
    }
    // One reorthogonalization pass when the new vector lost orthogonality.
    double loss = 0.0;
    std::vector<Complex> correction(static_cast<std::size_t>(k + 1));
    for (int j = 0; j <= k; ++j) {
      correction[static_cast<std::size_t>(j)] = V[static_cast<std::size_t>(j)].dot(w);
      loss = std::max(loss, std::abs(correction[static_cast<std::size_t>(j)]));
    }
    if (loss > 1e-8 * w.norm()) {
      for (int j = 0; j <= k; ++j) {
        const Complex h = V[static_cast<std::size_t>(j)].dot(w);
        R(j, k) += h;
        w -= h * V[static_cast<std::size_t>(j)];
      }
    }
    const double h_next = w.norm();
    R(k + 1, k) = h_next;
    if (opt.keep_basis) H.block(0, k, k + 2, 1) = R.block(0, k, k + 2, 1);

    for (int j = 0; j < k; ++j) rotations[static_cast<std::size_t>(j)].apply(R(j, k), R(j + 1, k));
    const detail::Givens rot = detail::Givens::zeroing(R(k, k), R(k + 1, k));
    rot.apply(R(k, k), R(k + 1, k));
    R(k + 1, k) = 0.0;
    rot.apply(g[k], g[k + 1]);
    rotations.push_back(rot);

    const int size = k + 1;
    if (std::abs(R(k, k)) <= 1e-14 * std::max(w_norm_initial, 1e-300)) {
      // singular projected problem: the step adds nothing, keep x_{k-1}
      res.iterations = size;
      res.residual_history.push_back(res.residual_history.back());
      res.preconditioned_history.push_back(res.preconditioned_history.back());
      if (opt.record_iterates) res.iterates.push_back(res.solution);
      res.breakdown = true;
      break;
    }
    const Vector y = R.topLeftCorner(size, size).triangularView<Eigen::Upper>().solve(g.head(size));
    Vector x = Vector::Zero(n);
    for (int j = 0; j < size; ++j) x += y[j] * V[static_cast<std::size_t>(j)];
    const double true_residual = (b - apply_A(x)).norm() / bnorm;

    res.iterations = size;
    res.residual_history.push_back(true_residual);
    res.preconditioned_history.push_back(std::abs(g[k + 1]) / beta);
    if (opt.record_iterates) res.iterates.push_back(x);
    res.solution = std::move(x);

    if (true_residual <= opt.tol) {
      res.converged = true;
      break;
    }
    if (h_next <= 1e-14 * std::max(w_norm_initial, 1e-300)) {
      res.breakdown = true;
      break;
    }
    V.push_back(w / h_next);
  }

  if (opt.keep_basis) {
    const int k = res.iterations;
    const int cols = static_cast<int>(V.size());
    res.basis.resize(n, cols);
    for (int j = 0; j < cols; ++j) res.basis.col(j) = V[static_cast<std::size_t>(j)];
    res.hessenberg = H.topLeftCorner(cols, k);
  }
  return res;
}

}  // namespace helmddm
