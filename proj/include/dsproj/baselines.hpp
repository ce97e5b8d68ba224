#pragma once

// Reference algorithms the Newton solver is verified against: a splitting
// method (ADMM), alternating projections with corrections (Dykstra), and an
// exhaustive support enumeration for tiny instances.  All of them only need
// projections onto the constraint sets, no Newton systems.

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dsproj/core_model.hpp"
#include "dsproj/jacobian.hpp"
#include "dsproj/solver.hpp"

namespace dsproj {

// Orthogonal projection onto the affine set {row sums = column sums = 1}.
// The Gram matrix of the constraint operator is [[n I, ones],[ones, n I]],
// which the solver below inverts in closed form in O(n) using only the
// column/row sums of the right-hand side.
struct AffineProjector {
  Index n = 0;

  explicit AffineProjector(Index n_in) : n(n_in) {}

  // A*vec(X): the n column sums followed by the first n-1 row sums.
  Vector apply_A(const Matrix& X) const {
    Vector g(2 * n - 1);
    g.head(n) = X.colwise().sum().transpose();
    g.tail(n - 1) = X.topRows(n - 1).rowwise().sum();
    return g;
  }

  // Constraint values A*vec(X) - 1: column-sum then row-sum defects.
  Vector constraint_values(const Matrix& X) const {
    return residual_from_X(X).F;
  }

  // Solves (A A^T) w = g for the stacked multiplier w = (w_c, w_r).
  Vector normal_solve(const Vector& g) const {
    const double sum_c = g.head(n).sum();
    const double sum_r = g.tail(n - 1).sum();
    const double sigma_c = sum_c - sum_r;
    const double sigma_r = sum_c / static_cast<double>(n) - sigma_c;
    Vector w(2 * n - 1);
    w.head(n) = (g.head(n).array() - sigma_r) / static_cast<double>(n);
    w.tail(n - 1) = (g.tail(n - 1).array() - sigma_c) / static_cast<double>(n);
    return w;
  }

  // A^T w as a matrix: entry (i,j) receives w_c(j), plus w_r(i) above the
  // last row.
  Matrix adjoint(const Vector& w) const {
    Matrix W(n, n);
    W.rowwise() = w.head(n).transpose();
    W.topRows(n - 1).colwise() += w.tail(n - 1);
    return W;
  }

  Matrix apply(const Matrix& X) const {
    return X - adjoint(normal_solve(constraint_values(X)));
  }
};

inline Matrix affine_project(const Matrix& X) {
  return AffineProjector(X.rows()).apply(X);
}

// Two-block splitting on  min 1/2||x - xhat||^2  s.t.  x = v, A v = 1, x >= 0:
// alternates a clipped proximal step in x, the affine projection in v, and a
// scaled dual update, with residual-balancing adjustment of the penalty rho
// (factor 2, clamped to [1e-4, 1e4]).  The scaled dual stays in the range of
// A^T, which recovers a dual point y = -rho*w for the same stopping metric
// ||F(y)|| the Newton solvers use.
inline SolveReport admm_solve(const ProblemInstance& inst,
                              const SolveConfig& cfg = {}) {
  const detail::WallTimer timer;
  const Index n = inst.n;
  const double tol = cfg.tol > 0.0 ? cfg.tol : default_tol(n);
  const AffineProjector proj(n);

  double rho = 1.0;
  Matrix X = inst.Xhat.cwiseMax(0.0);
  Matrix V = proj.apply(inst.Xhat);
  Matrix U = Matrix::Zero(n, n);
  Vector w = Vector::Zero(2 * n - 1);

  SolveReport rep;
  DualPoint y = DualPoint::zero(n);
  rep.residual_history.push_back(residual(inst, y).norm);

  while (rep.iterations < cfg.max_iter) {
    X = ((inst.Xhat + rho * (V - U)) / (1.0 + rho)).cwiseMax(0.0);

    const Matrix T = X + U;
    w = proj.normal_solve(proj.constraint_values(T));
    const Matrix AtW = proj.adjoint(w);
    const Matrix V_prev = std::move(V);
    V = T - AtW;
    U = AtW;  // U + X - V collapses to A^T w exactly

    y = DualPoint::from_flat(n, (-rho) * w);
    const double fnorm = residual(inst, y).norm;
    ++rep.iterations;
    rep.residual_history.push_back(fnorm);
    if (fnorm <= tol) break;

    const double r_primal = (X - V).norm();
    const double r_dual = rho * (V - V_prev).norm();
    if (r_primal > 10.0 * r_dual && rho * 2.0 <= 1e4) {
      rho *= 2.0;
      U /= 2.0;
    } else if (r_dual > 10.0 * r_primal && rho / 2.0 >= 1e-4) {
      rho /= 2.0;
      U *= 2.0;
    }
  }

  detail::finalize(inst, y, tol, timer, rep);
  return rep;
}

// Dykstra's alternating projections between the affine set and the
// nonnegative orthant, with the standard correction terms.  Returns the
// orthant-side iterate once consecutive iterates and the two projections
// agree to within tol (max norm).  Throws on iteration exhaustion: this is
// an oracle and must not return silently inaccurate answers.
inline Matrix dykstra_project(const ProblemInstance& inst, double tol = 1e-10,
                              Index max_iter = 1000000,
                              Index* iterations_out = nullptr,
                              DualPoint* dual_out = nullptr) {
  const Index n = inst.n;
  const AffineProjector proj(n);
  Matrix X = inst.Xhat;
  Matrix P = Matrix::Zero(n, n);  // affine-side correction, stays in range(A^T)
  Matrix Q = Matrix::Zero(n, n);  // orthant-side correction, nonpositive

  for (Index it = 1; it <= max_iter; ++it) {
    const Matrix XP = X + P;
    const Matrix Y = proj.apply(XP);
    P = XP - Y;
    const Matrix YQ = Y + Q;
    Matrix X_next = YQ.cwiseMax(0.0);
    Q = YQ - X_next;

    const double step = (X_next - X).cwiseAbs().maxCoeff();
    const double gap = (X_next - Y).cwiseAbs().maxCoeff();
    X = std::move(X_next);
    if (step <= tol && gap <= tol) {
      if (iterations_out) *iterations_out = it;
      if (dual_out) {
        // P = A^T w_p, so the dual point -w_p reproduces the projection.
        const Vector w_p = proj.normal_solve(proj.apply_A(P));
        *dual_out = DualPoint::from_flat(n, -w_p);
      }
      return X;
    }
  }
  throw Error("alternating projections did not reach tol=" + std::to_string(tol));
}

// Report-producing wrapper so the CLI can treat Dykstra like the solvers.
inline SolveReport dykstra_solve(const ProblemInstance& inst,
                                 const SolveConfig& cfg = {}) {
  const detail::WallTimer timer;
  const double tol = cfg.tol > 0.0 ? cfg.tol : 1e-10;
  SolveReport rep;
  Index iters = 0;
  DualPoint y = DualPoint::zero(inst.n);
  rep.X_star = dykstra_project(inst, tol, cfg.max_iter, &iters, &y);
  rep.iterations = iters;
  rep.converged = true;
  rep.y_star = y;
  rep.kkt = kkt_from_pair(inst, rep.X_star, y);
  rep.residual_history = {residual(inst, DualPoint::zero(inst.n)).norm,
                          rep.kkt.primal};
  rep.wall_time_ms = timer.elapsed_ms();
  return rep;
}

// Exhaustive optimality check over all support patterns; exact for n <= 4.
// For each candidate support S the equality-constrained projection reduces to
// the linear system V(S) y = 1 - A(xhat restricted to S); a support is the
// optimum exactly when that system is consistent, the supported entries stay
// nonnegative and the others stay nonpositive.
inline Matrix active_set_enumerate(const ProblemInstance& inst) {
  const Index n = inst.n;
  if (n > 4) {
    throw InstanceTooLarge("support enumeration is limited to n <= 4, got n=" +
                           std::to_string(n));
  }
  const int nn = static_cast<int>(n * n);
  const double scale = 1.0 + inst.Xhat.cwiseAbs().maxCoeff();
  const double feas_tol = 1e-9 * scale;

  // Bit k of a mask is entry (i, j) with k = j*n + i (column-major).
  std::vector<std::uint32_t> row_bits(n, 0), col_bits(n, 0);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      row_bits[i] |= 1u << (j * n + i);
      col_bits[j] |= 1u << (j * n + i);
    }
  }

  PatternMatrix M(n, n);
  for (std::uint32_t mask = 1; mask < (1u << nn); ++mask) {
    bool covered = true;
    for (Index t = 0; t < n && covered; ++t) {
      covered = (mask & row_bits[t]) && (mask & col_bits[t]);
    }
    if (!covered) continue;

    for (Index j = 0; j < n; ++j) {
      for (Index i = 0; i < n; ++i) {
        M(i, j) = (mask >> (j * n + i)) & 1u;
      }
    }
    const Matrix masked = inst.Xhat.array() * M.cast<double>().array();
    const Vector rhs = -residual_from_X(masked).F;  // 1 - A(masked entries)

    const JacobianElement V = assemble(M);
    const Matrix Vd = dense_matrix(V);
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(Vd);
    const Vector yv = cod.solve(rhs);
    if ((Vd * yv - rhs).cwiseAbs().maxCoeff() > feas_tol) continue;  // inconsistent

    const DualPoint y = DualPoint::from_flat(n, yv);
    const Matrix Y = dual_to_Y(inst, y);
    bool feasible = true;
    for (Index j = 0; j < n && feasible; ++j) {
      for (Index i = 0; i < n && feasible; ++i) {
        feasible = M(i, j) ? (Y(i, j) >= -feas_tol) : (Y(i, j) <= feas_tol);
      }
    }
    if (!feasible) continue;

    return (Y.array() * M.cast<double>().array()).cwiseMax(0.0).matrix();
  }
  throw Error("no optimal support found; enumeration tolerance too tight");
}

}  // namespace dsproj
