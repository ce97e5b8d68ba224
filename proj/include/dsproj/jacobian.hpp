#pragma once

// Newton system matrices.  For an activity pattern M the system matrix is
//
//   V(M) = [ Diag(col degrees of M)      Mhat^T                  ]
//          [ Mhat                        Diag(row degrees of Mhat) ]
//
// where Mhat is M without its last row, matching the dual ordering (c, r).
// V(M) equals A * Diag(vec M) * A^T for the constraint operator A, is always
// positive semidefinite, and is nonsingular exactly when M is connected as a
// bipartite graph.

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <string>

#include "dsproj/core_model.hpp"
#include "dsproj/graph.hpp"

namespace dsproj {

// Structural form of V(M): degree vectors plus the 0/1 coupling block.
struct JacobianElement {
  Index n = 0;
  Vector d_c;          // column degrees of M, length n
  Vector d_r;          // row degrees of the first n-1 rows, length n-1
  PatternMatrix Mhat;  // first n-1 rows of M
};

inline JacobianElement assemble(const PatternMatrix& M) {
  JacobianElement V;
  V.n = M.rows();
  V.d_c = M.cast<double>().colwise().sum().transpose();
  V.Mhat = M.topRows(V.n - 1);
  V.d_r = V.Mhat.cast<double>().rowwise().sum();
  return V;
}

// Explicit (2n-1) x (2n-1) matrix; used by the pivoted fallback and tests.
inline Matrix dense_matrix(const JacobianElement& V) {
  const Index n = V.n;
  Matrix D = Matrix::Zero(2 * n - 1, 2 * n - 1);
  D.diagonal().head(n) = V.d_c;
  D.diagonal().tail(n - 1) = V.d_r;
  const Matrix Mhat_d = V.Mhat.cast<double>();
  D.topRightCorner(n, n - 1) = Mhat_d.transpose();
  D.bottomLeftCorner(n - 1, n) = Mhat_d;
  return D;
}

// Symmetric factorization of V(M) with an explicit singularity signal: any
// pivot below 1e-12 * trace(V)/(2n-1) raises JacobianSingular.  When every
// column degree is positive the c-block is eliminated first and only the
// (n-1)-order Schur complement  Diag(d_r) - Mhat Diag(d_c)^-1 Mhat^T  is
// factored (Cholesky); otherwise the full matrix is factored with a pivoted
// symmetric decomposition.
class JacobianFactor {
 public:
  explicit JacobianFactor(const JacobianElement& V) : n_(V.n), d_c_(V.d_c) {
    const Index order = 2 * n_ - 1;
    const double trace = V.d_c.sum() + V.d_r.sum();
    if (trace <= 0.0) {
      throw JacobianSingular("system matrix is identically zero");
    }
    const double pivot_floor = 1e-12 * trace / static_cast<double>(order);

    if ((d_c_.array() > 0.0).all()) {
      schur_ = true;
      Mhat_d_ = V.Mhat.cast<double>();
      if (n_ > 1) {
        Matrix S = Matrix::Zero(n_ - 1, n_ - 1);
        S.diagonal() = V.d_r;
        const Matrix W = Mhat_d_ * d_c_.cwiseInverse().cwiseSqrt().asDiagonal();
        S.selfadjointView<Eigen::Lower>().rankUpdate(W, -1.0);
        llt_.compute(S);
        if (llt_.info() != Eigen::Success ||
            llt_.matrixLLT().diagonal().array().square().minCoeff() < pivot_floor) {
          throw JacobianSingular("Schur complement pivot below " +
                                 std::to_string(pivot_floor));
        }
      }
    } else {
      schur_ = false;
      ldlt_.compute(dense_matrix(V));
      if (ldlt_.info() != Eigen::Success ||
          ldlt_.vectorD().minCoeff() < pivot_floor) {
        throw JacobianSingular("pivoted factorization detected a pivot below " +
                               std::to_string(pivot_floor));
      }
    }
  }

  Vector solve(const Vector& rhs) const {
    if (rhs.size() != 2 * n_ - 1) {
      throw Error("right-hand side has wrong length");
    }
    if (!schur_) return ldlt_.solve(rhs);
    const auto f = rhs.head(n_);
    const auto g = rhs.tail(n_ - 1);
    Vector y(2 * n_ - 1);
    if (n_ == 1) {
      y(0) = f(0) / d_c_(0);
      return y;
    }
    const Vector t = f.cwiseQuotient(d_c_);
    const Vector v = llt_.solve((g - Mhat_d_ * t).eval());
    y.head(n_) = (f - Mhat_d_.transpose() * v).cwiseQuotient(d_c_);
    y.tail(n_ - 1) = v;
    return y;
  }

 private:
  Index n_;
  bool schur_ = false;
  Vector d_c_;
  Matrix Mhat_d_;
  Eigen::LLT<Matrix> llt_;
  Eigen::LDLT<Matrix> ldlt_;
};

// One-shot solve of V d = rhs; throws JacobianSingular on rank deficiency.
inline Vector solve(const JacobianElement& V, const Vector& rhs) {
  return JacobianFactor(V).solve(rhs);
}

// True when V(M) factors cleanly; agrees with is_connected(M).
inline bool pd_check(const PatternMatrix& M) {
  try {
    JacobianFactor f(assemble(M));
    (void)f;
    return true;
  } catch (const JacobianSingular&) {
    return false;
  }
}

}  // namespace dsproj
