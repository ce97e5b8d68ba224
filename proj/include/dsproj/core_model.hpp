#pragma once

// Core data model for projecting a square matrix onto the doubly stochastic
// polytope  {X >= 0, row sums = column sums = 1}.
//
// Conventions used throughout the library:
//  * Matrices are flattened column-major: vec(X)[j*n + i] = X(i,j).
//  * The equality constraints are the n column sums followed by the first
//    n-1 row sums; the last row sum is implied by the others and is dropped,
//    so the constraint operator A has 2n-1 rows and full row rank.
//  * A dual vector y stacks column multipliers c (length n) and row
//    multipliers r (length n-1, rows 0..n-2; the dropped row has none).
//  * Y(y) denotes the shifted matrix with entries
//        Y(i,j) = Xhat(i,j) + r(i) + c(j)   for i < n-1,
//        Y(n-1,j) = Xhat(n-1,j) + c(j),
//    so that the candidate primal point is X = max(Y, 0) entrywise and the
//    dual residual map is F(y) = A*vec(X) - 1.

#include <Eigen/Dense>

#include <cmath>
#include <utility>

#include "dsproj/errors.hpp"

namespace dsproj {

using Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
// 0/1 activity pattern; entry 1 marks a (weakly) nonnegative entry of Y.
using PatternMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

// The matrix to be projected, with its flattened copy.
struct ProblemInstance {
  Index n = 0;
  Matrix Xhat;
  Vector xhat;  // vec(Xhat), column-major

  ProblemInstance() = default;

  explicit ProblemInstance(Matrix X) : n(X.rows()), Xhat(std::move(X)) {
    if (Xhat.rows() != Xhat.cols()) {
      throw NonSquare("instance matrix must be square, got " +
                      std::to_string(Xhat.rows()) + "x" +
                      std::to_string(Xhat.cols()));
    }
    if (n < 1) throw NonSquare("instance matrix must be at least 1x1");
    if (!Xhat.allFinite()) {
      throw Error("instance matrix contains NaN or infinite entries");
    }
    xhat = Vector::Map(Xhat.data(), n * n);
  }
};

// Dual multipliers: c for the n column sums, r for the first n-1 row sums.
struct DualPoint {
  Vector c;  // length n
  Vector r;  // length n-1

  static DualPoint zero(Index n) {
    return DualPoint{Vector::Zero(n), Vector::Zero(n - 1)};
  }

  Index n() const { return c.size(); }
  Index dim() const { return c.size() + r.size(); }

  // Stacked vector (c, r) of length 2n-1.
  Vector flat() const {
    Vector y(dim());
    y.head(c.size()) = c;
    y.tail(r.size()) = r;
    return y;
  }

  static DualPoint from_flat(Index n, const Vector& y) {
    if (y.size() != 2 * n - 1) {
      throw Error("dual vector has wrong length for n=" + std::to_string(n));
    }
    return DualPoint{y.head(n), y.tail(n - 1)};
  }
};

inline Vector vectorize(const Matrix& X) {
  if (X.rows() != X.cols()) throw NonSquare("vectorize expects a square matrix");
  return Vector::Map(X.data(), X.size());
}

inline Matrix matricize(const Vector& x) {
  const auto n = static_cast<Index>(std::llround(std::sqrt(double(x.size()))));
  if (n * n != x.size()) {
    throw Error("matricize expects a vector of square length, got " +
                std::to_string(x.size()));
  }
  return Matrix::Map(x.data(), n, n);
}

// Shifted matrix Y(y); see the header comment for the entry formula.
inline Matrix dual_to_Y(const ProblemInstance& inst, const DualPoint& y) {
  const Index n = inst.n;
  Matrix Y = inst.Xhat;
  Y.rowwise() += y.c.transpose();
  Y.topRows(n - 1).colwise() += y.r;
  return Y;
}

// Relative tolerance used to classify entries of Y as "zero or positive".
inline double pattern_tolerance(const Matrix& Y) {
  return 1e-11 * (1.0 + Y.cwiseAbs().maxCoeff());
}

// Split of Y into nonnegative part X, nonpositive-part magnitude Z, and the
// activity pattern M (1 where Y >= -tol).  X - Z == Y holds exactly.
struct SignSplit {
  Matrix Y;
  Matrix X;  // max(Y, 0)
  Matrix Z;  // max(-Y, 0)
  PatternMatrix M;
};

inline SignSplit sign_split(Matrix Y, double tol) {
  SignSplit s;
  s.X = Y.cwiseMax(0.0);
  s.Z = (-Y).cwiseMax(0.0);
  s.M = (Y.array() >= -tol).cast<std::uint8_t>();
  s.Y = std::move(Y);
  return s;
}

// Default tolerance: the scale-aware zero band of the maximal pattern.
inline SignSplit sign_split(Matrix Y) {
  const double tol = pattern_tolerance(Y);
  return sign_split(std::move(Y), tol);
}

// Residual of the dual root-finding map F(y) = A*max(Y(y),0) - 1: the first n
// entries are column-sum defects of X, the next n-1 are row-sum defects.
struct ResidualValue {
  Vector F;     // length 2n-1
  double norm;  // ||F||_2
};

inline ResidualValue residual_from_X(const Matrix& X) {
  const Index n = X.rows();
  ResidualValue res;
  res.F.resize(2 * n - 1);
  res.F.head(n) = X.colwise().sum().transpose().array() - 1.0;
  res.F.tail(n - 1) = X.topRows(n - 1).rowwise().sum().array() - 1.0;
  res.norm = res.F.norm();
  return res;
}

inline ResidualValue residual(const ProblemInstance& inst, const DualPoint& y) {
  return residual_from_X(dual_to_Y(inst, y).cwiseMax(0.0));
}

// First-order optimality residuals of the triple (X, y, Z) induced by y.
// X and Z are built with an exact zero cutoff, so the stationarity and
// complementarity terms vanish by construction up to roundoff and the primal
// term equals ||F(y)||.
struct KktResiduals {
  double primal = 0.0;           // ||A*vec(X) - 1||_2
  double dual = 0.0;             // ||vec(X) - xhat - A^T y - (-vec(Z))|| = ||X - Y - Z||_F
  double complementarity = 0.0;  // |<vec(X), vec(Z)>|
  double total = 0.0;            // sum of the three
};

// Residuals of an arbitrary primal/dual pair: Z is the nonpositive part of
// Y(y), X may come from a different algorithm than y.
inline KktResiduals kkt_from_pair(const ProblemInstance& inst, const Matrix& X,
                                  const DualPoint& y) {
  const Matrix Y = dual_to_Y(inst, y);
  const Matrix Z = (-Y).cwiseMax(0.0);
  KktResiduals k;
  k.primal = residual_from_X(X).norm;
  k.dual = (X - Y - Z).norm();
  k.complementarity = std::abs((X.array() * Z.array()).sum());
  k.total = k.primal + k.dual + k.complementarity;
  return k;
}

inline KktResiduals kkt_report(const ProblemInstance& inst, const DualPoint& y) {
  return kkt_from_pair(inst, dual_to_Y(inst, y).cwiseMax(0.0), y);
}

}  // namespace dsproj
