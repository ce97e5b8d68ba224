#pragma once

// Dual points y with the same nonnegative part max(Y(y),0) form an
// equivalence class: they induce the same candidate X and the same residual.
// Within a class one may trade an amount t between row and column multipliers
// of whole components of the activity pattern: subtract t from the selected
// columns' multipliers and add t to the selected rows'.  Entries inside the
// selected components (and inside the untouched ones) are unchanged; the two
// mixed blocks gain +t respectively -t, which bounds the admissible range.
// Driving t to an endpoint creates a new zero entry of Y, i.e. a new edge of
// the activity pattern bridging the selection to its complement, so repeating
// the move reaches a point whose pattern is connected: a vertex of the class.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "dsproj/core_model.hpp"
#include "dsproj/graph.hpp"

namespace dsproj {

// Direction that trades t between selected rows and columns.  The last row
// carries no multiplier and must never be selected; its entries still move
// through the column multipliers.
struct ShiftDirection {
  Index n = 0;
  std::vector<Index> R_sel;  // subset of {0..n-2}, sorted
  std::vector<Index> C_sel;  // subset of {0..n-1}, sorted

  // Stacked (c, r) vector: -1 on selected columns, +1 on selected rows.
  Vector flat() const {
    Vector w = Vector::Zero(2 * n - 1);
    for (Index j : C_sel) w(j) = -1.0;
    for (Index i : R_sel) w(n + i) = 1.0;
    return w;
  }

  void apply(DualPoint& y, double t) const {
    for (Index j : C_sel) y.c(j) -= t;
    for (Index i : R_sel) y.r(i) += t;
  }
};

// True when y1 and y2 induce the same candidate X (same nonnegative part).
inline bool in_same_class(const ProblemInstance& inst, const DualPoint& y1,
                          const DualPoint& y2, double tol) {
  const Matrix X1 = dual_to_Y(inst, y1).cwiseMax(0.0);
  const Matrix X2 = dual_to_Y(inst, y2).cwiseMax(0.0);
  return ((X1 - X2).cwiseAbs().maxCoeff() <= tol);
}

inline bool in_same_class(const ProblemInstance& inst, const DualPoint& y1,
                          const DualPoint& y2) {
  return in_same_class(inst, y1, y2,
                       1e-10 * (1.0 + inst.Xhat.cwiseAbs().maxCoeff()));
}

// Admissible interval [t_lo, t_hi] for shifting along (R_sel, C_sel) while
// staying in the class of Y.  Requires both mixed blocks of Y nonpositive
// (within tol_pattern); an empty block leaves that endpoint infinite.
inline std::pair<double, double> shift_range(const Matrix& Y,
                                             const std::vector<Index>& R_sel,
                                             const std::vector<Index>& C_sel,
                                             double tol_pattern) {
  const Index n = Y.rows();
  std::vector<char> in_R(n, 0), in_C(n, 0);
  for (Index i : R_sel) in_R[i] = 1;
  for (Index j : C_sel) in_C[j] = 1;

  constexpr double kInf = std::numeric_limits<double>::infinity();
  double max_mixed_up = -kInf;    // block (R_sel, complement cols): gains +t
  double max_mixed_down = -kInf;  // block (complement rows, C_sel): gains -t
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      const bool r = in_R[i], c = in_C[j];
      if (r == c) continue;
      const double v = Y(i, j);
      if (v > tol_pattern) {
        throw InvalidSelection("selected shift would move positive entry (" +
                               std::to_string(i) + "," + std::to_string(j) +
                               ") = " + std::to_string(v));
      }
      double& bound = r ? max_mixed_up : max_mixed_down;
      bound = std::max(bound, v);
    }
  }
  const double t_lo = (max_mixed_down == -kInf) ? -kInf : max_mixed_down;
  const double t_hi = (max_mixed_up == -kInf) ? kInf : -max_mixed_up;
  return {t_lo, t_hi};
}

inline std::pair<double, double> shift_range(const Matrix& Y,
                                             const std::vector<Index>& R_sel,
                                             const std::vector<Index>& C_sel) {
  return shift_range(Y, R_sel, C_sel, pattern_tolerance(Y));
}

// Result of the vertex search: the moved point, the number of shifts taken,
// and the pattern component count observed before each shift plus at the end.
struct VertexResult {
  DualPoint y;
  Index shifts = 0;
  std::vector<Index> component_counts;
};

// Moves y inside its class until the activity pattern is connected.  Each
// shift picks a random nonempty union of pattern components not containing
// the last row, moves to a random finite endpoint of the admissible range,
// and merges at least two components, so at most K0 - 1 shifts happen.
inline VertexResult find_vertex(const ProblemInstance& inst, DualPoint y,
                                std::uint64_t seed) {
  const Index n = inst.n;
  std::mt19937_64 rng(seed);
  // Engine output is used directly (no std distributions) so that runs are
  // reproducible across standard library implementations.
  const auto coin = [&rng]() { return (rng() >> 63) != 0; };

  VertexResult out;
  Matrix Y = dual_to_Y(inst, y);
  const Index hard_cap = 2 * n + 8;  // strictly decreasing counts end sooner
  for (Index round = 0;; ++round) {
    const double tol = pattern_tolerance(Y);
    const PatternMatrix M = (Y.array() >= -tol).cast<std::uint8_t>();
    const BlockPartition part = components(M);
    out.component_counts.push_back(part.K);
    if (part.K == 1) break;
    if (round >= hard_cap) {
      throw Error("vertex search failed to reduce the component count");
    }

    // Random nonempty subset of the selectable components 0..K-2 (the last
    // component contains the final row and is never selected).
    const Index selectable = part.K - 1;
    std::vector<Index> chosen;
    for (Index k = 0; k < selectable; ++k) {
      if (coin()) chosen.push_back(k);
    }
    if (chosen.empty()) {
      chosen.push_back(static_cast<Index>(rng() % static_cast<std::uint64_t>(selectable)));
    }

    ShiftDirection dir;
    dir.n = n;
    for (Index k : chosen) {
      dir.R_sel.insert(dir.R_sel.end(), part.row_groups[k].begin(), part.row_groups[k].end());
      dir.C_sel.insert(dir.C_sel.end(), part.col_groups[k].begin(), part.col_groups[k].end());
    }

    const auto [t_lo, t_hi] = shift_range(Y, dir.R_sel, dir.C_sel, tol);
    const bool lo_finite = std::isfinite(t_lo), hi_finite = std::isfinite(t_hi);
    double t;
    if (lo_finite && hi_finite) {
      t = coin() ? t_hi : t_lo;
    } else if (hi_finite) {
      t = t_hi;
    } else if (lo_finite) {
      t = t_lo;
    } else {
      throw NoFiniteShift("no finite endpoint for the selected components");
    }

    dir.apply(y, t);
    Y = dual_to_Y(inst, y);
    ++out.shifts;
  }
  out.y = std::move(y);
  return out;
}

}  // namespace dsproj
