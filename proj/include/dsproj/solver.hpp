#pragma once

// Semismooth Newton solvers for the dual root-finding problem F(y) = 0.
//
// The plain method linearizes with the system matrix of the activity pattern
// at the current iterate; it converges quadratically near a solution whose
// pattern is connected but aborts with JacobianSingular when the pattern
// disconnects.  The modified method first moves the iterate to a vertex of
// its equivalence class, where the activity pattern is always connected and
// the system matrix is positive definite, and then takes the Newton step
// from there; it never meets a singular system.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dsproj/core_model.hpp"
#include "dsproj/equivalence.hpp"
#include "dsproj/graph.hpp"
#include "dsproj/jacobian.hpp"

namespace dsproj {

// Default residual-norm tolerance, scaled with the constraint count.
inline double default_tol(Index n) {
  return 1e-11 * std::sqrt(static_cast<double>(2 * n - 1));
}

struct SolveConfig {
  double tol = -1.0;  // <= 0 selects default_tol(n)
  Index max_iter = 100;
  bool damping = false;          // halve a step while the residual grows (max 20)
  std::uint64_t seed = 0;        // drives the vertex search
  std::string algorithm = "newton";  // CLI dispatch: newton|plain-newton|admm|dykstra
};

struct SolveReport {
  bool converged = false;
  Index iterations = 0;
  std::vector<double> residual_history;  // ||F||_2, length iterations + 1
  std::vector<Index> shifts_per_iter;    // vertex-search shifts (modified method)
  KktResiduals kkt;
  Matrix X_star;
  DualPoint y_star;
  double wall_time_ms = 0.0;
  Index damped_steps = 0;       // iterations on which damping engaged
  bool cycling_reseeded = false;
};

namespace detail {

class WallTimer {
 public:
  WallTimer() : start_(std::chrono::steady_clock::now()) {}
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

// Applies y = base - d, halving d while the residual grows if requested.
// Returns the residual at the accepted point and whether halving engaged.
inline std::pair<ResidualValue, bool> damped_update(const ProblemInstance& inst,
                                                    const Vector& base, Vector d,
                                                    double current_norm,
                                                    bool damping, DualPoint& y) {
  y = DualPoint::from_flat(inst.n, base - d);
  ResidualValue r = residual(inst, y);
  bool engaged = false;
  if (damping) {
    for (int h = 0; h < 20 && r.norm > current_norm; ++h) {
      d *= 0.5;
      y = DualPoint::from_flat(inst.n, base - d);
      r = residual(inst, y);
      engaged = true;
    }
  }
  return {std::move(r), engaged};
}

inline void finalize(const ProblemInstance& inst, const DualPoint& y,
                     double tol, const WallTimer& timer, SolveReport& rep) {
  rep.converged = rep.residual_history.back() <= tol;
  rep.y_star = y;
  rep.X_star = dual_to_Y(inst, y).cwiseMax(0.0);
  rep.kkt = kkt_report(inst, y);
  rep.wall_time_ms = timer.elapsed_ms();
}

}  // namespace detail

// Newton iteration on the pattern at the current iterate.  Throws
// JacobianSingular when that pattern is disconnected; max_iter exhaustion is
// reported as converged = false.
inline SolveReport plain_newton(const ProblemInstance& inst, DualPoint y,
                                const SolveConfig& cfg = {}) {
  const detail::WallTimer timer;
  const double tol = cfg.tol > 0.0 ? cfg.tol : default_tol(inst.n);

  SolveReport rep;
  ResidualValue r = residual(inst, y);
  rep.residual_history.push_back(r.norm);
  while (r.norm > tol && rep.iterations < cfg.max_iter) {
    const Matrix Y = dual_to_Y(inst, y);
    const PatternMatrix M =
        (Y.array() >= -pattern_tolerance(Y)).cast<std::uint8_t>();
    const Vector d = solve(assemble(M), r.F);
    auto [r_next, engaged] =
        detail::damped_update(inst, y.flat(), d, r.norm, cfg.damping, y);
    r = std::move(r_next);
    rep.damped_steps += engaged ? 1 : 0;
    ++rep.iterations;
    rep.residual_history.push_back(r.norm);
  }
  detail::finalize(inst, y, tol, timer, rep);
  return rep;
}

inline SolveReport plain_newton(const ProblemInstance& inst,
                                const SolveConfig& cfg = {}) {
  return plain_newton(inst, DualPoint::zero(inst.n), cfg);
}

// Two-step method: hop to a vertex of the current class, then take the
// Newton step with that vertex's (always nonsingular) system matrix.
// Revisiting an earlier iterate triggers one reseed of the vertex search;
// a second revisit aborts with CyclingSuspected.
inline SolveReport modified_newton(const ProblemInstance& inst, DualPoint y,
                                   const SolveConfig& cfg = {}) {
  const detail::WallTimer timer;
  const double tol = cfg.tol > 0.0 ? cfg.tol : default_tol(inst.n);

  SolveReport rep;
  std::mt19937_64 seeder(cfg.seed);
  std::vector<Vector> visited{y.flat()};

  ResidualValue r = residual(inst, y);
  rep.residual_history.push_back(r.norm);
  while (r.norm > tol && rep.iterations < cfg.max_iter) {
    VertexResult vertex = find_vertex(inst, y, seeder());
    rep.shifts_per_iter.push_back(vertex.shifts);

    const Matrix Yv = dual_to_Y(inst, vertex.y);
    const PatternMatrix M =
        (Yv.array() >= -pattern_tolerance(Yv)).cast<std::uint8_t>();
    const ResidualValue rv = residual_from_X(Yv.cwiseMax(0.0));
    const Vector d = solve(assemble(M), rv.F);

    auto [r_next, engaged] =
        detail::damped_update(inst, vertex.y.flat(), d, r.norm, cfg.damping, y);
    r = std::move(r_next);
    rep.damped_steps += engaged ? 1 : 0;
    ++rep.iterations;
    rep.residual_history.push_back(r.norm);

    const Vector yf = y.flat();
    bool revisit = false;
    for (const Vector& prev : visited) {
      if ((yf - prev).cwiseAbs().maxCoeff() <= 1e-14) {
        revisit = true;
        break;
      }
    }
    if (revisit) {
      if (rep.cycling_reseeded) {
        throw CyclingSuspected("iterate revisited twice at n=" +
                               std::to_string(inst.n));
      }
      rep.cycling_reseeded = true;
      seeder.seed(cfg.seed ^ 0x9E3779B97F4A7C15ULL);
      visited.clear();
    }
    visited.push_back(yf);
  }
  detail::finalize(inst, y, tol, timer, rep);
  return rep;
}

inline SolveReport modified_newton(const ProblemInstance& inst,
                                   const SolveConfig& cfg = {}) {
  return modified_newton(inst, DualPoint::zero(inst.n), cfg);
}

// One diagonal block of a decomposed instance, with its index maps into the
// parent matrix.
struct Subproblem {
  ProblemInstance inst;
  std::vector<Index> rows;
  std::vector<Index> cols;
};

// Splits the instance along the components of the strict support of X(y).
// Requires at least two components, each with equally many rows and columns;
// the blocks can then be projected independently and reassembled.
inline std::vector<Subproblem> split_subproblems(const ProblemInstance& inst,
                                                 const DualPoint& y) {
  const Matrix Y = dual_to_Y(inst, y);
  const PatternMatrix support = (Y.array() > 0.0).cast<std::uint8_t>();
  const BlockPartition part = components(support);
  if (part.K < 2) {
    throw Error("support is connected; nothing to split");
  }
  std::vector<Subproblem> subs;
  subs.reserve(part.K);
  for (Index k = 0; k < part.K; ++k) {
    const auto& rows = part.row_groups[k];
    const auto& cols = part.col_groups[k];
    if (rows.size() != cols.size()) {
      throw NonSquareBlock("component " + std::to_string(k) + " has " +
                           std::to_string(rows.size()) + " rows and " +
                           std::to_string(cols.size()) + " columns");
    }
    const Index m = static_cast<Index>(rows.size());
    Matrix B(m, m);
    for (Index a = 0; a < m; ++a) {
      for (Index b = 0; b < m; ++b) B(a, b) = inst.Xhat(rows[a], cols[b]);
    }
    subs.push_back(Subproblem{ProblemInstance(std::move(B)),
                              rows, cols});
  }
  return subs;
}

// Reassembles block solutions into the full-size matrix (zeros elsewhere).
inline Matrix reassemble(Index n, const std::vector<Subproblem>& subs,
                         const std::vector<Matrix>& solutions) {
  Matrix X = Matrix::Zero(n, n);
  for (std::size_t k = 0; k < subs.size(); ++k) {
    const auto& rows = subs[k].rows;
    const auto& cols = subs[k].cols;
    for (std::size_t a = 0; a < rows.size(); ++a) {
      for (std::size_t b = 0; b < cols.size(); ++b) {
        X(rows[a], cols[b]) = solutions[k](a, b);
      }
    }
  }
  return X;
}

// Why a solution's Newton system can be singular: a disconnected support and
// the loss of strict complementarity go together with a singular system
// matrix of the support pattern.
struct Diagnosis {
  bool connected = false;
  bool strict_complementarity = false;
  bool min_pattern_singular = false;
};

inline Diagnosis singularity_diagnostic(const ProblemInstance& inst,
                                        const DualPoint& y_star) {
  const Matrix Y = dual_to_Y(inst, y_star);
  const PatternMatrix support = (Y.array() > 0.0).cast<std::uint8_t>();
  Diagnosis d;
  d.connected = is_connected(support);
  // X + Z = |Y| entrywise; strictness fails where Y sits inside the zero band.
  d.strict_complementarity = Y.cwiseAbs().minCoeff() > pattern_tolerance(Y);
  d.min_pattern_singular = !pd_check(support);
  return d;
}

}  // namespace dsproj
