#pragma once

// Umbrella header: projection of a square matrix onto the doubly stochastic
// polytope via a two-step semismooth Newton method, with baseline algorithms
// and a test/benchmark harness.

#include "dsproj/baselines.hpp"
#include "dsproj/core_model.hpp"
#include "dsproj/equivalence.hpp"
#include "dsproj/errors.hpp"
#include "dsproj/graph.hpp"
#include "dsproj/harness.hpp"
#include "dsproj/jacobian.hpp"
#include "dsproj/solver.hpp"
