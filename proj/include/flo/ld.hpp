#pragma once

// Lagrangian-duality solver for FLO.
//
// The constraint o_i + sum_j x_ij = 1 is moved into the objective with
// multipliers lambda_i >= 0. For fixed lambda the relaxed problem separates:
// outliers are the ell points with the largest multipliers, and candidate
// exemplar j opens iff its amortised cost
//
//   mu_j = c_j + sum_{i : d(i,j) < lambda_i} (d(i,j) - lambda_i)
//
// is negative. Multipliers follow a projected subgradient ascent. Distances
// are streamed one column at a time and never stored as an n x n matrix.

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "flo/core.hpp"

namespace flo::ld {

enum class ScheduleKind { Geometric, Harmonic };

struct StepSchedule {
    ScheduleKind kind = ScheduleKind::Geometric;
    double theta0 = 1.0;
    double alpha = 0.995;  // geometric ratio
};

/// geometric: theta0 * alpha^t, harmonic: theta0 / (1 + t).
double step_size(const StepSchedule& schedule, std::size_t t);

/// Relaxed assignment in sparse form. For each covered point only the nearest
/// opened exemplar is kept as an explicit pair; cover[i] counts every opened
/// exemplar with a negative reduced cost for i (the full row sum of x).
struct SparseAssignment {
    std::vector<std::pair<Index, Index>> pairs;  // (i, j), ascending in i
    std::vector<Index> cover;

    std::size_t nnz() const noexcept { return pairs.size(); }
};

/// Minimizer of the relaxed problem for one multiplier vector.
struct Iterate {
    std::vector<Index> outliers;   // sorted
    std::vector<Index> exemplars;  // sorted, {j : mu_j < 0}
    Vector mu;
    SparseAssignment x;
};

struct DualState {
    Vector lambda;
    std::size_t t = 0;
    Scalar best_dual = -std::numeric_limits<Scalar>::infinity();
    std::optional<Solution> best_primal;
};

enum class LambdaInit { Zero, NearestNeighbor };

struct Params {
    /// theta0 <= 0 selects the default: mean cluster cost / 10.
    StepSchedule schedule{ScheduleKind::Geometric, 0.0, 0.995};
    double tolerance = 1e-5;
    std::size_t window = 10;
    std::size_t max_iterations = 3000;
    LambdaInit init = LambdaInit::Zero;

    /// Points whose multipliers are reported through on_trace.
    std::vector<Index> trace_points;
    std::function<void(std::size_t iteration, Index point, Scalar lambda)> on_trace;
    /// Called once per iteration with the dual value and the primal energy
    /// of the feasible extraction.
    std::function<void(std::size_t iteration, Scalar dual, Scalar primal)> on_iteration;
};

struct Result {
    Solution solution;
    Scalar best_dual = 0;
    DualState state;
};

Iterate ld_iteration(const FloProblem& problem, const Vector& lambda);

/// lambda_i <- max(lambda_i + step * (1 - o_i - cover_i), 0); advances t.
void subgradient_update(DualState& state, const Iterate& iterate, const StepSchedule& schedule);

/// Lagrangian value sum_{i not in O} lambda_i + sum_{j in Y} mu_j, a lower
/// bound on the optimal energy.
Scalar dual_value(const FloProblem& problem, const Vector& lambda, const Iterate& iterate);

/// Feasible solution: the iterate's outliers, exemplars {mu_j < 0} minus
/// outliers (falling back to the non-outlier with the smallest mu), nearest
/// exemplar completion.
Solution extract_feasible(const FloProblem& problem, const Iterate& iterate);

Vector initial_multipliers(const FloProblem& problem, LambdaInit init);

Result solve(const FloProblem& problem, const Params& params = {});

}  // namespace flo::ld
