#pragma once

// k-means-- baseline: Lloyd iterations that drop the ell points farthest from
// their nearest center before each center update, seeded with k-means++.

#include <cstdint>
#include <functional>

#include "flo/core.hpp"

namespace flo::baseline {

struct KmmParams {
    Index k = 1;
    Index ell = 0;
    std::size_t max_iterations = 100;
    std::uint64_t seed = 0;
    std::size_t restarts = 5;
    /// Called with (restart, iteration, objective) after every assignment step.
    std::function<void(std::size_t, std::size_t, Scalar)> on_iteration;
};

/// Raw k-means-- output: centers are means, not data points.
struct KmmFit {
    Matrix centers;                   // d x k
    std::vector<Assignee> labels;     // cluster id per point, empty = outlier
    Scalar objective = 0;             // squared distances of non-outliers
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<Scalar> history;      // objective after each assignment step
};

/// D^2-weighted seeding. Points are columns of a d x n matrix.
Matrix kmeanspp_init(const Matrix& points, Index k, std::uint64_t seed);

/// One k-means-- run from the given centers.
KmmFit fit(const Matrix& points, Matrix centers, const KmmParams& params);

/// Best of params.restarts seeded runs.
KmmFit fit(const Matrix& points, const KmmParams& params);

/// Maps each cluster to its medoid (member nearest the mean) and completes
/// the FLO solution against problem's oracle and costs.
Solution to_solution(const Matrix& points, const KmmFit& fit, const FloProblem& problem);

Solution solve(const Matrix& points, const KmmParams& params, const FloProblem& problem);

}  // namespace flo::baseline
