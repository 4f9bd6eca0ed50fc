#pragma once

// Facility location with outlier selection (FLO): problem definition,
// energy evaluation, feasibility checking and nearest-exemplar completion.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace flo {

using Index = std::ptrdiff_t;
using Scalar = double;
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Point-to-exemplar slot. An empty slot marks the point as an outlier.
using Assignee = std::optional<Index>;
inline constexpr std::nullopt_t outlier = std::nullopt;

class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// On-demand pairwise distance d(i, j).
///
/// Wraps any callable; copies share the underlying data. Evaluation must be
/// pure so the oracle can be read concurrently. An optional column kernel
/// fills d(., j) for all points at once; metrics that can vectorize provide
/// one, otherwise it falls back to the pairwise kernel.
class DistanceOracle {
public:
    using Kernel = std::function<Scalar(Index, Index)>;
    using ColumnKernel = std::function<void(Index, std::span<Scalar>)>;

    DistanceOracle() = default;
    DistanceOracle(Index n, Kernel kernel, std::string metric = "custom",
                   ColumnKernel column = {});

    Index size() const noexcept { return n_; }
    const std::string& metric() const noexcept { return metric_; }

    Scalar operator()(Index i, Index j) const { return i == j ? Scalar(0) : kernel_(i, j); }

    /// Writes d(i, j) for every i into out (length n).
    void column(Index j, std::span<Scalar> out) const;

private:
    Index n_ = 0;
    Kernel kernel_;
    ColumnKernel column_;
    std::string metric_;
};

struct FloProblem {
    DistanceOracle oracle;
    Vector costs;   // per-point cluster creation cost c_i
    Index ell = 0;  // number of outliers to select

    FloProblem() = default;
    FloProblem(DistanceOracle oracle, Vector costs, Index ell);
    FloProblem(DistanceOracle oracle, Scalar uniform_cost, Index ell);

    Index size() const noexcept { return oracle.size(); }
};

struct Solution {
    std::vector<Index> exemplars;      // sorted ascending
    std::vector<Assignee> assignment;  // per point: exemplar or outlier
    Scalar energy = 0;
    std::size_t iterations = 0;
    bool converged = true;

    std::vector<Index> outliers() const;
    Index outlier_count() const;
};

/// Solution constraint that was violated.
enum class Constraint {
    AssignToExemplar,  // every non-outlier references an exemplar
    SelfAssignment,    // exemplars point at themselves
    OutlierCount,      // exactly ell outliers
    ExemplarNotOutlier,
    Shape,             // assignment length or index range
};

struct Violation {
    Constraint constraint;
    std::vector<Index> indices;
    std::string message;
};

struct FeasibilityReport {
    std::vector<Violation> violations;

    bool ok() const noexcept { return violations.empty(); }
    explicit operator bool() const noexcept { return ok(); }
    std::string to_string() const;
};

class FeasibilityError : public std::runtime_error {
public:
    explicit FeasibilityError(FeasibilityReport report);
    const FeasibilityReport& report() const noexcept { return report_; }

private:
    FeasibilityReport report_;
};

FeasibilityReport check_feasible(const FloProblem& problem, const Solution& sol);

/// Sum of opened exemplar costs plus assignment distances. Throws
/// FeasibilityError if the solution violates any constraint.
Scalar energy(const FloProblem& problem, const Solution& sol);

/// Energy without the feasibility check; used on hot paths where the
/// solution is feasible by construction.
Scalar energy_unchecked(const FloProblem& problem, const Solution& sol);

inline constexpr std::size_t default_sample_budget = 1'000'000;

/// theta times the lower median of the off-diagonal distances. When the pair
/// count exceeds sample_budget the median is taken over that many seeded
/// uniform random pairs.
Scalar cluster_cost_from_median(const DistanceOracle& oracle, Scalar theta,
                                std::size_t sample_budget = default_sample_budget,
                                std::uint64_t seed = 0);

/// Maps every non-outlier to its nearest exemplar (ties go to the lowest
/// index) and fills in the energy.
Solution assign_to_exemplars(const FloProblem& problem, std::vector<Index> exemplars,
                             std::vector<Index> outliers);

/// Indices of the count largest values, ordered by decreasing value with
/// ties broken towards the lowest index.
std::vector<Index> largest_indices(std::span<const Scalar> values, Index count);

/// Lower median: for an even count the smaller of the two middle values.
template <class Range>
auto lower_median(Range values) {
    auto mid = values.begin() + (values.size() - 1) / 2;
    std::nth_element(values.begin(), mid, values.end());
    return *mid;
}

}  // namespace flo
