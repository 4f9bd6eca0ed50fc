#include "flo/core.hpp"

#include <limits>
#include <numeric>
#include <sstream>

#include "flo/random.hpp"

namespace flo {

DistanceOracle::DistanceOracle(Index n, Kernel kernel, std::string metric, ColumnKernel column)
    : n_(n), kernel_(std::move(kernel)), column_(std::move(column)), metric_(std::move(metric)) {
    if (n < 0) throw ArgumentError("DistanceOracle: negative point count");
    if (!kernel_) throw ArgumentError("DistanceOracle: empty kernel");
}

void DistanceOracle::column(Index j, std::span<Scalar> out) const {
    if (static_cast<Index>(out.size()) != n_) throw ArgumentError("DistanceOracle::column: bad buffer size");
    if (column_) {
        column_(j, out);
    } else {
        for (Index i = 0; i < n_; ++i) out[static_cast<std::size_t>(i)] = kernel_(i, j);
    }
    out[static_cast<std::size_t>(j)] = 0;
}

FloProblem::FloProblem(DistanceOracle oracle_, Vector costs_, Index ell_)
    : oracle(std::move(oracle_)), costs(std::move(costs_)), ell(ell_) {
    const Index n = oracle.size();
    if (costs.size() != n) throw ArgumentError("FloProblem: cost vector length must equal n");
    if ((costs.array() < 0).any() || !costs.allFinite())
        throw ArgumentError("FloProblem: costs must be finite and non-negative");
    if (ell < 0) throw ArgumentError("FloProblem: outlier budget must be non-negative");
    if (n > 0 && ell >= n) throw ArgumentError("FloProblem: outlier budget must be below n");
}

FloProblem::FloProblem(DistanceOracle oracle_, Scalar uniform_cost, Index ell_)
    : FloProblem(oracle_, Vector::Constant(oracle_.size(), uniform_cost), ell_) {}

std::vector<Index> Solution::outliers() const {
    std::vector<Index> out;
    for (Index i = 0; i < static_cast<Index>(assignment.size()); ++i)
        if (!assignment[i]) out.push_back(i);
    return out;
}

Index Solution::outlier_count() const {
    return static_cast<Index>(std::count(assignment.begin(), assignment.end(), outlier));
}

namespace {

const char* constraint_name(Constraint c) {
    switch (c) {
        case Constraint::AssignToExemplar: return "assign-to-exemplar";
        case Constraint::SelfAssignment: return "exemplar-self-assignment";
        case Constraint::OutlierCount: return "outlier-count";
        case Constraint::ExemplarNotOutlier: return "exemplar-not-outlier";
        case Constraint::Shape: return "shape";
    }
    return "unknown";
}

}  // namespace

std::string FeasibilityReport::to_string() const {
    if (ok()) return "feasible";
    std::ostringstream os;
    for (const auto& v : violations) {
        os << constraint_name(v.constraint) << ": " << v.message;
        if (!v.indices.empty()) {
            os << " [";
            for (std::size_t k = 0; k < v.indices.size(); ++k) os << (k ? "," : "") << v.indices[k];
            os << "]";
        }
        os << "\n";
    }
    return os.str();
}

FeasibilityError::FeasibilityError(FeasibilityReport report)
    : std::runtime_error("infeasible solution: " + report.to_string()), report_(std::move(report)) {}

FeasibilityReport check_feasible(const FloProblem& problem, const Solution& sol) {
    FeasibilityReport report;
    const Index n = problem.size();
    if (static_cast<Index>(sol.assignment.size()) != n) {
        report.violations.push_back({Constraint::Shape, {}, "assignment length differs from n"});
        return report;
    }

    std::vector<char> is_exemplar(n, 0);
    std::vector<Index> bad_range;
    for (Index e : sol.exemplars) {
        if (e < 0 || e >= n)
            bad_range.push_back(e);
        else
            is_exemplar[e] = 1;
    }
    for (const auto& a : sol.assignment)
        if (a && (*a < 0 || *a >= n)) bad_range.push_back(*a);
    if (!bad_range.empty())
        report.violations.push_back({Constraint::Shape, bad_range, "index out of range"});

    std::vector<Index> not_exemplar, not_self, outlier_exemplar;
    for (Index i = 0; i < n; ++i) {
        const auto& a = sol.assignment[i];
        if (a && *a >= 0 && *a < n && !is_exemplar[*a]) not_exemplar.push_back(i);
        if (is_exemplar[i]) {
            if (!a)
                outlier_exemplar.push_back(i);
            else if (*a != i)
                not_self.push_back(i);
        }
    }
    if (!not_exemplar.empty())
        report.violations.push_back(
            {Constraint::AssignToExemplar, not_exemplar, "points assigned to a non-exemplar"});
    if (!not_self.empty())
        report.violations.push_back(
            {Constraint::SelfAssignment, not_self, "exemplars not assigned to themselves"});
    if (!outlier_exemplar.empty())
        report.violations.push_back(
            {Constraint::ExemplarNotOutlier, outlier_exemplar, "exemplars marked as outliers"});

    const Index count = sol.outlier_count();
    if (count != problem.ell) {
        report.violations.push_back(
            {Constraint::OutlierCount, sol.outliers(),
             "expected " + std::to_string(problem.ell) + " outliers, found " + std::to_string(count)});
    }
    return report;
}

Scalar energy_unchecked(const FloProblem& problem, const Solution& sol) {
    Scalar total = 0;
    for (Index e : sol.exemplars) total += problem.costs[e];
    for (Index i = 0; i < static_cast<Index>(sol.assignment.size()); ++i)
        if (const auto& a = sol.assignment[i]; a && *a != i) total += problem.oracle(i, *a);
    return total;
}

Scalar energy(const FloProblem& problem, const Solution& sol) {
    auto report = check_feasible(problem, sol);
    if (!report.ok()) throw FeasibilityError(std::move(report));
    return energy_unchecked(problem, sol);
}

Scalar cluster_cost_from_median(const DistanceOracle& oracle, Scalar theta,
                                std::size_t sample_budget, std::uint64_t seed) {
    const Index n = oracle.size();
    if (n < 2) throw ArgumentError("cluster_cost_from_median: need at least two points");
    if (!(theta > 0)) throw ArgumentError("cluster_cost_from_median: theta must be positive");
    if (sample_budget == 0) throw ArgumentError("cluster_cost_from_median: empty sample budget");

    const auto un = static_cast<std::uint64_t>(n);
    const std::uint64_t pairs = un * (un - 1) / 2;
    std::vector<Scalar> values;
    if (pairs <= sample_budget) {
        values.reserve(pairs);
        for (Index i = 0; i < n; ++i)
            for (Index j = i + 1; j < n; ++j) values.push_back(oracle(i, j));
    } else {
        Rng rng(seed);
        values.reserve(sample_budget);
        for (std::size_t s = 0; s < sample_budget; ++s) {
            const auto i = static_cast<Index>(rng.below(un));
            auto j = static_cast<Index>(rng.below(un - 1));
            if (j >= i) ++j;
            values.push_back(oracle(i, j));
        }
    }
    return theta * lower_median(std::move(values));
}

std::vector<Index> largest_indices(std::span<const Scalar> values, Index count) {
    const auto n = static_cast<Index>(values.size());
    if (count < 0 || count > n) throw ArgumentError("largest_indices: count out of range");
    std::vector<Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Index{0});
    std::partial_sort(idx.begin(), idx.begin() + count, idx.end(), [&](Index a, Index b) {
        return values[a] > values[b] || (values[a] == values[b] && a < b);
    });
    idx.resize(static_cast<std::size_t>(count));
    return idx;
}

Solution assign_to_exemplars(const FloProblem& problem, std::vector<Index> exemplars,
                             std::vector<Index> outliers) {
    const Index n = problem.size();
    if (exemplars.empty()) throw ArgumentError("assign_to_exemplars: empty exemplar set");
    std::sort(exemplars.begin(), exemplars.end());
    exemplars.erase(std::unique(exemplars.begin(), exemplars.end()), exemplars.end());

    Solution sol;
    sol.assignment.assign(n, Assignee{});
    std::vector<char> is_outlier(n, 0);
    for (Index o : outliers) {
        if (o < 0 || o >= n) throw ArgumentError("assign_to_exemplars: outlier index out of range");
        is_outlier[o] = 1;
    }
    std::vector<char> is_exemplar(n, 0);
    for (Index e : exemplars) {
        if (e < 0 || e >= n) throw ArgumentError("assign_to_exemplars: exemplar index out of range");
        if (is_outlier[e]) throw ArgumentError("assign_to_exemplars: exemplar is also an outlier");
        is_exemplar[e] = 1;
    }

    // Column sweep over exemplars in ascending order; strict < keeps the
    // lowest index on ties.
    std::vector<Scalar> best(static_cast<std::size_t>(n), std::numeric_limits<Scalar>::infinity());
    std::vector<Index> best_e(static_cast<std::size_t>(n), -1);
    std::vector<Scalar> col(static_cast<std::size_t>(n));
    for (Index e : exemplars) {
        problem.oracle.column(e, col);
        for (Index i = 0; i < n; ++i) {
            if (col[i] < best[i]) {
                best[i] = col[i];
                best_e[i] = e;
            }
        }
    }

    Scalar total = 0;
    for (Index e : exemplars) total += problem.costs[e];
    for (Index i = 0; i < n; ++i) {
        if (is_outlier[i]) continue;
        if (is_exemplar[i]) {
            sol.assignment[i] = i;
            continue;
        }
        sol.assignment[i] = best_e[i];
        total += best[i];
    }
    sol.exemplars = std::move(exemplars);
    sol.energy = total;
    return sol;
}

}  // namespace flo
