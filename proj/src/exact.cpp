#include "flo/exact.hpp"

#include <bit>
#include <limits>

namespace flo::exact {

namespace {

std::uint64_t binomial(Index n, Index k) {
    if (k < 0 || k > n) return 0;
    std::uint64_t r = 1;
    for (Index i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    return r;
}

/// Advances a sorted k-combination of {0..n-1}; false after the last one.
bool next_combination(std::vector<Index>& c, Index n) {
    const auto k = static_cast<Index>(c.size());
    for (Index i = k - 1; i >= 0; --i) {
        if (c[i] < n - k + i) {
            ++c[i];
            for (Index j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
            return true;
        }
    }
    return false;
}

}  // namespace

std::uint64_t count_feasible(Index n, Index ell) {
    if (ell >= n) return 0;
    return binomial(n, ell) * ((std::uint64_t{1} << (n - ell)) - 1);
}

Solution solve(const FloProblem& problem, const Limits& limits) {
    const Index n = problem.size();
    if (n > limits.max_n)
        throw SizeError("exact solver refuses n = " + std::to_string(n) + " (limit " +
                        std::to_string(limits.max_n) + ")");
    if (n == 0) throw ArgumentError("exact solver: empty problem");
    const Index ell = problem.ell;

    Matrix d(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) d(i, j) = problem.oracle(i, j);

    Scalar best_energy = std::numeric_limits<Scalar>::infinity();
    std::vector<Index> best_exemplars, best_outliers;

    std::vector<Index> outliers(static_cast<std::size_t>(ell));
    for (Index k = 0; k < ell; ++k) outliers[k] = k;
    std::vector<Index> rest;
    std::vector<Index> exemplars;
    do {
        rest.clear();
        for (Index i = 0, o = 0; i < n; ++i) {
            if (o < ell && outliers[o] == i)
                ++o;
            else
                rest.push_back(i);
        }
        const auto m = static_cast<Index>(rest.size());
        for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << m); ++mask) {
            Scalar energy = 0;
            exemplars.clear();
            for (Index b = 0; b < m; ++b) {
                if (mask >> b & 1) {
                    exemplars.push_back(rest[b]);
                    energy += problem.costs[rest[b]];
                }
            }
            if (energy > best_energy) continue;
            for (Index b = 0; b < m && energy <= best_energy; ++b) {
                if (mask >> b & 1) continue;
                Scalar nearest = std::numeric_limits<Scalar>::infinity();
                for (Index e : exemplars) nearest = std::min(nearest, d(rest[b], e));
                energy += nearest;
            }
            const bool better =
                energy < best_energy ||
                (energy == best_energy &&
                 (exemplars < best_exemplars || (exemplars == best_exemplars && outliers < best_outliers)));
            if (better) {
                best_energy = energy;
                best_exemplars = exemplars;
                best_outliers = outliers;
            }
        }
    } while (next_combination(outliers, n));

    return assign_to_exemplars(problem, best_exemplars, best_outliers);
}

}  // namespace flo::exact
