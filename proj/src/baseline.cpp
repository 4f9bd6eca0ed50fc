#include "flo/baseline.hpp"

#include <limits>

#include "flo/random.hpp"

namespace flo::baseline {

namespace {

void validate(const Matrix& points, Index k, Index ell) {
    const Index n = points.cols();
    if (k < 1) throw ArgumentError("k-means--: k must be at least 1");
    if (ell < 0) throw ArgumentError("k-means--: negative outlier count");
    if (k + ell > n) throw ArgumentError("k-means--: k + ell exceeds the number of points");
}

}  // namespace

Matrix kmeanspp_init(const Matrix& points, Index k, std::uint64_t seed) {
    const Index n = points.cols();
    if (k < 1) throw ArgumentError("kmeanspp_init: k must be at least 1");
    if (k > n) throw ArgumentError("kmeanspp_init: k exceeds the number of points");

    Rng rng(seed);
    Matrix centers(points.rows(), k);
    std::vector<char> chosen(static_cast<std::size_t>(n), 0);
    Vector d2 = Vector::Constant(n, std::numeric_limits<Scalar>::infinity());

    Index pick = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
    for (Index c = 0; c < k; ++c) {
        if (c > 0) {
            const Scalar total = d2.sum();
            pick = -1;
            if (total > 0) {
                const Scalar target = rng.uniform() * total;
                Scalar acc = 0;
                for (Index i = 0; i < n; ++i) {
                    if (d2[i] <= 0) continue;
                    acc += d2[i];
                    pick = i;
                    if (acc > target) break;
                }
            } else {
                // Remaining points coincide with chosen centers: pick uniformly
                // among the unchosen ones.
                std::vector<Index> free;
                for (Index i = 0; i < n; ++i)
                    if (!chosen[i]) free.push_back(i);
                pick = free[rng.below(free.size())];
            }
        }
        chosen[pick] = 1;
        centers.col(c) = points.col(pick);
        for (Index i = 0; i < n; ++i)
            d2[i] = std::min(d2[i], (points.col(i) - points.col(pick)).squaredNorm());
        d2[pick] = 0;
    }
    return centers;
}

KmmFit fit(const Matrix& points, Matrix centers, const KmmParams& params) {
    validate(points, params.k, params.ell);
    const Index n = points.cols();
    const Index k = centers.cols();
    if (k != params.k || centers.rows() != points.rows())
        throw ArgumentError("k-means--: center matrix has the wrong shape");

    KmmFit result;
    std::vector<Index> nearest(static_cast<std::size_t>(n));
    Vector d2(n);
    std::vector<Assignee> labels;

    for (std::size_t iter = 0; iter < params.max_iterations; ++iter) {
        for (Index i = 0; i < n; ++i) {
            Index best = 0;
            Scalar best_d = (points.col(i) - centers.col(0)).squaredNorm();
            for (Index c = 1; c < k; ++c) {
                const Scalar d = (points.col(i) - centers.col(c)).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            nearest[i] = best;
            d2[i] = best_d;
        }

        const auto dropped = largest_indices(std::span<const Scalar>(d2.data(), n), params.ell);
        std::vector<Assignee> next(nearest.begin(), nearest.end());
        for (Index o : dropped) next[o] = outlier;

        Scalar objective = 0;
        for (Index i = 0; i < n; ++i)
            if (next[i]) objective += d2[i];
        result.history.push_back(objective);
        result.iterations = iter + 1;
        if (params.on_iteration) params.on_iteration(0, iter, objective);

        const bool fixpoint = next == labels;
        labels = std::move(next);
        result.objective = objective;
        if (fixpoint) {
            result.converged = true;
            break;
        }

        Matrix sums = Matrix::Zero(points.rows(), k);
        std::vector<Index> counts(static_cast<std::size_t>(k), 0);
        for (Index i = 0; i < n; ++i) {
            if (!labels[i]) continue;
            sums.col(*labels[i]) += points.col(i);
            ++counts[*labels[i]];
        }
        std::vector<char> reseeded(static_cast<std::size_t>(n), 0);
        for (Index c = 0; c < k; ++c) {
            if (counts[c] > 0) {
                centers.col(c) = sums.col(c) / static_cast<Scalar>(counts[c]);
                continue;
            }
            // Empty cluster: move its center onto the farthest non-outlier.
            Index far = -1;
            for (Index i = 0; i < n; ++i)
                if (labels[i] && !reseeded[i] && (far < 0 || d2[i] > d2[far])) far = i;
            if (far >= 0) {
                reseeded[far] = 1;
                centers.col(c) = points.col(far);
            }
        }
    }

    result.centers = std::move(centers);
    result.labels = std::move(labels);
    return result;
}

KmmFit fit(const Matrix& points, const KmmParams& params) {
    validate(points, params.k, params.ell);
    const std::size_t restarts = std::max<std::size_t>(params.restarts, 1);
    KmmFit best;
    for (std::size_t r = 0; r < restarts; ++r) {
        KmmParams run = params;
        if (params.on_iteration)
            run.on_iteration = [&params, r](std::size_t, std::size_t it, Scalar obj) {
                params.on_iteration(r, it, obj);
            };
        KmmFit current = fit(points, kmeanspp_init(points, params.k, params.seed + r), run);
        if (r == 0 || current.objective < best.objective) best = std::move(current);
    }
    return best;
}

Solution to_solution(const Matrix& points, const KmmFit& fit, const FloProblem& problem) {
    const Index n = points.cols();
    if (problem.size() != n || static_cast<Index>(fit.labels.size()) != n)
        throw ArgumentError("k-means--: fit does not match the problem size");

    const Index k = fit.centers.cols();
    std::vector<Index> medoid(static_cast<std::size_t>(k), -1);
    std::vector<Scalar> medoid_d(static_cast<std::size_t>(k), std::numeric_limits<Scalar>::infinity());
    std::vector<Index> outliers;
    for (Index i = 0; i < n; ++i) {
        if (!fit.labels[i]) {
            outliers.push_back(i);
            continue;
        }
        const Index c = *fit.labels[i];
        const Scalar d = (points.col(i) - fit.centers.col(c)).squaredNorm();
        if (d < medoid_d[c]) {
            medoid_d[c] = d;
            medoid[c] = i;
        }
    }
    std::vector<Index> exemplars;
    for (Index m : medoid)
        if (m >= 0) exemplars.push_back(m);

    Solution sol = assign_to_exemplars(problem, std::move(exemplars), std::move(outliers));
    sol.iterations = fit.iterations;
    sol.converged = fit.converged;
    return sol;
}

Solution solve(const Matrix& points, const KmmParams& params, const FloProblem& problem) {
    if (params.ell != problem.ell) throw ArgumentError("k-means--: outlier count differs from the problem");
    return to_solution(points, fit(points, params), problem);
}

}  // namespace flo::baseline
