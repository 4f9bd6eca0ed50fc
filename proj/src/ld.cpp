#include "flo/ld.hpp"

#include <cmath>
#include <limits>

namespace flo::ld {

double step_size(const StepSchedule& schedule, std::size_t t) {
    switch (schedule.kind) {
        case ScheduleKind::Geometric: return schedule.theta0 * std::pow(schedule.alpha, static_cast<double>(t));
        case ScheduleKind::Harmonic: return schedule.theta0 / (1.0 + static_cast<double>(t));
    }
    return 0.0;
}

namespace {

void check_lambda(const FloProblem& problem, const Vector& lambda) {
    if (lambda.size() != problem.size()) throw ArgumentError("ld: multiplier vector has wrong length");
}

}  // namespace

Iterate ld_iteration(const FloProblem& problem, const Vector& lambda) {
    check_lambda(problem, lambda);
    const Index n = problem.size();
    const auto un = static_cast<std::size_t>(n);

    Iterate it;
    it.outliers = largest_indices(std::span<const Scalar>(lambda.data(), un), problem.ell);
    std::sort(it.outliers.begin(), it.outliers.end());

    // Only points with a positive multiplier can have a negative reduced cost.
    std::vector<Index> active;
    for (Index i = 0; i < n; ++i)
        if (lambda[i] > 0) active.push_back(i);

    it.mu = problem.costs;
    if (!active.empty()) {
#pragma omp parallel
        {
            std::vector<Scalar> col(un);
#pragma omp for schedule(static)
            for (Index j = 0; j < n; ++j) {
                problem.oracle.column(j, col);
                Scalar mu = problem.costs[j];
                for (Index i : active) {
                    const Scalar q = col[static_cast<std::size_t>(i)] - lambda[i];
                    if (q < 0) mu += q;
                }
                it.mu[j] = mu;
            }
        }
    }

    for (Index j = 0; j < n; ++j)
        if (it.mu[j] < 0) it.exemplars.push_back(j);

    it.x.cover.assign(un, 0);
    if (!it.exemplars.empty()) {
        std::vector<Scalar> col(un);
        std::vector<Scalar> nearest(un, std::numeric_limits<Scalar>::infinity());
        std::vector<Index> nearest_j(un, -1);
        for (Index j : it.exemplars) {
            problem.oracle.column(j, col);
            for (Index i : active) {
                const Scalar d = col[static_cast<std::size_t>(i)];
                if (d - lambda[i] < 0) {
                    ++it.x.cover[i];
                    if (d < nearest[i]) {
                        nearest[i] = d;
                        nearest_j[i] = j;
                    }
                }
            }
        }
        for (Index i = 0; i < n; ++i)
            if (nearest_j[i] >= 0) it.x.pairs.emplace_back(i, nearest_j[i]);
    }
    return it;
}

void subgradient_update(DualState& state, const Iterate& iterate, const StepSchedule& schedule) {
    const Index n = state.lambda.size();
    if (static_cast<Index>(iterate.x.cover.size()) != n)
        throw ArgumentError("subgradient_update: iterate does not match multipliers");
    std::vector<char> is_outlier(static_cast<std::size_t>(n), 0);
    for (Index o : iterate.outliers) is_outlier[o] = 1;

    const double step = step_size(schedule, state.t);
    for (Index i = 0; i < n; ++i) {
        const auto g = Scalar(1 - is_outlier[i] - iterate.x.cover[i]);
        state.lambda[i] = std::max(state.lambda[i] + step * g, Scalar(0));
    }
    ++state.t;
}

Scalar dual_value(const FloProblem& problem, const Vector& lambda, const Iterate& iterate) {
    check_lambda(problem, lambda);
    std::vector<char> is_outlier(static_cast<std::size_t>(problem.size()), 0);
    for (Index o : iterate.outliers) is_outlier[o] = 1;
    Scalar value = 0;
    for (Index i = 0; i < problem.size(); ++i)
        if (!is_outlier[i]) value += lambda[i];
    for (Index j : iterate.exemplars) value += iterate.mu[j];
    return value;
}

Solution extract_feasible(const FloProblem& problem, const Iterate& iterate) {
    const Index n = problem.size();
    std::vector<char> is_outlier(static_cast<std::size_t>(n), 0);
    for (Index o : iterate.outliers) is_outlier[o] = 1;

    std::vector<Index> exemplars;
    for (Index j : iterate.exemplars)
        if (!is_outlier[j]) exemplars.push_back(j);
    if (exemplars.empty()) {
        Index best = -1;
        for (Index j = 0; j < n; ++j)
            if (!is_outlier[j] && (best < 0 || iterate.mu[j] < iterate.mu[best])) best = j;
        exemplars.push_back(best);
    }
    return assign_to_exemplars(problem, std::move(exemplars), iterate.outliers);
}

Vector initial_multipliers(const FloProblem& problem, LambdaInit init) {
    const Index n = problem.size();
    if (init == LambdaInit::Zero || n < 2) return Vector::Zero(n);
    Vector lambda = Vector::Constant(n, std::numeric_limits<Scalar>::infinity());
    std::vector<Scalar> col(static_cast<std::size_t>(n));
    for (Index j = 0; j < n; ++j) {
        problem.oracle.column(j, col);
        for (Index i = 0; i < n; ++i)
            if (i != j) lambda[i] = std::min(lambda[i], col[static_cast<std::size_t>(i)]);
    }
    return lambda;
}

Result solve(const FloProblem& problem, const Params& params) {
    const Index n = problem.size();
    if (n < 2) throw ArgumentError("ld::solve: need at least two points");
    if (params.max_iterations == 0) throw ArgumentError("ld::solve: max_iterations must be positive");

    StepSchedule schedule = params.schedule;
    if (!(schedule.theta0 > 0)) {
        schedule.theta0 = problem.costs.mean() / 10.0;
        if (!(schedule.theta0 > 0)) schedule.theta0 = 1.0;
    }
    if (schedule.kind == ScheduleKind::Geometric && !(schedule.alpha > 0 && schedule.alpha < 1))
        throw ArgumentError("ld::solve: geometric ratio must lie in (0,1)");

    Result result;
    DualState& state = result.state;
    state.lambda = initial_multipliers(problem, params.init);

    bool converged = false;
    std::size_t stable = 0;
    Vector previous;
    while (state.t < params.max_iterations) {
        const Iterate it = ld_iteration(problem, state.lambda);
        const Scalar dual = dual_value(problem, state.lambda, it);
        state.best_dual = std::max(state.best_dual, dual);

        Solution primal = extract_feasible(problem, it);
        const Scalar primal_energy = primal.energy;
        if (!state.best_primal || primal_energy < state.best_primal->energy)
            state.best_primal = std::move(primal);

        previous = state.lambda;
        subgradient_update(state, it, schedule);

        if (params.on_iteration) params.on_iteration(state.t, dual, primal_energy);
        if (params.on_trace)
            for (Index p : params.trace_points)
                if (p >= 0 && p < n) params.on_trace(state.t, p, state.lambda[p]);

        const Scalar change = (state.lambda - previous).cwiseAbs().maxCoeff();
        stable = change < params.tolerance ? stable + 1 : 0;
        if (stable >= params.window) {
            converged = true;
            break;
        }
    }

    result.solution = *state.best_primal;
    result.solution.iterations = state.t;
    result.solution.converged = converged;
    result.best_dual = state.best_dual;
    return result;
}

}  // namespace flo::ld
