#include "flo/apoc.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace flo::apoc {

namespace {

constexpr Scalar neg_inf = -std::numeric_limits<Scalar>::infinity();

/// Largest and second largest value of a sequence plus the position of the
/// largest (first occurrence).
struct Top2 {
    Scalar first = neg_inf;
    Scalar second = neg_inf;
    Index at = -1;

    void push(Scalar v, Index i) {
        if (v > first) {
            second = first;
            first = v;
            at = i;
        } else if (v > second) {
            second = v;
        }
    }
    Scalar excluding(Index i) const { return i == at ? second : first; }
};

inline Scalar damp(Scalar old_value, Scalar raw, double damping) {
    return damping * old_value + (1.0 - damping) * raw;
}

}  // namespace

Matrix SimilarityView::dense() const {
    const Index n = size();
    Matrix s(n, n);
    std::vector<Scalar> col(static_cast<std::size_t>(n));
    for (Index j = 0; j < n; ++j) {
        problem_->oracle.column(j, col);
        for (Index i = 0; i < n; ++i) s(i, j) = -col[static_cast<std::size_t>(i)];
        s(j, j) = -problem_->costs[j];
    }
    return s;
}

bool MessageState::all_finite() const {
    return rho.allFinite() && alpha.allFinite() && lambda.allFinite() && omega.allFinite();
}

MessageState init_messages(const Matrix& similarity, Index ell) {
    const Index n = similarity.rows();
    if (similarity.cols() != n) throw ArgumentError("init_messages: similarity must be square");
    if (n < 2) throw ArgumentError("init_messages: need at least two points");
    if (ell < 0 || ell >= n) throw ArgumentError("init_messages: outlier budget out of range");

    MessageState state;
    state.rho = Matrix::Zero(n, n);
    state.alpha = Matrix::Zero(n, n);
    state.lambda = Matrix::Zero(n, ell);
    const std::vector<Scalar> all(similarity.data(), similarity.data() + similarity.size());
    state.omega = Matrix::Constant(n, ell, lower_median(all));
    return state;
}

void sweep(MessageState& state, const Matrix& s, double damping) {
    const Index n = state.size();
    const Index slots = state.slots();
    if (s.rows() != n || s.cols() != n) throw ArgumentError("sweep: similarity shape mismatch");
    if (!(damping >= 0.0 && damping <= 1.0)) throw ArgumentError("sweep: damping outside [0,1]");

    auto& rho = state.rho;
    auto& alpha = state.alpha;
    auto& lambda = state.lambda;
    auto& omega = state.omega;

    // rho(i,j) = s(i,j) - max( max_{t!=j} (alpha(i,t) + s(i,t)), max_k omega(i,k) )
    for (Index i = 0; i < n; ++i) {
        Top2 top;
        for (Index t = 0; t < n; ++t) top.push(alpha(i, t) + s(i, t), t);
        const Scalar outlier_option = slots > 0 ? omega.row(i).maxCoeff() : neg_inf;
        for (Index j = 0; j < n; ++j) {
            const Scalar raw = s(i, j) - std::max(top.excluding(j), outlier_option);
            rho(i, j) = damp(rho(i, j), raw, damping);
        }
    }

    // alpha(j,j) = sum_{t!=j} max(0, rho(t,j))
    // alpha(i,j) = min(0, rho(j,j) + sum_{t not in {i,j}} max(0, rho(t,j)))
    for (Index j = 0; j < n; ++j) {
        Scalar support = 0;
        for (Index t = 0; t < n; ++t)
            if (t != j) support += std::max(Scalar(0), rho(t, j));
        const Scalar self = rho(j, j);
        for (Index i = 0; i < n; ++i) {
            const Scalar raw =
                i == j ? support : std::min(Scalar(0), self + support - std::max(Scalar(0), rho(i, j)));
            alpha(i, j) = damp(alpha(i, j), raw, damping);
        }
    }

    if (slots > 0) {
        // lambda(i,k) = -max( max_t (alpha(i,t) + s(i,t)), max_{t!=k} omega(i,t) )
        for (Index i = 0; i < n; ++i) {
            Scalar best_assignment = neg_inf;
            for (Index t = 0; t < n; ++t) best_assignment = std::max(best_assignment, alpha(i, t) + s(i, t));
            Top2 other;
            for (Index k = 0; k < slots; ++k) other.push(omega(i, k), k);
            for (Index k = 0; k < slots; ++k) {
                const Scalar raw = -std::max(best_assignment, other.excluding(k));
                lambda(i, k) = damp(lambda(i, k), raw, damping);
            }
        }

        // omega(i,k) = -max_{t!=i} lambda(t,k)
        for (Index k = 0; k < slots; ++k) {
            Top2 top;
            for (Index t = 0; t < n; ++t) top.push(lambda(t, k), t);
            for (Index i = 0; i < n; ++i) omega(i, k) = damp(omega(i, k), -top.excluding(i), damping);
        }
    }

    ++state.iteration;
}

std::vector<Index> select_outliers(const MessageState& state) {
    const Index slots = state.slots();
    if (slots == 0) return {};
    const Vector score = (state.lambda + state.omega).rowwise().maxCoeff();
    auto out = largest_indices(std::span<const Scalar>(score.data(), score.size()), slots);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Index> raw_exemplars(const MessageState& state, const std::vector<Index>& outliers) {
    const Index n = state.size();
    std::vector<char> skip(static_cast<std::size_t>(n), 0);
    for (Index o : outliers) skip[o] = 1;
    std::vector<Index> ex;
    for (Index i = 0; i < n; ++i)
        if (!skip[i] && state.alpha(i, i) + state.rho(i, i) > 0) ex.push_back(i);
    return ex;
}

Solution extract_solution(const MessageState& state, const FloProblem& problem) {
    const Index n = state.size();
    if (problem.size() != n || problem.ell != state.slots())
        throw ArgumentError("extract_solution: state does not match problem");

    auto outliers = select_outliers(state);
    auto exemplars = raw_exemplars(state, outliers);
    if (exemplars.empty()) {
        std::vector<char> skip(static_cast<std::size_t>(n), 0);
        for (Index o : outliers) skip[o] = 1;
        Index best = -1;
        Scalar best_belief = neg_inf;
        for (Index i = 0; i < n; ++i) {
            if (skip[i]) continue;
            const Scalar belief = state.alpha(i, i) + state.rho(i, i);
            if (best < 0 || belief > best_belief) {
                best = i;
                best_belief = belief;
            }
        }
        exemplars.push_back(best);
    }
    return assign_to_exemplars(problem, std::move(exemplars), std::move(outliers));
}

Solution solve(const FloProblem& problem, const Params& params) {
    const Index n = problem.size();
    if (n < 2) throw ArgumentError("apoc::solve: need at least two points");
    if (!(params.damping >= 0.0 && params.damping < 1.0))
        throw ArgumentError("apoc::solve: damping must lie in [0,1)");

    const Matrix s = SimilarityView(problem).dense();
    MessageState state = init_messages(s, problem.ell);

    Solution best;
    bool have_best = false;
    bool converged = false;
    Scalar previous = std::numeric_limits<Scalar>::quiet_NaN();
    std::size_t stable = 0;

    while (state.iteration < params.max_iterations) {
        sweep(state, s, params.damping);
        if (!state.all_finite())
            throw std::runtime_error("apoc::solve: non-finite message after sweep " +
                                     std::to_string(state.iteration));

        Solution current = extract_solution(state, problem);
        const Scalar energy_now = current.energy;
        if (params.on_iteration) params.on_iteration(state.iteration, energy_now);
        if (!have_best || energy_now < best.energy) {
            best = std::move(current);
            have_best = true;
        }

        // Convergence needs the message decisions themselves to name an
        // exemplar; the fallback-only phase at start-up does not count.
        const bool decided = !raw_exemplars(state, select_outliers(state)).empty();
        const bool same = std::isfinite(previous) &&
                          std::abs(energy_now - previous) <=
                              params.tolerance * std::max(std::abs(previous), Scalar(1e-300));
        stable = (decided && same) ? stable + 1 : 0;
        previous = energy_now;
        if (stable >= params.window) {
            converged = true;
            break;
        }
    }

    best.iterations = state.iteration;
    best.converged = converged;
    return best;
}

}  // namespace flo::apoc
