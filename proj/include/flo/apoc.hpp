#pragma once

// Affinity propagation with outlier clustering (APOC).
//
// Max-sum message passing on the binary factor graph of the FLO program.
// Each point i holds assignment variables x_ij (one per candidate exemplar j)
// and outlier-slot variables o_ik (one per slot k < ell). Messages are kept
// as differences between the 1 and 0 settings of each binary variable:
//
//   rho(i,j)    variable x_ij   -> exemplar-consistency factor of j
//   alpha(i,j)  consistency j   -> x_ij
//   lambda(i,k) 1-of-N factor i -> o_ik
//   omega(i,k)  slot factor k   -> o_ik
//
// Storage is dense: O(N^2 + N * ell).

#include <cstddef>
#include <functional>

#include "flo/core.hpp"

namespace flo::apoc {

/// S(i,j) = -d(i,j) off the diagonal and -c_i on it.
class SimilarityView {
public:
    explicit SimilarityView(const FloProblem& problem) : problem_(&problem) {}

    Index size() const noexcept { return problem_->size(); }
    Scalar operator()(Index i, Index j) const {
        return i == j ? -problem_->costs[i] : -problem_->oracle(i, j);
    }

    Matrix dense() const;

private:
    const FloProblem* problem_;
};

struct MessageState {
    Matrix rho;     // N x N
    Matrix alpha;   // N x N
    Matrix lambda;  // N x ell
    Matrix omega;   // N x ell
    std::size_t iteration = 0;

    Index size() const noexcept { return rho.rows(); }
    Index slots() const noexcept { return lambda.cols(); }
    bool all_finite() const;
};

struct Params {
    double damping = 0.9;
    std::size_t window = 10;
    double tolerance = 1e-6;
    std::size_t max_iterations = 1000;
    /// Called after each sweep with (iteration, energy of extracted solution).
    std::function<void(std::size_t, Scalar)> on_iteration;
};

/// alpha = rho = lambda = 0; omega = lower median over every entry of S.
MessageState init_messages(const Matrix& similarity, Index ell);

/// One damped round of updates in the order rho, alpha, lambda, omega, each
/// family reading the freshest values of the others.
void sweep(MessageState& state, const Matrix& similarity, double damping);

/// Decodes outliers, exemplars and assignments from the current beliefs.
Solution extract_solution(const MessageState& state, const FloProblem& problem);

/// Exemplars picked by alpha_ii + rho_ii > 0 among non-outliers, before the
/// empty-set fallback applied by extract_solution.
std::vector<Index> raw_exemplars(const MessageState& state, const std::vector<Index>& outliers);

/// Outliers: the ell points with the largest max_k(lambda_ik + omega_ik).
std::vector<Index> select_outliers(const MessageState& state);

Solution solve(const FloProblem& problem, const Params& params = {});

}  // namespace flo::apoc
