#include <doctest.h>

#include "flo/distances.hpp"
#include "flo/exact.hpp"
#include "flo/ld.hpp"
#include "flo/random.hpp"

using namespace flo;

namespace {

FloProblem line3(Index ell = 1) {
    Matrix pts(1, 3);
    pts << 0, 1, 10;
    return FloProblem(euclidean_oracle(pts), 2.0, ell);
}

Matrix random_points(Rng& rng, Index n) {
    Matrix pts(2, n);
    for (Index j = 0; j < n; ++j) pts.col(j) = Eigen::Vector2d(rng.uniform(-5, 5), rng.uniform(-5, 5));
    return pts;
}

}  // namespace

TEST_CASE("step sizes") {
    CHECK(ld::step_size({ld::ScheduleKind::Geometric, 1.0, 0.5}, 3) == doctest::Approx(0.125));
    CHECK(ld::step_size({ld::ScheduleKind::Geometric, 2.5, 0.9}, 0) == 2.5);
    CHECK(ld::step_size({ld::ScheduleKind::Harmonic, 2.0, 0.0}, 3) == doctest::Approx(0.5));
}

TEST_CASE("relaxed minimiser") {
    SUBCASE("zero multipliers open nothing") {
        const auto p = line3();
        const auto it = ld::ld_iteration(p, Vector::Zero(3));
        CHECK(it.exemplars.empty());
        CHECK(it.x.nnz() == 0);
        CHECK(it.mu.isApprox(p.costs));
        CHECK(ld::dual_value(p, Vector::Zero(3), it) == 0.0);
    }
    SUBCASE("amortised cost of a column") {
        const auto p = line3();
        const auto it = ld::ld_iteration(p, Vector::Constant(3, 3.0));
        // column of point 0 is [0, 1, 10]: 2 + (0 - 3) + (1 - 3)
        CHECK(it.mu[0] == doctest::Approx(-3.0));
        CHECK(it.mu[1] == doctest::Approx(-3.0));
        CHECK(it.mu[2] == doctest::Approx(-1.0));
        CHECK(it.exemplars == std::vector<Index>{0, 1, 2});
        CHECK(it.outliers == std::vector<Index>{0});
        // lambda_1 + lambda_2 + (mu_0 + mu_1 + mu_2) = 6 - 7
        CHECK(ld::dual_value(p, Vector::Constant(3, 3.0), it) == doctest::Approx(-1.0));
        CHECK(it.x.cover == std::vector<Index>{2, 2, 1});
        REQUIRE(it.x.nnz() == 3);
        CHECK(it.x.pairs[0] == std::pair<Index, Index>{0, 0});
        CHECK(it.x.pairs[1] == std::pair<Index, Index>{1, 1});
        CHECK(it.x.pairs[2] == std::pair<Index, Index>{2, 2});
    }
    SUBCASE("outliers are the largest multipliers") {
        Matrix pts(1, 4);
        pts << 0, 1, 2, 3;
        const FloProblem p(euclidean_oracle(pts), 1.0, 1);
        Vector lambda(4);
        lambda << 5, 1, 1, 1;
        CHECK(ld::ld_iteration(p, lambda).outliers == std::vector<Index>{0});
    }
    CHECK_THROWS_AS(ld::ld_iteration(line3(), Vector::Zero(2)), ArgumentError);
}

TEST_CASE("subgradient step") {
    const auto p = line3(0);
    ld::Iterate it;
    it.x.cover = {0, 1, 2};
    ld::DualState st;
    st.lambda = Vector::Constant(3, 0.1);
    ld::subgradient_update(st, it, {ld::ScheduleKind::Geometric, 0.5, 0.9});
    CHECK(st.lambda[0] == doctest::Approx(0.6));  // unassigned: +step
    CHECK(st.lambda[1] == doctest::Approx(0.1));  // covered once: unchanged
    CHECK(st.lambda[2] == 0.0);                   // covered twice: projected at zero
    CHECK(st.t == 1);

    it.outliers = {0};
    ld::subgradient_update(st, it, {ld::ScheduleKind::Geometric, 0.5, 0.9});
    CHECK(st.lambda[0] == doctest::Approx(0.6));  // outlier, uncovered: 1 - 1 - 0
}

TEST_CASE("feasible extraction falls back to the cheapest exemplar") {
    Vector costs(3);
    costs << 4, 1, 3;
    Matrix pts(1, 3);
    pts << 0, 1, 10;
    const FloProblem p(euclidean_oracle(pts), costs, 1);
    const auto it = ld::ld_iteration(p, Vector::Zero(3));
    const auto sol = ld::extract_feasible(p, it);
    CHECK(sol.exemplars == std::vector<Index>{1});
    CHECK(sol.outliers() == std::vector<Index>{0});
    CHECK(check_feasible(p, sol).ok());
}

TEST_CASE("three point line") {
    const auto r = ld::solve(line3());
    CHECK(r.solution.energy == doctest::Approx(3.0));
    CHECK(r.solution.outliers() == std::vector<Index>{2});
    CHECK(r.best_dual <= 3.0 + 1e-12);
}

TEST_CASE("weak duality and feasibility on random instances") {
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const Index n = 6 + static_cast<Index>(rng.below(5));
        const FloProblem p(euclidean_oracle(random_points(rng, n)), rng.uniform(1, 15), trial % 3);
        const Scalar optimum = exact::solve(p).energy;
        ld::Params params;
        bool bounded = true;
        params.on_iteration = [&](std::size_t, Scalar dual, Scalar primal) {
            bounded &= dual <= optimum + 1e-9 * std::abs(optimum);
            bounded &= dual <= primal + 1e-9;
        };
        bool nonneg = true;
        for (Index i = 0; i < n; ++i) params.trace_points.push_back(i);
        params.on_trace = [&](std::size_t, Index, Scalar l) { nonneg &= l >= 0; };
        const auto r = ld::solve(p, params);
        CHECK(bounded);
        CHECK(nonneg);
        CHECK(r.best_dual <= r.solution.energy + 1e-9);
        CHECK(r.solution.energy >= optimum - 1e-9);
        CHECK(check_feasible(p, r.solution).ok());
        CHECK(r.solution.outlier_count() == p.ell);
    }
}

TEST_CASE("iterates are deterministic and store one pair per point") {
    Rng rng(5);
    const FloProblem p(euclidean_oracle(random_points(rng, 40)), 6.0, 4);
    Vector lambda(40);
    for (Index i = 0; i < 40; ++i) lambda[i] = rng.uniform(0, 4);
    const auto a = ld::ld_iteration(p, lambda);
    const auto b = ld::ld_iteration(p, lambda);
    CHECK(a.mu == b.mu);
    CHECK(a.x.pairs == b.x.pairs);
    CHECK(a.outliers.size() == 4);
    for (std::size_t k = 1; k < a.x.pairs.size(); ++k) CHECK(a.x.pairs[k - 1].first < a.x.pairs[k].first);
    for (auto [i, j] : a.x.pairs) CHECK(std::binary_search(a.exemplars.begin(), a.exemplars.end(), j));
}

TEST_CASE("identical points without outliers form one cluster") {
    const Matrix pts = Matrix::Constant(2, 6, 1.5);
    const auto r = ld::solve(FloProblem(euclidean_oracle(pts), 2.0, 0));
    CHECK(r.solution.exemplars.size() == 1);
    CHECK(r.solution.energy == doctest::Approx(2.0));
}

TEST_CASE("schedule and start variants converge to feasible solutions") {
    Rng rng(23);
    const FloProblem p(euclidean_oracle(random_points(rng, 12)), 5.0, 2);
    const Scalar optimum = exact::solve(p).energy;

    ld::Params harmonic;
    harmonic.schedule = {ld::ScheduleKind::Harmonic, 0.5, 0.0};
    const auto h = ld::solve(p, harmonic);
    CHECK(check_feasible(p, h.solution).ok());
    CHECK(h.best_dual <= optimum + 1e-9);

    ld::Params nearest;
    nearest.init = ld::LambdaInit::NearestNeighbor;
    const auto nn = ld::solve(p, nearest);
    CHECK(check_feasible(p, nn.solution).ok());
    CHECK(nn.best_dual <= optimum + 1e-9);

    const Vector start = ld::initial_multipliers(p, ld::LambdaInit::NearestNeighbor);
    for (Index i = 0; i < 12; ++i) {
        Scalar nearest_d = std::numeric_limits<Scalar>::infinity();
        for (Index j = 0; j < 12; ++j)
            if (j != i) nearest_d = std::min(nearest_d, p.oracle(i, j));
        CHECK(start[i] == nearest_d);
    }
}

TEST_CASE("parameter validation") {
    ld::Params p;
    p.max_iterations = 0;
    CHECK_THROWS_AS(ld::solve(line3(), p), ArgumentError);
    ld::Params q;
    q.schedule.alpha = 1.0;
    CHECK_THROWS_AS(ld::solve(line3(), q), ArgumentError);
}
