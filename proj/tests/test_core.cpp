#include <doctest.h>

#include <numeric>

#include "flo/core.hpp"
#include "flo/distances.hpp"
#include "flo/random.hpp"

using namespace flo;

namespace {

DistanceOracle line(std::vector<double> xs) {
    Matrix pts(1, static_cast<Index>(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) pts(0, static_cast<Index>(i)) = xs[i];
    return euclidean_oracle(pts);
}

Matrix random_points(Rng& rng, Index d, Index n) {
    Matrix pts(d, n);
    for (Index j = 0; j < n; ++j)
        for (Index r = 0; r < d; ++r) pts(r, j) = rng.uniform(-5, 5);
    return pts;
}

// Hand-written feasibility rules, independent of check_feasible.
bool feasible_by_hand(const std::vector<Assignee>& a, Index ell) {
    const Index n = static_cast<Index>(a.size());
    Index outliers = 0;
    for (Index i = 0; i < n; ++i) {
        if (!a[i]) {
            ++outliers;
            continue;
        }
        const Index j = *a[i];
        if (j < 0 || j >= n) return false;
        if (!a[j] || *a[j] != j) return false;  // target must be a self-assigned exemplar
    }
    return outliers == ell;
}

Scalar energy_by_hand(const DistanceOracle& d, Scalar c, const std::vector<Assignee>& a) {
    Scalar e = 0;
    for (Index i = 0; i < static_cast<Index>(a.size()); ++i) {
        if (!a[i]) continue;
        if (*a[i] == i) e += c;
        else e += d(i, *a[i]);
    }
    return e;
}

// Calls f for every vector in {outlier, 0..n-1}^n.
template <class F>
void for_each_assignment(Index n, F f) {
    std::vector<Index> code(static_cast<std::size_t>(n), 0);
    while (true) {
        std::vector<Assignee> a(static_cast<std::size_t>(n));
        for (Index i = 0; i < n; ++i) a[i] = code[i] == 0 ? Assignee{} : Assignee{code[i] - 1};
        f(a);
        Index k = 0;
        while (k < n && ++code[k] == n + 1) code[k++] = 0;
        if (k == n) break;
    }
}

Solution from_assignment(std::vector<Assignee> a) {
    Solution s;
    for (Index i = 0; i < static_cast<Index>(a.size()); ++i)
        if (a[i] && *a[i] == i) s.exemplars.push_back(i);
    s.assignment = std::move(a);
    return s;
}

}  // namespace

TEST_CASE("energy of the three point line solution") {
    const FloProblem p(line({0, 1, 10}), 2.0, 1);
    const Solution s = from_assignment({0, 0, outlier});
    CHECK(check_feasible(p, s).ok());
    CHECK(energy(p, s) == doctest::Approx(3.0));
}

TEST_CASE("three point line: 3.0 is the minimum over every feasible solution") {
    const auto d = line({0, 1, 10});
    const FloProblem p(d, 2.0, 1);
    Scalar best = std::numeric_limits<Scalar>::infinity();
    int feasible = 0;
    for_each_assignment(3, [&](const std::vector<Assignee>& a) {
        if (!feasible_by_hand(a, 1)) return;
        ++feasible;
        best = std::min(best, energy_by_hand(d, 2.0, a));
    });
    CHECK(feasible == 9);  // C(3,1) * (2^2 - 1)
    CHECK(best == doctest::Approx(3.0));
}

TEST_CASE("all non-outliers as exemplars pay only their costs") {
    Vector costs(4);
    costs << 1.5, 2.0, 0.25, 7.0;
    const FloProblem p(line({0, 3, 4, 9}), costs, 1);
    const Solution s = from_assignment({0, outlier, 2, 3});
    CHECK(energy(p, s) == doctest::Approx(1.5 + 0.25 + 7.0));
}

TEST_CASE("single exemplar without outliers") {
    const auto d = line({0, 2, 5, 6});
    const FloProblem p(d, 3.0, 0);
    const Solution s = from_assignment({2, 2, 2, 2});
    CHECK(energy(p, s) == doctest::Approx(3.0 + 5 + 3 + 1));
}

TEST_CASE("check_feasible reports violated constraints") {
    const FloProblem p(line({0, 1, 10}), 2.0, 1);

    SUBCASE("reference to a non-exemplar") {
        Solution s = from_assignment({0, 2, outlier});
        const auto r = check_feasible(p, s);
        REQUIRE_FALSE(r.ok());
        bool found = false;
        for (const auto& v : r.violations)
            if (v.constraint == Constraint::AssignToExemplar) {
                found = true;
                CHECK(v.indices == std::vector<Index>{1});
            }
        CHECK(found);
        CHECK_THROWS_AS(energy(p, s), FeasibilityError);
    }
    SUBCASE("missing outlier") {
        Solution s = from_assignment({0, 0, 0});
        const auto r = check_feasible(p, s);
        REQUIRE_FALSE(r.ok());
        CHECK(r.violations.front().constraint == Constraint::OutlierCount);
        CHECK_FALSE(r.to_string().empty());
    }
    SUBCASE("exemplar marked as outlier") {
        Solution s;
        s.exemplars = {0, 2};
        s.assignment = {0, 0, outlier};
        const auto r = check_feasible(p, s);
        REQUIRE_FALSE(r.ok());
        bool found = false;
        for (const auto& v : r.violations) found |= v.constraint == Constraint::ExemplarNotOutlier;
        CHECK(found);
    }
    SUBCASE("wrong length") {
        Solution s = from_assignment({0, 0});
        CHECK(check_feasible(p, s).violations.front().constraint == Constraint::Shape);
    }
}

TEST_CASE("check_feasible accepts exactly the enumerated feasible solutions") {
    Rng rng(11);
    const auto d = euclidean_oracle(random_points(rng, 2, 4));
    for (Index ell = 0; ell < 4; ++ell) {
        const FloProblem p(d, 1.0, ell);
        std::uint64_t accepted = 0;
        for_each_assignment(4, [&](const std::vector<Assignee>& a) {
            const bool hand = feasible_by_hand(a, ell);
            const bool lib = check_feasible(p, from_assignment(a)).ok();
            CHECK(hand == lib);
            accepted += lib;
        });
        // C(4, ell) outlier sets; for r = 4 - ell inliers, sum over exemplar
        // sets of size e of C(r, e) * e^(r - e) ways to assign the rest.
        const std::uint64_t choose4[] = {1, 4, 6, 4, 1};
        const Index r = 4 - ell;
        std::uint64_t expected = 0;
        for (Index e = 1; e <= r; ++e) {
            std::uint64_t ways = 1;
            for (Index k = 0; k < r - e; ++k) ways *= static_cast<std::uint64_t>(e);
            std::uint64_t choose = 1;
            for (Index k = 0; k < e; ++k) choose = choose * static_cast<std::uint64_t>(r - k) / static_cast<std::uint64_t>(k + 1);
            expected += choose * ways;
        }
        CHECK(accepted == choose4[ell] * expected);
    }
}

TEST_CASE("cluster cost from the median distance") {
    const auto d = line({0, 1, 10});
    CHECK(cluster_cost_from_median(d, 1.0) == doctest::Approx(9.0));
    CHECK(cluster_cost_from_median(d, 10.0) == doctest::Approx(90.0));
    CHECK(cluster_cost_from_median(line({4, 4, 4, 4}), 7.0) == 0.0);
    CHECK_THROWS_AS(cluster_cost_from_median(line({1}), 1.0), ArgumentError);
    CHECK_THROWS_AS(cluster_cost_from_median(d, 0.0), ArgumentError);
    // Four distances {1, 2, 3, ...}: the lower of the two middle values.
    CHECK(cluster_cost_from_median(line({0, 1, 3}), 1.0) == doctest::Approx(2.0));
    CHECK(cluster_cost_from_median(line({0, 1, 3, 6}), 1.0) == doctest::Approx(3.0));
}

TEST_CASE("sampled median is seeded and close to the full median") {
    Rng rng(5);
    const auto d = euclidean_oracle(random_points(rng, 2, 400));
    const Scalar full = cluster_cost_from_median(d, 1.0);
    const Scalar a = cluster_cost_from_median(d, 1.0, 5000, 42);
    const Scalar b = cluster_cost_from_median(d, 1.0, 5000, 42);
    CHECK(a == b);
    CHECK(a == doctest::Approx(full).epsilon(0.05));
}

TEST_CASE("assign_to_exemplars") {
    const FloProblem p(line({0, 1, 10}), 2.0, 1);
    SUBCASE("three point line") {
        const auto s = assign_to_exemplars(p, {0}, {2});
        CHECK(s.assignment == std::vector<Assignee>{0, 0, outlier});
        CHECK(s.energy == doctest::Approx(3.0));
    }
    SUBCASE("ties go to the lowest exemplar index") {
        const FloProblem q(line({0, 1, 2.5, 3.5, 4}), 1.0, 0);
        const auto s = assign_to_exemplars(q, {4, 1}, {});
        CHECK(s.assignment[2] == Assignee{1});
        CHECK(s.exemplars == std::vector<Index>{1, 4});
    }
    SUBCASE("every point an exemplar") {
        const FloProblem q(line({0, 1, 10}), 2.0, 0);
        const auto s = assign_to_exemplars(q, {0, 1, 2}, {});
        CHECK(s.assignment == std::vector<Assignee>{0, 1, 2});
        CHECK(s.energy == doctest::Approx(6.0));
    }
    SUBCASE("invalid input") {
        CHECK_THROWS_AS(assign_to_exemplars(p, {}, {2}), ArgumentError);
        CHECK_THROWS_AS(assign_to_exemplars(p, {2}, {2}), ArgumentError);
        CHECK_THROWS_AS(assign_to_exemplars(p, {3}, {2}), ArgumentError);
    }
}

TEST_CASE("nearest-exemplar completion is optimal for fixed exemplars and outliers") {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const Index n = 6;
        const auto d = euclidean_oracle(random_points(rng, 2, n));
        const FloProblem p(d, 1.3, 1);
        const std::vector<Index> ex{1, 4};
        const std::vector<Index> out{static_cast<Index>(rng.below(2)) * 3 + 2};  // 2 or 5
        const Scalar completed = assign_to_exemplars(p, ex, out).energy;
        Scalar best = std::numeric_limits<Scalar>::infinity();
        for_each_assignment(n, [&](const std::vector<Assignee>& a) {
            for (Index i = 0; i < n; ++i) {
                const bool is_out = i == out[0];
                if (is_out != !a[i]) return;
                if (a[i] && *a[i] != 1 && *a[i] != 4) return;
                if ((i == 1 || i == 4) && *a[i] != i) return;
            }
            best = std::min(best, energy_by_hand(d, 1.3, a));
        });
        CHECK(completed == doctest::Approx(best));
    }
}

TEST_CASE("energy is invariant under consistent relabeling") {
    Rng rng(9);
    const Matrix pts = random_points(rng, 2, 7);
    std::vector<Index> perm(7);
    std::iota(perm.begin(), perm.end(), 0);
    for (Index i = 6; i > 0; --i) std::swap(perm[i], perm[rng.below(static_cast<std::uint64_t>(i + 1))]);
    Matrix permuted(2, 7);
    for (Index i = 0; i < 7; ++i) permuted.col(perm[i]) = pts.col(i);

    const FloProblem a(euclidean_oracle(pts), 2.0, 2);
    const FloProblem b(euclidean_oracle(permuted), 2.0, 2);
    const auto sa = assign_to_exemplars(a, {0, 3}, {5, 6});
    const auto sb = assign_to_exemplars(b, {perm[0], perm[3]}, {perm[5], perm[6]});
    CHECK(sa.energy == doctest::Approx(sb.energy));
}

TEST_CASE("problem validation") {
    const auto d = line({0, 1, 10});
    CHECK_THROWS_AS(FloProblem(d, 1.0, 3), ArgumentError);
    CHECK_THROWS_AS(FloProblem(d, 1.0, -1), ArgumentError);
    CHECK_THROWS_AS(FloProblem(d, -1.0, 0), ArgumentError);
    CHECK_THROWS_AS(FloProblem(d, Vector::Ones(2), 0), ArgumentError);
}

TEST_CASE("largest_indices breaks ties towards the lowest index") {
    const std::vector<Scalar> v{1, 5, 3, 5, 0, 3};
    CHECK(largest_indices(v, 3) == std::vector<Index>{1, 3, 2});
    CHECK(largest_indices(v, 0).empty());
    CHECK_THROWS_AS(largest_indices(v, 7), ArgumentError);
}

TEST_CASE("oracle column agrees with pairwise evaluation") {
    Rng rng(1);
    const auto d = euclidean_oracle(random_points(rng, 3, 30));
    std::vector<Scalar> col(30);
    for (Index j = 0; j < 30; ++j) {
        d.column(j, col);
        for (Index i = 0; i < 30; ++i) CHECK(col[i] == d(i, j));
    }
}
