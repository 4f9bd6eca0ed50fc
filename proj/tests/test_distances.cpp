#include <doctest.h>

#include <cmath>

#include "flo/distances.hpp"
#include "oracles.hpp"

using namespace flo;

namespace {

Eigen::Matrix2Xd curve(std::initializer_list<std::pair<double, double>> pts) {
    Eigen::Matrix2Xd c(2, static_cast<Index>(pts.size()));
    Index k = 0;
    for (auto [x, y] : pts) {
        c(0, k) = x;
        c(1, k) = y;
        ++k;
    }
    return c;
}

}  // namespace

TEST_CASE("euclidean") {
    CHECK(euclidean(Eigen::Vector2d(0, 0), Eigen::Vector2d(3, 4)) == 5.0);
    CHECK(euclidean(Eigen::Vector3d(1, 2, 3), Eigen::Vector3d(1, 2, 3)) == 0.0);
    CHECK(euclidean(Vector::Constant(1, 0.0), Vector::Constant(1, 9.0)) == 9.0);
    CHECK_THROWS_AS(euclidean(Vector::Zero(2), Vector::Zero(3)), ArgumentError);
}

TEST_CASE("bhattacharyya") {
    const Eigen::Vector3d h(0.2, 0.5, 0.3);
    CHECK(bhattacharyya(h, h) == doctest::Approx(0.0));
    CHECK(bhattacharyya(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)) == 1.0);
    // BC = sqrt(1/2 * 1) = sqrt(1/2) after normalising [1,1] to [1/2,1/2].
    CHECK(bhattacharyya(Eigen::Vector2d(1, 1), Eigen::Vector2d(1, 0)) == doctest::Approx(0.5411961001461969));
    CHECK(bhattacharyya(Eigen::Vector3d(1, 2, 3), Eigen::Vector3d(3, 1, 1)) ==
          doctest::Approx(bhattacharyya(Eigen::Vector3d(10, 20, 30), Eigen::Vector3d(0.3, 0.1, 0.1))));
    CHECK_THROWS_AS(bhattacharyya(Vector::Ones(2), Vector::Ones(3)), ArgumentError);
    CHECK_THROWS_AS(bhattacharyya(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1)), ArgumentError);
    CHECK_THROWS_AS(bhattacharyya(Eigen::Vector2d(-1, 2), Eigen::Vector2d(1, 1)), ArgumentError);
}

TEST_CASE("align_start") {
    Trajectory t{curve({{2, 3}, {4, 3}}), "a"};
    CHECK(align_start(t).points.isApprox(curve({{0, 0}, {2, 0}})));
    CHECK(align_start(Trajectory{curve({{5, -1}}), "b"}).points == curve({{0, 0}}));
    const Trajectory o{curve({{0, 0}, {1, 2}, {3, 3}}), "c"};
    CHECK(align_start(o).points == o.points);
    CHECK(align_start(t).id == "a");
}

TEST_CASE("discrete frechet examples") {
    const auto p = curve({{0, 0}, {1, 0}, {2, 1}});
    CHECK(discrete_frechet(p, p) == 0.0);
    CHECK(discrete_frechet(curve({{0, 0}, {1, 0}}), curve({{0, 1}, {1, 1}})) == doctest::Approx(1.0));
    const auto a = curve({{0, 0}, {2, 0}});
    const auto b = curve({{0, 0}, {1, 1}, {2, 0}});
    CHECK(oracle::frechet_by_couplings(a, b) == doctest::Approx(1.4142135623730951));
    CHECK(discrete_frechet(a, b) == doctest::Approx(1.4142135623730951));
    CHECK_THROWS_AS(discrete_frechet(Eigen::Matrix2Xd(2, 0), a), ArgumentError);
}

TEST_CASE("discrete frechet matches exhaustive couplings and its bounds") {
    Rng rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
        const auto p = oracle::random_curve(rng, 1 + static_cast<long>(rng.below(6)));
        const auto q = oracle::random_curve(rng, 1 + static_cast<long>(rng.below(6)));
        const double dp = discrete_frechet(p, q);
        CHECK(std::abs(dp - oracle::frechet_by_couplings(p, q)) <= 1e-12);
        CHECK(dp == discrete_frechet(q, p));
        const double ends = std::max((p.col(0) - q.col(0)).norm(), (p.rightCols(1) - q.rightCols(1)).norm());
        CHECK(dp >= ends - 1e-15);
    }
}

TEST_CASE("metric names") {
    CHECK(parse_metric("frechet") == Metric::Frechet);
    CHECK(metric_name(Metric::Bhattacharyya) == "bhattacharyya");
    CHECK_THROWS_AS(parse_metric("manhattan"), ArgumentError);
}

TEST_CASE("make_oracle") {
    SUBCASE("euclidean vectors") {
        Matrix v(2, 3);
        v << 0, 3, 1, 0, 4, 1;
        const auto d = make_oracle(Metric::Euclidean, v);
        CHECK(d.size() == 3);
        CHECK(d(0, 1) == euclidean(v.col(0), v.col(1)));
        CHECK(d(1, 0) == d(0, 1));
        CHECK(d(2, 2) == 0.0);
    }
    SUBCASE("precomputed matrix") {
        Matrix m(3, 3);
        m << 0, 1, 2, 1, 0, 3, 2, 3, 0;
        const auto d = make_oracle(Metric::Precomputed, m);
        CHECK(d(2, 1) == 3.0);
        std::vector<Scalar> col(3);
        d.column(1, col);
        CHECK(col == std::vector<Scalar>{1, 0, 3});

        Matrix asym = m;
        asym(0, 1) = 1.5;
        CHECK_THROWS_AS(make_oracle(Metric::Precomputed, asym), FormatError);
        Matrix neg = m;
        neg(0, 2) = neg(2, 0) = -1;
        CHECK_THROWS_AS(make_oracle(Metric::Precomputed, neg), FormatError);
        Matrix diag = m;
        diag(1, 1) = 0.5;
        CHECK_THROWS_AS(make_oracle(Metric::Precomputed, diag), FormatError);
        CHECK_THROWS_AS(make_oracle(Metric::Precomputed, Matrix::Zero(2, 3)), FormatError);
    }
    SUBCASE("trajectories are aligned before the DP") {
        std::vector<Trajectory> ts{{curve({{0, 0}, {1, 0}, {2, 0}}), "a"},
                                   {curve({{10, 5}, {11, 5}, {12, 5}}), "b"},
                                   {curve({{0, 0}, {0, 1}}), "c"}};
        const auto aligned = make_oracle(Metric::Frechet, ts);
        CHECK(aligned(0, 1) == doctest::Approx(0.0));
        CHECK(aligned(0, 2) == doctest::Approx(discrete_frechet(align_start(ts[0]), align_start(ts[2]))));
        const auto raw = make_oracle(Metric::Frechet, ts, false);
        CHECK(raw(0, 1) == doctest::Approx(discrete_frechet(ts[0], ts[1])));
        CHECK(raw(0, 1) > 10);
    }
    SUBCASE("histograms") {
        Matrix h(2, 2);
        h << 1, 1, 1, 0;
        const auto d = make_oracle(Metric::Bhattacharyya, h);
        CHECK(d(0, 1) == doctest::Approx(0.5411961001461969));
    }
    SUBCASE("mismatched data") {
        CHECK_THROWS_AS(make_oracle(Metric::Frechet, Matrix::Zero(2, 2)), ArgumentError);
        CHECK_THROWS_AS(make_oracle(Metric::Euclidean, std::vector<Trajectory>{}), ArgumentError);
    }
}

TEST_CASE("oracle invariants for every metric") {
    Rng rng(77);
    Matrix pts(3, 8), hist(4, 8);
    std::vector<Trajectory> ts;
    for (Index j = 0; j < 8; ++j) {
        for (Index r = 0; r < 3; ++r) pts(r, j) = rng.uniform(-2, 2);
        for (Index r = 0; r < 4; ++r) hist(r, j) = rng.uniform(0.1, 1);
        ts.push_back({oracle::random_curve(rng, 2 + static_cast<long>(rng.below(4))), std::to_string(j)});
    }
    for (const auto& d : {euclidean_oracle(pts), bhattacharyya_oracle(hist), frechet_oracle(ts)}) {
        std::vector<Scalar> col(8);
        for (Index j = 0; j < 8; ++j) {
            d.column(j, col);
            CHECK(col[j] == 0.0);
            for (Index i = 0; i < 8; ++i) {
                CHECK(d(i, j) >= 0);
                CHECK(d(i, j) == d(j, i));
                CHECK(col[i] == doctest::Approx(d(i, j)));
            }
        }
    }
}
