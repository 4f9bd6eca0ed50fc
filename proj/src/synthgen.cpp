#include "flo/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <boost/math/distributions/chi_squared.hpp>

#include "flo/random.hpp"

namespace flo::synth {

std::vector<Index> SynthData::planted_outliers() const {
    std::vector<Index> out;
    for (Index i = 0; i < static_cast<Index>(labels.size()); ++i)
        if (!labels[i]) out.push_back(i);
    return out;
}

Scalar chi_square_quantile(Scalar p, Index dof) {
    if (dof < 1) throw ArgumentError("chi_square_quantile: dof must be positive");
    return boost::math::quantile(boost::math::chi_squared_distribution<Scalar>(static_cast<Scalar>(dof)), p);
}

Scalar mahalanobis_sq(const Vector& x, const Vector& mean, const Matrix& covariance) {
    const Vector diff = x - mean;
    return diff.dot(covariance.llt().solve(diff));
}

namespace {

Matrix random_orthogonal(Rng& rng, Index d) {
    Matrix g(d, d);
    for (Index c = 0; c < d; ++c)
        for (Index r = 0; r < d; ++r) g(r, c) = rng.normal();
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index c = 0; c < d; ++c)
        if (r(c, c) < 0) q.col(c) = -q.col(c);
    return q;
}

}  // namespace

SynthData generate(const SynthParams& p) {
    if (p.clusters < 0 || p.points < 0 || p.outliers < 0)
        throw ArgumentError("synth: counts must be non-negative");
    if (p.dim < 1) throw ArgumentError("synth: dimension must be positive");
    const Index inliers = p.clusters * p.points;
    const Index n = inliers + p.outliers;
    if (n < 2) throw ArgumentError("synth: need at least two points in total");
    if (!(p.box > 0) || !(p.cov_scale > 0) || !(p.outlier_expand > 0))
        throw ArgumentError("synth: box, cov_scale and outlier_expand must be positive");

    Rng rng(p.seed);
    const Index d = p.dim;
    SynthData data;
    data.points.resize(d, n);
    data.labels.assign(static_cast<std::size_t>(n), Assignee{});
    data.threshold = chi_square_quantile(p.quantile, d);

    std::vector<Matrix> factors;
    for (Index c = 0; c < p.clusters; ++c) {
        Vector mean(d);
        for (Index k = 0; k < d; ++k) mean[k] = rng.uniform(-p.box, p.box);
        const Matrix q = random_orthogonal(rng, d);
        Vector eig(d);
        for (Index k = 0; k < d; ++k) eig[k] = p.cov_scale * rng.uniform(0.5, 1.5);
        data.means.push_back(mean);
        data.covariances.push_back(q * eig.asDiagonal() * q.transpose());
        factors.push_back(q * eig.cwiseSqrt().asDiagonal());
    }

    Index col = 0;
    for (Index c = 0; c < p.clusters; ++c) {
        for (Index s = 0; s < p.points; ++s, ++col) {
            Vector z(d);
            for (Index k = 0; k < d; ++k) z[k] = rng.normal();
            data.points.col(col) = data.means[c] + factors[c] * z;
            data.labels[col] = c;
        }
    }

    Vector lo = Vector::Constant(d, -p.box), hi = Vector::Constant(d, p.box);
    if (inliers > 0) {
        lo = data.points.leftCols(inliers).rowwise().minCoeff();
        hi = data.points.leftCols(inliers).rowwise().maxCoeff();
    }
    const Vector centre = (lo + hi) / 2;
    const Vector half = ((hi - lo) / 2 * p.outlier_expand).cwiseMax(p.box);

    std::vector<Eigen::LLT<Matrix>> solvers;
    for (const auto& cov : data.covariances) solvers.emplace_back(cov);

    for (Index o = 0; o < p.outliers; ++o, ++col) {
        bool accepted = false;
        Vector x(d);
        for (std::size_t attempt = 0; attempt < p.max_attempts && !accepted; ++attempt) {
            for (Index k = 0; k < d; ++k) x[k] = centre[k] + half[k] * rng.uniform(-1.0, 1.0);
            accepted = true;
            for (std::size_t c = 0; c < solvers.size() && accepted; ++c) {
                const Vector diff = x - data.means[c];
                accepted = diff.dot(solvers[c].solve(diff)) > data.threshold;
            }
        }
        if (!accepted)
            throw GenerationError("synth: could not place outlier " + std::to_string(o) + " after " +
                                  std::to_string(p.max_attempts) +
                                  " attempts; increase the outlier box (outlier_expand)");
        data.points.col(col) = x;
    }
    return data;
}

TrajectoryData generate_trajectories(const TrajectoryParams& p) {
    if (p.clusters < 0 || p.per_cluster < 0 || p.outliers < 0)
        throw ArgumentError("synth: counts must be non-negative");
    if (p.min_length < 1 || p.max_length < p.min_length)
        throw ArgumentError("synth: need 1 <= min_length <= max_length");
    if (p.clusters * p.per_cluster + p.outliers < 2)
        throw ArgumentError("synth: need at least two trajectories in total");

    Rng rng(p.seed);
    const auto span = static_cast<std::uint64_t>(p.max_length - p.min_length + 1);
    auto walk = [&](Index len, double heading, double turn, double noise) {
        Trajectory t;
        t.points.resize(2, len);
        Eigen::Vector2d at(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
        for (Index s = 0; s < len; ++s) {
            t.points.col(s) = at;
            heading += turn + noise * rng.normal();
            at += p.step * Eigen::Vector2d(std::cos(heading), std::sin(heading));
        }
        return t;
    };

    TrajectoryData data;
    for (Index c = 0; c < p.clusters; ++c) {
        const double heading = rng.uniform(-std::numbers::pi, std::numbers::pi);
        const double turn = rng.uniform(-0.15, 0.15);
        const Index len = p.min_length + static_cast<Index>(rng.below(span));
        for (Index m = 0; m < p.per_cluster; ++m) {
            // Member lengths stay within one step of the family length.
            const Index jitter = static_cast<Index>(rng.below(3)) - 1;
            data.trajectories.push_back(walk(std::clamp(len + jitter, p.min_length, p.max_length), heading, turn,
                                             p.heading_noise));
            data.labels.emplace_back(c);
        }
    }
    for (Index o = 0; o < p.outliers; ++o) {
        const Index len = p.min_length + static_cast<Index>(rng.below(span));
        data.trajectories.push_back(walk(len, rng.uniform(-std::numbers::pi, std::numbers::pi), 0.0, p.outlier_noise));
        data.labels.emplace_back(outlier);
    }
    for (std::size_t i = 0; i < data.trajectories.size(); ++i) data.trajectories[i].id = "t" + std::to_string(i);
    return data;
}

}  // namespace flo::synth
