#pragma once

// Metrics and DistanceOracle constructors. Point sets are stored column-wise
// (one column per point) so that a point is a contiguous Eigen column.

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "flo/core.hpp"

namespace flo {

template <class DerivedA, class DerivedB>
typename DerivedA::Scalar euclidean(const Eigen::MatrixBase<DerivedA>& a,
                                    const Eigen::MatrixBase<DerivedB>& b) {
    if (a.size() != b.size()) throw ArgumentError("euclidean: dimension mismatch");
    return (a - b).norm();
}

/// Bhattacharyya distance sqrt(1 - BC) between two histograms, normalized
/// internally so it is invariant to rescaling either argument.
template <class DerivedA, class DerivedB>
typename DerivedA::Scalar bhattacharyya(const Eigen::MatrixBase<DerivedA>& h1,
                                        const Eigen::MatrixBase<DerivedB>& h2) {
    using T = typename DerivedA::Scalar;
    if (h1.size() != h2.size()) throw ArgumentError("bhattacharyya: bin count mismatch");
    if ((h1.array() < 0).any() || (h2.array() < 0).any())
        throw ArgumentError("bhattacharyya: negative bin");
    const T s1 = h1.sum(), s2 = h2.sum();
    if (!(s1 > 0) || !(s2 > 0)) throw ArgumentError("bhattacharyya: all-zero histogram");
    const T bc = (h1.array() * h2.array()).sqrt().sum() / std::sqrt(s1 * s2);
    return std::sqrt(std::clamp(T(1) - bc, T(0), T(1)));
}

/// Ordered 2D polyline, one column per sample.
struct Trajectory {
    Eigen::Matrix2Xd points;
    std::string id;
};

/// Translates the trajectory so that its first point sits at the origin.
Trajectory align_start(const Trajectory& t);

/// Discrete Frechet distance with Euclidean point distance. Keeps a single
/// rolling row of the coupling table sized by the shorter curve.
template <class DerivedP, class DerivedQ>
typename DerivedP::Scalar discrete_frechet(const Eigen::MatrixBase<DerivedP>& p,
                                           const Eigen::MatrixBase<DerivedQ>& q) {
    using T = typename DerivedP::Scalar;
    if (p.cols() == 0 || q.cols() == 0) throw ArgumentError("discrete_frechet: empty trajectory");
    if (p.rows() != q.rows()) throw ArgumentError("discrete_frechet: dimension mismatch");
    if (p.cols() < q.cols()) return discrete_frechet(q, p);

    // p is the longer curve; the row runs over q.
    const Index m = q.cols();
    std::vector<T> row(static_cast<std::size_t>(m));
    row[0] = (p.col(0) - q.col(0)).norm();
    for (Index j = 1; j < m; ++j) row[j] = std::max(row[j - 1], T((p.col(0) - q.col(j)).norm()));
    for (Index i = 1; i < p.cols(); ++i) {
        T diag = row[0];
        row[0] = std::max(row[0], T((p.col(i) - q.col(0)).norm()));
        for (Index j = 1; j < m; ++j) {
            const T up = row[j];
            const T reach = std::min({diag, up, row[j - 1]});
            row[j] = std::max(reach, T((p.col(i) - q.col(j)).norm()));
            diag = up;
        }
    }
    return row[m - 1];
}

inline Scalar discrete_frechet(const Trajectory& p, const Trajectory& q) {
    return discrete_frechet(p.points, q.points);
}

enum class Metric { Euclidean, Frechet, Bhattacharyya, Precomputed };

Metric parse_metric(std::string_view name);
std::string_view metric_name(Metric m);

/// Points as columns of a d x n matrix.
DistanceOracle euclidean_oracle(Matrix points);

/// Histograms as columns of a bins x n matrix.
DistanceOracle bhattacharyya_oracle(const Matrix& histograms);

/// Trajectory distances. With align=true every trajectory is moved to start
/// at the origin before comparison.
DistanceOracle frechet_oracle(std::vector<Trajectory> trajectories, bool align = true);

/// Full n x n matrix; rejects asymmetric, negative, non-finite entries and a
/// non-zero diagonal.
DistanceOracle precomputed_oracle(Matrix distances, Scalar tolerance = 0);

using Dataset = std::variant<Matrix, std::vector<Trajectory>>;

/// Dispatches on metric: matrix data are points, histograms or a distance
/// matrix; trajectory data require Metric::Frechet.
DistanceOracle make_oracle(Metric metric, Dataset data, bool align_trajectories = true);

}  // namespace flo
