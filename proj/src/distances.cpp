#include "flo/distances.hpp"

#include <memory>

namespace flo {

Trajectory align_start(const Trajectory& t) {
    Trajectory out = t;
    if (out.points.cols() > 0) out.points.colwise() -= t.points.col(0);
    return out;
}

Metric parse_metric(std::string_view name) {
    if (name == "euclidean") return Metric::Euclidean;
    if (name == "frechet") return Metric::Frechet;
    if (name == "bhattacharyya") return Metric::Bhattacharyya;
    if (name == "precomputed") return Metric::Precomputed;
    throw ArgumentError("unknown distance: " + std::string(name));
}

std::string_view metric_name(Metric m) {
    switch (m) {
        case Metric::Euclidean: return "euclidean";
        case Metric::Frechet: return "frechet";
        case Metric::Bhattacharyya: return "bhattacharyya";
        case Metric::Precomputed: return "precomputed";
    }
    return "unknown";
}

DistanceOracle euclidean_oracle(Matrix points) {
    if (!points.allFinite()) throw FormatError("euclidean_oracle: non-finite coordinate");
    // Stored transposed (n x d) so each coordinate is contiguous over points
    // and a whole distance column vectorizes.
    // Both kernels accumulate squared differences in the same coordinate
    // order, so pairwise and column evaluation agree bit for bit.
    auto coords = std::make_shared<const Matrix>(points.transpose());
    const Index n = coords->rows();
    return DistanceOracle(
        n,
        [coords](Index i, Index j) {
            Scalar sum = 0;
            for (Index k = 0; k < coords->cols(); ++k) {
                const Scalar diff = (*coords)(i, k) - (*coords)(j, k);
                sum += diff * diff;
            }
            return std::sqrt(sum);
        },
        "euclidean",
        [coords](Index j, std::span<Scalar> out) {
            Eigen::Map<Eigen::ArrayXd> dst(out.data(), static_cast<Index>(out.size()));
            dst.setZero();
            for (Index k = 0; k < coords->cols(); ++k)
                dst += (coords->col(k).array() - (*coords)(j, k)).square();
            dst = dst.sqrt();
        });
}

DistanceOracle bhattacharyya_oracle(const Matrix& histograms) {
    // Store sqrt of the normalized bins so each evaluation is one dot product.
    Matrix roots(histograms.rows(), histograms.cols());
    for (Index c = 0; c < histograms.cols(); ++c) {
        const auto h = histograms.col(c);
        if ((h.array() < 0).any() || !h.allFinite())
            throw FormatError("bhattacharyya_oracle: bins must be finite and non-negative");
        const Scalar s = h.sum();
        if (!(s > 0)) throw FormatError("bhattacharyya_oracle: all-zero histogram");
        roots.col(c) = (h.array() / s).sqrt().matrix();
    }
    auto data = std::make_shared<const Matrix>(std::move(roots));
    return DistanceOracle(
        data->cols(),
        [data](Index i, Index j) {
            const Scalar bc = data->col(i).dot(data->col(j));
            return std::sqrt(std::clamp(Scalar(1) - bc, Scalar(0), Scalar(1)));
        },
        "bhattacharyya");
}

DistanceOracle frechet_oracle(std::vector<Trajectory> trajectories, bool align) {
    for (auto& t : trajectories) {
        if (t.points.cols() == 0) throw FormatError("frechet_oracle: empty trajectory '" + t.id + "'");
        if (!t.points.allFinite()) throw FormatError("frechet_oracle: non-finite coordinate");
        if (align) t = align_start(t);
    }
    auto data = std::make_shared<const std::vector<Trajectory>>(std::move(trajectories));
    const auto n = static_cast<Index>(data->size());
    return DistanceOracle(
        n,
        [data](Index i, Index j) {
            return discrete_frechet((*data)[static_cast<std::size_t>(i)].points,
                                    (*data)[static_cast<std::size_t>(j)].points);
        },
        "frechet");
}

DistanceOracle precomputed_oracle(Matrix distances, Scalar tolerance) {
    const Index n = distances.rows();
    if (distances.cols() != n) throw FormatError("precomputed distance matrix must be square");
    if (!distances.allFinite()) throw FormatError("precomputed distance matrix has non-finite entries");
    for (Index i = 0; i < n; ++i) {
        if (std::abs(distances(i, i)) > tolerance)
            throw FormatError("precomputed distance matrix has non-zero diagonal at " + std::to_string(i));
        for (Index j = 0; j < n; ++j) {
            if (distances(i, j) < 0)
                throw FormatError("precomputed distance matrix has negative entry at (" +
                                  std::to_string(i) + "," + std::to_string(j) + ")");
            if (std::abs(distances(i, j) - distances(j, i)) > tolerance)
                throw FormatError("precomputed distance matrix is asymmetric at (" + std::to_string(i) +
                                  "," + std::to_string(j) + ")");
        }
    }
    auto data = std::make_shared<const Matrix>(std::move(distances));
    return DistanceOracle(
        n, [data](Index i, Index j) { return (*data)(i, j); }, "precomputed",
        [data](Index j, std::span<Scalar> out) {
            Eigen::Map<Vector>(out.data(), static_cast<Index>(out.size())) = data->col(j);
        });
}

DistanceOracle make_oracle(Metric metric, Dataset data, bool align_trajectories) {
    if (metric == Metric::Frechet) {
        auto* traj = std::get_if<std::vector<Trajectory>>(&data);
        if (!traj) throw ArgumentError("frechet distance requires trajectory data");
        return frechet_oracle(std::move(*traj), align_trajectories);
    }
    auto* m = std::get_if<Matrix>(&data);
    if (!m) throw ArgumentError("trajectory data requires the frechet distance");
    switch (metric) {
        case Metric::Euclidean: return euclidean_oracle(std::move(*m));
        case Metric::Bhattacharyya: return bhattacharyya_oracle(*m);
        case Metric::Precomputed: return precomputed_oracle(std::move(*m));
        case Metric::Frechet: break;
    }
    throw ArgumentError("unsupported metric");
}

}  // namespace flo
