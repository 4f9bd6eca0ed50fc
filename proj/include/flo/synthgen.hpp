#pragma once

// Seeded synthetic benchmark: k Gaussian clusters of m points each plus ell
// uniformly scattered outliers that are unlikely under every cluster.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "flo/core.hpp"
#include "flo/distances.hpp"
#include "flo/metrics.hpp"

namespace flo::synth {

class GenerationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SynthParams {
    Index clusters = 10;          // k
    Index points = 100;           // m, per cluster
    Index dim = 2;                // d
    Index outliers = 100;         // ell
    std::uint64_t seed = 0;
    double box = 10.0;            // cluster means uniform in [-box, box]^d
    double cov_scale = 1.0;       // covariance eigenvalues in cov_scale * [0.5, 1.5]
    double outlier_expand = 1.5;  // outlier box relative to the data bounding box
    double quantile = 0.999;      // chi-square rejection quantile
    std::size_t max_attempts = 10'000;
};

struct SynthData {
    Matrix points;                    // d x n, clusters first, then outliers
    metrics::LabelVector labels;      // 0..k-1, outliers empty
    std::vector<Vector> means;
    std::vector<Matrix> covariances;
    Scalar threshold = 0;             // squared Mahalanobis rejection bound

    std::vector<Index> planted_outliers() const;
};

/// Chi-square quantile for dof degrees of freedom.
Scalar chi_square_quantile(Scalar p, Index dof);

Scalar mahalanobis_sq(const Vector& x, const Vector& mean, const Matrix& covariance);

SynthData generate(const SynthParams& params);

/// Synthetic track families standing in for storm traces. Every cluster has
/// a template heading, turn rate and length; members follow it with small
/// per-step heading noise. Outliers wander with a much larger heading noise.
struct TrajectoryParams {
    Index clusters = 4;
    Index per_cluster = 10;
    Index outliers = 4;
    Index min_length = 8;
    Index max_length = 16;
    double step = 1.0;
    double heading_noise = 0.05;  // radians per step, cluster members
    double outlier_noise = 0.8;   // radians per step, outliers
    std::uint64_t seed = 0;
};

struct TrajectoryData {
    std::vector<Trajectory> trajectories;  // clusters first, then outliers
    metrics::LabelVector labels;
};

TrajectoryData generate_trajectories(const TrajectoryParams& params);

}  // namespace flo::synth
