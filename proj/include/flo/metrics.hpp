#pragma once

// Evaluation measures for clustering with outliers: normalized Jaccard index
// of selected vs planted outliers, local outlier factor and its ratio, and
// V-measure with outliers treated as one extra class.

#include <vector>

#include "flo/core.hpp"

namespace flo::metrics {

/// Per-point class or cluster id; an empty entry is the outlier class.
using LabelVector = std::vector<Assignee>;

/// Jaccard(O, O*) divided by the best value attainable for the set sizes,
/// min(|O|,|O*|) / max(|O|,|O*|).
Scalar normalized_jaccard(std::vector<Index> selected, std::vector<Index> planted);

/// Fraction of selected outliers that are planted outliers.
Scalar outlier_precision(std::vector<Index> selected, std::vector<Index> planted);

inline constexpr Index default_minpts = 10;

/// Local outlier factor for every point. Neighborhoods contain every point
/// within the minpts-distance, so ties at that distance are all included.
/// Reachability distances are floored at 1e-12 times the data diameter.
std::vector<Scalar> lof(const DistanceOracle& oracle, Index minpts = default_minpts);

/// Euclidean LOF over the columns of a d x n matrix.
std::vector<Scalar> lof(const Matrix& points, Index minpts = default_minpts);

/// mean LOF over selected / mean LOF over planted.
Scalar lof_ratio(const std::vector<Scalar>& scores, const std::vector<Index>& selected,
                 const std::vector<Index>& planted);
Scalar lof_ratio(const Matrix& points, const std::vector<Index>& selected,
                 const std::vector<Index>& planted, Index minpts = default_minpts);

struct VMeasure {
    Scalar homogeneity = 1;
    Scalar completeness = 1;
    Scalar v = 1;
};

/// Natural-log entropies; h = 1 when the truth has a single class and c = 1
/// when the prediction has a single cluster.
VMeasure v_measure(const LabelVector& truth, const LabelVector& predicted);

/// Cluster count of a labeling, ignoring the outlier class.
Index cluster_count(const LabelVector& labels);

}  // namespace flo::metrics
