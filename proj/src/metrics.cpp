#include "flo/metrics.hpp"

#include <cmath>
#include <limits>
#include <map>

#include "flo/distances.hpp"

namespace flo::metrics {

namespace {

std::vector<Index> as_set(std::vector<Index> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

Index intersection_size(const std::vector<Index>& a, const std::vector<Index>& b) {
    Index count = 0;
    for (auto ia = a.begin(), ib = b.begin(); ia != a.end() && ib != b.end();) {
        if (*ia < *ib) {
            ++ia;
        } else if (*ib < *ia) {
            ++ib;
        } else {
            ++count;
            ++ia;
            ++ib;
        }
    }
    return count;
}

Scalar mean_over(const std::vector<Scalar>& scores, const std::vector<Index>& idx) {
    if (idx.empty()) throw ArgumentError("lof_ratio: empty index set");
    Scalar sum = 0;
    for (Index i : idx) {
        if (i < 0 || i >= static_cast<Index>(scores.size())) throw ArgumentError("lof_ratio: index out of range");
        sum += scores[static_cast<std::size_t>(i)];
    }
    return sum / static_cast<Scalar>(idx.size());
}

/// Label -> dense id, with the outlier class mapped to its own id.
std::vector<Index> encode(const LabelVector& labels, Index& classes) {
    std::map<Index, Index> ids;
    Index outlier_id = -1;
    std::vector<Index> out(labels.size());
    classes = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (!labels[i]) {
            if (outlier_id < 0) outlier_id = classes++;
            out[i] = outlier_id;
        } else {
            auto [it, inserted] = ids.try_emplace(*labels[i], classes);
            if (inserted) ++classes;
            out[i] = it->second;
        }
    }
    return out;
}

}  // namespace

Scalar normalized_jaccard(std::vector<Index> selected, std::vector<Index> planted) {
    selected = as_set(std::move(selected));
    planted = as_set(std::move(planted));
    if (selected.empty() || planted.empty()) throw ArgumentError("normalized_jaccard: empty outlier set");
    const auto inter = static_cast<Scalar>(intersection_size(selected, planted));
    const auto a = static_cast<Scalar>(selected.size());
    const auto b = static_cast<Scalar>(planted.size());
    const Scalar jaccard = inter / (a + b - inter);
    const Scalar best = std::min(a, b) / std::max(a, b);
    return std::min(jaccard / best, Scalar(1));
}

Scalar outlier_precision(std::vector<Index> selected, std::vector<Index> planted) {
    selected = as_set(std::move(selected));
    planted = as_set(std::move(planted));
    if (selected.empty()) throw ArgumentError("outlier_precision: empty selection");
    return static_cast<Scalar>(intersection_size(selected, planted)) / static_cast<Scalar>(selected.size());
}

std::vector<Scalar> lof(const DistanceOracle& oracle, Index minpts) {
    const Index n = oracle.size();
    if (minpts < 1) throw ArgumentError("lof: minpts must be positive");
    if (minpts >= n) throw ArgumentError("lof: minpts must be below the number of points");

    struct Neighborhood {
        std::vector<Index> members;
        std::vector<Scalar> dist;
        Scalar kdist = 0;
    };
    std::vector<Neighborhood> hood(static_cast<std::size_t>(n));
    std::vector<Scalar> col(static_cast<std::size_t>(n));
    std::vector<Scalar> others;
    Scalar diameter = 0;
    for (Index p = 0; p < n; ++p) {
        oracle.column(p, col);
        others.clear();
        for (Index q = 0; q < n; ++q) {
            if (q == p) continue;
            others.push_back(col[q]);
            diameter = std::max(diameter, col[q]);
        }
        std::nth_element(others.begin(), others.begin() + (minpts - 1), others.end());
        auto& h = hood[p];
        h.kdist = others[static_cast<std::size_t>(minpts - 1)];
        for (Index q = 0; q < n; ++q) {
            if (q != p && col[q] <= h.kdist) {
                h.members.push_back(q);
                h.dist.push_back(col[q]);
            }
        }
    }

    const Scalar floor = diameter > 0 ? 1e-12 * diameter : 1e-12;
    std::vector<Scalar> lrd(static_cast<std::size_t>(n));
    for (Index p = 0; p < n; ++p) {
        const auto& h = hood[p];
        Scalar total = 0;
        for (std::size_t m = 0; m < h.members.size(); ++m)
            total += std::max({hood[h.members[m]].kdist, h.dist[m], floor});
        lrd[p] = static_cast<Scalar>(h.members.size()) / total;
    }

    std::vector<Scalar> scores(static_cast<std::size_t>(n));
    for (Index p = 0; p < n; ++p) {
        const auto& h = hood[p];
        Scalar sum = 0;
        for (Index o : h.members) sum += lrd[o];
        scores[p] = sum / (static_cast<Scalar>(h.members.size()) * lrd[p]);
    }
    return scores;
}

std::vector<Scalar> lof(const Matrix& points, Index minpts) { return lof(euclidean_oracle(points), minpts); }

Scalar lof_ratio(const std::vector<Scalar>& scores, const std::vector<Index>& selected,
                 const std::vector<Index>& planted) {
    return mean_over(scores, selected) / mean_over(scores, planted);
}

Scalar lof_ratio(const Matrix& points, const std::vector<Index>& selected, const std::vector<Index>& planted,
                 Index minpts) {
    if (selected.empty() || planted.empty()) throw ArgumentError("lof_ratio: empty index set");
    return lof_ratio(lof(points, minpts), selected, planted);
}

VMeasure v_measure(const LabelVector& truth, const LabelVector& predicted) {
    if (truth.size() != predicted.size()) throw ArgumentError("v_measure: label vectors differ in length");
    VMeasure out;
    if (truth.empty()) return out;

    Index nc = 0, nk = 0;
    const auto c = encode(truth, nc);
    const auto k = encode(predicted, nk);
    Matrix joint = Matrix::Zero(nc, nk);
    for (std::size_t i = 0; i < c.size(); ++i) joint(c[i], k[i]) += 1;
    const Scalar total = static_cast<Scalar>(c.size());
    const Vector class_sizes = joint.rowwise().sum();
    const Vector cluster_sizes = joint.colwise().sum().transpose();

    auto entropy = [total](const Vector& sizes) {
        Scalar h = 0;
        for (Index i = 0; i < sizes.size(); ++i)
            if (sizes[i] > 0) h -= sizes[i] / total * std::log(sizes[i] / total);
        return h;
    };
    const Scalar h_c = entropy(class_sizes);
    const Scalar h_k = entropy(cluster_sizes);
    Scalar h_c_given_k = 0, h_k_given_c = 0;
    for (Index a = 0; a < nc; ++a) {
        for (Index b = 0; b < nk; ++b) {
            const Scalar nab = joint(a, b);
            if (nab <= 0) continue;
            h_c_given_k -= nab / total * std::log(nab / cluster_sizes[b]);
            h_k_given_c -= nab / total * std::log(nab / class_sizes[a]);
        }
    }
    out.homogeneity = h_c > 0 ? 1 - h_c_given_k / h_c : 1;
    out.completeness = h_k > 0 ? 1 - h_k_given_c / h_k : 1;
    const Scalar s = out.homogeneity + out.completeness;
    out.v = s > 0 ? 2 * out.homogeneity * out.completeness / s : 0;
    return out;
}

Index cluster_count(const LabelVector& labels) {
    std::vector<Index> ids;
    for (const auto& l : labels)
        if (l) ids.push_back(*l);
    return static_cast<Index>(as_set(std::move(ids)).size());
}

}  // namespace flo::metrics
