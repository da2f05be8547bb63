#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "hepot/errors.hpp"

namespace hepot {

/// k nearest neighbours by Euclidean distance. Vote ties go to the class with
/// the smaller summed distance among the k, then to the lower class index.
/// Equal distances are ordered by training row.
inline int knn_predict(const Eigen::MatrixXd& train, const std::vector<int>& labels,
                       const Eigen::RowVectorXd& query, int k, int class_count) {
    const auto n = train.rows();
    if (k < 1 || k > n) throw ConfigError("k must be in [1, training size]");
    if (static_cast<Eigen::Index>(labels.size()) != n) throw DimensionError("row and label counts differ");
    if (query.size() != train.cols()) throw DimensionError("query has the wrong feature count");

    std::vector<double> dist(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) dist[static_cast<std::size_t>(i)] = (train.row(i) - query).norm();
    std::vector<std::size_t> order(dist.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });

    std::vector<int> votes(static_cast<std::size_t>(class_count), 0);
    std::vector<double> sum(static_cast<std::size_t>(class_count), 0.0);
    for (int i = 0; i < k; ++i) {
        const int c = labels[order[static_cast<std::size_t>(i)]];
        if (c < 0 || c >= class_count) throw DomainError("label outside [0, class_count)");
        votes[static_cast<std::size_t>(c)] += 1;
        sum[static_cast<std::size_t>(c)] += dist[order[static_cast<std::size_t>(i)]];
    }
    int best = -1;
    for (int c = 0; c < class_count; ++c) {
        const auto cu = static_cast<std::size_t>(c);
        if (votes[cu] == 0) continue;
        if (best < 0) {
            best = c;
            continue;
        }
        const auto bu = static_cast<std::size_t>(best);
        if (votes[cu] > votes[bu] || (votes[cu] == votes[bu] && sum[cu] < sum[bu])) best = c;
    }
    return best;
}

inline std::vector<int> knn_predict_rows(const Eigen::MatrixXd& train, const std::vector<int>& labels,
                                         const Eigen::MatrixXd& queries, int k, int class_count) {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(queries.rows()));
    for (Eigen::Index r = 0; r < queries.rows(); ++r)
        out.push_back(knn_predict(train, labels, Eigen::RowVectorXd(queries.row(r)), k, class_count));
    return out;
}

}  // namespace hepot
