#include "pmlp/graph.hpp"

#include "pmlp/density.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <utility>

namespace pmlp {

NeighborSet knn_select(const FeatureMatrix& features, std::size_t center, std::size_t count) {
    const std::size_t rows = features.rows();
    if (center >= rows) {
        throw Error(ErrorCode::IndexOutOfRange, "knn center out of range");
    }
    if (count >= rows) {
        throw Error(ErrorCode::InvalidNeighborCount, "neighbor count " + std::to_string(count) +
                                                         " must be below the row count " + std::to_string(rows));
    }
    // The center itself is at distance zero and index order puts it first only
    // among exact duplicates, so select count+1 and drop it wherever it lands.
    const auto order = nearest_rows(features, features.row(center), count + 1);
    const Vector x = features.row(center);

    NeighborSet out{center, {}};
    out.neighbors.reserve(count);
    for (std::size_t idx : order) {
        if (idx == center || out.neighbors.size() == count) {
            continue;
        }
        out.neighbors.push_back({idx, (features.row(idx) - x).norm()});
    }
    return out;
}

double base_affinity(const Vector& a, const Vector& b, DistanceMode mode) {
    const double d = distance(a, b, mode);
    if (mode == DistanceMode::EuclideanInverse) {
        return 1.0 / std::max(d, kDistanceFloor);
    }
    return std::max(d, 0.0);
}

namespace {

Matrix symmetrized(const Matrix& m) {
    return (m + m.transpose()) / 2.0;
}

// Density factors for a list of unordered pairs, 1 in classical mode.
std::vector<double> density_factors(const FeatureMatrix& features,
                                    const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                                    const PmlpConfig& cfg) {
    if (cfg.mode == Mode::ClassicalLPA) {
        return std::vector<double>(pairs.size(), 1.0);
    }
    return path_density_info_batch(features, pairs, cfg);
}

}  // namespace

AffinityMatrix build_affinity(const FeatureMatrix& features,
                              const std::vector<std::size_t>& node_set,
                              const PmlpConfig& cfg) {
    validate_config(cfg);
    if (node_set.size() < 2) {
        throw Error(ErrorCode::InvalidArgument, "affinity needs at least two nodes");
    }
    std::set<std::size_t> seen;
    for (std::size_t idx : node_set) {
        if (idx >= features.rows()) {
            throw Error(ErrorCode::IndexOutOfRange, "node index " + std::to_string(idx) + " out of range");
        }
        if (!seen.insert(idx).second) {
            throw Error(ErrorCode::DuplicateIndex, "node index " + std::to_string(idx) + " appears twice");
        }
    }

    const std::size_t n = node_set.size();
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    pairs.reserve(n * (n - 1) / 2);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            pairs.emplace_back(node_set[a], node_set[b]);
        }
    }
    const auto factors = density_factors(features, pairs, cfg);

    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    std::size_t p = 0;
    for (std::size_t a = 0; a < n; ++a) {
        const Vector xa = features.row(node_set[a]);
        for (std::size_t b = a + 1; b < n; ++b, ++p) {
            const double w = factors[p] * base_affinity(xa, features.row(node_set[b]), cfg.distance_mode);
            m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = w;
            m(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = w;
        }
    }
    return AffinityMatrix(symmetrized(m));
}

AffinityMatrix build_knn_affinity(const FeatureMatrix& features, const PmlpConfig& cfg) {
    validate_config(cfg);
    const std::size_t rows = features.rows();
    if (rows < 2) {
        throw Error(ErrorCode::InvalidArgument, "affinity needs at least two rows");
    }

    // Directed kNN edges, collected as unordered pairs so each path density is
    // evaluated once.
    std::vector<NeighborSet> sets;
    sets.reserve(rows);
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> pair_slot;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < rows; ++i) {
        sets.push_back(knn_select(features, i, cfg.neighbor_count));
        for (const Neighbor& nb : sets.back().neighbors) {
            const auto key = std::minmax(i, nb.index);
            if (pair_slot.emplace(key, pairs.size()).second) {
                pairs.emplace_back(key.first, key.second);
            }
        }
    }
    const auto factors = density_factors(features, pairs, cfg);

    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(rows));
    for (std::size_t i = 0; i < rows; ++i) {
        const Vector xi = features.row(i);
        for (const Neighbor& nb : sets[i].neighbors) {
            const auto key = std::minmax(i, nb.index);
            const double factor = factors[pair_slot.at(key)];
            const Vector lo = features.row(key.first);
            const Vector hi = features.row(key.second);
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(nb.index)) =
                factor * base_affinity(lo, hi, cfg.distance_mode);
        }
    }
    return AffinityMatrix(symmetrized(m));
}

Matrix normalize_symmetric(const AffinityMatrix& w) {
    const Matrix& m = w.data();
    const Vector degree = m.rowwise().sum();
    for (Eigen::Index i = 0; i < degree.size(); ++i) {
        if (!(degree(i) > 0.0)) {
            throw Error(ErrorCode::IsolatedNode, "row " + std::to_string(i) + " has zero degree (isolated node)");
        }
    }
    Matrix s(m.rows(), m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            s(i, j) = m(i, j) / std::sqrt(degree(i) * degree(j));
        }
    }
    return s;
}

}  // namespace pmlp
