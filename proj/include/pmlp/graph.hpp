#pragma once

#include "pmlp/core.hpp"

#include <vector>

namespace pmlp {

struct Neighbor {
    std::size_t index;
    double distance;
};

/// Nearest rows to `center`, ascending by distance then row index.
struct NeighborSet {
    std::size_t center = 0;
    std::vector<Neighbor> neighbors;
};

/// Floor applied to Euclidean distances before inversion.
inline constexpr double kDistanceFloor = 1e-12;

NeighborSet knn_select(const FeatureMatrix& features, std::size_t center, std::size_t count);

/// Edge weight before density reweighting: 1/max(dist, floor) for
/// EuclideanInverse, max(similarity, 0) for the similarity modes.
double base_affinity(const Vector& a, const Vector& b, DistanceMode mode);

/// Dense affinity over every pair of `node_set`. Entry (a,b) refers to rows
/// node_set[a], node_set[b]. In PMLP mode each entry carries the path density
/// factor; in ClassicalLPA mode the factor is 1.
AffinityMatrix build_affinity(const FeatureMatrix& features,
                              const std::vector<std::size_t>& node_set,
                              const PmlpConfig& cfg);

/// Affinity over all rows restricted to the k-nearest-neighbour graph
/// (k = cfg.neighbor_count): entry (i,j) is nonzero only when j is among the
/// neighbours of i or vice versa. Symmetrized as (M + M^T)/2.
AffinityMatrix build_knn_affinity(const FeatureMatrix& features, const PmlpConfig& cfg);

/// S = deg^{-1/2} W deg^{-1/2}, deg_i = sum_j W_ij.
Matrix normalize_symmetric(const AffinityMatrix& w);

}  // namespace pmlp
