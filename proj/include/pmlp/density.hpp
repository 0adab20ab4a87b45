#pragma once

#include "pmlp/core.hpp"

#include <span>
#include <utility>
#include <vector>

namespace pmlp {

/// Interior equal-division points of the segment between two rows.
struct PathSample {
    std::size_t i = 0;
    std::size_t j = 0;
    std::vector<Vector> points;  // point_l = x_i + l/(k+1) (x_j - x_i), l = 1..k
};

/// Density estimates at the points of one PathSample.
using PathDensities = std::vector<double>;

PathSample sample_path(const FeatureMatrix& features, std::size_t i, std::size_t j, std::size_t k);

/// Exponential-kernel KDE: (1/(n h)) * sum_m exp(-||s_m - q||^2 / h).
double kde_density(const Vector& query, const std::vector<Vector>& supports, double h);

/// KDE with the 1/h prefactor dropped: (1/n) * sum_m exp(-||s_m - q||^2 / h).
/// Lies in (0,1]. Constant rescaling of the affinity matrix cancels under
/// symmetric normalization, so this is the form used for affinities.
double kde_density_normalized(const Vector& query, const std::vector<Vector>& supports, double h);

/// Row indices of the n rows nearest to query (Euclidean), ties by row index.
std::vector<std::size_t> nearest_rows(const FeatureMatrix& features, const Vector& query, std::size_t n);

/// The n rows nearest to query, nearest first.
std::vector<Vector> select_kde_supports(const FeatureMatrix& features, const Vector& query, std::size_t n);

/// Order-invariant reduction of path densities. Quantile interpolates
/// linearly between order statistics.
double aggregate_density(std::span<const double> values, const Aggregator& aggregator);

/// Normalized densities at every sampled point on the path i -> j.
PathDensities path_densities(const FeatureMatrix& features, std::size_t i, std::size_t j, const PmlpConfig& cfg);

/// I(p_ij): aggregated path density, in (0,1].
double path_density_info(const FeatureMatrix& features, std::size_t i, std::size_t j, const PmlpConfig& cfg);

/// Density information for a batch of pairs. Every path point is collected
/// first, its supports chosen, then all kernel sums evaluated; output order
/// follows the input pairs.
std::vector<double> path_density_info_batch(const FeatureMatrix& features,
                                            std::span<const std::pair<std::size_t, std::size_t>> pairs,
                                            const PmlpConfig& cfg);

/// max/min over every path-point density of every pair.
double density_ratio(const FeatureMatrix& features,
                     std::span<const std::pair<std::size_t, std::size_t>> pairs,
                     const PmlpConfig& cfg);

}  // namespace pmlp
