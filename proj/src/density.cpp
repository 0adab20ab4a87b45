#include "pmlp/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace pmlp {

namespace {

void check_bandwidth(double h) {
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw Error(ErrorCode::InvalidBandwidth, "bandwidth must be positive and finite");
    }
}

double kernel_sum(const Vector& query, const std::vector<Vector>& supports, double h) {
    if (supports.empty()) {
        throw Error(ErrorCode::EmptyInput, "KDE needs at least one support point");
    }
    check_bandwidth(h);
    if (!query.allFinite()) {
        throw Error(ErrorCode::NonFiniteValue, "KDE query is not finite");
    }
    double sum = 0.0;
    for (const Vector& s : supports) {
        if (s.size() != query.size()) {
            throw Error(ErrorCode::DimensionMismatch, "support and query dimensions differ");
        }
        if (!s.allFinite()) {
            throw Error(ErrorCode::NonFiniteValue, "KDE support is not finite");
        }
        sum += std::exp(-(s - query).squaredNorm() / h);
    }
    return sum;
}

void check_pair(const FeatureMatrix& features, std::size_t i, std::size_t j) {
    if (i >= features.rows() || j >= features.rows()) {
        throw Error(ErrorCode::IndexOutOfRange, "path endpoint out of range");
    }
    if (i == j) {
        throw Error(ErrorCode::InvalidArgument, "path endpoints must differ (zero-length path)");
    }
}

}  // namespace

PathSample sample_path(const FeatureMatrix& features, std::size_t i, std::size_t j, std::size_t k) {
    check_pair(features, i, j);
    if (k < 1) {
        throw Error(ErrorCode::InvalidPathPoints, "path needs at least one point");
    }
    // Points are always generated from the lower row index so that (i,j) and
    // (j,i) produce bit-identical point sets.
    const std::size_t lo = std::min(i, j);
    const std::size_t hi = std::max(i, j);
    const Vector a = features.row(lo);
    const Vector delta = features.row(hi) - a;

    PathSample sample{i, j, {}};
    sample.points.reserve(k);
    for (std::size_t l = 1; l <= k; ++l) {
        const double frac = static_cast<double>(l) / static_cast<double>(k + 1);
        sample.points.emplace_back(a + frac * delta);
    }
    if (i > j) {
        std::reverse(sample.points.begin(), sample.points.end());
    }
    return sample;
}

double kde_density(const Vector& query, const std::vector<Vector>& supports, double h) {
    const double sum = kernel_sum(query, supports, h);
    return sum / (static_cast<double>(supports.size()) * h);
}

double kde_density_normalized(const Vector& query, const std::vector<Vector>& supports, double h) {
    const double sum = kernel_sum(query, supports, h);
    return sum / static_cast<double>(supports.size());
}

std::vector<std::size_t> nearest_rows(const FeatureMatrix& features, const Vector& query, std::size_t n) {
    const std::size_t rows = features.rows();
    if (n > rows) {
        throw Error(ErrorCode::InvalidSupportCount,
                    "requested " + std::to_string(n) + " supports from " + std::to_string(rows) + " rows");
    }
    if (static_cast<std::size_t>(query.size()) != features.dim()) {
        throw Error(ErrorCode::DimensionMismatch, "query dimension differs from features");
    }
    const Vector sq = (features.data().rowwise() - query.transpose()).rowwise().squaredNorm();

    std::vector<std::size_t> order(rows);
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto closer = [&sq](std::size_t a, std::size_t b) {
        const auto ia = static_cast<Eigen::Index>(a);
        const auto ib = static_cast<Eigen::Index>(b);
        return sq(ia) < sq(ib) || (sq(ia) == sq(ib) && a < b);
    };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(), closer);
    order.resize(n);
    return order;
}

std::vector<Vector> select_kde_supports(const FeatureMatrix& features, const Vector& query, std::size_t n) {
    std::vector<Vector> supports;
    supports.reserve(n);
    for (std::size_t idx : nearest_rows(features, query, n)) {
        supports.push_back(features.row(idx));
    }
    return supports;
}

double aggregate_density(std::span<const double> values, const Aggregator& aggregator) {
    if (values.empty()) {
        throw Error(ErrorCode::EmptyInput, "cannot aggregate an empty density list");
    }
    // Sorting first makes every branch independent of input order, including
    // the floating-point sum behind Avg.
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    switch (aggregator.kind) {
        case Aggregator::Kind::Min:
            return sorted.front();
        case Aggregator::Kind::Max:
            return sorted.back();
        case Aggregator::Kind::Avg:
            return std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
        case Aggregator::Kind::Quantile: {
            const double t = aggregator.t;
            if (!(t > 0.0 && t < 1.0)) {
                throw Error(ErrorCode::InvalidQuantile, "quantile t must lie in (0,1)");
            }
            const double pos = t * static_cast<double>(sorted.size() - 1);
            const auto lo = static_cast<std::size_t>(std::floor(pos));
            const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
            const double frac = pos - static_cast<double>(lo);
            return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
        }
    }
    return 0.0;
}

PathDensities path_densities(const FeatureMatrix& features, std::size_t i, std::size_t j, const PmlpConfig& cfg) {
    const PathSample path = sample_path(features, i, j, cfg.path_points_k);
    PathDensities out;
    out.reserve(path.points.size());
    for (const Vector& p : path.points) {
        out.push_back(kde_density_normalized(p, select_kde_supports(features, p, cfg.kde_support_n), cfg.bandwidth_h));
    }
    return out;
}

double path_density_info(const FeatureMatrix& features, std::size_t i, std::size_t j, const PmlpConfig& cfg) {
    const PathDensities values = path_densities(features, i, j, cfg);
    return aggregate_density(values, cfg.aggregator);
}

std::vector<double> path_density_info_batch(const FeatureMatrix& features,
                                            std::span<const std::pair<std::size_t, std::size_t>> pairs,
                                            const PmlpConfig& cfg) {
    const std::size_t k = cfg.path_points_k;

    // Stage 1: every path point of every pair.
    std::vector<Vector> queries;
    queries.reserve(pairs.size() * k);
    for (const auto& [i, j] : pairs) {
        PathSample path = sample_path(features, i, j, k);
        for (Vector& p : path.points) {
            queries.push_back(std::move(p));
        }
    }

    // Stage 2: support sets, then kernel sums per query point.
    std::vector<double> densities(queries.size());
    for (std::size_t q = 0; q < queries.size(); ++q) {
        const auto supports = select_kde_supports(features, queries[q], cfg.kde_support_n);
        densities[q] = kde_density_normalized(queries[q], supports, cfg.bandwidth_h);
    }

    // Stage 3: aggregate per pair.
    std::vector<double> out;
    out.reserve(pairs.size());
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        out.push_back(aggregate_density(std::span<const double>(densities).subspan(p * k, k), cfg.aggregator));
    }
    return out;
}

double density_ratio(const FeatureMatrix& features,
                     std::span<const std::pair<std::size_t, std::size_t>> pairs,
                     const PmlpConfig& cfg) {
    if (pairs.empty()) {
        throw Error(ErrorCode::EmptyInput, "density ratio needs at least one pair");
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (const auto& [i, j] : pairs) {
        for (double v : path_densities(features, i, j, cfg)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (!(lo > 0.0)) {
        throw Error(ErrorCode::ZeroDensity, "minimum path density is zero; ratio undefined");
    }
    return hi / lo;
}

}  // namespace pmlp
