#pragma once

// Reference computations for tests. Deliberately written with plain loops over
// std::vector so they share no code path with the library.

#include "pmlp/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

namespace oracle {

using Rows = std::vector<std::vector<double>>;

/// (1/(n h)) sum_m exp(-||s_m - q||^2 / h), double loop.
inline double kde(const std::vector<double>& q, const Rows& supports, double h) {
    double total = 0.0;
    for (std::size_t m = 0; m < supports.size(); ++m) {
        double sq = 0.0;
        for (std::size_t d = 0; d < q.size(); ++d) {
            const double diff = supports[m][d] - q[d];
            sq += diff * diff;
        }
        total += std::exp(-sq / h);
    }
    return total / (static_cast<double>(supports.size()) * h);
}

/// Indices of the n nearest rows by exhaustive stable sort.
inline std::vector<std::size_t> nearest(const Rows& rows, const std::vector<double>& q, std::size_t n) {
    std::vector<std::pair<double, std::size_t>> keyed;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        double sq = 0.0;
        for (std::size_t d = 0; d < q.size(); ++d) {
            sq += (rows[r][d] - q[d]) * (rows[r][d] - q[d]);
        }
        keyed.emplace_back(sq, r);
    }
    std::sort(keyed.begin(), keyed.end());
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(keyed[i].second);
    return out;
}

/// Gauss-Jordan inverse with partial pivoting.
inline Rows inverse(Rows a) {
    const std::size_t n = a.size();
    Rows inv(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        }
        if (a[pivot][col] == 0.0) throw std::runtime_error("singular");
        std::swap(a[pivot], a[col]);
        std::swap(inv[pivot], inv[col]);
        const double p = a[col][col];
        for (std::size_t c = 0; c < n; ++c) {
            a[col][c] /= p;
            inv[col][c] /= p;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r][col];
            if (f == 0.0) continue;
            for (std::size_t c = 0; c < n; ++c) {
                a[r][c] -= f * a[col][c];
                inv[r][c] -= f * inv[col][c];
            }
        }
    }
    return inv;
}

inline Rows multiply(const Rows& a, const Rows& b) {
    Rows out(a.size(), std::vector<double>(b.front().size(), 0.0));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t k = 0; k < b.size(); ++k)
            for (std::size_t j = 0; j < b[k].size(); ++j) out[i][j] += a[i][k] * b[k][j];
    return out;
}

/// (I - alpha S)^-1 Y via explicit inverse.
inline Rows closed_form(const Rows& s, const Rows& y, double alpha) {
    Rows m = s;
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m.size(); ++j) m[i][j] = (i == j ? 1.0 : 0.0) - alpha * s[i][j];
    return multiply(inverse(m), y);
}

/// Largest |eigenvalue| estimate of a symmetric matrix by power iteration.
inline double spectral_radius(const Rows& s, int iters = 2000) {
    const std::size_t n = s.size();
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 0.01 * static_cast<double>(i % 7);
    double lambda = 0.0;
    for (int it = 0; it < iters; ++it) {
        // iterate with S^2 so negative extreme eigenvalues are caught too
        std::vector<double> w(n, 0.0), z(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) w[i] += s[i][j] * v[j];
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) z[i] += s[i][j] * w[j];
        double norm = 0.0;
        for (double x : z) norm += x * x;
        norm = std::sqrt(norm);
        if (norm == 0.0) return 0.0;
        double vnorm = 0.0;
        for (double x : v) vnorm += x * x;
        lambda = std::sqrt(norm / std::sqrt(vnorm));
        for (std::size_t i = 0; i < n; ++i) v[i] = z[i] / norm;
    }
    return lambda;
}

inline Rows to_rows(const pmlp::Matrix& m) {
    Rows out(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
    return out;
}

inline pmlp::Matrix to_matrix(const Rows& rows) {
    pmlp::Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return m;
}

inline double max_abs_diff(const pmlp::Matrix& a, const pmlp::Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return INFINITY;
    if (a.size() == 0) return 0.0;
    return (a - b).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// Random instances

struct Instance {
    pmlp::FeatureMatrix features;
    pmlp::LabelAssignment labels;
};

/// Clustered random features with a mix of ground truth, confident and
/// unconfident predictions, and unlabeled rows. Every class has at least one
/// ground-truth row.
inline Instance random_instance(std::uint64_t seed, std::size_t rows, std::size_t classes, std::size_t dim = 3) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<std::vector<double>> centers(classes, std::vector<double>(dim));
    for (auto& c : centers)
        for (auto& x : c) x = 4.0 * normal(gen);

    pmlp::Matrix x(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dim));
    std::vector<pmlp::LabelState> states;
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t cls = r % classes;
        for (std::size_t d = 0; d < dim; ++d) {
            x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(d)) = centers[cls][d] + normal(gen);
        }
        const double u = unit(gen);
        if (r < classes || u < 0.1) {
            states.emplace_back(pmlp::GroundTruth{cls});
        } else if (u < 0.4) {
            // prediction, sometimes confident
            std::vector<double> p(classes);
            double sum = 0.0;
            for (auto& v : p) {
                v = unit(gen);
                sum += v;
            }
            const double peak = unit(gen) < 0.5 ? 0.97 : 0.5;
            for (auto& v : p) v = (1.0 - peak) * v / sum;
            p[cls] += peak;
            double total = std::accumulate(p.begin(), p.end(), 0.0);
            for (auto& v : p) v /= total;
            states.emplace_back(pmlp::Prediction{p});
        } else {
            states.emplace_back(pmlp::Unlabeled{});
        }
    }
    return {pmlp::FeatureMatrix(x), pmlp::LabelAssignment(states, classes)};
}

/// Random symmetric nonnegative affinity with zero diagonal and no isolated
/// rows.
inline pmlp::Matrix random_affinity(std::uint64_t seed, std::size_t n, double density = 0.4) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    pmlp::Matrix w = pmlp::Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool ring = j == i + 1;
            if (ring || unit(gen) < density) {
                const double v = 0.1 + unit(gen);
                w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
                w(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
            }
        }
    }
    return w;
}

inline pmlp::Matrix random_labels(std::uint64_t seed, std::size_t n, std::size_t classes) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    pmlp::Matrix y = pmlp::Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(classes));
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
        if (unit(gen) < 0.3) {
            y(i, static_cast<Eigen::Index>(gen() % classes)) = 1.0;
        }
    }
    y(0, 0) = 1.0;
    return y;
}

}  // namespace oracle
