#include "pmlp/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace pmlp {

std::string_view error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidAlpha: return "invalid_alpha";
        case ErrorCode::InvalidEta: return "invalid_eta";
        case ErrorCode::InvalidTau: return "invalid_tau";
        case ErrorCode::InvalidTauMax: return "invalid_tau_max";
        case ErrorCode::InvalidBandwidth: return "invalid_bandwidth";
        case ErrorCode::InvalidPathPoints: return "invalid_path_points";
        case ErrorCode::InvalidSupportCount: return "invalid_support_count";
        case ErrorCode::InvalidNeighborCount: return "invalid_neighbor_count";
        case ErrorCode::InvalidQuantile: return "invalid_quantile";
        case ErrorCode::InvalidSolver: return "invalid_solver";
        case ErrorCode::InvalidArgument: return "invalid_argument";
        case ErrorCode::DimensionMismatch: return "dimension_mismatch";
        case ErrorCode::NonFiniteValue: return "non_finite_value";
        case ErrorCode::DegenerateVector: return "degenerate_vector";
        case ErrorCode::IndexOutOfRange: return "index_out_of_range";
        case ErrorCode::DuplicateIndex: return "duplicate_index";
        case ErrorCode::EmptyInput: return "empty_input";
        case ErrorCode::InvalidLabel: return "invalid_label";
        case ErrorCode::ParseError: return "parse_error";
        case ErrorCode::TooManyRows: return "too_many_rows";
        case ErrorCode::IsolatedNode: return "isolated_node";
        case ErrorCode::ZeroDensity: return "zero_density";
        case ErrorCode::EmptyHighConfidenceSet: return "empty_high_confidence_set";
        case ErrorCode::NonFiniteResult: return "non_finite_result";
        case ErrorCode::SolverFailure: return "solver_failure";
    }
    return "unknown";
}

ErrorCategory error_category(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidAlpha:
        case ErrorCode::InvalidEta:
        case ErrorCode::InvalidTau:
        case ErrorCode::InvalidTauMax:
        case ErrorCode::InvalidBandwidth:
        case ErrorCode::InvalidPathPoints:
        case ErrorCode::InvalidSupportCount:
        case ErrorCode::InvalidNeighborCount:
        case ErrorCode::InvalidQuantile:
        case ErrorCode::InvalidSolver:
        case ErrorCode::InvalidArgument:
            return ErrorCategory::Usage;
        case ErrorCode::IsolatedNode:
        case ErrorCode::ZeroDensity:
        case ErrorCode::EmptyHighConfidenceSet:
        case ErrorCode::NonFiniteResult:
        case ErrorCode::SolverFailure:
            return ErrorCategory::Numerical;
        default:
            return ErrorCategory::Data;
    }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

namespace {

void require_finite(const Matrix& m, const char* what) {
    if (!m.allFinite()) {
        throw Error(ErrorCode::NonFiniteValue, std::string(what) + " contains NaN or infinity");
    }
}

}  // namespace

// ---------------------------------------------------------------------------

FeatureMatrix::FeatureMatrix(Matrix data) : data_(std::move(data)) {
    if (data_.rows() < 1 || data_.cols() < 1) {
        throw Error(ErrorCode::EmptyInput, "feature matrix needs at least one row and one column");
    }
    if (static_cast<std::size_t>(data_.rows()) > kMaxRows) {
        throw Error(ErrorCode::TooManyRows,
                    std::to_string(data_.rows()) + " rows exceeds the limit of " + std::to_string(kMaxRows));
    }
    require_finite(data_, "feature matrix");
}

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t dim, std::vector<double> row_major)
    : FeatureMatrix([&] {
          if (row_major.size() != rows * dim) {
              throw Error(ErrorCode::DimensionMismatch, "row-major buffer size does not match rows*dim");
          }
          Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dim));
          for (std::size_t i = 0; i < rows; ++i) {
              for (std::size_t j = 0; j < dim; ++j) {
                  m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row_major[i * dim + j];
              }
          }
          return m;
      }()) {}

Vector FeatureMatrix::row(std::size_t i) const {
    if (i >= rows()) {
        throw Error(ErrorCode::IndexOutOfRange, "row " + std::to_string(i) + " out of range");
    }
    return data_.row(static_cast<Eigen::Index>(i)).transpose();
}

// ---------------------------------------------------------------------------

LabelAssignment::LabelAssignment(std::vector<LabelState> states, std::size_t num_classes)
    : states_(std::move(states)), num_classes_(num_classes) {
    if (num_classes_ < 1) {
        throw Error(ErrorCode::InvalidLabel, "number of classes must be at least 1");
    }
    for (std::size_t i = 0; i < states_.size(); ++i) {
        if (const auto* gt = std::get_if<GroundTruth>(&states_[i])) {
            if (gt->cls >= num_classes_) {
                throw Error(ErrorCode::InvalidLabel, "row " + std::to_string(i) + ": class " +
                                                         std::to_string(gt->cls) + " >= " +
                                                         std::to_string(num_classes_));
            }
        } else if (const auto* pred = std::get_if<Prediction>(&states_[i])) {
            if (pred->probs.size() != num_classes_) {
                throw Error(ErrorCode::InvalidLabel,
                            "row " + std::to_string(i) + ": prediction has wrong length");
            }
            double sum = 0.0;
            for (double p : pred->probs) {
                if (!std::isfinite(p) || p < 0.0) {
                    throw Error(ErrorCode::InvalidLabel,
                                "row " + std::to_string(i) + ": prediction entries must be finite and >= 0");
                }
                sum += p;
            }
            if (std::abs(sum - 1.0) > 1e-9) {
                throw Error(ErrorCode::InvalidLabel, "row " + std::to_string(i) + ": prediction sums to " +
                                                         std::to_string(sum));
            }
        }
    }
}

bool LabelAssignment::is_ground_truth(std::size_t i) const {
    return std::holds_alternative<GroundTruth>(states_.at(i));
}

std::size_t LabelAssignment::ground_truth_count() const {
    return static_cast<std::size_t>(std::count_if(states_.begin(), states_.end(), [](const LabelState& s) {
        return std::holds_alternative<GroundTruth>(s);
    }));
}

std::vector<bool> LabelAssignment::ground_truth_mask() const {
    std::vector<bool> mask(states_.size());
    for (std::size_t i = 0; i < states_.size(); ++i) {
        mask[i] = std::holds_alternative<GroundTruth>(states_[i]);
    }
    return mask;
}

// ---------------------------------------------------------------------------

SoftLabelMatrix::SoftLabelMatrix(Matrix data) : data_(std::move(data)) {
    require_finite(data_, "soft label matrix");
    if (data_.size() > 0 && data_.minCoeff() < 0.0) {
        throw Error(ErrorCode::InvalidLabel, "soft label matrix has a negative entry");
    }
}

SoftLabelMatrix SoftLabelMatrix::zeros(std::size_t rows, std::size_t classes) {
    return SoftLabelMatrix(Matrix::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(classes)));
}

double SoftLabelMatrix::row_max(std::size_t i) const {
    return data_.row(static_cast<Eigen::Index>(i)).maxCoeff();
}

double SoftLabelMatrix::row_sum(std::size_t i) const {
    return data_.row(static_cast<Eigen::Index>(i)).sum();
}

std::ptrdiff_t SoftLabelMatrix::argmax(std::size_t i) const {
    const auto r = static_cast<Eigen::Index>(i);
    std::ptrdiff_t best = -1;
    double best_value = 0.0;
    for (Eigen::Index c = 0; c < data_.cols(); ++c) {
        if (data_(r, c) > best_value) {
            best_value = data_(r, c);
            best = c;
        }
    }
    return best;
}

SoftLabelMatrix SoftLabelMatrix::row_normalized() const {
    Matrix out = data_;
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
        const double s = out.row(r).sum();
        if (s > 0.0) {
            out.row(r) /= s;
        }
    }
    return SoftLabelMatrix(std::move(out));
}

// ---------------------------------------------------------------------------

AffinityMatrix::AffinityMatrix(Matrix data) : data_(std::move(data)) {
    if (data_.rows() != data_.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "affinity matrix must be square");
    }
    require_finite(data_, "affinity matrix");
    for (Eigen::Index i = 0; i < data_.rows(); ++i) {
        if (data_(i, i) != 0.0) {
            throw Error(ErrorCode::InvalidArgument, "affinity diagonal must be zero (row " + std::to_string(i) + ")");
        }
    }
    if (data_.size() > 0 && data_.minCoeff() < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "affinity entries must be nonnegative");
    }
    if ((data_ - data_.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
        throw Error(ErrorCode::InvalidArgument, "affinity matrix is not symmetric");
    }
}

AffinityMatrix AffinityMatrix::scaled(double factor) const {
    if (!(factor > 0.0) || !std::isfinite(factor)) {
        throw Error(ErrorCode::InvalidArgument, "affinity scale must be positive and finite");
    }
    return AffinityMatrix(data_ * factor);
}

// ---------------------------------------------------------------------------

std::size_t default_neighbor_count(std::size_t num_classes) {
    // ceil(1.5 * C) without floating point
    return (3 * num_classes + 1) / 2;
}

PmlpConfig PmlpConfig::defaults_for(std::size_t num_classes) {
    PmlpConfig cfg;
    cfg.neighbor_count = std::max<std::size_t>(1, default_neighbor_count(num_classes));
    return cfg;
}

PmlpConfig validate_config(const PmlpConfig& cfg) {
    auto fail = [](ErrorCode code, const std::string& msg) { throw Error(code, msg); };
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) fail(ErrorCode::InvalidAlpha, "alpha must lie in (0,1)");
    if (!(cfg.eta >= 0.0 && cfg.eta <= 1.0)) fail(ErrorCode::InvalidEta, "eta must lie in [0,1]");
    if (!(cfg.tau > 0.0 && cfg.tau <= 1.0)) fail(ErrorCode::InvalidTau, "tau must lie in (0,1]");
    if (!(cfg.tau_max > 0.0 && cfg.tau_max <= 1.0 && cfg.tau_max >= cfg.tau)) {
        fail(ErrorCode::InvalidTauMax, "tau_max must lie in [tau,1]");
    }
    if (!(cfg.bandwidth_h > 0.0) || !std::isfinite(cfg.bandwidth_h)) {
        fail(ErrorCode::InvalidBandwidth, "bandwidth_h must be positive and finite");
    }
    if (cfg.path_points_k < 1) fail(ErrorCode::InvalidPathPoints, "path_points_k must be >= 1");
    if (cfg.kde_support_n < 1) fail(ErrorCode::InvalidSupportCount, "kde_support_n must be >= 1");
    if (cfg.neighbor_count < 1) fail(ErrorCode::InvalidNeighborCount, "neighbor_count must be >= 1");
    if (cfg.aggregator.kind == Aggregator::Kind::Quantile &&
        !(cfg.aggregator.t > 0.0 && cfg.aggregator.t < 1.0)) {
        fail(ErrorCode::InvalidQuantile, "quantile t must lie in (0,1)");
    }
    if (cfg.solver.kind == Solver::Kind::Iterative &&
        (cfg.solver.max_iters < 1 || !(cfg.solver.tol > 0.0))) {
        fail(ErrorCode::InvalidSolver, "iterative solver needs max_iters >= 1 and tol > 0");
    }
    return cfg;
}

// ---------------------------------------------------------------------------

std::string_view to_string(DistanceMode mode) {
    switch (mode) {
        case DistanceMode::EuclideanInverse: return "euclidean-inverse";
        case DistanceMode::CosineSimilarity: return "cosine";
        case DistanceMode::FirstOrderSimilarity: return "first-order";
    }
    return "?";
}

std::string_view to_string(Mode mode) {
    return mode == Mode::PMLP ? "pmlp" : "lpa";
}

std::string to_string(const Aggregator& agg) {
    switch (agg.kind) {
        case Aggregator::Kind::Min: return "min";
        case Aggregator::Kind::Max: return "max";
        case Aggregator::Kind::Avg: return "avg";
        case Aggregator::Kind::Quantile: {
            char buf[64];
            auto res = std::to_chars(buf, buf + sizeof(buf), agg.t);
            return "quantile:" + std::string(buf, res.ptr);
        }
    }
    return "?";
}

std::string_view to_string(ClosedFormScaling scaling) {
    return scaling == ClosedFormScaling::IterativeFixedPoint ? "iterative-fixed-point" : "paper-closed-form";
}

DistanceMode parse_distance_mode(std::string_view text) {
    if (text == "euclidean-inverse" || text == "euclidean") return DistanceMode::EuclideanInverse;
    if (text == "cosine") return DistanceMode::CosineSimilarity;
    if (text == "first-order") return DistanceMode::FirstOrderSimilarity;
    throw Error(ErrorCode::InvalidArgument, "unknown distance mode '" + std::string(text) + "'");
}

Mode parse_mode(std::string_view text) {
    if (text == "pmlp") return Mode::PMLP;
    if (text == "lpa" || text == "classical-lpa") return Mode::ClassicalLPA;
    throw Error(ErrorCode::InvalidArgument, "unknown mode '" + std::string(text) + "'");
}

Aggregator parse_aggregator(std::string_view text) {
    if (text == "min") return Aggregator::min();
    if (text == "max") return Aggregator::max();
    if (text == "avg" || text == "mean") return Aggregator::avg();
    if (text == "median") return Aggregator::quantile(0.5);
    constexpr std::string_view prefix = "quantile:";
    if (text.substr(0, prefix.size()) == prefix) {
        const auto rest = text.substr(prefix.size());
        double t = 0.0;
        auto res = std::from_chars(rest.data(), rest.data() + rest.size(), t);
        if (res.ec == std::errc{} && res.ptr == rest.data() + rest.size()) {
            if (!(t > 0.0 && t < 1.0)) {
                throw Error(ErrorCode::InvalidQuantile, "quantile must lie in (0,1)");
            }
            return Aggregator::quantile(t);
        }
    }
    throw Error(ErrorCode::InvalidArgument, "unknown aggregator '" + std::string(text) + "'");
}

ClosedFormScaling parse_closed_form_scaling(std::string_view text) {
    if (text == "iterative-fixed-point") return ClosedFormScaling::IterativeFixedPoint;
    if (text == "paper-closed-form") return ClosedFormScaling::PaperClosedForm;
    throw Error(ErrorCode::InvalidArgument, "unknown closed-form scaling '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------

double squared_euclidean(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) {
        throw Error(ErrorCode::DimensionMismatch, "vectors have different dimensions");
    }
    return (a - b).squaredNorm();
}

double distance(const Vector& a, const Vector& b, DistanceMode mode) {
    if (a.size() != b.size()) {
        throw Error(ErrorCode::DimensionMismatch, "vectors have different dimensions (" +
                                                      std::to_string(a.size()) + " vs " +
                                                      std::to_string(b.size()) + ")");
    }
    if (!a.allFinite() || !b.allFinite()) {
        throw Error(ErrorCode::NonFiniteValue, "distance input is not finite");
    }
    switch (mode) {
        case DistanceMode::EuclideanInverse:
            return (a - b).norm();
        case DistanceMode::FirstOrderSimilarity:
            return a.dot(b);
        case DistanceMode::CosineSimilarity: {
            const double na = a.norm();
            const double nb = b.norm();
            if (na == 0.0 || nb == 0.0) {
                throw Error(ErrorCode::DegenerateVector, "cosine similarity of a zero-norm vector");
            }
            return a.dot(b) / (na * nb);
        }
    }
    return 0.0;
}

}  // namespace pmlp
