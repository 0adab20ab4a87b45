#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace pmlp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Largest row count accepted anywhere; all matrices are dense.
inline constexpr std::size_t kMaxRows = 20000;

enum class ErrorCode {
    // configuration
    InvalidAlpha,
    InvalidEta,
    InvalidTau,
    InvalidTauMax,
    InvalidBandwidth,
    InvalidPathPoints,
    InvalidSupportCount,
    InvalidNeighborCount,
    InvalidQuantile,
    InvalidSolver,
    InvalidArgument,
    // input data
    DimensionMismatch,
    NonFiniteValue,
    DegenerateVector,
    IndexOutOfRange,
    DuplicateIndex,
    EmptyInput,
    InvalidLabel,
    ParseError,
    TooManyRows,
    // numerics
    IsolatedNode,
    ZeroDensity,
    EmptyHighConfidenceSet,
    NonFiniteResult,
    SolverFailure,
};

std::string_view error_code_name(ErrorCode code);

enum class ErrorCategory { Usage, Data, Numerical };

ErrorCategory error_category(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// N samples of dimension d, one per row. Entries are finite.
class FeatureMatrix {
public:
    explicit FeatureMatrix(Matrix data);
    FeatureMatrix(std::size_t rows, std::size_t dim, std::vector<double> row_major);

    std::size_t rows() const noexcept { return static_cast<std::size_t>(data_.rows()); }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(data_.cols()); }
    Vector row(std::size_t i) const;
    const Matrix& data() const noexcept { return data_; }

    bool operator==(const FeatureMatrix& other) const { return data_ == other.data_; }

private:
    Matrix data_;
};

struct GroundTruth {
    std::size_t cls;
    bool operator==(const GroundTruth&) const = default;
};
struct Prediction {
    std::vector<double> probs;
    bool operator==(const Prediction&) const = default;
};
struct Unlabeled {
    bool operator==(const Unlabeled&) const = default;
};

using LabelState = std::variant<GroundTruth, Prediction, Unlabeled>;

/// Per-row label states over a fixed number of classes.
class LabelAssignment {
public:
    LabelAssignment(std::vector<LabelState> states, std::size_t num_classes);

    std::size_t size() const noexcept { return states_.size(); }
    std::size_t num_classes() const noexcept { return num_classes_; }
    const LabelState& operator[](std::size_t i) const { return states_[i]; }
    const std::vector<LabelState>& states() const noexcept { return states_; }

    bool is_ground_truth(std::size_t i) const;
    std::size_t ground_truth_count() const;
    std::vector<bool> ground_truth_mask() const;

    bool operator==(const LabelAssignment&) const = default;

private:
    std::vector<LabelState> states_;
    std::size_t num_classes_;
};

/// N x C nonnegative finite class scores. A row is either all-zero or carries
/// positive mass.
class SoftLabelMatrix {
public:
    explicit SoftLabelMatrix(Matrix data);
    static SoftLabelMatrix zeros(std::size_t rows, std::size_t classes);

    std::size_t rows() const noexcept { return static_cast<std::size_t>(data_.rows()); }
    std::size_t classes() const noexcept { return static_cast<std::size_t>(data_.cols()); }
    const Matrix& data() const noexcept { return data_; }
    double operator()(std::size_t i, std::size_t c) const { return data_(i, c); }

    double row_max(std::size_t i) const;
    double row_sum(std::size_t i) const;
    /// Index of the largest entry; -1 for an all-zero row. Ties go to the
    /// lowest class index.
    std::ptrdiff_t argmax(std::size_t i) const;
    /// Rows rescaled to sum to one; zero rows stay zero.
    SoftLabelMatrix row_normalized() const;

private:
    Matrix data_;
};

/// Symmetric nonnegative N x N matrix with an exactly zero diagonal.
class AffinityMatrix {
public:
    explicit AffinityMatrix(Matrix data);

    std::size_t size() const noexcept { return static_cast<std::size_t>(data_.rows()); }
    const Matrix& data() const noexcept { return data_; }
    double operator()(std::size_t i, std::size_t j) const { return data_(i, j); }
    AffinityMatrix scaled(double factor) const;

private:
    Matrix data_;
};

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct Aggregator {
    enum class Kind { Min, Max, Avg, Quantile };
    Kind kind = Kind::Avg;
    double t = 0.5;  // only for Quantile

    static Aggregator min() { return {Kind::Min, 0.5}; }
    static Aggregator max() { return {Kind::Max, 0.5}; }
    static Aggregator avg() { return {Kind::Avg, 0.5}; }
    static Aggregator quantile(double t) { return {Kind::Quantile, t}; }

    bool operator==(const Aggregator&) const = default;
};

enum class DistanceMode { EuclideanInverse, CosineSimilarity, FirstOrderSimilarity };

struct Solver {
    enum class Kind { ClosedForm, Iterative };
    Kind kind = Kind::Iterative;
    std::size_t max_iters = 1000;
    double tol = 1e-10;

    static Solver closed_form() { return {Kind::ClosedForm, 1000, 1e-10}; }
    static Solver iterative(std::size_t max_iters, double tol) { return {Kind::Iterative, max_iters, tol}; }

    bool operator==(const Solver&) const = default;
};

enum class Mode { PMLP, ClassicalLPA };

/// Which reading of the closed-form propagation output to report.
enum class ClosedFormScaling {
    IterativeFixedPoint,  // (1 - alpha) (I - alpha S)^-1 Y
    PaperClosedForm,      // (I - alpha S)^-1 Y
};

struct PmlpConfig {
    double alpha = 0.8;
    double eta = 0.2;
    double tau = 0.95;
    double tau_max = 0.99;
    double bandwidth_h = 5.0;
    std::size_t path_points_k = 1;
    std::size_t kde_support_n = 10;
    std::size_t neighbor_count = 3;
    Aggregator aggregator = Aggregator::avg();
    DistanceMode distance_mode = DistanceMode::EuclideanInverse;
    Solver solver{};
    Mode mode = Mode::PMLP;
    ClosedFormScaling closed_form_scaling = ClosedFormScaling::IterativeFixedPoint;
    bool clamp_ground_truth = true;
    bool renormalize = false;
    std::uint64_t seed = 0;

    /// Defaults with neighbor_count = ceil(1.5 * num_classes).
    static PmlpConfig defaults_for(std::size_t num_classes);

    bool operator==(const PmlpConfig&) const = default;
};

std::size_t default_neighbor_count(std::size_t num_classes);

/// Returns cfg unchanged, or throws an Error whose code names the first
/// offending field.
PmlpConfig validate_config(const PmlpConfig& cfg);

std::string_view to_string(DistanceMode mode);
std::string_view to_string(Mode mode);
std::string to_string(const Aggregator& agg);
std::string_view to_string(ClosedFormScaling scaling);

DistanceMode parse_distance_mode(std::string_view text);
Mode parse_mode(std::string_view text);
Aggregator parse_aggregator(std::string_view text);
ClosedFormScaling parse_closed_form_scaling(std::string_view text);

// ---------------------------------------------------------------------------
// Distance measures
// ---------------------------------------------------------------------------

/// EuclideanInverse returns the plain Euclidean distance (inversion happens
/// during affinity construction). The similarity modes return the raw
/// similarity; FirstOrderSimilarity is the inner product.
double distance(const Vector& a, const Vector& b, DistanceMode mode);

double squared_euclidean(const Vector& a, const Vector& b);

}  // namespace pmlp
