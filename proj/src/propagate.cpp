#include "pmlp/propagate.hpp"

#include <algorithm>
#include <cmath>

namespace pmlp {

ConfidenceSplit split_by_confidence(const SoftLabelMatrix& labels,
                                    const std::vector<bool>& ground_truth_mask,
                                    double tau) {
    if (!(tau > 0.0 && tau <= 1.0)) {
        throw Error(ErrorCode::InvalidTau, "tau must lie in (0,1]");
    }
    if (ground_truth_mask.size() != labels.rows()) {
        throw Error(ErrorCode::DimensionMismatch, "ground-truth mask length differs from label rows");
    }
    const auto rows = static_cast<Eigen::Index>(labels.rows());
    const auto classes = static_cast<Eigen::Index>(labels.classes());
    Matrix high = Matrix::Zero(rows, classes);
    Matrix low = Matrix::Zero(rows, classes);
    std::vector<bool> mask(labels.rows(), false);

    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto row = static_cast<std::size_t>(r);
        if (ground_truth_mask[row]) {
            const std::ptrdiff_t cls = labels.argmax(row);
            if (cls < 0) {
                throw Error(ErrorCode::InvalidLabel, "ground-truth row " + std::to_string(row) + " is all zero");
            }
            high(r, cls) = 1.0;
            mask[row] = true;
        } else if (labels.row_max(row) >= tau) {
            high.row(r) = labels.data().row(r);
            mask[row] = true;
        } else {
            low.row(r) = labels.data().row(r);
        }
    }
    return {SoftLabelMatrix(std::move(high)), SoftLabelMatrix(std::move(low)), std::move(mask)};
}

IterativeResult propagate_iterative(const Matrix& s,
                                    const Matrix& y_high,
                                    double alpha,
                                    std::size_t max_iters,
                                    double tol) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw Error(ErrorCode::InvalidAlpha, "alpha must lie in (0,1)");
    }
    if (s.rows() != s.cols() || s.rows() != y_high.rows()) {
        throw Error(ErrorCode::DimensionMismatch, "propagation operator and labels are not conformable");
    }
    if (max_iters < 1 || !(tol > 0.0)) {
        throw Error(ErrorCode::InvalidSolver, "iterative solver needs max_iters >= 1 and tol > 0");
    }

    const Matrix source = (1.0 - alpha) * y_high;
    IterativeResult out;
    out.labels = y_high;
    for (std::size_t it = 1; it <= max_iters; ++it) {
        Matrix next = alpha * (s * out.labels) + source;
        if (!next.allFinite()) {
            throw Error(ErrorCode::NonFiniteResult,
                        "non-finite value at iteration " + std::to_string(it) + "; check the affinity input");
        }
        const Matrix delta = next - out.labels;
        out.residual = delta.size() > 0 ? delta.cwiseAbs().maxCoeff() : 0.0;
        out.residual_history.push_back(delta.norm());
        out.labels = std::move(next);
        out.iterations = it;
        if (out.residual < tol) {
            out.converged = true;
            break;
        }
    }
    return out;
}

Matrix propagate_closed_form(const Matrix& s, const Matrix& y_high, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw Error(ErrorCode::InvalidAlpha, "alpha must lie in (0,1)");
    }
    if (s.rows() != s.cols() || s.rows() != y_high.rows()) {
        throw Error(ErrorCode::DimensionMismatch, "propagation operator and labels are not conformable");
    }
    // I - alpha S is symmetric positive definite when the spectral radius of S
    // is at most one.
    const Matrix system = Matrix::Identity(s.rows(), s.cols()) - alpha * s;
    const Eigen::LLT<Matrix> llt(system);
    if (llt.info() != Eigen::Success) {
        throw Error(ErrorCode::SolverFailure, "I - alpha*S is not positive definite");
    }
    Matrix out = llt.solve(y_high);
    if (!out.allFinite()) {
        throw Error(ErrorCode::NonFiniteResult, "closed-form solve produced non-finite values");
    }
    return out;
}

Matrix mix_final(const Matrix& propagated, const Matrix& low, double eta) {
    if (!(eta >= 0.0 && eta <= 1.0)) {
        throw Error(ErrorCode::InvalidEta, "eta must lie in [0,1]");
    }
    if (propagated.rows() != low.rows() || propagated.cols() != low.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "propagated and low-confidence labels differ in shape");
    }
    return eta * propagated + (1.0 - eta) * low;
}

SoftLabelMatrix initial_labels(const LabelAssignment& assignments) {
    const auto rows = static_cast<Eigen::Index>(assignments.size());
    const auto classes = static_cast<Eigen::Index>(assignments.num_classes());
    Matrix y = Matrix::Zero(rows, classes);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const LabelState& state = assignments[static_cast<std::size_t>(r)];
        if (const auto* gt = std::get_if<GroundTruth>(&state)) {
            y(r, static_cast<Eigen::Index>(gt->cls)) = 1.0;
        } else if (const auto* pred = std::get_if<Prediction>(&state)) {
            for (Eigen::Index c = 0; c < classes; ++c) {
                y(r, c) = pred->probs[static_cast<std::size_t>(c)];
            }
        }
    }
    return SoftLabelMatrix(std::move(y));
}

PropagationResult run_pmlp(const FeatureMatrix& features,
                           const LabelAssignment& assignments,
                           const PmlpConfig& cfg,
                           const RunHooks& hooks) {
    validate_config(cfg);
    if (assignments.size() != features.rows()) {
        throw Error(ErrorCode::DimensionMismatch, "label count differs from feature rows");
    }
    if (assignments.num_classes() < 2) {
        throw Error(ErrorCode::InvalidLabel, "at least two classes are required");
    }
    if (assignments.ground_truth_count() == 0) {
        throw Error(ErrorCode::InvalidLabel, "at least one ground-truth row is required");
    }

    const SoftLabelMatrix y = initial_labels(assignments);
    const std::vector<bool> gt_mask = assignments.ground_truth_mask();
    const ConfidenceSplit split = split_by_confidence(y, gt_mask, cfg.tau);
    if (std::none_of(split.high_mask.begin(), split.high_mask.end(), [](bool b) { return b; })) {
        throw Error(ErrorCode::EmptyHighConfidenceSet, "no row reaches tau; lower tau");
    }

    AffinityMatrix w = build_knn_affinity(features, cfg);
    if (hooks.affinity_scale != 1.0) {
        w = w.scaled(hooks.affinity_scale);
    }
    const Matrix s = normalize_symmetric(w);

    Matrix propagated;
    std::size_t iterations = 0;
    double residual = 0.0;
    if (cfg.solver.kind == Solver::Kind::Iterative) {
        IterativeResult it = propagate_iterative(s, split.high.data(), cfg.alpha, cfg.solver.max_iters, cfg.solver.tol);
        propagated = std::move(it.labels);
        iterations = it.iterations;
        residual = it.residual;
    } else {
        propagated = propagate_closed_form(s, split.high.data(), cfg.alpha);
        if (cfg.closed_form_scaling == ClosedFormScaling::IterativeFixedPoint) {
            propagated *= (1.0 - cfg.alpha);
        }
    }
    // The exact solution is nonnegative; a direct solve can leave rounding-level
    // negatives.
    propagated = propagated.cwiseMax(0.0);

    if (cfg.clamp_ground_truth) {
        for (std::size_t r = 0; r < gt_mask.size(); ++r) {
            if (gt_mask[r]) {
                const auto row = static_cast<Eigen::Index>(r);
                propagated.row(row) = split.high.data().row(row);
            }
        }
    }

    SoftLabelMatrix final_labels(mix_final(propagated, split.low.data(), cfg.eta));
    if (cfg.renormalize) {
        final_labels = final_labels.row_normalized();
    }
    return PropagationResult{std::move(final_labels), SoftLabelMatrix(std::move(propagated)), split.high_mask,
                             iterations, residual};
}

// ---------------------------------------------------------------------------

namespace {

std::size_t increment_band(std::size_t epoch) {
    const std::size_t e = std::max<std::size_t>(epoch, 1);
    return (e + 199) / 200;  // ceil(e / 200)
}

}  // namespace

double threshold_increment(std::size_t epoch) {
    return std::pow(10.0, -(1.0 + static_cast<double>(increment_band(epoch))));
}

ThresholdSchedulerState::ThresholdSchedulerState(double tau, double tau_max)
    : tau_(tau), tau_max_(tau_max), anchor_(tau) {
    if (!(tau > 0.0 && tau <= 1.0)) {
        throw Error(ErrorCode::InvalidTau, "tau must lie in (0,1]");
    }
    if (!(tau_max >= tau && tau_max <= 1.0)) {
        throw Error(ErrorCode::InvalidTauMax, "tau_max must lie in [tau,1]");
    }
}

ThresholdSchedulerState ThresholdSchedulerState::updated(const SoftLabelMatrix& predictions,
                                                         std::size_t epoch) const {
    ThresholdSchedulerState next = *this;
    std::size_t hits = 0;
    for (std::size_t r = 0; r < predictions.rows(); ++r) {
        if (predictions.row_max(r) >= tau_) {
            ++hits;
        }
    }
    const std::size_t before = high_count_ / kThresholdTriggerCount;
    next.high_count_ = high_count_ + hits;
    const std::size_t triggers = next.high_count_ / kThresholdTriggerCount - before;
    next.epoch_ = epoch;

    const std::size_t band = increment_band(epoch);
    if (band != band_) {
        next.anchor_ = tau_;
        next.band_ = band;
        next.band_triggers_ = 0;
    }
    if (triggers > 0 && tau_ < tau_max_) {
        next.band_triggers_ += triggers;
        const double raised = next.anchor_ + static_cast<double>(next.band_triggers_) * threshold_increment(epoch);
        next.tau_ = std::min(raised, tau_max_);
    }
    return next;
}

ThresholdSchedulerState update_threshold(const ThresholdSchedulerState& state,
                                         const SoftLabelMatrix& predictions,
                                         std::size_t epoch) {
    return state.updated(predictions, epoch);
}

double high_confidence_ratio(const SoftLabelMatrix& predictions, double tau) {
    if (predictions.rows() == 0) {
        return 0.0;
    }
    std::size_t hits = 0;
    for (std::size_t r = 0; r < predictions.rows(); ++r) {
        if (predictions.row_max(r) >= tau) {
            ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(predictions.rows());
}

}  // namespace pmlp
