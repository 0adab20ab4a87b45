#pragma once

#include "pmlp/core.hpp"
#include "pmlp/graph.hpp"

#include <vector>

namespace pmlp {

struct ConfidenceSplit {
    SoftLabelMatrix high;
    SoftLabelMatrix low;
    std::vector<bool> high_mask;
};

/// Routes each row wholesale to `high` (max >= tau or ground truth) or `low`.
/// Ground-truth rows enter `high` as the one-hot vector of their argmax.
ConfidenceSplit split_by_confidence(const SoftLabelMatrix& labels,
                                    const std::vector<bool>& ground_truth_mask,
                                    double tau);

struct IterativeResult {
    Matrix labels;
    std::size_t iterations = 0;
    /// Max-abs change of the last iteration.
    double residual = 0.0;
    bool converged = false;
    /// Frobenius norm of the change at every iteration. Non-increasing from
    /// the second entry on, since alpha*S is a contraction in that norm.
    std::vector<double> residual_history;
};

/// Y(t) = alpha S Y(t-1) + (1 - alpha) Y_high, starting from Y_high, until the
/// max-abs change drops below tol or max_iters is reached.
IterativeResult propagate_iterative(const Matrix& s,
                                    const Matrix& y_high,
                                    double alpha,
                                    std::size_t max_iters,
                                    double tol);

/// Solves (I - alpha S) Y = Y_high directly. Note the absence of the
/// (1 - alpha) factor that the iteration's fixed point carries.
Matrix propagate_closed_form(const Matrix& s, const Matrix& y_high, double alpha);

/// eta * propagated + (1 - eta) * low, entrywise, without renormalizing.
Matrix mix_final(const Matrix& propagated, const Matrix& low, double eta);

struct PropagationResult {
    SoftLabelMatrix final_labels;
    SoftLabelMatrix propagated;
    std::vector<bool> high_mask;
    std::size_t iterations_used = 0;
    double residual = 0.0;
};

/// Test and diagnostic knobs that are not part of the algorithm proper.
struct RunHooks {
    /// Multiplies the affinity matrix before normalization.
    double affinity_scale = 1.0;
};

/// Soft label matrix for an assignment: one-hot ground truth, the stored
/// probabilities for predictions, zeros for unlabeled rows.
SoftLabelMatrix initial_labels(const LabelAssignment& assignments);

/// Full pipeline: kNN graph -> confidence split -> (density-reweighted)
/// affinity -> symmetric normalization -> propagation -> final mix.
PropagationResult run_pmlp(const FeatureMatrix& features,
                           const LabelAssignment& assignments,
                           const PmlpConfig& cfg,
                           const RunHooks& hooks = {});

// ---------------------------------------------------------------------------
// Adaptive threshold
// ---------------------------------------------------------------------------

inline constexpr std::size_t kThresholdTriggerCount = 50;

/// Increment applied per trigger: 10^-(1 + ceil(epoch / 200)), with epochs
/// counted from 1 (epoch 0 is treated as epoch 1).
double threshold_increment(std::size_t epoch);

class ThresholdSchedulerState {
public:
    ThresholdSchedulerState(double tau, double tau_max = 0.99);

    double tau() const noexcept { return tau_; }
    double tau_max() const noexcept { return tau_max_; }
    std::size_t high_count() const noexcept { return high_count_; }
    std::size_t epoch() const noexcept { return epoch_; }

    /// Counts predictions whose max is >= the current tau, then raises tau once
    /// for every multiple of 50 the running count crosses.
    ThresholdSchedulerState updated(const SoftLabelMatrix& predictions, std::size_t epoch) const;

private:
    double tau_;
    double tau_max_;
    std::size_t high_count_ = 0;
    std::size_t epoch_ = 0;
    // tau = min(anchor + triggers * increment(band), tau_max) within a band of
    // equal increments, so k triggers land on exactly tau0 + k * increment.
    double anchor_;
    std::size_t band_ = 0;
    std::size_t band_triggers_ = 0;
};

ThresholdSchedulerState update_threshold(const ThresholdSchedulerState& state,
                                         const SoftLabelMatrix& predictions,
                                         std::size_t epoch);

/// Fraction of rows whose max entry reaches tau.
double high_confidence_ratio(const SoftLabelMatrix& predictions, double tau);

}  // namespace pmlp
