#pragma once

#include "pmlp/core.hpp"
#include "pmlp/propagate.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace pmlp {

enum class GeneratorKind { GaussianBlobs, TwoMoons };

/// Everything needed to regenerate a dataset bit for bit.
struct GeneratorSpec {
    GeneratorKind kind = GeneratorKind::GaussianBlobs;
    // GaussianBlobs
    std::vector<std::vector<double>> means;
    double sigma = 1.0;
    std::size_t per_class = 0;
    // TwoMoons
    std::size_t n = 0;
    double noise = 0.0;
    // both
    std::size_t labeled_per_class = 0;
    std::uint64_t seed = 0;

    bool operator==(const GeneratorSpec&) const = default;
};

std::string_view to_string(GeneratorKind kind);

struct SyntheticDataset {
    FeatureMatrix features;
    std::vector<std::size_t> true_class;
    std::vector<bool> labeled_mask;
    std::size_t num_classes = 0;
    GeneratorSpec generator_spec;

    /// Ground truth on labeled rows, Unlabeled elsewhere.
    LabelAssignment assignments() const;
};

/// `per_class` isotropic Gaussian draws around each mean, grouped by class.
/// The first `labeled_per_class` draws of every class are labeled.
SyntheticDataset gen_gaussian_blobs(const std::vector<std::vector<double>>& means,
                                    double sigma,
                                    std::size_t per_class,
                                    std::size_t labeled_per_class,
                                    std::uint64_t seed);

/// Two interleaving unit half-circles: class 0 is (cos t, sin t), class 1 is
/// (1 - cos t, 0.5 - sin t), with t uniform on [0, pi] and additive Gaussian
/// noise. Class 0 gets n/2 rows, class 1 the remainder.
SyntheticDataset gen_two_moons(std::size_t n, double noise, std::size_t labeled_per_class, std::uint64_t seed);

SyntheticDataset regenerate(const GeneratorSpec& spec);

// ---------------------------------------------------------------------------
// Cluster-separation harness
// ---------------------------------------------------------------------------

/// Where the density threshold comes from. Shared calibrates once on the
/// smallest separation and holds it fixed while the clusters move apart;
/// PerSeparation recalibrates on every dataset.
enum class TauCalibration { Shared, PerSeparation };

struct TheoremOneParams {
    std::vector<double> separations;  // distances between the two means, ascending
    double sigma = 1.0;
    std::size_t dim = 2;
    std::size_t samples_per_cluster = 200;
    std::size_t pairs = 200;
    double tau_quantile = 0.1;
    std::size_t line_points = 50;
    double bandwidth_h = 2.0;
    TauCalibration tau_calibration = TauCalibration::Shared;
    std::uint64_t seed = 0;
};

struct TheoremOneReport {
    double separation = 0.0;
    double tau_density = 0.0;
    double fraction_event_c = 0.0;
    double fraction_low_density_length = 0.0;
};

/// For each separation: two blobs that far apart, a density threshold at the
/// given quantile of in-sample densities, and for random cross-cluster pairs
/// the rate of lines containing a point at or below it plus the mean fraction
/// of such points along each line.
std::vector<TheoremOneReport> verify_theorem1(const TheoremOneParams& params);

// ---------------------------------------------------------------------------
// Mode comparison
// ---------------------------------------------------------------------------

struct TrialMetrics {
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    Mode mode = Mode::PMLP;
    double accuracy = 0.0;            // argmax accuracy on unlabeled rows
    double high_ratio = 0.0;          // unlabeled rows with normalized max >= tau
    double correct_high_ratio = 0.0;  // accuracy within that subset, 0 when empty

    bool operator==(const TrialMetrics&) const = default;
};

/// Scores a propagation result against known classes over unlabeled rows.
TrialMetrics evaluate_result(const PropagationResult& result,
                             const std::vector<std::size_t>& true_class,
                             const std::vector<bool>& labeled_mask,
                             double tau);

struct ComparisonReport {
    std::vector<TrialMetrics> pmlp;
    std::vector<TrialMetrics> lpa;

    double mean_accuracy(Mode mode) const;
    double median_accuracy(Mode mode) const;
    /// Trials where PMLP's correct-high ratio is at least LPA's.
    std::size_t pmlp_correct_high_wins() const;
};

/// Runs both modes on `trials` datasets regenerated from the dataset's spec
/// with seeds spec.seed + trial (trial 0 is the dataset itself).
ComparisonReport compare_pmlp_vs_lpa(const SyntheticDataset& dataset, const PmlpConfig& cfg, std::size_t trials);

// ---------------------------------------------------------------------------
// Density ratio sweep
// ---------------------------------------------------------------------------

/// `count` random distinct row pairs drawn with the given seed.
std::vector<std::pair<std::size_t, std::size_t>> random_pairs(std::size_t rows, std::size_t count, std::uint64_t seed);

struct DensityRatioPoint {
    double bandwidth_h = 0.0;
    double ratio = 0.0;
};

std::vector<DensityRatioPoint> density_ratio_sweep(const FeatureMatrix& features,
                                                   const std::vector<double>& bandwidths,
                                                   const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                                                   const PmlpConfig& cfg);

}  // namespace pmlp
