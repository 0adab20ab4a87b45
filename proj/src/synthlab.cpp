#include "pmlp/synthlab.hpp"

#include "pmlp/density.hpp"
#include "pmlp/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace pmlp {

std::string_view to_string(GeneratorKind kind) {
    return kind == GeneratorKind::GaussianBlobs ? "gaussian_blobs" : "two_moons";
}

LabelAssignment SyntheticDataset::assignments() const {
    std::vector<LabelState> states;
    states.reserve(true_class.size());
    for (std::size_t r = 0; r < true_class.size(); ++r) {
        if (labeled_mask[r]) {
            states.emplace_back(GroundTruth{true_class[r]});
        } else {
            states.emplace_back(Unlabeled{});
        }
    }
    return LabelAssignment(std::move(states), num_classes);
}

SyntheticDataset gen_gaussian_blobs(const std::vector<std::vector<double>>& means,
                                    double sigma,
                                    std::size_t per_class,
                                    std::size_t labeled_per_class,
                                    std::uint64_t seed) {
    if (means.empty()) {
        throw Error(ErrorCode::EmptyInput, "at least one mean is required");
    }
    const std::size_t dim = means.front().size();
    if (dim == 0 || std::any_of(means.begin(), means.end(), [dim](const auto& m) { return m.size() != dim; })) {
        throw Error(ErrorCode::DimensionMismatch, "means must share a nonzero dimension");
    }
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw Error(ErrorCode::InvalidArgument, "sigma must be positive");
    }
    if (per_class == 0) {
        throw Error(ErrorCode::InvalidArgument, "per_class must be at least 1");
    }
    if (labeled_per_class > per_class) {
        throw Error(ErrorCode::InvalidArgument, "labeled_per_class exceeds per_class");
    }

    Rng rng(seed);
    const std::size_t rows = means.size() * per_class;
    Matrix data(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dim));
    std::vector<std::size_t> cls(rows);
    std::vector<bool> labeled(rows, false);
    std::size_t r = 0;
    for (std::size_t c = 0; c < means.size(); ++c) {
        for (std::size_t s = 0; s < per_class; ++s, ++r) {
            for (std::size_t d = 0; d < dim; ++d) {
                data(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(d)) = means[c][d] + sigma * rng.normal();
            }
            cls[r] = c;
            labeled[r] = s < labeled_per_class;
        }
    }

    GeneratorSpec spec;
    spec.kind = GeneratorKind::GaussianBlobs;
    spec.means = means;
    spec.sigma = sigma;
    spec.per_class = per_class;
    spec.labeled_per_class = labeled_per_class;
    spec.seed = seed;
    return SyntheticDataset{FeatureMatrix(std::move(data)), std::move(cls), std::move(labeled), means.size(), spec};
}

SyntheticDataset gen_two_moons(std::size_t n, double noise, std::size_t labeled_per_class, std::uint64_t seed) {
    if (n < 2) {
        throw Error(ErrorCode::InvalidArgument, "two moons needs at least two rows");
    }
    if (!(noise >= 0.0) || !std::isfinite(noise)) {
        throw Error(ErrorCode::InvalidArgument, "noise must be >= 0");
    }
    const std::size_t outer = n / 2;
    if (labeled_per_class > outer) {
        throw Error(ErrorCode::InvalidArgument, "labeled_per_class exceeds the smaller moon");
    }

    Rng rng(seed);
    Matrix data(static_cast<Eigen::Index>(n), 2);
    std::vector<std::size_t> cls(n);
    std::vector<bool> labeled(n, false);
    for (std::size_t r = 0; r < n; ++r) {
        const bool is_outer = r < outer;
        const double t = rng.uniform(0.0, std::numbers::pi);
        double x = is_outer ? std::cos(t) : 1.0 - std::cos(t);
        double y = is_outer ? std::sin(t) : 0.5 - std::sin(t);
        if (noise > 0.0) {
            x += noise * rng.normal();
            y += noise * rng.normal();
        }
        const auto row = static_cast<Eigen::Index>(r);
        data(row, 0) = x;
        data(row, 1) = y;
        cls[r] = is_outer ? 0 : 1;
        labeled[r] = (is_outer ? r : r - outer) < labeled_per_class;
    }

    GeneratorSpec spec;
    spec.kind = GeneratorKind::TwoMoons;
    spec.n = n;
    spec.noise = noise;
    spec.labeled_per_class = labeled_per_class;
    spec.seed = seed;
    return SyntheticDataset{FeatureMatrix(std::move(data)), std::move(cls), std::move(labeled), 2, spec};
}

SyntheticDataset regenerate(const GeneratorSpec& spec) {
    if (spec.kind == GeneratorKind::GaussianBlobs) {
        return gen_gaussian_blobs(spec.means, spec.sigma, spec.per_class, spec.labeled_per_class, spec.seed);
    }
    return gen_two_moons(spec.n, spec.noise, spec.labeled_per_class, spec.seed);
}

// ---------------------------------------------------------------------------

namespace {

std::vector<Vector> all_rows(const FeatureMatrix& features) {
    std::vector<Vector> rows;
    rows.reserve(features.rows());
    for (std::size_t r = 0; r < features.rows(); ++r) {
        rows.push_back(features.row(r));
    }
    return rows;
}

}  // namespace

std::vector<TheoremOneReport> verify_theorem1(const TheoremOneParams& params) {
    if (params.separations.empty()) {
        throw Error(ErrorCode::EmptyInput, "at least one separation is required");
    }
    if (!std::is_sorted(params.separations.begin(), params.separations.end())) {
        throw Error(ErrorCode::InvalidArgument, "separations must be ascending");
    }
    if (!(params.tau_quantile > 0.0 && params.tau_quantile < 1.0)) {
        throw Error(ErrorCode::InvalidQuantile, "tau_quantile must lie in (0,1)");
    }
    if (params.line_points < 50) {
        throw Error(ErrorCode::InvalidArgument, "line sampling needs at least 50 points");
    }
    if (params.samples_per_cluster < 1 || params.pairs < 1 || params.dim < 1) {
        throw Error(ErrorCode::InvalidArgument, "samples_per_cluster, pairs and dim must be >= 1");
    }

    auto separated = [&](double delta) {
        std::vector<double> mu1(params.dim, 0.0);
        std::vector<double> mu2(params.dim, 0.0);
        mu2[0] = delta;
        // Same seed for every separation: the clusters differ only by the shift.
        return gen_gaussian_blobs({mu1, mu2}, params.sigma, params.samples_per_cluster, 0, params.seed);
    };
    auto calibrate = [&](const std::vector<Vector>& supports) {
        std::vector<double> in_sample;
        in_sample.reserve(supports.size());
        for (const Vector& x : supports) {
            in_sample.push_back(kde_density(x, supports, params.bandwidth_h));
        }
        return aggregate_density(in_sample, Aggregator::quantile(params.tau_quantile));
    };

    double shared_tau = 0.0;
    if (params.tau_calibration == TauCalibration::Shared) {
        shared_tau = calibrate(all_rows(separated(params.separations.front()).features));
    }

    std::vector<TheoremOneReport> reports;
    for (double delta : params.separations) {
        const SyntheticDataset ds = separated(delta);
        const std::vector<Vector> supports = all_rows(ds.features);
        const double tau =
            params.tau_calibration == TauCalibration::Shared ? shared_tau : calibrate(supports);

        Rng rng(params.seed ^ 0x9e3779b97f4a7c15ULL);
        const std::size_t per = params.samples_per_cluster;
        std::size_t event_hits = 0;
        double low_fraction_sum = 0.0;
        for (std::size_t p = 0; p < params.pairs; ++p) {
            const std::size_t a = rng.below(per);
            const std::size_t b = per + rng.below(per);
            const Vector xa = ds.features.row(a);
            const Vector delta_vec = ds.features.row(b) - xa;
            std::size_t low = 0;
            for (std::size_t l = 1; l <= params.line_points; ++l) {
                const double frac = static_cast<double>(l) / static_cast<double>(params.line_points + 1);
                if (kde_density(xa + frac * delta_vec, supports, params.bandwidth_h) <= tau) {
                    ++low;
                }
            }
            if (low > 0) {
                ++event_hits;
            }
            low_fraction_sum += static_cast<double>(low) / static_cast<double>(params.line_points);
        }
        reports.push_back({delta, tau, static_cast<double>(event_hits) / static_cast<double>(params.pairs),
                           low_fraction_sum / static_cast<double>(params.pairs)});
    }
    return reports;
}

// ---------------------------------------------------------------------------

TrialMetrics evaluate_result(const PropagationResult& result,
                             const std::vector<std::size_t>& true_class,
                             const std::vector<bool>& labeled_mask,
                             double tau) {
    const SoftLabelMatrix normalized = result.final_labels.row_normalized();
    std::size_t unlabeled = 0;
    std::size_t correct = 0;
    std::size_t high = 0;
    std::size_t high_correct = 0;
    for (std::size_t r = 0; r < true_class.size(); ++r) {
        if (labeled_mask[r]) {
            continue;
        }
        ++unlabeled;
        const std::ptrdiff_t predicted = normalized.argmax(r);
        const bool ok = predicted >= 0 && static_cast<std::size_t>(predicted) == true_class[r];
        correct += ok ? 1 : 0;
        if (normalized.row_max(r) >= tau) {
            ++high;
            high_correct += ok ? 1 : 0;
        }
    }
    TrialMetrics m;
    if (unlabeled > 0) {
        m.accuracy = static_cast<double>(correct) / static_cast<double>(unlabeled);
        m.high_ratio = static_cast<double>(high) / static_cast<double>(unlabeled);
    }
    if (high > 0) {
        m.correct_high_ratio = static_cast<double>(high_correct) / static_cast<double>(high);
    }
    return m;
}

namespace {

const std::vector<TrialMetrics>& trials_for(const ComparisonReport& report, Mode mode) {
    return mode == Mode::PMLP ? report.pmlp : report.lpa;
}

}  // namespace

double ComparisonReport::mean_accuracy(Mode mode) const {
    const auto& trials = trials_for(*this, mode);
    if (trials.empty()) {
        return 0.0;
    }
    double sum = 0.0;
    for (const auto& t : trials) {
        sum += t.accuracy;
    }
    return sum / static_cast<double>(trials.size());
}

double ComparisonReport::median_accuracy(Mode mode) const {
    const auto& trials = trials_for(*this, mode);
    if (trials.empty()) {
        return 0.0;
    }
    std::vector<double> acc;
    for (const auto& t : trials) {
        acc.push_back(t.accuracy);
    }
    return aggregate_density(acc, Aggregator::quantile(0.5));
}

std::size_t ComparisonReport::pmlp_correct_high_wins() const {
    std::size_t wins = 0;
    for (std::size_t t = 0; t < std::min(pmlp.size(), lpa.size()); ++t) {
        if (pmlp[t].correct_high_ratio >= lpa[t].correct_high_ratio) {
            ++wins;
        }
    }
    return wins;
}

ComparisonReport compare_pmlp_vs_lpa(const SyntheticDataset& dataset, const PmlpConfig& cfg, std::size_t trials) {
    if (trials < 1) {
        throw Error(ErrorCode::InvalidArgument, "at least one trial is required");
    }
    validate_config(cfg);
    ComparisonReport report;
    for (std::size_t t = 0; t < trials; ++t) {
        GeneratorSpec spec = dataset.generator_spec;
        spec.seed += t;
        const SyntheticDataset ds = t == 0 ? dataset : regenerate(spec);
        const LabelAssignment labels = ds.assignments();
        for (Mode mode : {Mode::PMLP, Mode::ClassicalLPA}) {
            PmlpConfig run_cfg = cfg;
            run_cfg.mode = mode;
            const PropagationResult result = run_pmlp(ds.features, labels, run_cfg);
            TrialMetrics m = evaluate_result(result, ds.true_class, ds.labeled_mask, cfg.tau);
            m.trial = t;
            m.seed = spec.seed;
            m.mode = mode;
            (mode == Mode::PMLP ? report.pmlp : report.lpa).push_back(m);
        }
    }
    return report;
}

// ---------------------------------------------------------------------------

std::vector<std::pair<std::size_t, std::size_t>> random_pairs(std::size_t rows, std::size_t count, std::uint64_t seed) {
    if (rows < 2) {
        throw Error(ErrorCode::InvalidArgument, "random pairs need at least two rows");
    }
    Rng rng(seed);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    pairs.reserve(count);
    while (pairs.size() < count) {
        const auto i = static_cast<std::size_t>(rng.below(rows));
        const auto j = static_cast<std::size_t>(rng.below(rows));
        if (i != j) {
            pairs.emplace_back(i, j);
        }
    }
    return pairs;
}

std::vector<DensityRatioPoint> density_ratio_sweep(const FeatureMatrix& features,
                                                   const std::vector<double>& bandwidths,
                                                   const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                                                   const PmlpConfig& cfg) {
    std::vector<DensityRatioPoint> out;
    out.reserve(bandwidths.size());
    for (double h : bandwidths) {
        PmlpConfig c = cfg;
        c.bandwidth_h = h;
        validate_config(c);
        out.push_back({h, density_ratio(features, pairs, c)});
    }
    return out;
}

}  // namespace pmlp
