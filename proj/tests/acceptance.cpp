// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
//
//   pmlp_acceptance <pmlp-cli> [unit-test-binary ...]

#include "oracles.hpp"

#include "pmlp/density.hpp"
#include "pmlp/jobs.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace pmlp;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
    std::ostringstream out;
    out << v;
    return out.str();
}

std::string quoted(const fs::path& p) { return "\"" + p.string() + "\""; }

int shell(const std::string& command) {
    const int status = std::system((command + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Verdict degeneration() {
    const auto start = Clock::now();
    double worst = 0.0;
    std::size_t argmax_mismatch = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const std::size_t classes = std::vector<std::size_t>{2, 3, 5}[seed % 3];
        const std::size_t rows = 30 + seed * 170 / 19;
        const auto inst = oracle::random_instance(1000 + seed, rows, classes);
        PmlpConfig pm = PmlpConfig::defaults_for(classes);
        pm.bandwidth_h = 1e12;
        PmlpConfig lpa = pm;
        lpa.mode = Mode::ClassicalLPA;
        const auto a = run_pmlp(inst.features, inst.labels, pm);
        const auto b = run_pmlp(inst.features, inst.labels, lpa);
        worst = std::max(worst, oracle::max_abs_diff(a.final_labels.data(), b.final_labels.data()));
        for (std::size_t i = 0; i < a.final_labels.rows(); ++i) {
            argmax_mismatch += a.final_labels.argmax(i) != b.final_labels.argmax(i) ? 1 : 0;
        }
    }
    const double t = seconds_since(start);
    return {worst < 1e-6 && argmax_mismatch == 0 && t < 10.0,
            "max diff " + fmt(worst) + ", argmax mismatches " + std::to_string(argmax_mismatch) + ", " + fmt(t) +
                " s"};
}

Verdict scale_invariance() {
    double worst_s = 0.0;
    double worst_y = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto inst = oracle::random_instance(2000 + seed, 40 + 10 * seed, 3);
        PmlpConfig cfg = PmlpConfig::defaults_for(3);
        cfg.bandwidth_h = 2.0;
        const AffinityMatrix w = build_knn_affinity(inst.features, cfg);
        const Matrix s = normalize_symmetric(w);
        const auto base = run_pmlp(inst.features, inst.labels, cfg);
        for (double c : {1e-3, 1.0, 1e3}) {
            worst_s = std::max(worst_s, oracle::max_abs_diff(normalize_symmetric(w.scaled(c)), s));
            const auto scaled = run_pmlp(inst.features, inst.labels, cfg, RunHooks{c});
            worst_y = std::max(worst_y, oracle::max_abs_diff(scaled.final_labels.data(), base.final_labels.data()));
        }
    }
    return {worst_s < 1e-12 && worst_y < 1e-9, "S diff " + fmt(worst_s) + ", label diff " + fmt(worst_y)};
}

Verdict solver_cross_check() {
    double worst = 0.0;
    double worst_oracle = 0.0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const std::size_t n = 3 + seed % 48;
        const Matrix s = normalize_symmetric(AffinityMatrix(oracle::random_affinity(3000 + seed, n)));
        const Matrix y = oracle::random_labels(4000 + seed, n, 2 + seed % 4);
        for (double alpha : {0.1, 0.5, 0.8}) {
            const Matrix cf = propagate_closed_form(s, y, alpha);
            const IterativeResult it = propagate_iterative(s, y, alpha, 1000000, 1e-12);
            worst = std::max(worst, oracle::max_abs_diff(it.labels, (1.0 - alpha) * cf));
            const Matrix ref = oracle::to_matrix(oracle::closed_form(oracle::to_rows(s), oracle::to_rows(y), alpha));
            worst_oracle = std::max(worst_oracle, oracle::max_abs_diff(cf, ref));
        }
    }
    return {worst < 1e-8, "iterative vs scaled closed form " + fmt(worst) + ", closed form vs oracle " +
                              fmt(worst_oracle)};
}

Verdict kde_oracle() {
    std::mt19937_64 gen(5150);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t dim = 1 + gen() % 6;
        const std::size_t count = 1 + gen() % 25;
        const double spread = std::pow(10.0, 2.0 * unit(gen) - 1.0);
        const double h = std::pow(10.0, 4.0 * unit(gen) - 2.0);
        oracle::Rows supports(count, std::vector<double>(dim));
        std::vector<Vector> eigen_supports;
        for (auto& row : supports) {
            for (auto& x : row) x = spread * (2.0 * unit(gen) - 1.0);
            eigen_supports.push_back(Eigen::Map<const Vector>(row.data(), static_cast<Eigen::Index>(dim)));
        }
        std::vector<double> q(dim);
        for (auto& x : q) x = spread * (2.0 * unit(gen) - 1.0);
        const Vector query = Eigen::Map<const Vector>(q.data(), static_cast<Eigen::Index>(dim));
        const double expected = oracle::kde(q, supports, h);
        const double got = kde_density(query, eigen_supports, h);
        worst = std::max(worst, std::abs(got - expected));
    }
    return {worst <= 1e-12, "max diff " + fmt(worst) + " over 1000 triples"};
}

Verdict theorem_direction() {
    const auto start = Clock::now();
    const auto out = jobs::compute_harness(jobs::HarnessKind::Theorem1, jobs::json::object());
    const double t = seconds_since(start);
    const auto& rows = out.report.at("rows");
    const bool c_up = out.report.at("event_c_non_decreasing").get<bool>();
    const bool len_up = out.report.at("low_density_length_non_decreasing").get<bool>();
    const double last = rows.back().at("fraction_event_c").get<double>();
    std::string fractions;
    for (const auto& r : rows) fractions += (fractions.empty() ? "" : " ") + fmt(r.at("fraction_event_c").get<double>());
    return {c_up && len_up && last >= 0.95 && t < 60.0,
            "event C [" + fractions + "], length non-decreasing " + (len_up ? "yes" : "no") + ", " + fmt(t) + " s"};
}

Verdict density_ratio_trend() {
    const auto out = jobs::compute_harness(jobs::HarnessKind::DensityRatioSweep, jobs::json::object());
    const auto& rows = out.report.at("rows");
    const double r5 = rows.at(0).at("density_ratio").get<double>();
    const double r100 = rows.at(1).at("density_ratio").get<double>();
    const double rinf = rows.at(2).at("density_ratio").get<double>();
    return {r5 > r100 && r100 > rinf && rinf >= 1.0 && rinf <= 1.001,
            "R(5)=" + fmt(r5) + " R(100)=" + fmt(r100) + " R(1e12)=" + fmt(rinf)};
}

Verdict pseudo_label_quality() {
    const auto start = Clock::now();
    const auto out = jobs::compute_harness(jobs::HarnessKind::CompareModes, jobs::json::object());
    const double t = seconds_since(start);
    const auto& s = out.report.at("summary");
    const double pm = s.at("mean_accuracy_pmlp").get<double>();
    const double lpa = s.at("mean_accuracy_lpa").get<double>();
    const auto wins = s.at("pmlp_correct_high_wins").get<std::size_t>();
    const auto trials = s.at("trials").get<std::size_t>();
    return {trials == 20 && pm >= lpa - 0.01 && wins >= 12 && t < 120.0,
            "mean accuracy " + fmt(pm) + " vs " + fmt(lpa) + ", wins " + std::to_string(wins) + "/" +
                std::to_string(trials) + ", " + fmt(t) + " s"};
}

Verdict threshold_contract() {
    std::mt19937_64 gen(8675309);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::size_t violations = 0;
    std::size_t updates = 0;
    for (int run = 0; run < 200; ++run) {
        const double tau0 = 0.5 + 0.45 * unit(gen);
        const double cap = tau0 + (0.99 - tau0) * unit(gen);
        ThresholdSchedulerState state(tau0, cap);

        // independent model: tau = min(anchor + triggers * 10^-(1+band), cap) per band
        double expected = tau0;
        double anchor = tau0;
        std::size_t band = 0;
        std::size_t band_triggers = 0;
        std::size_t count = 0;
        std::size_t epoch = 0;
        for (int step = 0; step < 150; ++step) {
            epoch += gen() % 12;
            const std::size_t rows = 1 + gen() % 60;
            const std::size_t classes = 2 + gen() % 4;
            Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(classes));
            std::size_t hits = 0;
            for (Eigen::Index i = 0; i < m.rows(); ++i) {
                const double top = unit(gen) < 0.6 ? 0.9 + 0.1 * unit(gen) : unit(gen);
                m.row(i).setConstant((1.0 - top) / static_cast<double>(classes - 1));
                m(i, 0) = top;
                hits += m.row(i).maxCoeff() >= expected ? 1 : 0;
            }
            const std::size_t triggers = (count + hits) / 50 - count / 50;
            count += hits;
            const std::size_t e = std::max<std::size_t>(epoch, 1);
            const std::size_t this_band = (e + 199) / 200;
            if (this_band != band) {
                band = this_band;
                anchor = expected;
                band_triggers = 0;
            }
            if (triggers > 0 && expected < cap) {
                band_triggers += triggers;
                expected = std::min(anchor + static_cast<double>(band_triggers) * std::pow(10.0, -1.0 - double(band)), cap);
            }

            const double before = state.tau();
            state = update_threshold(state, SoftLabelMatrix(m), epoch);
            ++updates;
            if (state.tau() < before || state.tau() > cap || state.tau() != expected) ++violations;
        }
    }
    return {violations == 0, std::to_string(violations) + " violations in " + std::to_string(updates) + " updates"};
}

Verdict determinism(const fs::path& cli) {
    const fs::path work = fs::temp_directory_path() / "pmlp_acceptance_determinism";
    fs::remove_all(work);
    fs::create_directories(work);
    const fs::path data = work / "moons.csv";
    if (shell(quoted(cli) + " generate --kind moons --n 150 --noise 0.1 --labeled-per-class 2 --seed 31 --out " +
              quoted(data)) != 0) {
        return {false, "generate failed"};
    }
    std::vector<std::string> outputs;
    for (const char* run : {"a", "b"}) {
        const fs::path out = work / run;
        if (shell(quoted(cli) + " label --input " + quoted(data) + " --out-dir " + quoted(out) +
                  " --neighbor-count 8 --bandwidth-h 0.05 --seed 4") != 0) {
            return {false, std::string("label run ") + run + " failed"};
        }
        outputs.push_back(io::read_file(out / "labels.csv"));
    }

    // in-process job on the JSONL rendering of another dataset
    const auto blobs = gen_gaussian_blobs({{0, 0}, {4, 0}, {2, 3}}, 0.9, 40, 3, 12);
    io::write_file(work / "blobs.jsonl", jobs::emit_dataset(blobs, io::DataFormat::JSONL));
    std::vector<std::string> inproc;
    for (const char* run : {"c", "d"}) {
        jobs::LabelJobRequest req;
        req.input = work / "blobs.jsonl";
        req.out_dir = work / run;
        req.flag_layer = {{"bandwidth_h", 1.0}};
        if (jobs::run_label_job(req).exit_code != 0) return {false, "in-process label job failed"};
        inproc.push_back(io::read_file(req.out_dir / "labels.csv"));
    }
    fs::remove_all(work);
    const bool same = outputs[0] == outputs[1] && inproc[0] == inproc[1] && !outputs[0].empty();
    return {same, same ? "labels.csv byte-identical across reruns (CLI and in-process)" : "labels.csv differs"};
}

Verdict unit_examples(const std::vector<fs::path>& binaries) {
    if (binaries.empty()) return {false, "no unit test binaries given"};
    std::string failed;
    for (const auto& bin : binaries) {
        if (shell(quoted(bin)) != 0) failed += " " + bin.filename().string();
    }
    return {failed.empty(), failed.empty() ? std::to_string(binaries.size()) + " unit binaries passed"
                                           : "failing:" + failed};
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: pmlp_acceptance <pmlp-cli> [unit-test-binary ...]\n";
        return 1;
    }
    const fs::path cli = argv[1];
    const std::vector<fs::path> unit(argv + 2, argv + argc);

    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"bandwidth degeneration to classical LPA", degeneration},
        {"affinity scale invariance", scale_invariance},
        {"iterative vs closed-form solver", solver_cross_check},
        {"KDE brute-force equivalence", kde_oracle},
        {"separation monotonicity harness", theorem_direction},
        {"density ratio trend", density_ratio_trend},
        {"pseudo-label quality on two moons", pseudo_label_quality},
        {"adaptive threshold contract", threshold_contract},
        {"rerun determinism", [&] { return determinism(cli); }},
        {"unit examples", [&] { return unit_examples(unit); }},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("threw: ") + e.what()};
        }
        failures += v.pass ? 0 : 1;
        std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << ": " << criteria[i].first << " ("
                  << v.detail << ")" << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
