#include "pmlp/jobs.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <iomanip>
#include <set>
#include <sstream>

namespace pmlp::jobs {

int exit_code_for(ErrorCode code) {
    switch (error_category(code)) {
        case ErrorCategory::Usage: return kExitUsage;
        case ErrorCategory::Data: return kExitData;
        case ErrorCategory::Numerical: return kExitNumerical;
    }
    return kExitData;
}

// ---------------------------------------------------------------------------

json config_to_json(const PmlpConfig& cfg) {
    json j;
    j["alpha"] = cfg.alpha;
    j["eta"] = cfg.eta;
    j["tau"] = cfg.tau;
    j["tau_max"] = cfg.tau_max;
    j["bandwidth_h"] = cfg.bandwidth_h;
    j["path_points_k"] = cfg.path_points_k;
    j["kde_support_n"] = cfg.kde_support_n;
    j["neighbor_count"] = cfg.neighbor_count;
    j["aggregator"] = to_string(cfg.aggregator);
    j["distance_mode"] = std::string(to_string(cfg.distance_mode));
    j["solver"] = cfg.solver.kind == Solver::Kind::Iterative ? "iterative" : "closed-form";
    j["max_iters"] = cfg.solver.max_iters;
    j["tol"] = cfg.solver.tol;
    j["mode"] = std::string(to_string(cfg.mode));
    j["closed_form_scaling"] = std::string(to_string(cfg.closed_form_scaling));
    j["clamp_ground_truth"] = cfg.clamp_ground_truth;
    j["renormalize"] = cfg.renormalize;
    j["seed"] = cfg.seed;
    return j;
}

namespace {

template <typename T>
T get_as(const json& value, const std::string& key) {
    try {
        return value.get<T>();
    } catch (const json::exception&) {
        throw Error(ErrorCode::InvalidArgument, "config key '" + key + "' has the wrong type");
    }
}

std::size_t get_count(const json& value, const std::string& key) {
    if (!value.is_number_integer() || value.get<long long>() < 0) {
        throw Error(ErrorCode::InvalidArgument, "config key '" + key + "' must be a nonnegative integer");
    }
    return value.get<std::size_t>();
}

}  // namespace

PmlpConfig apply_config_json(PmlpConfig cfg, const json& overrides) {
    if (overrides.is_null()) {
        return validate_config(cfg);
    }
    if (!overrides.is_object()) {
        throw Error(ErrorCode::InvalidArgument, "config must be a JSON object");
    }
    for (const auto& [key, value] : overrides.items()) {
        if (key == "alpha") cfg.alpha = get_as<double>(value, key);
        else if (key == "eta") cfg.eta = get_as<double>(value, key);
        else if (key == "tau") cfg.tau = get_as<double>(value, key);
        else if (key == "tau_max") cfg.tau_max = get_as<double>(value, key);
        else if (key == "bandwidth_h") cfg.bandwidth_h = get_as<double>(value, key);
        else if (key == "path_points_k") cfg.path_points_k = get_count(value, key);
        else if (key == "kde_support_n") cfg.kde_support_n = get_count(value, key);
        else if (key == "neighbor_count") cfg.neighbor_count = get_count(value, key);
        else if (key == "aggregator") cfg.aggregator = parse_aggregator(get_as<std::string>(value, key));
        else if (key == "distance_mode") cfg.distance_mode = parse_distance_mode(get_as<std::string>(value, key));
        else if (key == "solver") {
            const auto s = get_as<std::string>(value, key);
            if (s == "iterative") cfg.solver.kind = Solver::Kind::Iterative;
            else if (s == "closed-form") cfg.solver.kind = Solver::Kind::ClosedForm;
            else throw Error(ErrorCode::InvalidSolver, "unknown solver '" + s + "'");
        }
        else if (key == "max_iters") cfg.solver.max_iters = get_count(value, key);
        else if (key == "tol") cfg.solver.tol = get_as<double>(value, key);
        else if (key == "mode") cfg.mode = parse_mode(get_as<std::string>(value, key));
        else if (key == "closed_form_scaling") {
            cfg.closed_form_scaling = parse_closed_form_scaling(get_as<std::string>(value, key));
        }
        else if (key == "clamp_ground_truth") cfg.clamp_ground_truth = get_as<bool>(value, key);
        else if (key == "renormalize") cfg.renormalize = get_as<bool>(value, key);
        else if (key == "seed") cfg.seed = get_as<std::uint64_t>(value, key);
        else throw Error(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
    }
    return validate_config(cfg);
}

PmlpConfig resolve_config(std::size_t num_classes,
                          const json& file_layer,
                          std::optional<std::uint64_t> env_seed,
                          const json& flag_layer) {
    json merged = json::object();
    if (file_layer.is_object()) merged.update(file_layer);
    if (env_seed) merged["seed"] = *env_seed;
    if (flag_layer.is_object()) merged.update(flag_layer);
    return apply_config_json(PmlpConfig::defaults_for(num_classes), merged);
}

std::optional<std::uint64_t> seed_from_env() {
    const char* raw = std::getenv("PMLP_SEED");
    if (raw == nullptr || *raw == '\0') {
        return std::nullopt;
    }
    const std::string_view text(raw);
    std::uint64_t value = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw Error(ErrorCode::InvalidArgument, "PMLP_SEED must be an unsigned integer");
    }
    return value;
}

// ---------------------------------------------------------------------------

std::string sha256_hex(std::string_view content) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(content.data(), content.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
        throw Error(ErrorCode::InvalidArgument, "sha256 digest failed");
    }
    std::ostringstream out;
    for (unsigned int i = 0; i < length; ++i) {
        out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    }
    return out.str();
}

json RunManifest::to_json() const {
    json j;
    j["command"] = command;
    j["tool_version"] = tool_version;
    j["seed"] = seed;
    j["config"] = config;
    json inputs_json = json::array();
    for (const auto& in : inputs) {
        inputs_json.push_back({{"path", in.path}, {"sha256", in.sha256}});
    }
    j["inputs"] = std::move(inputs_json);
    j["timestamp"] = timestamp;
    return j;
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

// ---------------------------------------------------------------------------

std::string labels_csv(const PropagationResult& result, double tau) {
    const SoftLabelMatrix& y = result.final_labels;
    const SoftLabelMatrix normalized = y.row_normalized();
    std::ostringstream out;
    out << "row_index,argmax_class";
    for (std::size_t c = 0; c < y.classes(); ++c) {
        out << ",score_" << c;
    }
    out << ",high_confidence\r\n";
    for (std::size_t r = 0; r < y.rows(); ++r) {
        out << r << ',' << y.argmax(r);
        for (std::size_t c = 0; c < y.classes(); ++c) {
            out << ',' << io::format_double(y(r, c));
        }
        out << ',' << (normalized.row_max(r) >= tau ? 1 : 0) << "\r\n";
    }
    return out.str();
}

json label_metrics(const io::IngestedData& data, const PropagationResult& result, double tau) {
    json m;
    m["n_rows"] = data.features.rows();
    m["n_labeled"] = data.labels.ground_truth_count();
    m["n_classes"] = data.labels.num_classes();
    m["high_conf_ratio"] = high_confidence_ratio(result.final_labels.row_normalized(), tau);
    if (data.has_truth_for_unlabeled()) {
        std::size_t total = 0;
        std::size_t correct = 0;
        for (std::size_t r = 0; r < data.true_class.size(); ++r) {
            if (data.true_class[r] < 0 || data.labels.is_ground_truth(r)) continue;
            ++total;
            correct += result.final_labels.argmax(r) == data.true_class[r] ? 1 : 0;
        }
        m["accuracy"] = static_cast<double>(correct) / static_cast<double>(total);
    }
    m["solver_iterations"] = result.iterations_used;
    m["residual"] = result.residual;
    return m;
}

namespace {

json error_json(const Error& e) {
    const char* category = "data";
    switch (error_category(e.code())) {
        case ErrorCategory::Usage: category = "usage"; break;
        case ErrorCategory::Data: category = "data"; break;
        case ErrorCategory::Numerical: category = "numerical"; break;
    }
    return {{"error", {{"code", std::string(error_code_name(e.code()))}, {"category", category}, {"message", e.what()}}}};
}

void write_json(const std::filesystem::path& path, const json& j) {
    io::write_file(path, j.dump(2) + "\n");
}

// Writes the error record where possible; the exit code is what matters.
JobOutcome fail(const std::filesystem::path& out_dir, const Error& e) {
    try {
        write_json(out_dir / "metrics.json", error_json(e));
    } catch (const std::exception&) {
    }
    return {exit_code_for(e.code()), e.what()};
}

}  // namespace

JobOutcome run_label_job(const LabelJobRequest& request) {
    try {
        const io::DataFormat format = request.format.value_or(io::format_from_path(request.input));
        const std::string content = io::read_file(request.input);
        const io::IngestedData data = io::parse_features(content, format, request.num_classes);
        const PmlpConfig cfg =
            resolve_config(data.labels.num_classes(), request.file_layer, request.env_seed, request.flag_layer);

        const PropagationResult result = run_pmlp(data.features, data.labels, cfg);

        io::write_file(request.out_dir / "labels.csv", labels_csv(result, cfg.tau));
        write_json(request.out_dir / "metrics.json", label_metrics(data, result, cfg.tau));

        RunManifest manifest;
        manifest.command = "label";
        manifest.config = config_to_json(cfg);
        manifest.inputs.push_back({request.input.filename().string(), sha256_hex(content)});
        manifest.seed = cfg.seed;
        manifest.timestamp = utc_timestamp();
        write_json(request.out_dir / "manifest.json", manifest.to_json());
        return {kExitOk, "wrote " + (request.out_dir / "labels.csv").string()};
    } catch (const Error& e) {
        return fail(request.out_dir, e);
    }
}

// ---------------------------------------------------------------------------

HarnessKind parse_harness_kind(std::string_view text) {
    if (text == "theorem1") return HarnessKind::Theorem1;
    if (text == "compare") return HarnessKind::CompareModes;
    if (text == "density-ratio") return HarnessKind::DensityRatioSweep;
    throw Error(ErrorCode::InvalidArgument, "unknown harness '" + std::string(text) + "'");
}

std::string_view to_string(HarnessKind kind) {
    switch (kind) {
        case HarnessKind::Theorem1: return "theorem1";
        case HarnessKind::CompareModes: return "compare";
        case HarnessKind::DensityRatioSweep: return "density-ratio";
    }
    return "?";
}

json default_harness_config(HarnessKind kind) {
    switch (kind) {
        case HarnessKind::Theorem1:
            return {{"separations_sigma", {2.0, 4.0, 8.0, 16.0}},
                    {"sigma", 1.0},
                    {"dim", 2},
                    {"samples_per_cluster", 200},
                    {"pairs", 200},
                    {"tau_quantile", 0.1},
                    {"line_points", 50},
                    {"bandwidth_h", 2.0},
                    {"tau_calibration", "shared"},
                    {"seed", 20240917}};
        case HarnessKind::CompareModes:
            return {{"dataset", {{"kind", "two_moons"}, {"n", 200}, {"noise", 0.1}, {"labeled_per_class", 2},
                                 {"seed", 1000}}},
                    {"trials", 20},
                    {"config", {{"neighbor_count", 10}, {"bandwidth_h", 0.05}, {"kde_support_n", 10}}}};
        case HarnessKind::DensityRatioSweep:
            return {{"dataset", {{"kind", "gaussian_blobs"},
                                 {"means", {{0.0, 0.0}, {6.0, 0.0}}},
                                 {"sigma", 1.0},
                                 {"per_class", 200},
                                 {"labeled_per_class", 0},
                                 {"seed", 77}}},
                    {"bandwidths", {5.0, 100.0, 1e12}},
                    {"pairs", 1000},
                    {"pair_seed", 78},
                    {"config", {{"path_points_k", 1}, {"kde_support_n", 10}}}};
    }
    return json::object();
}

GeneratorSpec generator_spec_from_json(const json& j) {
    if (!j.is_object() || !j.contains("kind")) {
        throw Error(ErrorCode::InvalidArgument, "dataset description needs a 'kind'");
    }
    GeneratorSpec spec;
    const auto kind = get_as<std::string>(j.at("kind"), "kind");
    if (kind == "gaussian_blobs" || kind == "blobs") {
        spec.kind = GeneratorKind::GaussianBlobs;
        spec.means = get_as<std::vector<std::vector<double>>>(j.at("means"), "means");
        spec.sigma = get_as<double>(j.value("sigma", json(1.0)), "sigma");
        spec.per_class = get_count(j.at("per_class"), "per_class");
    } else if (kind == "two_moons" || kind == "moons") {
        spec.kind = GeneratorKind::TwoMoons;
        spec.n = get_count(j.at("n"), "n");
        spec.noise = get_as<double>(j.value("noise", json(0.1)), "noise");
    } else {
        throw Error(ErrorCode::InvalidArgument, "unknown dataset kind '" + kind + "'");
    }
    spec.labeled_per_class = get_count(j.value("labeled_per_class", json(0)), "labeled_per_class");
    spec.seed = get_as<std::uint64_t>(j.value("seed", json(0)), "seed");
    return spec;
}

json generator_spec_to_json(const GeneratorSpec& spec) {
    json j;
    j["kind"] = std::string(to_string(spec.kind));
    if (spec.kind == GeneratorKind::GaussianBlobs) {
        j["means"] = spec.means;
        j["sigma"] = spec.sigma;
        j["per_class"] = spec.per_class;
    } else {
        j["n"] = spec.n;
        j["noise"] = spec.noise;
    }
    j["labeled_per_class"] = spec.labeled_per_class;
    j["seed"] = spec.seed;
    return j;
}

std::string emit_dataset(const SyntheticDataset& ds, io::DataFormat format) {
    io::TrueClasses truth(ds.true_class.begin(), ds.true_class.end());
    const LabelAssignment labels = ds.assignments();
    return format == io::DataFormat::CSV ? io::emit_csv(ds.features, labels, truth)
                                         : io::emit_jsonl(ds.features, labels, truth);
}

TheoremOneParams theorem1_params_from_json(const json& j) {
    TheoremOneParams p;
    p.sigma = get_as<double>(j.at("sigma"), "sigma");
    for (double m : get_as<std::vector<double>>(j.at("separations_sigma"), "separations_sigma")) {
        p.separations.push_back(m * p.sigma);
    }
    p.dim = get_count(j.at("dim"), "dim");
    p.samples_per_cluster = get_count(j.at("samples_per_cluster"), "samples_per_cluster");
    p.pairs = get_count(j.at("pairs"), "pairs");
    p.tau_quantile = get_as<double>(j.at("tau_quantile"), "tau_quantile");
    p.line_points = get_count(j.at("line_points"), "line_points");
    p.bandwidth_h = get_as<double>(j.at("bandwidth_h"), "bandwidth_h");
    const auto calibration = get_as<std::string>(j.at("tau_calibration"), "tau_calibration");
    if (calibration == "shared") {
        p.tau_calibration = TauCalibration::Shared;
    } else if (calibration == "per_separation") {
        p.tau_calibration = TauCalibration::PerSeparation;
    } else {
        throw Error(ErrorCode::InvalidArgument, "tau_calibration must be shared or per_separation");
    }
    p.seed = get_as<std::uint64_t>(j.at("seed"), "seed");
    return p;
}

namespace {

json merged_harness_config(HarnessKind kind, const json& overrides) {
    json cfg = default_harness_config(kind);
    if (overrides.is_null()) {
        return cfg;
    }
    if (!overrides.is_object()) {
        throw Error(ErrorCode::InvalidArgument, "harness config must be a JSON object");
    }
    for (const auto& [key, value] : overrides.items()) {
        if (!cfg.contains(key)) {
            throw Error(ErrorCode::InvalidArgument, "unknown harness key '" + key + "'");
        }
        if (key == "dataset" && value.is_object() && value.value("kind", cfg[key].value("kind", "")) !=
                                                           cfg[key].value("kind", "")) {
            cfg[key] = value;  // different generator: replace rather than merge
        } else if (cfg[key].is_object() && value.is_object()) {
            cfg[key].update(value);
        } else {
            cfg[key] = value;
        }
    }
    return cfg;
}

std::string metrics_row(const TrialMetrics& m) {
    std::ostringstream out;
    out << m.trial << ',' << m.seed << ',' << to_string(m.mode) << ',' << io::format_double(m.accuracy) << ','
        << io::format_double(m.high_ratio) << ',' << io::format_double(m.correct_high_ratio) << "\r\n";
    return out.str();
}

json metrics_json(const TrialMetrics& m) {
    return {{"trial", m.trial},
            {"seed", m.seed},
            {"mode", std::string(to_string(m.mode))},
            {"accuracy", m.accuracy},
            {"high_ratio", m.high_ratio},
            {"correct_high_ratio", m.correct_high_ratio}};
}

template <typename Seq, typename Key>
bool non_decreasing(const Seq& seq, Key key) {
    for (std::size_t i = 1; i < seq.size(); ++i) {
        if (key(seq[i]) < key(seq[i - 1])) return false;
    }
    return true;
}

}  // namespace

HarnessOutput compute_harness(HarnessKind kind, const json& overrides) {
    const json cfg = merged_harness_config(kind, overrides);
    HarnessOutput out;
    out.report["kind"] = std::string(to_string(kind));
    out.report["config"] = cfg;

    switch (kind) {
        case HarnessKind::Theorem1: {
            const TheoremOneParams params = theorem1_params_from_json(cfg);
            const auto reports = verify_theorem1(params);
            std::ostringstream csv;
            csv << "separation,fraction_event_c,fraction_low_density_length\r\n";
            json rows = json::array();
            for (const auto& r : reports) {
                rows.push_back({{"separation", r.separation},
                                {"tau_density", r.tau_density},
                                {"fraction_event_c", r.fraction_event_c},
                                {"fraction_low_density_length", r.fraction_low_density_length}});
                csv << io::format_double(r.separation) << ',' << io::format_double(r.fraction_event_c) << ','
                    << io::format_double(r.fraction_low_density_length) << "\r\n";
            }
            out.report["rows"] = std::move(rows);
            out.report["event_c_non_decreasing"] =
                non_decreasing(reports, [](const TheoremOneReport& r) { return r.fraction_event_c; });
            out.report["low_density_length_non_decreasing"] =
                non_decreasing(reports, [](const TheoremOneReport& r) { return r.fraction_low_density_length; });
            out.plot_csv = csv.str();
            break;
        }
        case HarnessKind::CompareModes: {
            const GeneratorSpec spec = generator_spec_from_json(cfg.at("dataset"));
            const std::size_t trials = get_count(cfg.at("trials"), "trials");
            const PmlpConfig pcfg = apply_config_json(PmlpConfig::defaults_for(regenerate(spec).num_classes),
                                                      cfg.at("config"));
            const ComparisonReport report = compare_pmlp_vs_lpa(regenerate(spec), pcfg, trials);
            std::ostringstream csv;
            csv << "trial,seed,mode,accuracy,high_ratio,correct_high_ratio\r\n";
            json rows = json::array();
            for (std::size_t t = 0; t < report.pmlp.size(); ++t) {
                for (const TrialMetrics* m : {&report.pmlp[t], &report.lpa[t]}) {
                    rows.push_back(metrics_json(*m));
                    csv << metrics_row(*m);
                }
            }
            out.report["pmlp_config"] = config_to_json(pcfg);
            out.report["trials"] = std::move(rows);
            out.report["summary"] = {{"mean_accuracy_pmlp", report.mean_accuracy(Mode::PMLP)},
                                     {"mean_accuracy_lpa", report.mean_accuracy(Mode::ClassicalLPA)},
                                     {"median_accuracy_pmlp", report.median_accuracy(Mode::PMLP)},
                                     {"median_accuracy_lpa", report.median_accuracy(Mode::ClassicalLPA)},
                                     {"pmlp_correct_high_wins", report.pmlp_correct_high_wins()},
                                     {"trials", trials}};
            out.plot_csv = csv.str();
            break;
        }
        case HarnessKind::DensityRatioSweep: {
            const GeneratorSpec spec = generator_spec_from_json(cfg.at("dataset"));
            const SyntheticDataset ds = regenerate(spec);
            const auto bandwidths = get_as<std::vector<double>>(cfg.at("bandwidths"), "bandwidths");
            const auto pairs = random_pairs(ds.features.rows(), get_count(cfg.at("pairs"), "pairs"),
                                            get_as<std::uint64_t>(cfg.at("pair_seed"), "pair_seed"));
            const PmlpConfig pcfg = apply_config_json(PmlpConfig::defaults_for(ds.num_classes), cfg.at("config"));
            const auto sweep = density_ratio_sweep(ds.features, bandwidths, pairs, pcfg);
            std::ostringstream csv;
            csv << "bandwidth_h,density_ratio\r\n";
            json rows = json::array();
            for (const auto& p : sweep) {
                rows.push_back({{"bandwidth_h", p.bandwidth_h}, {"density_ratio", p.ratio}});
                csv << io::format_double(p.bandwidth_h) << ',' << io::format_double(p.ratio) << "\r\n";
            }
            out.report["rows"] = std::move(rows);
            out.plot_csv = csv.str();
            break;
        }
    }
    return out;
}

JobOutcome run_harness_job(HarnessKind kind,
                           const json& config,
                           std::optional<std::uint64_t> env_seed,
                           const std::filesystem::path& out_dir,
                           const std::vector<std::filesystem::path>& config_files) {
    try {
        json effective = config.is_null() ? json::object() : config;
        if (env_seed) {
            if (kind == HarnessKind::Theorem1) {
                effective["seed"] = *env_seed;
            } else {
                json dataset = effective.value("dataset", json::object());
                dataset["seed"] = *env_seed;
                effective["dataset"] = dataset;
            }
        }
        HarnessOutput output = compute_harness(kind, effective);
        write_json(out_dir / "report.json", output.report);
        io::write_file(out_dir / "plot.csv", output.plot_csv);

        RunManifest manifest;
        manifest.command = "harness " + std::string(to_string(kind));
        manifest.config = output.report["config"];
        for (const auto& path : config_files) {
            manifest.inputs.push_back({path.filename().string(), sha256_hex(io::read_file(path))});
        }
        const json& used = output.report["config"];
        manifest.seed = kind == HarnessKind::Theorem1 ? used.at("seed").get<std::uint64_t>()
                                                      : used.at("dataset").value("seed", std::uint64_t{0});
        manifest.timestamp = utc_timestamp();
        write_json(out_dir / "manifest.json", manifest.to_json());
        return {kExitOk, "wrote " + (out_dir / "report.json").string()};
    } catch (const Error& e) {
        return fail(out_dir, e);
    } catch (const json::exception& e) {
        return fail(out_dir, Error(ErrorCode::InvalidArgument, e.what()));
    }
}

}  // namespace pmlp::jobs
