// pmlp: density-aware label propagation from the command line.
//
//   pmlp label --input data.csv --out-dir out/ [--config cfg.json] [--alpha 0.8 ...]
//   pmlp harness theorem1|compare|density-ratio --out-dir out/ [--config h.json]
//   pmlp generate --kind moons --n 200 --noise 0.1 --labeled-per-class 2 --out moons.csv

#include "pmlp/jobs.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

namespace {

using pmlp::jobs::json;

json load_json_file(const std::string& path) {
    if (path.empty()) {
        return json::object();
    }
    try {
        return json::parse(pmlp::io::read_file(path));
    } catch (const json::parse_error& e) {
        throw pmlp::Error(pmlp::ErrorCode::InvalidArgument, "cannot parse config '" + path + "': " + e.what());
    }
}

/// Config-field flags; only the ones given on the command line land in the
/// flag layer.
struct ConfigFlags {
    std::map<std::string, double> reals;
    std::map<std::string, std::size_t> counts;
    std::map<std::string, std::string> texts;
    std::map<std::string, bool> switches;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, CLI::Option*>> options;

    void attach(CLI::App& app) {
        for (const char* name : {"alpha", "eta", "tau", "tau_max", "bandwidth_h", "tol"}) {
            add(app, name, reals[name]);
        }
        for (const char* name : {"path_points_k", "kde_support_n", "neighbor_count", "max_iters"}) {
            add(app, name, counts[name]);
        }
        for (const char* name : {"aggregator", "distance_mode", "solver", "mode", "closed_form_scaling"}) {
            add(app, name, texts[name]);
        }
        for (const char* name : {"clamp_ground_truth", "renormalize"}) {
            add(app, name, switches[name]);
        }
        add(app, "seed", seed);
    }

    template <typename T>
    void add(CLI::App& app, const std::string& name, T& target) {
        std::string flag = "--" + name;
        std::replace(flag.begin(), flag.end(), '_', '-');
        options.emplace_back(name, app.add_option(flag, target, "config field " + name)->group("Configuration"));
    }

    json layer() const {
        json out = json::object();
        for (const auto& [name, opt] : options) {
            if (opt->count() == 0) continue;
            if (reals.count(name)) out[name] = reals.at(name);
            else if (counts.count(name)) out[name] = counts.at(name);
            else if (texts.count(name)) out[name] = texts.at(name);
            else if (switches.count(name)) out[name] = switches.at(name);
            else if (name == "seed") out[name] = seed;
        }
        return out;
    }
};

int report(const pmlp::jobs::JobOutcome& outcome) {
    if (outcome.exit_code == pmlp::jobs::kExitOk) {
        std::cout << outcome.message << '\n';
    } else {
        std::cerr << "error: " << outcome.message << '\n';
    }
    return outcome.exit_code;
}

std::vector<std::vector<double>> parse_means(const std::string& text) {
    // "0,0;6,0"
    std::vector<std::vector<double>> means;
    std::stringstream groups(text);
    std::string group;
    while (std::getline(groups, group, ';')) {
        std::vector<double> mean;
        for (const auto& field : pmlp::io::split_csv_record(group)) {
            try {
                mean.push_back(std::stod(field));
            } catch (const std::exception&) {
                throw pmlp::Error(pmlp::ErrorCode::InvalidArgument, "cannot parse mean component '" + field + "'");
            }
        }
        means.push_back(std::move(mean));
    }
    return means;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Density-aware label propagation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", pmlp::jobs::kToolVersion);

    // label
    auto* label = app.add_subcommand("label", "Propagate labels over a feature file");
    std::string input;
    std::string format;
    std::string out_dir = "pmlp_out";
    std::string config_path;
    std::size_t num_classes = 0;
    label->add_option("--input", input, "CSV or JSONL feature file")->required();
    label->add_option("--format", format, "csv or jsonl (default: by extension)");
    label->add_option("--out-dir", out_dir, "output directory");
    label->add_option("--config", config_path, "JSON config file");
    label->add_option("--num-classes", num_classes, "class count (default: inferred)");
    ConfigFlags flags;
    flags.attach(*label);

    // harness
    auto* harness = app.add_subcommand("harness", "Run a verification harness");
    std::string harness_kind;
    std::string harness_config;
    std::string harness_out = "pmlp_harness";
    harness->add_option("kind", harness_kind, "theorem1 | compare | density-ratio")
        ->required()
        ->check(CLI::IsMember({"theorem1", "compare", "density-ratio"}));
    harness->add_option("--config", harness_config, "JSON overrides for the harness defaults");
    harness->add_option("--out-dir", harness_out, "output directory");
    bool print_defaults = false;
    harness->add_flag("--print-defaults", print_defaults, "print the default harness config and exit");

    // generate
    auto* generate = app.add_subcommand("generate", "Write a synthetic dataset");
    std::string gen_kind = "moons";
    std::size_t gen_n = 200;
    double gen_noise = 0.1;
    std::string gen_means = "0,0;6,0";
    double gen_sigma = 1.0;
    std::size_t gen_per_class = 100;
    std::size_t gen_labeled = 2;
    std::uint64_t gen_seed = 0;
    std::string gen_out;
    generate->add_option("--kind", gen_kind, "moons | blobs")->check(CLI::IsMember({"moons", "blobs"}));
    generate->add_option("--n", gen_n, "rows (moons)");
    generate->add_option("--noise", gen_noise, "noise (moons)");
    generate->add_option("--means", gen_means, "means as 'x,y;x,y' (blobs)");
    generate->add_option("--sigma", gen_sigma, "standard deviation (blobs)");
    generate->add_option("--per-class", gen_per_class, "rows per class (blobs)");
    generate->add_option("--labeled-per-class", gen_labeled, "labeled rows per class");
    auto* seed_opt = generate->add_option("--seed", gen_seed, "generator seed");
    generate->add_option("--out", gen_out, "output file (.csv or .jsonl)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : pmlp::jobs::kExitUsage;
    }

    try {
        const auto env_seed = pmlp::jobs::seed_from_env();

        if (label->parsed()) {
            pmlp::jobs::LabelJobRequest request;
            request.input = input;
            if (!format.empty()) {
                if (format == "csv") request.format = pmlp::io::DataFormat::CSV;
                else if (format == "jsonl") request.format = pmlp::io::DataFormat::JSONL;
                else throw pmlp::Error(pmlp::ErrorCode::InvalidArgument, "format must be csv or jsonl");
            }
            request.out_dir = out_dir;
            request.file_layer = load_json_file(config_path);
            request.flag_layer = flags.layer();
            request.env_seed = env_seed;
            request.num_classes = num_classes;
            return report(pmlp::jobs::run_label_job(request));
        }

        if (harness->parsed()) {
            const auto kind = pmlp::jobs::parse_harness_kind(harness_kind);
            if (print_defaults) {
                std::cout << pmlp::jobs::default_harness_config(kind).dump(2) << '\n';
                return 0;
            }
            std::vector<std::filesystem::path> files;
            if (!harness_config.empty()) files.emplace_back(harness_config);
            return report(pmlp::jobs::run_harness_job(kind, load_json_file(harness_config), env_seed, harness_out,
                                                      files));
        }

        if (generate->parsed()) {
            std::uint64_t seed = gen_seed;
            if (seed_opt->count() == 0 && env_seed) seed = *env_seed;
            const pmlp::SyntheticDataset ds =
                gen_kind == "moons"
                    ? pmlp::gen_two_moons(gen_n, gen_noise, gen_labeled, seed)
                    : pmlp::gen_gaussian_blobs(parse_means(gen_means), gen_sigma, gen_per_class, gen_labeled, seed);
            const auto fmt = pmlp::io::format_from_path(gen_out);
            pmlp::io::write_file(gen_out, pmlp::jobs::emit_dataset(ds, fmt));
            std::cout << "wrote " << gen_out << " (" << ds.features.rows() << " rows)\n";
            return 0;
        }
    } catch (const pmlp::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return pmlp::jobs::exit_code_for(e.code());
    }
    return pmlp::jobs::kExitUsage;
}
