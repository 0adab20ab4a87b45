#pragma once

#include "pmlp/core.hpp"
#include "pmlp/io.hpp"
#include "pmlp/propagate.hpp"
#include "pmlp/synthlab.hpp"

#include "json.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace pmlp::jobs {

using nlohmann::json;

inline constexpr const char* kToolVersion = "1.0.0";

/// Process exit codes.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitNumerical = 3 };

int exit_code_for(ErrorCode code);

// ---------------------------------------------------------------------------
// Configuration as JSON
// ---------------------------------------------------------------------------

/// Snapshot of every PmlpConfig field under its snake_case name.
json config_to_json(const PmlpConfig& cfg);

/// Overlays the recognised keys of `overrides` onto `base`; unknown keys are
/// a usage error. The result is validated.
PmlpConfig apply_config_json(PmlpConfig base, const json& overrides);

/// Defaults for `num_classes` (neighbor_count = ceil(1.5 C)), then the
/// layers in order: config file values, PMLP_SEED, command-line flags.
PmlpConfig resolve_config(std::size_t num_classes,
                          const json& file_layer,
                          std::optional<std::uint64_t> env_seed,
                          const json& flag_layer);

/// Reads PMLP_SEED; malformed values are a usage error.
std::optional<std::uint64_t> seed_from_env();

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

std::string sha256_hex(std::string_view content);

struct InputDigest {
    std::string path;
    std::string sha256;
};

struct RunManifest {
    std::string command;
    json config;
    std::vector<InputDigest> inputs;
    std::string tool_version = kToolVersion;
    std::uint64_t seed = 0;
    std::string timestamp;

    json to_json() const;
};

std::string utc_timestamp();

// ---------------------------------------------------------------------------
// Jobs
// ---------------------------------------------------------------------------

struct JobOutcome {
    int exit_code = kExitOk;
    std::string message;
};

struct LabelJobRequest {
    std::filesystem::path input;
    std::optional<io::DataFormat> format;
    std::filesystem::path out_dir;
    json file_layer = json::object();
    json flag_layer = json::object();
    std::optional<std::uint64_t> env_seed;
    std::size_t num_classes = 0;  // 0 infers from the data
};

/// Pseudo-label table: row_index, argmax_class, score_0.., high_confidence.
/// Scores are the final mixed labels; high_confidence marks rows whose
/// row-normalized maximum reaches tau. argmax_class is -1 for zero rows.
std::string labels_csv(const PropagationResult& result, double tau);

json label_metrics(const io::IngestedData& data, const PropagationResult& result, double tau);

/// Writes labels.csv, metrics.json and manifest.json into out_dir. On failure
/// metrics.json carries {"error": {code, category, message}}.
JobOutcome run_label_job(const LabelJobRequest& request);

enum class HarnessKind { Theorem1, CompareModes, DensityRatioSweep };

HarnessKind parse_harness_kind(std::string_view text);
std::string_view to_string(HarnessKind kind);

/// Committed default configuration for each harness (fixed seeds).
json default_harness_config(HarnessKind kind);

struct HarnessOutput {
    json report;
    std::string plot_csv;
};

/// Pure computation behind run_harness_job; `config` overlays the defaults.
HarnessOutput compute_harness(HarnessKind kind, const json& config);

/// Writes report.json, plot.csv and manifest.json into out_dir.
JobOutcome run_harness_job(HarnessKind kind,
                           const json& config,
                           std::optional<std::uint64_t> env_seed,
                           const std::filesystem::path& out_dir,
                           const std::vector<std::filesystem::path>& config_files = {});

/// Parses a generator description: {"kind": "gaussian_blobs"|"two_moons", ...}.
GeneratorSpec generator_spec_from_json(const json& j);
json generator_spec_to_json(const GeneratorSpec& spec);

/// Synthetic dataset as CSV or JSONL text including the true_label column.
std::string emit_dataset(const SyntheticDataset& ds, io::DataFormat format);

/// Separation-harness parameters from JSON (keys mirror TheoremOneParams;
/// "separations_sigma" are multiples of sigma).
TheoremOneParams theorem1_params_from_json(const json& j);

}  // namespace pmlp::jobs
