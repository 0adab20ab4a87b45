#pragma once

#include "pmlp/core.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace pmlp::io {

enum class DataFormat { CSV, JSONL };

/// Chooses by extension: .jsonl / .json -> JSONL, anything else -> CSV.
DataFormat format_from_path(const std::filesystem::path& path);

/// Rows carrying a known class that is not used as a label (synthetic
/// evaluation). -1 where unknown.
using TrueClasses = std::vector<long>;

struct IngestedData {
    FeatureMatrix features;
    LabelAssignment labels;
    TrueClasses true_class;

    bool has_truth_for_unlabeled() const;
};

/// Probability rows may deviate from a unit sum by this much; they are
/// rescaled to sum to one on ingestion.
inline constexpr double kProbabilitySumTolerance = 1e-6;

/// CSV: f_0..f_{d-1}, label[, true_label]. A header row is optional; without
/// one the last column is the label. Label cell: integer c >= 0 (ground
/// truth), -1 or empty (unlabeled), or a quoted probability list such as
/// "0.7,0.3" or "[0.7,0.3]".
/// JSONL: {"features":[...], "label": c | null | [...], "true_label": c}.
/// `num_classes` = 0 infers the class count from the data.
IngestedData parse_features(std::string_view text, DataFormat format, std::size_t num_classes = 0);

IngestedData ingest_features(const std::filesystem::path& path, DataFormat format, std::size_t num_classes = 0);

std::string emit_csv(const FeatureMatrix& features, const LabelAssignment& labels, const TrueClasses& truth = {});
std::string emit_jsonl(const FeatureMatrix& features, const LabelAssignment& labels, const TrueClasses& truth = {});

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

/// One RFC 4180 record split into fields.
std::vector<std::string> split_csv_record(std::string_view line);

/// Quotes a field when it contains a comma, quote, or line break.
std::string csv_escape(std::string_view field);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace pmlp::io
