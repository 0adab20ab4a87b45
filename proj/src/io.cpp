#include "pmlp/io.hpp"

#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

namespace pmlp::io {

using nlohmann::json;

namespace {

[[noreturn]] void parse_fail(std::size_t line, const std::string& message) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + message);
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::optional<double> parse_number(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double value = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
    if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        return std::nullopt;
    }
    return value;
}

std::optional<long> parse_integer(std::string_view s) {
    s = trim(s);
    long value = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
    if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        return std::nullopt;
    }
    return value;
}

// Record-level label before the class count is known.
struct RawLabel {
    enum class Kind { Class, Unlabeled, Probabilities } kind = Kind::Unlabeled;
    long cls = -1;
    std::vector<double> probs;
};

std::vector<double> normalize_probs(std::vector<double> probs, std::size_t line) {
    if (probs.empty()) {
        parse_fail(line, "empty probability list");
    }
    double sum = 0.0;
    for (double p : probs) {
        if (!std::isfinite(p) || p < 0.0) {
            parse_fail(line, "probabilities must be finite and nonnegative");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > kProbabilitySumTolerance) {
        throw Error(ErrorCode::InvalidLabel,
                    "line " + std::to_string(line) + ": probabilities sum to " + format_double(sum));
    }
    // Rows already within the type's own tolerance are kept bit-exact.
    if (std::abs(sum - 1.0) > 1e-9) {
        for (double& p : probs) {
            p /= sum;
        }
    }
    return probs;
}

RawLabel parse_csv_label(std::string_view cell, std::size_t line) {
    cell = trim(cell);
    RawLabel out;
    if (cell.empty()) {
        return out;
    }
    if (auto v = parse_integer(cell)) {
        if (*v == -1) return out;
        if (*v < 0) parse_fail(line, "label must be >= 0 or -1");
        out.kind = RawLabel::Kind::Class;
        out.cls = *v;
        return out;
    }
    std::string_view body = cell;
    if (body.front() == '[' && body.back() == ']') {
        body = body.substr(1, body.size() - 2);
    }
    std::vector<double> probs;
    while (true) {
        const auto comma = body.find_first_of(",;");
        const auto piece = body.substr(0, comma);
        const auto value = parse_number(piece);
        if (!value) {
            parse_fail(line, "cannot parse label '" + std::string(cell) + "'");
        }
        probs.push_back(*value);
        if (comma == std::string_view::npos) break;
        body.remove_prefix(comma + 1);
    }
    out.kind = RawLabel::Kind::Probabilities;
    out.probs = normalize_probs(std::move(probs), line);
    return out;
}

struct RawRow {
    std::vector<double> features;
    RawLabel label;
    long truth = -1;
    std::size_t line = 0;
};

IngestedData assemble(std::vector<RawRow> rows, std::size_t num_classes) {
    if (rows.empty()) {
        throw Error(ErrorCode::EmptyInput, "no data rows");
    }
    if (rows.size() > kMaxRows) {
        throw Error(ErrorCode::TooManyRows, std::to_string(rows.size()) + " rows exceeds the limit of " +
                                                std::to_string(kMaxRows));
    }
    const std::size_t dim = rows.front().features.size();
    std::size_t inferred = 0;
    for (const RawRow& r : rows) {
        if (r.features.size() != dim) {
            throw Error(ErrorCode::DimensionMismatch, "line " + std::to_string(r.line) + ": expected " +
                                                          std::to_string(dim) + " features, found " +
                                                          std::to_string(r.features.size()));
        }
        if (r.label.kind == RawLabel::Kind::Class) {
            inferred = std::max(inferred, static_cast<std::size_t>(r.label.cls) + 1);
        } else if (r.label.kind == RawLabel::Kind::Probabilities) {
            inferred = std::max(inferred, r.label.probs.size());
        }
        if (r.truth >= 0) {
            inferred = std::max(inferred, static_cast<std::size_t>(r.truth) + 1);
        }
    }
    const std::size_t classes = num_classes > 0 ? num_classes : std::max<std::size_t>(inferred, 1);

    std::vector<double> buffer;
    buffer.reserve(rows.size() * dim);
    std::vector<LabelState> states;
    TrueClasses truth;
    for (const RawRow& r : rows) {
        buffer.insert(buffer.end(), r.features.begin(), r.features.end());
        switch (r.label.kind) {
            case RawLabel::Kind::Class:
                states.emplace_back(GroundTruth{static_cast<std::size_t>(r.label.cls)});
                break;
            case RawLabel::Kind::Unlabeled:
                states.emplace_back(Unlabeled{});
                break;
            case RawLabel::Kind::Probabilities:
                if (r.label.probs.size() != classes) {
                    throw Error(ErrorCode::InvalidLabel, "line " + std::to_string(r.line) + ": expected " +
                                                             std::to_string(classes) + " probabilities");
                }
                states.emplace_back(Prediction{r.label.probs});
                break;
        }
        truth.push_back(r.truth);
    }
    return IngestedData{FeatureMatrix(rows.size(), dim, std::move(buffer)), LabelAssignment(std::move(states), classes),
                        std::move(truth)};
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        lines.push_back(text.substr(0, nl));
        if (nl == std::string_view::npos) break;
        text.remove_prefix(nl + 1);
    }
    return lines;
}

IngestedData parse_csv(std::string_view text, std::size_t num_classes) {
    // Quoted fields never span lines in this format, so records are lines.
    const auto lines = split_lines(text);
    std::vector<RawRow> rows;
    std::optional<std::size_t> label_col;
    std::optional<std::size_t> truth_col;
    std::vector<std::size_t> feature_cols;
    bool header_checked = false;

    for (std::size_t n = 0; n < lines.size(); ++n) {
        const std::size_t line_no = n + 1;
        if (trim(lines[n]).empty()) continue;
        const auto fields = split_csv_record(lines[n]);

        if (!header_checked) {
            header_checked = true;
            if (!parse_number(fields.front())) {
                for (std::size_t c = 0; c < fields.size(); ++c) {
                    const auto name = trim(fields[c]);
                    if (name == "label") label_col = c;
                    else if (name == "true_label") truth_col = c;
                    else feature_cols.push_back(c);
                }
                if (!label_col) parse_fail(line_no, "header has no 'label' column");
                if (feature_cols.empty()) parse_fail(line_no, "header has no feature columns");
                continue;
            }
        }

        RawRow row;
        row.line = line_no;
        if (label_col) {
            const std::size_t expected = feature_cols.size() + 1 + (truth_col ? 1 : 0);
            if (fields.size() != expected) {
                throw Error(ErrorCode::DimensionMismatch, "line " + std::to_string(line_no) + ": expected " +
                                                              std::to_string(expected) + " fields, found " +
                                                              std::to_string(fields.size()));
            }
            for (std::size_t c : feature_cols) {
                const auto v = parse_number(fields[c]);
                if (!v) parse_fail(line_no, "cannot parse feature '" + fields[c] + "'");
                row.features.push_back(*v);
            }
            row.label = parse_csv_label(fields[*label_col], line_no);
            if (truth_col) {
                const auto cell = trim(fields[*truth_col]);
                if (!cell.empty()) {
                    const auto t = parse_integer(cell);
                    if (!t || *t < -1) parse_fail(line_no, "true_label must be an integer >= -1");
                    row.truth = *t;
                }
            }
        } else {
            if (fields.size() < 2) parse_fail(line_no, "need at least one feature and a label");
            for (std::size_t c = 0; c + 1 < fields.size(); ++c) {
                const auto v = parse_number(fields[c]);
                if (!v) parse_fail(line_no, "cannot parse feature '" + fields[c] + "'");
                row.features.push_back(*v);
            }
            row.label = parse_csv_label(fields.back(), line_no);
        }
        for (double v : row.features) {
            if (!std::isfinite(v)) {
                throw Error(ErrorCode::NonFiniteValue, "line " + std::to_string(line_no) + ": non-finite feature");
            }
        }
        rows.push_back(std::move(row));
    }
    return assemble(std::move(rows), num_classes);
}

IngestedData parse_jsonl(std::string_view text, std::size_t num_classes) {
    const auto lines = split_lines(text);
    std::vector<RawRow> rows;
    for (std::size_t n = 0; n < lines.size(); ++n) {
        const std::size_t line_no = n + 1;
        if (trim(lines[n]).empty()) continue;
        json obj;
        try {
            obj = json::parse(lines[n]);
        } catch (const json::parse_error& e) {
            parse_fail(line_no, e.what());
        }
        if (!obj.is_object() || !obj.contains("features") || !obj["features"].is_array()) {
            parse_fail(line_no, "expected an object with a 'features' array");
        }
        RawRow row;
        row.line = line_no;
        for (const auto& v : obj["features"]) {
            if (!v.is_number()) parse_fail(line_no, "features must be numbers");
            row.features.push_back(v.get<double>());
        }
        if (obj.contains("label")) {
            const json& label = obj["label"];
            if (label.is_null()) {
                // unlabeled
            } else if (label.is_number_integer()) {
                const auto c = label.get<long>();
                if (c < -1) parse_fail(line_no, "label must be >= 0, -1 or null");
                if (c >= 0) {
                    row.label.kind = RawLabel::Kind::Class;
                    row.label.cls = c;
                }
            } else if (label.is_array()) {
                std::vector<double> probs;
                for (const auto& p : label) {
                    if (!p.is_number()) parse_fail(line_no, "probabilities must be numbers");
                    probs.push_back(p.get<double>());
                }
                row.label.kind = RawLabel::Kind::Probabilities;
                row.label.probs = normalize_probs(std::move(probs), line_no);
            } else {
                parse_fail(line_no, "label must be an integer, null, or a probability array");
            }
        }
        if (obj.contains("true_label") && !obj["true_label"].is_null()) {
            if (!obj["true_label"].is_number_integer()) parse_fail(line_no, "true_label must be an integer");
            row.truth = obj["true_label"].get<long>();
        }
        rows.push_back(std::move(row));
    }
    return assemble(std::move(rows), num_classes);
}

bool has_truth(const TrueClasses& truth) {
    return std::any_of(truth.begin(), truth.end(), [](long t) { return t >= 0; });
}

}  // namespace

bool IngestedData::has_truth_for_unlabeled() const {
    for (std::size_t r = 0; r < true_class.size(); ++r) {
        if (true_class[r] >= 0 && !labels.is_ground_truth(r)) {
            return true;
        }
    }
    return false;
}

DataFormat format_from_path(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    return (ext == ".jsonl" || ext == ".json" || ext == ".ndjson") ? DataFormat::JSONL : DataFormat::CSV;
}

IngestedData parse_features(std::string_view text, DataFormat format, std::size_t num_classes) {
    return format == DataFormat::CSV ? parse_csv(text, num_classes) : parse_jsonl(text, num_classes);
}

IngestedData ingest_features(const std::filesystem::path& path, DataFormat format, std::size_t num_classes) {
    return parse_features(read_file(path), format, num_classes);
}

// ---------------------------------------------------------------------------

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

std::vector<std::string> split_csv_record(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(ch);
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(ch);
        }
    }
    if (quoted) {
        throw Error(ErrorCode::ParseError, "unterminated quoted field");
    }
    fields.push_back(std::move(current));
    return fields;
}

std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
        return std::string(field);
    }
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out.push_back('"');
        out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

std::string emit_csv(const FeatureMatrix& features, const LabelAssignment& labels, const TrueClasses& truth) {
    const bool with_truth = has_truth(truth);
    std::ostringstream out;
    for (std::size_t c = 0; c < features.dim(); ++c) {
        out << "f_" << c << ',';
    }
    out << "label";
    if (with_truth) out << ",true_label";
    out << "\r\n";
    const Matrix& x = features.data();
    for (std::size_t r = 0; r < features.rows(); ++r) {
        for (std::size_t c = 0; c < features.dim(); ++c) {
            out << format_double(x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c))) << ',';
        }
        const LabelState& state = labels[r];
        if (const auto* gt = std::get_if<GroundTruth>(&state)) {
            out << gt->cls;
        } else if (const auto* pred = std::get_if<Prediction>(&state)) {
            std::string list;
            for (std::size_t k = 0; k < pred->probs.size(); ++k) {
                if (k > 0) list += ',';
                list += format_double(pred->probs[k]);
            }
            out << csv_escape(list);
        } else {
            out << -1;
        }
        if (with_truth) out << ',' << truth[r];
        out << "\r\n";
    }
    return out.str();
}

std::string emit_jsonl(const FeatureMatrix& features, const LabelAssignment& labels, const TrueClasses& truth) {
    const bool with_truth = has_truth(truth);
    std::string out;
    const Matrix& x = features.data();
    for (std::size_t r = 0; r < features.rows(); ++r) {
        json obj;
        json feats = json::array();
        for (std::size_t c = 0; c < features.dim(); ++c) {
            feats.push_back(x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
        }
        obj["features"] = std::move(feats);
        const LabelState& state = labels[r];
        if (const auto* gt = std::get_if<GroundTruth>(&state)) {
            obj["label"] = gt->cls;
        } else if (const auto* pred = std::get_if<Prediction>(&state)) {
            obj["label"] = pred->probs;
        } else {
            obj["label"] = nullptr;
        }
        if (with_truth) obj["true_label"] = truth[r];
        out += obj.dump();
        out += '\n';
    }
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::ParseError, "cannot open '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::InvalidArgument, "cannot write '" + path.string() + "'");
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

}  // namespace pmlp::io
