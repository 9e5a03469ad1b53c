#pragma once

#include "csvm/core.hpp"
#include "csvm/inference.hpp"
#include "csvm/kernel.hpp"
#include "csvm/model.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace csvm {

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr int kModelFormatVersion = 1;

/// File content does not follow the expected layout.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A required column is absent.
class MissingColumnError : public SchemaError {
public:
    using SchemaError::SchemaError;
};

/// Feature dimension disagrees between two artifacts.
class DimensionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A file could not be opened or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shortest decimal text that reads back to the same double.
inline std::string format_double(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, r.ptr};
}

inline double parse_double(std::string_view s, std::string_view what) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw SchemaError(std::string(what) + ": cannot parse '" + std::string(s) + "' as a finite number");
    }
    return v;
}

namespace detail {

inline std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

} // namespace detail

struct CsvDataset {
    Dataset data;
    nlohmann::json metadata;  // null when the file carries none
};

/// Header `label,x1,...,xp`, one row per point. Lines starting with '#' are
/// comments; the first one, if it holds a JSON object, is returned as
/// metadata.
inline CsvDataset read_dataset_csv(std::istream& in, std::string_view source = "dataset") {
    const std::string src(source);
    CsvDataset out;
    std::string line;
    std::vector<std::string_view> header;
    std::string header_line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        detail::strip_cr(line);
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (out.metadata.is_null()) {
                auto j = nlohmann::json::parse(line.substr(1), nullptr, false);
                if (!j.is_discarded() && j.is_object()) out.metadata = std::move(j);
            }
            continue;
        }
        header_line = line;
        break;
    }
    if (header_line.empty()) throw MissingColumnError(src + ": no header row");
    header = detail::split(header_line, ',');

    Eigen::Index label_col = -1;
    std::vector<Eigen::Index> feature_col;
    for (std::size_t c = 0; c < header.size(); ++c) {
        const std::string_view h = header[c];
        if (h == "label") {
            if (label_col >= 0) throw SchemaError(src + ": duplicate 'label' column");
            label_col = static_cast<Eigen::Index>(c);
            continue;
        }
        if (h.size() < 2 || h[0] != 'x') throw SchemaError(src + ": unexpected column '" + std::string(h) + "'");
        int idx = 0;
        const auto r = std::from_chars(h.data() + 1, h.data() + h.size(), idx);
        if (r.ec != std::errc() || r.ptr != h.data() + h.size() || idx < 1) {
            throw SchemaError(src + ": unexpected column '" + std::string(h) + "'");
        }
        if (idx != static_cast<int>(feature_col.size()) + 1) {
            throw SchemaError(src + ": feature columns must be x1..xp in order");
        }
        feature_col.push_back(static_cast<Eigen::Index>(c));
    }
    if (label_col < 0) throw MissingColumnError(src + ": missing 'label' column");
    if (feature_col.empty()) throw MissingColumnError(src + ": no feature columns x1..xp");

    std::vector<double> values;
    std::vector<Label> labels;
    const std::size_t width = header.size();
    while (std::getline(in, line)) {
        ++line_no;
        detail::strip_cr(line);
        if (line.empty() || line[0] == '#') continue;
        const auto fields = detail::split(line, ',');
        const std::string where = src + " line " + std::to_string(line_no);
        if (fields.size() != width) {
            throw SchemaError(where + ": expected " + std::to_string(width) + " fields, found " +
                              std::to_string(fields.size()));
        }
        const double lv = parse_double(fields[static_cast<std::size_t>(label_col)], where);
        if (lv != 1.0 && lv != -1.0) throw SchemaError(where + ": label must be -1 or 1");
        labels.push_back(static_cast<Label>(lv));
        for (Eigen::Index c : feature_col) values.push_back(parse_double(fields[static_cast<std::size_t>(c)], where));
    }
    const auto n = static_cast<Eigen::Index>(labels.size());
    const auto p = static_cast<Eigen::Index>(feature_col.size());
    Matrix x(n, p);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < p; ++j) x(i, j) = values[static_cast<std::size_t>(i * p + j)];
    out.data = Dataset(std::move(x), std::move(labels));
    return out;
}

inline CsvDataset read_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return read_dataset_csv(in, path);
}

inline void write_dataset_csv(std::ostream& out, const Dataset& d, const nlohmann::json& metadata = nullptr) {
    if (!metadata.is_null()) out << "# " << metadata.dump() << '\n';
    out << "label";
    for (Eigen::Index j = 0; j < d.dims(); ++j) out << ",x" << j + 1;
    out << '\n';
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        out << static_cast<int>(d.label(i));
        for (Eigen::Index j = 0; j < d.dims(); ++j) out << ',' << format_double(d.features()(i, j));
        out << '\n';
    }
}

/// Writes through a temporary file so a failed write never leaves a
/// truncated artifact behind.
template <class Writer>
void write_file(const std::string& path, Writer&& writer) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw IoError("cannot open '" + path + "' for writing");
        writer(out);
        out.flush();
        if (!out) throw IoError("write to '" + path + "' failed");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw IoError("cannot move output into place at '" + path + "'");
    }
}

inline void write_dataset_csv(const std::string& path, const Dataset& d, const nlohmann::json& metadata = nullptr) {
    write_file(path, [&](std::ostream& out) { write_dataset_csv(out, d, metadata); });
}

/// Model plus optional robust thresholds, as stored on disk.
struct StoredModel {
    CsvmModel model;
    std::optional<Thresholds> thresholds;
    nlohmann::json metadata;
};

/// Text layout:
///   csvm-model <version>
///   # <metadata json>
///   kernel <spec>
///   dims <p>
///   support <n>
///   intercept <b>
///   margin <eps>
///   thresholds <t_neg> <t_pos> | thresholds none
///   then n lines: <label> <coefficient> <weight> <x1> ... <xp>
inline void write_model(std::ostream& out, const StoredModel& s) {
    const CsvmModel& m = s.model;
    out << "csvm-model " << kModelFormatVersion << '\n';
    out << "# " << (s.metadata.is_null() ? nlohmann::json::object() : s.metadata).dump() << '\n';
    out << "kernel " << to_string(m.kernel) << '\n';
    out << "dims " << m.dims() << '\n';
    out << "support " << m.coefficients.size() << '\n';
    out << "intercept " << format_double(m.intercept) << '\n';
    out << "margin " << format_double(m.margin) << '\n';
    if (s.thresholds) {
        out << "thresholds " << format_double(s.thresholds->neg) << ' ' << format_double(s.thresholds->pos) << '\n';
    } else {
        out << "thresholds none\n";
    }
    for (Eigen::Index i = 0; i < m.coefficients.size(); ++i) {
        out << static_cast<int>(m.support_labels[static_cast<std::size_t>(i)]) << ' '
            << format_double(m.coefficients(i)) << ' '
            << format_double(m.weights_final.size() ? m.weights_final(i) : 1.0);
        for (Eigen::Index j = 0; j < m.dims(); ++j) out << ' ' << format_double(m.support_features(i, j));
        out << '\n';
    }
}

inline StoredModel read_model(std::istream& in, std::string_view source = "model") {
    const std::string src(source);
    std::string line;
    auto next = [&](std::string_view key) {
        if (!std::getline(in, line)) throw SchemaError(src + ": truncated before '" + std::string(key) + "'");
        detail::strip_cr(line);
        if (line.rfind(std::string(key) + " ", 0) != 0) {
            throw SchemaError(src + ": expected '" + std::string(key) + "', found '" + line + "'");
        }
        return line.substr(key.size() + 1);
    };
    StoredModel s;
    const std::string version = next("csvm-model");
    if (version != std::to_string(kModelFormatVersion)) {
        throw SchemaError(src + ": unsupported model format version " + version);
    }
    const std::string meta = next("#");
    s.metadata = nlohmann::json::parse(meta, nullptr, false);
    if (s.metadata.is_discarded()) throw SchemaError(src + ": malformed metadata line");
    CsvmModel& m = s.model;
    try {
        m.kernel = parse_kernel(next("kernel"));
    } catch (const std::invalid_argument& e) {
        throw SchemaError(src + ": " + e.what());
    }
    const auto p = static_cast<Eigen::Index>(parse_double(next("dims"), src));
    const auto n = static_cast<Eigen::Index>(parse_double(next("support"), src));
    if (p < 1 || n < 0) throw SchemaError(src + ": invalid dims/support counts");
    m.intercept = parse_double(next("intercept"), src);
    m.margin = parse_double(next("margin"), src);
    const std::string th = next("thresholds");
    if (th != "none") {
        const auto parts = detail::split(th, ' ');
        if (parts.size() != 2) throw SchemaError(src + ": thresholds need two values");
        s.thresholds = Thresholds{parse_double(parts[0], src), parse_double(parts[1], src)};
    }
    m.coefficients.resize(n);
    m.weights_final.resize(n);
    m.support_features.resize(n, p);
    m.support_labels.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!std::getline(in, line)) throw SchemaError(src + ": truncated support block");
        detail::strip_cr(line);
        const auto f = detail::split(line, ' ');
        if (static_cast<Eigen::Index>(f.size()) != p + 3) throw SchemaError(src + ": malformed support row");
        const double lv = parse_double(f[0], src);
        if (lv != 1.0 && lv != -1.0) throw SchemaError(src + ": support label must be -1 or 1");
        m.support_labels[static_cast<std::size_t>(i)] = static_cast<Label>(lv);
        m.coefficients(i) = parse_double(f[1], src);
        m.weights_final(i) = parse_double(f[2], src);
        for (Eigen::Index j = 0; j < p; ++j) m.support_features(i, j) = parse_double(f[static_cast<std::size_t>(j + 3)], src);
    }
    if (m.margin < 0.0) throw SchemaError(src + ": negative margin");
    return s;
}

inline void write_model(const std::string& path, const StoredModel& s) {
    write_file(path, [&](std::ostream& out) { write_model(out, s); });
}

inline StoredModel read_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return read_model(in, path);
}

/// Undefined rates (empty class) become null.
inline nlohmann::json to_json(const EvalReport& r) {
    auto rate = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    return {{"noncoverage_neg", rate(r.noncoverage_neg)},
            {"noncoverage_pos", rate(r.noncoverage_pos)},
            {"ambiguity", r.ambiguity},
            {"n_test", r.n_test},
            {"n_neg", r.n_neg},
            {"n_pos", r.n_pos},
            {"success", r.success}};
}

inline nlohmann::json to_json(const KernelSpec& k) { return to_string(k); }

inline nlohmann::json to_json(const NoncoverageTargets& t) { return {{"alpha_neg", t.neg}, {"alpha_pos", t.pos}}; }

} // namespace csvm
