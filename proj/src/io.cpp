#include "oodkit/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>
#include <sstream>

#include "oodkit/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "fmat i/o assumes a little-endian host");

namespace oodkit::io {

namespace fs = std::filesystem;

namespace {

constexpr char kFmatMagic[6] = {'F', 'M', 'A', 'T', '1', '\n'};
constexpr char kFmat8Magic[6] = {'F', 'M', 'A', 'T', '8', '\n'};
constexpr std::size_t kMaxElements = std::size_t{1} << 31;
constexpr int kStatsFormatVersion = 1;

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

void write_file_atomic(const fs::path& path, const std::string& bytes) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError("cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw ValidationError("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double(const std::string& text, const std::string& where) {
    const char* s = text.c_str();
    char* end = nullptr;
    const double v = std::strtod(s, &end);
    while (end && *end == ' ') ++end;
    if (end == s || (end && *end != '\0')) {
        throw ValidationError(where + ": expected a number, got '" + text + "'");
    }
    return v;
}

Matrix parse_csv(const std::string& text, const fs::path& path) {
    Matrix m;
    std::vector<double> values;
    std::size_t cols = 0;
    std::size_t rows = 0;
    std::size_t line_no = 0;
    std::istringstream in(text);
    std::string line;
    bool header_allowed = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (!header_allowed) {
                throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                      ": unexpected second header line");
            }
            header_allowed = false;
            continue;
        }
        header_allowed = false;
        std::size_t col = 0;
        std::size_t pos = 0;
        while (true) {
            const std::size_t comma = line.find(',', pos);
            const std::string cell = line.substr(
                pos, comma == std::string::npos ? std::string::npos : comma - pos);
            const double v = parse_double(
                cell, path.string() + ":" + std::to_string(line_no) + ": column " +
                          std::to_string(col + 1));
            if (!std::isfinite(v)) {
                throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                      ": column " + std::to_string(col + 1) +
                                      ": non-finite value");
            }
            values.push_back(v);
            ++col;
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (cols == 0) {
            cols = col;
        } else if (col != cols) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": row has " +
                                  std::to_string(col) + " cells, expected " +
                                  std::to_string(cols));
        }
        ++rows;
    }
    if (rows == 0) throw ValidationError(path.string() + ": no data rows");
    m.rows = rows;
    m.cols = cols;
    m.data = std::move(values);
    return m;
}

Matrix parse_fmat(const std::string& bytes, const fs::path& path, bool wide) {
    const std::size_t header = 6 + 2 * sizeof(std::uint32_t);
    if (bytes.size() < header) {
        throw ValidationError(path.string() + ": truncated header, " +
                              std::to_string(bytes.size()) + " bytes");
    }
    std::uint32_t rows32 = 0;
    std::uint32_t cols32 = 0;
    std::memcpy(&rows32, bytes.data() + 6, 4);
    std::memcpy(&cols32, bytes.data() + 10, 4);
    const std::size_t rows = rows32;
    const std::size_t cols = cols32;
    if (rows != 0 && cols > kMaxElements / std::max<std::size_t>(rows, 1)) {
        throw ValidationError(path.string() + ": dimension overflow, " + std::to_string(rows) +
                              " x " + std::to_string(cols));
    }
    const std::size_t elem = wide ? 8 : 4;
    const std::size_t want = header + rows * cols * elem;
    if (bytes.size() != want) {
        throw ValidationError(path.string() + ": expected " + std::to_string(want) +
                              " bytes for " + std::to_string(rows) + " x " +
                              std::to_string(cols) + ", found " +
                              std::to_string(bytes.size()));
    }
    Matrix m(rows, cols);
    const char* p = bytes.data() + header;
    for (std::size_t i = 0; i < rows * cols; ++i) {
        if (wide) {
            double v;
            std::memcpy(&v, p + i * 8, 8);
            m.data[i] = v;
        } else {
            float v;
            std::memcpy(&v, p + i * 4, 4);
            m.data[i] = static_cast<double>(v);
        }
    }
    if (!m.all_finite()) {
        throw ValidationError(path.string() + ": non-finite entry");
    }
    return m;
}

std::string render_fmat(const Matrix& m, bool wide) {
    std::string out;
    out.reserve(6 + 8 + m.data.size() * (wide ? 8 : 4));
    out.append(wide ? kFmat8Magic : kFmatMagic, 6);
    const auto rows32 = static_cast<std::uint32_t>(m.rows);
    const auto cols32 = static_cast<std::uint32_t>(m.cols);
    out.append(reinterpret_cast<const char*>(&rows32), 4);
    out.append(reinterpret_cast<const char*>(&cols32), 4);
    for (double d : m.data) {
        if (wide) {
            out.append(reinterpret_cast<const char*>(&d), 8);
        } else {
            const auto f = static_cast<float>(d);
            out.append(reinterpret_cast<const char*>(&f), 4);
        }
    }
    return out;
}

std::string render_csv(const Matrix& m, const std::string& header) {
    std::string out;
    if (!header.empty()) out += "# " + header + "\n";
    char buf[64];
    for (std::size_t i = 0; i < m.rows; ++i) {
        for (std::size_t j = 0; j < m.cols; ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
            if (j) out += ',';
            out += buf;
        }
        out += '\n';
    }
    return out;
}

std::string two_decimals(double pct) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", pct);
    return buf;
}

// key=value lines, '#' comments; preserves first-seen order of keys.
std::vector<std::pair<std::string, std::string>> parse_kv(const std::string& text,
                                                          const fs::path& path) {
    std::vector<std::pair<std::string, std::string>> out;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                  ": expected key=value");
        }
        out.emplace_back(line.substr(0, eq), line.substr(eq + 1));
    }
    return out;
}

}  // namespace

Matrix read_matrix(const fs::path& path) {
    const std::string bytes = read_file(path);
    if (bytes.size() >= 6 && std::memcmp(bytes.data(), kFmatMagic, 6) == 0) {
        return parse_fmat(bytes, path, false);
    }
    if (bytes.size() >= 6 && std::memcmp(bytes.data(), kFmat8Magic, 6) == 0) {
        return parse_fmat(bytes, path, true);
    }
    return parse_csv(bytes, path);
}

void write_matrix(const Matrix& m, const fs::path& path, MatrixFormat format) {
    if (m.rows > kMaxElements || m.cols > kMaxElements) {
        throw ValidationError("write_matrix: dimensions exceed format limits");
    }
    switch (format) {
        case MatrixFormat::csv:
            write_file_atomic(path, render_csv(m, ""));
            return;
        case MatrixFormat::fmat:
            write_file_atomic(path, render_fmat(m, false));
            return;
        case MatrixFormat::fmat8:
            write_file_atomic(path, render_fmat(m, true));
            return;
    }
}

std::vector<int> read_labels(const fs::path& path) {
    const Matrix m = read_matrix(path);
    if (m.cols != 1) {
        throw ValidationError(path.string() + ": labels must have one column, found " +
                              std::to_string(m.cols));
    }
    std::vector<int> labels(m.rows);
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double v = m.data[i];
        const double r = std::nearbyint(v);
        if (std::fabs(v - r) > 1e-9 || r < 0) {
            throw ValidationError(path.string() + ": row " + std::to_string(i + 1) +
                                  ": label must be a non-negative integer, got " +
                                  format_double(v));
        }
        labels[i] = static_cast<int>(r);
    }
    return labels;
}

void write_labels(std::span<const int> labels, const fs::path& path) {
    Matrix m(labels.size(), 1);
    for (std::size_t i = 0; i < labels.size(); ++i) m.data[i] = labels[i];
    write_file_atomic(path, render_csv(m, "labels"));
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

Manifest read_manifest(const fs::path& path) {
    Manifest m;
    m.base_dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    auto entries = parse_kv(read_file(path), path);

    auto split_field = [&](SplitPaths& split, const std::string& field,
                           const std::string& value, const std::string& key) {
        if (field == "features") {
            split.features = value;
        } else if (field == "logits") {
            split.logits = value;
        } else if (field == "labels") {
            split.labels = value;
        } else {
            throw ValidationError(path.string() + ": unknown manifest key '" + key + "'");
        }
    };

    for (const auto& [key, value] : entries) {
        if (key.rfind("id_train.", 0) == 0) {
            split_field(m.id_train, key.substr(9), value, key);
        } else if (key.rfind("id_test.", 0) == 0) {
            split_field(m.id_test, key.substr(8), value, key);
        } else if (key.rfind("ood.", 0) == 0) {
            const std::size_t dot = key.find('.', 4);
            if (dot == std::string::npos) {
                throw ValidationError(path.string() + ": malformed ood key '" + key + "'");
            }
            const std::string name = key.substr(4, dot - 4);
            auto it = std::find_if(m.ood_sets.begin(), m.ood_sets.end(),
                                   [&](const auto& p) { return p.first == name; });
            if (it == m.ood_sets.end()) {
                m.ood_sets.emplace_back(name, SplitPaths{});
                it = std::prev(m.ood_sets.end());
            }
            split_field(it->second, key.substr(dot + 1), value, key);
        } else if (key == "head.weights") {
            m.head_weights = value;
        } else if (key == "head.bias") {
            m.head_bias = value;
        } else if (key == "config.principal_dim") {
            m.config.principal_dim =
                static_cast<std::size_t>(parse_double(value, path.string() + ": " + key));
            m.config.principal_dim_set = true;
        } else if (key == "config.shrink") {
            m.config.shrink = parse_double(value, path.string() + ": " + key);
        } else if (key == "config.react_p") {
            m.config.react_p = parse_double(value, path.string() + ": " + key);
        } else if (key == "config.eta") {
            m.config.eta = parse_double(value, path.string() + ": " + key);
        } else {
            throw ValidationError(path.string() + ": unknown manifest key '" + key + "'");
        }
    }
    if (m.id_train.features.empty()) {
        throw ValidationError(path.string() + ": missing id_train.features");
    }
    if (m.head_weights.empty() != m.head_bias.empty()) {
        throw ValidationError(path.string() + ": head.weights and head.bias must come together");
    }
    return m;
}

void write_manifest(const Manifest& m, const fs::path& path) {
    std::string out = "# dataset manifest\n";
    auto put = [&](const std::string& key, const std::string& value) {
        if (!value.empty()) out += key + "=" + value + "\n";
    };
    put("id_train.features", m.id_train.features);
    put("id_train.logits", m.id_train.logits);
    put("id_train.labels", m.id_train.labels);
    put("id_test.features", m.id_test.features);
    put("id_test.logits", m.id_test.logits);
    put("id_test.labels", m.id_test.labels);
    put("head.weights", m.head_weights);
    put("head.bias", m.head_bias);
    for (const auto& [name, split] : m.ood_sets) {
        put("ood." + name + ".features", split.features);
        put("ood." + name + ".logits", split.logits);
    }
    if (m.config.principal_dim_set) {
        out += "config.principal_dim=" + std::to_string(m.config.principal_dim) + "\n";
    }
    out += "config.shrink=" + format_double(m.config.shrink) + "\n";
    out += "config.react_p=" + format_double(m.config.react_p) + "\n";
    out += "config.eta=" + format_double(m.config.eta) + "\n";
    write_file_atomic(path, out);
}

ManifestData load_manifest_data(const Manifest& manifest) {
    ManifestData data;
    auto resolve = [&](const std::string& rel) { return manifest.base_dir / rel; };

    auto load_split = [&](const SplitPaths& paths, const std::string& section) {
        SplitData split;
        if (paths.features.empty()) {
            throw ValidationError("manifest: missing " + section + ".features");
        }
        split.features = read_matrix(resolve(paths.features));
        if (!paths.logits.empty()) {
            split.logits = read_matrix(resolve(paths.logits));
            split.has_logits = true;
            if (split.logits.rows != split.features.rows) {
                throw ValidationError("manifest " + section + ".logits (" + paths.logits +
                                      "): row count " + std::to_string(split.logits.rows) +
                                      " does not match features rows " +
                                      std::to_string(split.features.rows));
            }
        }
        if (!paths.labels.empty()) {
            split.labels = read_labels(resolve(paths.labels));
            split.has_labels = true;
            if (split.labels.size() != split.features.rows) {
                throw ValidationError("manifest " + section + ".labels (" + paths.labels +
                                      "): count does not match features rows");
            }
        }
        return split;
    };

    data.id_train = load_split(manifest.id_train, "id_train");
    if (!manifest.id_test.features.empty()) {
        data.id_test = load_split(manifest.id_test, "id_test");
    }
    for (const auto& [name, split] : manifest.ood_sets) {
        data.ood_sets.emplace_back(name, load_split(split, "ood." + name));
    }
    if (!manifest.head_weights.empty()) {
        data.head.weights = read_matrix(resolve(manifest.head_weights));
        const Matrix bias = read_matrix(resolve(manifest.head_bias));
        if (bias.cols != 1) {
            throw ValidationError("manifest head.bias (" + manifest.head_bias +
                                  "): must be a column vector");
        }
        data.head.bias = bias.data;
        data.head.present = true;
    }

    // Every file must agree on d and C before any computation starts.
    const std::size_t d = data.id_train.features.cols;
    std::size_t c = data.id_train.has_logits ? data.id_train.logits.cols : 0;
    auto check = [&](const SplitData& split, const std::string& section) {
        if (split.features.cols != d) {
            throw ValidationError("manifest " + section + ".features: width " +
                                  std::to_string(split.features.cols) +
                                  " does not match id_train width " + std::to_string(d));
        }
        if (split.has_logits) {
            if (c == 0) c = split.logits.cols;
            if (split.logits.cols != c) {
                throw ValidationError("manifest " + section + ".logits: width " +
                                      std::to_string(split.logits.cols) +
                                      " does not match logit width " + std::to_string(c));
            }
        }
    };
    if (!manifest.id_test.features.empty()) check(data.id_test, "id_test");
    for (std::size_t i = 0; i < data.ood_sets.size(); ++i) {
        check(data.ood_sets[i].second, "ood." + data.ood_sets[i].first);
    }
    if (data.head.present) {
        if (data.head.weights.cols != d) {
            throw ValidationError("manifest head.weights: width " +
                                  std::to_string(data.head.weights.cols) +
                                  " does not match feature width " + std::to_string(d));
        }
        if (c != 0 && data.head.weights.rows != c) {
            throw ValidationError("manifest head.weights: " +
                                  std::to_string(data.head.weights.rows) +
                                  " rows do not match logit width " + std::to_string(c));
        }
        if (data.head.bias.size() != data.head.weights.rows) {
            throw ValidationError("manifest head.bias: length does not match head.weights rows");
        }
    }
    return data;
}

// ---------------------------------------------------------------------------
// Stats directory
// ---------------------------------------------------------------------------

namespace {

const char* kCentroidsFile = "centroids.fmat8";
const char* kPrecisionFile = "precision.fmat8";
const char* kOriginFile = "origin.fmat8";
const char* kBasisFile = "residual_basis.fmat8";
const char* kTemplatesFile = "kl_templates.fmat8";
const char* kHeadWeightsFile = "head_weights.fmat8";
const char* kHeadBiasFile = "head_bias.fmat8";
const char* kMetaFile = "meta.txt";

Matrix load_component(const fs::path& dir, const char* name) {
    const fs::path p = dir / name;
    if (!fs::exists(p)) {
        throw ValidationError("stats directory " + dir.string() + " is missing " + name);
    }
    return read_matrix(p);
}

}  // namespace

void save_stats(const fitstats::IdStats& stats, const fs::path& dir) {
    fs::create_directories(dir);
    write_matrix(stats.class_stats.centroids, dir / kCentroidsFile, MatrixFormat::fmat8);
    write_matrix(stats.class_stats.shared_precision, dir / kPrecisionFile, MatrixFormat::fmat8);
    Matrix origin(stats.subspace.origin.size(), 1);
    origin.data = stats.subspace.origin;
    write_matrix(origin, dir / kOriginFile, MatrixFormat::fmat8);
    write_matrix(stats.subspace.residual_basis, dir / kBasisFile, MatrixFormat::fmat8);
    write_matrix(stats.kl.class_dists, dir / kTemplatesFile, MatrixFormat::fmat8);
    if (stats.head.present) {
        write_matrix(stats.head.weights, dir / kHeadWeightsFile, MatrixFormat::fmat8);
        Matrix bias(stats.head.bias.size(), 1);
        bias.data = stats.head.bias;
        write_matrix(bias, dir / kHeadBiasFile, MatrixFormat::fmat8);
    }

    std::string meta;
    meta += "format_version=" + std::to_string(kStatsFormatVersion) + "\n";
    meta += "num_classes=" + std::to_string(stats.num_classes) + "\n";
    meta += "logit_dim=" + std::to_string(stats.logit_dim) + "\n";
    meta += "feature_dim=" + std::to_string(stats.feature_dim) + "\n";
    meta += "principal_dim=" + std::to_string(stats.subspace.principal_dim) + "\n";
    meta += "alpha=" + format_double(stats.vim.alpha) + "\n";
    meta += "react_clip=" + format_double(stats.react.clip_value) + "\n";
    meta += "react_p=" + format_double(stats.react.percentile) + "\n";
    meta += "eta_default=" + format_double(stats.default_eta) + "\n";
    meta += "has_head=" + std::string(stats.head.present ? "1" : "0") + "\n";
    std::string counts;
    for (std::size_t c : stats.class_stats.class_counts) {
        if (!counts.empty()) counts += ',';
        counts += std::to_string(c);
    }
    meta += "class_counts=" + counts + "\n";
    write_file_atomic(dir / kMetaFile, meta);
}

fitstats::IdStats load_stats(const fs::path& dir) {
    const fs::path meta_path = dir / kMetaFile;
    if (!fs::exists(meta_path)) {
        throw ValidationError("stats directory " + dir.string() + " is missing meta.txt");
    }
    std::map<std::string, std::string> meta;
    for (auto& [k, v] : parse_kv(read_file(meta_path), meta_path)) meta[k] = v;
    auto need = [&](const std::string& key) -> const std::string& {
        auto it = meta.find(key);
        if (it == meta.end()) {
            throw ValidationError(meta_path.string() + ": missing key '" + key + "'");
        }
        return it->second;
    };

    const int version = static_cast<int>(parse_double(need("format_version"), "format_version"));
    if (version != kStatsFormatVersion) {
        throw ValidationError("stats format version " + std::to_string(version) +
                              " found, this build reads version " +
                              std::to_string(kStatsFormatVersion));
    }

    fitstats::IdStats stats;
    stats.num_classes = static_cast<std::size_t>(parse_double(need("num_classes"), "num_classes"));
    stats.logit_dim = static_cast<std::size_t>(parse_double(need("logit_dim"), "logit_dim"));
    stats.feature_dim = static_cast<std::size_t>(parse_double(need("feature_dim"), "feature_dim"));
    stats.subspace.principal_dim =
        static_cast<std::size_t>(parse_double(need("principal_dim"), "principal_dim"));
    stats.vim.alpha = parse_double(need("alpha"), "alpha");
    stats.react.clip_value = parse_double(need("react_clip"), "react_clip");
    stats.react.percentile = parse_double(need("react_p"), "react_p");
    stats.default_eta = parse_double(need("eta_default"), "eta_default");

    stats.class_stats.centroids = load_component(dir, kCentroidsFile);
    stats.class_stats.shared_precision = load_component(dir, kPrecisionFile);
    stats.subspace.origin = load_component(dir, kOriginFile).data;
    stats.subspace.residual_basis = load_component(dir, kBasisFile);
    stats.kl.class_dists = load_component(dir, kTemplatesFile);

    const std::string& counts = need("class_counts");
    std::size_t pos = 0;
    while (pos < counts.size()) {
        std::size_t comma = counts.find(',', pos);
        if (comma == std::string::npos) comma = counts.size();
        stats.class_stats.class_counts.push_back(static_cast<std::size_t>(
            parse_double(counts.substr(pos, comma - pos), "class_counts")));
        pos = comma + 1;
    }

    if (need("has_head") == "1") {
        stats.head.weights = load_component(dir, kHeadWeightsFile);
        stats.head.bias = load_component(dir, kHeadBiasFile).data;
        stats.head.present = true;
    }

    if (stats.class_stats.centroids.rows != stats.num_classes ||
        stats.class_stats.centroids.cols != stats.feature_dim ||
        stats.subspace.origin.size() != stats.feature_dim ||
        stats.subspace.residual_basis.rows != stats.feature_dim ||
        stats.subspace.residual_basis.cols !=
            stats.feature_dim - stats.subspace.principal_dim ||
        stats.kl.class_dists.rows != stats.num_classes ||
        stats.kl.class_dists.cols != stats.logit_dim) {
        throw ValidationError("stats directory " + dir.string() +
                              ": component shapes disagree with meta.txt");
    }
    return stats;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> ordered_unique(std::span<const ResultRow> rows,
                                        bool by_score) {
    std::vector<std::string> out;
    for (const auto& r : rows) {
        const std::string& key = by_score ? r.score : r.dataset;
        if (std::find(out.begin(), out.end(), key) == out.end()) out.push_back(key);
    }
    return out;
}

const metrics::EvalOutcome* find_cell(std::span<const ResultRow> rows,
                                      const std::string& score, const std::string& dataset) {
    for (const auto& r : rows) {
        if (r.score == score && r.dataset == dataset) return &r.outcome;
    }
    return nullptr;
}

std::string header_lines(const ReportMeta& meta) {
    std::string out;
    if (!meta.stamp.empty()) out += "# generated=" + meta.stamp + "\n";
    if (meta.alpha) out += "# alpha=" + format_double(*meta.alpha) + "\n";
    out += "# fpr95 convention: largest threshold among observed OOD scores with TPR >= 0.95,"
           " no interpolation\n";
    out += "# metrics in percent, higher AUROC better, lower FPR95 better\n";
    return out;
}

fs::path table_twin(const fs::path& csv_path) {
    fs::path p = csv_path;
    p.replace_extension(".txt");
    if (p == csv_path) p += ".txt";
    return p;
}

void pad_to(std::string& line, std::size_t width) {
    if (line.size() < width) line.append(width - line.size(), ' ');
}

}  // namespace

void emit_report(std::span<const ResultRow> rows, const fs::path& csv_path,
                 const ReportMeta& meta) {
    if (rows.empty()) throw ValidationError("emit_report: no results");
    const auto score_order = ordered_unique(rows, true);
    const auto set_order = ordered_unique(rows, false);

    std::string csv = header_lines(meta);
    csv += "score,dataset,auroc_pct,fpr95_pct\n";
    std::vector<std::pair<double, double>> averages;  // per score, in order
    for (const auto& score : score_order) {
        double auroc_sum = 0.0;
        double fpr_sum = 0.0;
        std::size_t count = 0;
        for (const auto& set : set_order) {
            const auto* cell = find_cell(rows, score, set);
            if (!cell) continue;
            csv += score + "," + set + "," + two_decimals(cell->auroc * 100.0) + "," +
                   two_decimals(cell->fpr95 * 100.0) + "\n";
            auroc_sum += cell->auroc * 100.0;
            fpr_sum += cell->fpr95 * 100.0;
            ++count;
        }
        const double a = auroc_sum / static_cast<double>(count);
        const double f = fpr_sum / static_cast<double>(count);
        averages.emplace_back(a, f);
        csv += score + ",Average," + two_decimals(a) + "," + two_decimals(f) + "\n";
    }
    write_file_atomic(csv_path, csv);

    // Aligned table: scores as rows, AUROC/FPR95 pair per set, Average last.
    std::size_t name_w = 8;
    for (const auto& s : score_order) name_w = std::max(name_w, s.size() + 2);
    const std::size_t cell_w = 9;

    std::string txt = header_lines(meta);
    std::string head1(name_w, ' ');
    std::string head2(name_w, ' ');
    auto add_pair_header = [&](const std::string& title) {
        std::string block = "| " + title;
        pad_to(block, 2 + 2 * cell_w);
        head1 += block;
        std::string sub = "| ";
        std::string a = "AUROC";
        pad_to(a, cell_w);
        std::string f = "FPR95";
        pad_to(f, cell_w);
        head2 += sub + a + f;
    };
    for (const auto& set : set_order) add_pair_header(set);
    add_pair_header("Average");
    txt += head1 + "\n" + head2 + "\n";
    txt += std::string(head2.size(), '-') + "\n";

    for (std::size_t si = 0; si < score_order.size(); ++si) {
        std::string line = score_order[si];
        pad_to(line, name_w);
        for (const auto& set : set_order) {
            const auto* cell = find_cell(rows, score_order[si], set);
            std::string a = cell ? two_decimals(cell->auroc * 100.0) : "-";
            std::string f = cell ? two_decimals(cell->fpr95 * 100.0) : "-";
            pad_to(a, cell_w);
            pad_to(f, cell_w);
            line += "| " + a + f;
        }
        std::string a = two_decimals(averages[si].first);
        std::string f = two_decimals(averages[si].second);
        pad_to(a, cell_w);
        pad_to(f, cell_w);
        line += "| " + a + f;
        txt += line + "\n";
    }
    write_file_atomic(table_twin(csv_path), txt);
}

void emit_oneclass_report(std::span<const ResultRow> rows, const fs::path& csv_path,
                          const ReportMeta& meta) {
    if (rows.empty()) throw ValidationError("emit_oneclass_report: no results");
    const auto score_order = ordered_unique(rows, true);
    const auto class_order = ordered_unique(rows, false);

    std::string csv = header_lines(meta);
    csv += "# one-class protocol: cells average across the OOD classes of each ID class\n";
    csv += "score,id_class,auroc_pct,fpr95_pct\n";
    std::vector<std::pair<double, double>> averages;
    for (const auto& score : score_order) {
        double auroc_sum = 0.0;
        double fpr_sum = 0.0;
        std::size_t count = 0;
        for (const auto& cls : class_order) {
            const auto* cell = find_cell(rows, score, cls);
            if (!cell) continue;
            csv += score + "," + cls + "," + two_decimals(cell->auroc * 100.0) + "," +
                   two_decimals(cell->fpr95 * 100.0) + "\n";
            auroc_sum += cell->auroc * 100.0;
            fpr_sum += cell->fpr95 * 100.0;
            ++count;
        }
        averages.emplace_back(auroc_sum / static_cast<double>(count),
                              fpr_sum / static_cast<double>(count));
        csv += score + ",Average," + two_decimals(averages.back().first) + "," +
               two_decimals(averages.back().second) + "\n";
    }
    write_file_atomic(csv_path, csv);

    std::size_t name_w = 8;
    for (const auto& s : score_order) name_w = std::max(name_w, s.size() + 2);
    const std::size_t cell_w = 9;

    std::string txt = header_lines(meta);
    auto block = [&](const std::string& title, bool auroc_block) {
        std::string out = title + "\n";
        std::string head(name_w, ' ');
        for (const auto& cls : class_order) {
            std::string c = "| " + cls;
            pad_to(c, 2 + cell_w);
            head += c;
        }
        std::string avg = "| Average";
        pad_to(avg, 2 + cell_w);
        head += avg;
        out += head + "\n" + std::string(head.size(), '-') + "\n";
        for (std::size_t si = 0; si < score_order.size(); ++si) {
            std::string line = score_order[si];
            pad_to(line, name_w);
            for (const auto& cls : class_order) {
                const auto* cell = find_cell(rows, score_order[si], cls);
                const double v = cell ? (auroc_block ? cell->auroc : cell->fpr95) * 100.0 : 0.0;
                std::string s = cell ? two_decimals(v) : "-";
                pad_to(s, cell_w);
                line += "| " + s;
            }
            std::string s = two_decimals(auroc_block ? averages[si].first : averages[si].second);
            pad_to(s, cell_w);
            line += "| " + s;
            out += line + "\n";
        }
        return out;
    };
    txt += block("AUROC (%)", true) + "\n" + block("FPR95 (%)", false);
    write_file_atomic(table_twin(csv_path), txt);
}

void emit_curves(const std::vector<std::pair<std::string, std::vector<double>>>& datasets,
                 std::size_t bins, const fs::path& path) {
    if (bins < 2) throw ValidationError("emit_curves: bins must be >= 2");
    if (datasets.empty()) throw ValidationError("emit_curves: no datasets");

    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& [name, values] : datasets) {
        if (values.empty()) {
            throw ValidationError("emit_curves: dataset '" + name + "' has no scores");
        }
        for (double v : values) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (hi <= lo) hi = lo + 1e-9;  // constant scores: widen to one valid bin range
    const double width = (hi - lo) / static_cast<double>(bins);

    std::string out = "# score distribution curves; shared bin edges across datasets\n";
    out += "dataset,bin_left,bin_right,count,density\n";
    char buf[160];
    for (const auto& [name, values] : datasets) {
        std::vector<std::size_t> counts(bins, 0);
        for (double v : values) {
            auto b = static_cast<std::size_t>((v - lo) / width);
            if (b >= bins) b = bins - 1;
            ++counts[b];
        }
        const double denom = static_cast<double>(values.size()) * width;
        for (std::size_t b = 0; b < bins; ++b) {
            std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%zu,%.17g\n", name.c_str(),
                          lo + width * static_cast<double>(b),
                          lo + width * static_cast<double>(b + 1), counts[b],
                          static_cast<double>(counts[b]) / denom);
            out += buf;
        }
    }
    write_file_atomic(path, out);
}

// ---------------------------------------------------------------------------
// Score and calibration files
// ---------------------------------------------------------------------------

void write_scores(std::span<const double> values, const std::string& score_name,
                  const fs::path& path) {
    Matrix m(values.size(), 1);
    m.data.assign(values.begin(), values.end());
    write_file_atomic(path, render_csv(m, "score=" + score_name));
}

std::vector<double> read_scores(const fs::path& path) {
    const Matrix m = read_matrix(path);
    if (m.cols != 1) {
        throw ValidationError(path.string() + ": score files must have one column");
    }
    return m.data;
}

void write_calibration(const CalibrationFile& cal, const fs::path& path) {
    std::string out;
    out += "format_version=1\n";
    out += "score=" + cal.score + "\n";
    out += "eta=" + format_double(cal.calibration.eta) + "\n";
    out += "threshold=" + format_double(cal.calibration.threshold) + "\n";
    out += "n_cal=" + std::to_string(cal.n_cal) + "\n";
    write_file_atomic(path, out);
}

CalibrationFile read_calibration(const fs::path& path) {
    std::map<std::string, std::string> kv;
    for (auto& [k, v] : parse_kv(read_file(path), path)) kv[k] = v;
    auto need = [&](const std::string& key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) {
            throw ValidationError(path.string() + ": missing key '" + key + "'");
        }
        return it->second;
    };
    const int version = static_cast<int>(parse_double(need("format_version"), "format_version"));
    if (version != 1) {
        throw ValidationError("calibration format version " + std::to_string(version) +
                              " found, this build reads version 1");
    }
    CalibrationFile out;
    out.score = need("score");
    out.calibration.eta = parse_double(need("eta"), "eta");
    out.calibration.threshold = parse_double(need("threshold"), "threshold");
    out.n_cal = static_cast<std::size_t>(parse_double(need("n_cal"), "n_cal"));
    return out;
}

void write_detections(std::span<const double> scores, std::span<const std::uint8_t> flags,
                      const std::string& score_name, double threshold, const fs::path& path) {
    std::string out = "# score=" + score_name + " threshold=" + format_double(threshold) +
                      " columns=score,outlier\n";
    char buf[64];
    for (std::size_t i = 0; i < scores.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%d\n", scores[i], flags[i] ? 1 : 0);
        out += buf;
    }
    write_file_atomic(path, out);
}

}  // namespace oodkit::io
