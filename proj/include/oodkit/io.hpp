#ifndef OODKIT_IO_HPP
#define OODKIT_IO_HPP

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "oodkit/fitstats.hpp"
#include "oodkit/matrix.hpp"
#include "oodkit/metrics.hpp"

namespace oodkit::io {

// On-disk matrix formats. fmat stores 32-bit floats ("FMAT1\n" magic), the
// usual precision of exported feature dumps; fmat8 stores full 64-bit values
// ("FMAT8\n" magic) and is what fitted statistics use so that reloading them
// reproduces scores bit for bit. csv is comma-separated decimal text with an
// optional single '#' header line. Readers sniff the magic, so any of the
// three can be passed wherever a matrix file is expected.
enum class MatrixFormat { csv, fmat, fmat8 };

Matrix read_matrix(const std::filesystem::path& path);
void write_matrix(const Matrix& m, const std::filesystem::path& path, MatrixFormat format);

std::vector<int> read_labels(const std::filesystem::path& path);
void write_labels(std::span<const int> labels, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Manifest: flat key=value text naming every input of a run. Relative paths
// resolve against the manifest's directory.
// ---------------------------------------------------------------------------

struct SplitPaths {
    std::string features;  // empty = absent
    std::string logits;
    std::string labels;

    bool operator==(const SplitPaths&) const = default;
};

struct Manifest {
    SplitPaths id_train;
    SplitPaths id_test;
    std::vector<std::pair<std::string, SplitPaths>> ood_sets;
    std::string head_weights;
    std::string head_bias;
    fitstats::FitConfig config;
    std::filesystem::path base_dir;
};

Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const Manifest& manifest, const std::filesystem::path& path);

struct SplitData {
    Matrix features;
    Matrix logits;
    bool has_logits = false;
    std::vector<int> labels;
    bool has_labels = false;
};

struct ManifestData {
    SplitData id_train;
    SplitData id_test;
    std::vector<std::pair<std::string, SplitData>> ood_sets;
    fitstats::LinearHead head;
};

// Loads every referenced file and cross-checks feature and logit widths
// before anything is computed; mismatches name the offending file and field.
ManifestData load_manifest_data(const Manifest& manifest);

// ---------------------------------------------------------------------------
// Fitted statistics directory
// ---------------------------------------------------------------------------

void save_stats(const fitstats::IdStats& stats, const std::filesystem::path& dir);
fitstats::IdStats load_stats(const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Reports and score distribution curves
// ---------------------------------------------------------------------------

struct ResultRow {
    std::string score;
    std::string dataset;
    metrics::EvalOutcome outcome;
};

struct ReportMeta {
    std::optional<double> alpha;
    std::string stamp;  // empty = no timestamp line
};

// Writes <csv_path> and an aligned text table next to it (extension swapped
// to .txt): scores as rows, one AUROC/FPR95 column pair per OOD set, a
// trailing Average pair, percentages to two decimals.
void emit_report(std::span<const ResultRow> rows, const std::filesystem::path& csv_path,
                 const ReportMeta& meta);

// One-class layout: scores as rows, one column per ID class plus Average,
// AUROC and FPR95 as separate blocks. Cells are averages across OOD classes.
void emit_oneclass_report(std::span<const ResultRow> rows,
                          const std::filesystem::path& csv_path, const ReportMeta& meta);

// Shared equal-width bins across all datasets spanning the pooled range;
// per-dataset densities integrate to 1.
void emit_curves(const std::vector<std::pair<std::string, std::vector<double>>>& datasets,
                 std::size_t bins, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Score files and calibration files
// ---------------------------------------------------------------------------

void write_scores(std::span<const double> values, const std::string& score_name,
                  const std::filesystem::path& path);
std::vector<double> read_scores(const std::filesystem::path& path);

struct CalibrationFile {
    std::string score;
    metrics::CalibrationResult calibration;
    std::size_t n_cal = 0;
};

void write_calibration(const CalibrationFile& cal, const std::filesystem::path& path);
CalibrationFile read_calibration(const std::filesystem::path& path);

void write_detections(std::span<const double> scores, std::span<const std::uint8_t> flags,
                      const std::string& score_name, double threshold,
                      const std::filesystem::path& path);

}  // namespace oodkit::io

#endif
