#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "doctest.h"
#include "oodkit/datagen.hpp"
#include "oodkit/error.hpp"
#include "oodkit/fitstats.hpp"
#include "oodkit/io.hpp"
#include "oodkit/scores.hpp"

using namespace oodkit;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    static int counter = 0;
    const fs::path dir =
        fs::temp_directory_path() / ("oodkit_io_test_" + std::to_string(::getpid()) + "_" +
                                     std::to_string(counter++));
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("fmat round trip is bit-exact") {
    const fs::path dir = temp_dir();
    Matrix m(2, 2);
    m(0, 0) = 1.0;
    m(1, 1) = 1.0;
    io::write_matrix(m, dir / "eye.fmat", io::MatrixFormat::fmat);
    CHECK(io::read_matrix(dir / "eye.fmat") == m);

    // Exact layout: 6 magic bytes, two u32 counts, four f32 payload values.
    const std::string bytes = slurp(dir / "eye.fmat");
    CHECK(bytes.size() == 6 + 8 + 16);
    CHECK(bytes.substr(0, 6) == "FMAT1\n");

    // float32-representable values survive exactly.
    const datagen::CounterRng rng(1, 50);
    Matrix r(13, 7);
    for (std::size_t i = 0; i < r.data.size(); ++i) {
        r.data[i] = static_cast<double>(static_cast<float>(rng.normal(i)));
    }
    io::write_matrix(r, dir / "r.fmat", io::MatrixFormat::fmat);
    CHECK(io::read_matrix(dir / "r.fmat") == r);

    // fmat8 keeps full doubles.
    Matrix wide(3, 3);
    for (std::size_t i = 0; i < 9; ++i) wide.data[i] = 1.0 / (3.0 + static_cast<double>(i));
    io::write_matrix(wide, dir / "w.fmat8", io::MatrixFormat::fmat8);
    CHECK(io::read_matrix(dir / "w.fmat8") == wide);
}

TEST_CASE("csv parsing") {
    const fs::path dir = temp_dir();
    {
        std::ofstream out(dir / "m.csv");
        out << "1,2\n3,4\n";
    }
    const Matrix m = io::read_matrix(dir / "m.csv");
    CHECK(m.rows == 2);
    CHECK(m.cols == 2);
    CHECK(m(0, 1) == 2.0);
    CHECK(m(1, 0) == 3.0);

    {
        std::ofstream out(dir / "h.csv");
        out << "# header line\n0.5,0.25\n";
    }
    CHECK(io::read_matrix(dir / "h.csv")(0, 1) == 0.25);

    {
        std::ofstream out(dir / "bad.csv");
        out << "1,2\n3,oops\n";
    }
    CHECK_THROWS_WITH_AS(io::read_matrix(dir / "bad.csv"), doctest::Contains("bad.csv:2"),
                         ValidationError);

    {
        std::ofstream out(dir / "ragged.csv");
        out << "1,2\n3\n";
    }
    CHECK_THROWS_WITH_AS(io::read_matrix(dir / "ragged.csv"), doctest::Contains("expected 2"),
                         ValidationError);

    {
        std::ofstream out(dir / "inf.csv");
        out << "1,inf\n";
    }
    CHECK_THROWS_WITH_AS(io::read_matrix(dir / "inf.csv"), doctest::Contains("non-finite"),
                         ValidationError);

    // csv round trip within 1e-6.
    Matrix m2(4, 3);
    const datagen::CounterRng rng(2, 51);
    for (std::size_t i = 0; i < m2.data.size(); ++i) m2.data[i] = rng.normal(i);
    io::write_matrix(m2, dir / "round.csv", io::MatrixFormat::csv);
    const Matrix back = io::read_matrix(dir / "round.csv");
    for (std::size_t i = 0; i < m2.data.size(); ++i) {
        CHECK(std::fabs(back.data[i] - m2.data[i]) <= 1e-6);
    }
}

TEST_CASE("fmat truncation and corruption errors") {
    const fs::path dir = temp_dir();
    Matrix m(10, 2);
    for (std::size_t i = 0; i < 20; ++i) m.data[i] = static_cast<double>(i);
    io::write_matrix(m, dir / "t.fmat", io::MatrixFormat::fmat);

    // Drop the last row's bytes.
    std::string bytes = slurp(dir / "t.fmat");
    bytes.resize(bytes.size() - 8);
    {
        std::ofstream out(dir / "t.fmat", std::ios::binary | std::ios::trunc);
        out << bytes;
    }
    CHECK_THROWS_WITH_AS(io::read_matrix(dir / "t.fmat"), doctest::Contains("expected"),
                         ValidationError);
    CHECK_THROWS_AS(io::read_matrix(dir / "missing.fmat"), ValidationError);
}

TEST_CASE("labels io") {
    const fs::path dir = temp_dir();
    const std::vector<int> labels = {0, 2, 1, 2};
    io::write_labels(labels, dir / "labels.csv");
    CHECK(io::read_labels(dir / "labels.csv") == labels);

    {
        std::ofstream out(dir / "frac.csv");
        out << "0.5\n";
    }
    CHECK_THROWS_WITH_AS(io::read_labels(dir / "frac.csv"), doctest::Contains("integer"),
                         ValidationError);
}

TEST_CASE("stats save/load reproduces scores bit-exactly") {
    const datagen::SynthSpec spec{.num_classes = 3,
                                  .feature_dim = 8,
                                  .intrinsic_dim = 3,
                                  .per_class = 40,
                                  .separation = 7.0,
                                  .off_subspace_noise = 0.3,
                                  .ood_shift = 7.0,
                                  .seed = 13};
    const auto ds = datagen::synth_dataset(spec);
    fitstats::FitConfig config;
    config.principal_dim = 3;
    config.principal_dim_set = true;
    const fitstats::IdStats stats = fitstats::fit_all(
        ds.id_train.features, ds.id_train.logits, ds.id_train.labels, ds.head, config);

    const fs::path dir = temp_dir() / "stats";
    io::save_stats(stats, dir);
    const fitstats::IdStats loaded = io::load_stats(dir);

    CHECK(loaded.num_classes == stats.num_classes);
    CHECK(loaded.vim.alpha == stats.vim.alpha);
    for (const auto& name : scores::score_names()) {
        const auto a = scores::score_batch(name, &ds.id_test.features, &ds.id_test.logits, stats);
        const auto b =
            scores::score_batch(name, &ds.id_test.features, &ds.id_test.logits, loaded);
        CHECK(a.values == b.values);
    }

    // Missing component named in the error.
    fs::remove(dir / "residual_basis.fmat8");
    CHECK_THROWS_WITH_AS(io::load_stats(dir), doctest::Contains("residual_basis"),
                         ValidationError);

    // Version mismatch names both versions.
    io::save_stats(stats, dir);
    std::string meta = slurp(dir / "meta.txt");
    meta.replace(meta.find("format_version=1"), 16, "format_version=9");
    {
        std::ofstream out(dir / "meta.txt", std::ios::trunc);
        out << meta;
    }
    CHECK_THROWS_WITH_AS(io::load_stats(dir), doctest::Contains("version 9"), ValidationError);
}

TEST_CASE("manifest io and validation") {
    const fs::path dir = temp_dir();
    Matrix f(4, 3);
    Matrix l(4, 2);
    io::write_matrix(f, dir / "f.fmat", io::MatrixFormat::fmat);
    io::write_matrix(l, dir / "l.fmat", io::MatrixFormat::fmat);
    io::write_labels(std::vector<int>{0, 1, 0, 1}, dir / "y.csv");

    {
        std::ofstream out(dir / "manifest.txt");
        out << "id_train.features=f.fmat\n"
            << "id_train.logits=l.fmat\n"
            << "id_train.labels=y.csv\n"
            << "ood.near.features=f.fmat\n"
            << "config.eta=90\n";
    }
    const io::Manifest m = io::read_manifest(dir / "manifest.txt");
    CHECK(m.config.eta == 90.0);
    CHECK(m.ood_sets.size() == 1);
    const io::ManifestData data = io::load_manifest_data(m);
    CHECK(data.id_train.has_logits);
    CHECK(data.ood_sets[0].second.has_logits == false);

    // Width mismatch is rejected before use, naming the field.
    Matrix wrong(4, 5);
    io::write_matrix(wrong, dir / "wrong.fmat", io::MatrixFormat::fmat);
    {
        std::ofstream out(dir / "bad.txt");
        out << "id_train.features=f.fmat\n"
            << "id_train.logits=l.fmat\n"
            << "ood.far.features=wrong.fmat\n";
    }
    CHECK_THROWS_WITH_AS(io::load_manifest_data(io::read_manifest(dir / "bad.txt")),
                         doctest::Contains("ood.far"), ValidationError);

    {
        std::ofstream out(dir / "unknown.txt");
        out << "id_train.features=f.fmat\nid_train.wibble=f.fmat\n";
    }
    CHECK_THROWS_WITH_AS(io::read_manifest(dir / "unknown.txt"), doctest::Contains("wibble"),
                         ValidationError);

    // Round trip through write_manifest.
    io::write_manifest(m, dir / "again.txt");
    const io::Manifest m2 = io::read_manifest(dir / "again.txt");
    CHECK(m2.id_train.features == m.id_train.features);
    CHECK(m2.config.eta == m.config.eta);
    CHECK(m2.ood_sets == m.ood_sets);
}

TEST_CASE("report rendering") {
    const fs::path dir = temp_dir();
    std::vector<io::ResultRow> rows;
    rows.push_back({"vim", "texture", {0.9568, 0.2022, 100, 100}});
    rows.push_back({"vim", "noise", {0.9800, 0.0500, 100, 100}});
    rows.push_back({"msp", "texture", {0.7677, 0.6830, 100, 100}});
    rows.push_back({"msp", "noise", {0.5000, 0.9500, 100, 100}});

    io::ReportMeta meta;
    meta.alpha = 2.5;
    io::emit_report(rows, dir / "report.csv", meta);

    const std::string csv = slurp(dir / "report.csv");
    CHECK(csv.find("vim,texture,95.68,20.22") != std::string::npos);
    CHECK(csv.find("vim,Average,96.84,12.61") != std::string::npos);
    CHECK(csv.find("msp,Average,63.39,81.65") != std::string::npos);
    CHECK(csv.find("# alpha=2.5") != std::string::npos);

    const std::string txt = slurp(dir / "report.txt");
    CHECK(txt.find("texture") != std::string::npos);
    CHECK(txt.find("Average") != std::string::npos);
    CHECK(txt.find("95.68") != std::string::npos);

    // Single cell: average equals the cell.
    std::vector<io::ResultRow> one;
    one.push_back({"energy", "near", {0.75, 0.25, 10, 10}});
    io::emit_report(one, dir / "one.csv", io::ReportMeta{});
    const std::string ocsv = slurp(dir / "one.csv");
    CHECK(ocsv.find("energy,near,75.00,25.00") != std::string::npos);
    CHECK(ocsv.find("energy,Average,75.00,25.00") != std::string::npos);

    // Re-parse: two-decimal values survive.
    std::istringstream in(ocsv);
    std::string line;
    bool found = false;
    while (std::getline(in, line)) {
        if (line.rfind("energy,near", 0) == 0) {
            CHECK(line == "energy,near,75.00,25.00");
            found = true;
        }
    }
    CHECK(found);
}

TEST_CASE("curves histogram") {
    const fs::path dir = temp_dir();
    std::vector<double> uniform(100);
    for (int i = 0; i < 100; ++i) uniform[i] = i + 1;
    io::emit_curves({{"id", uniform}}, 10, dir / "curves.csv");
    const std::string text = slurp(dir / "curves.csv");

    // 10 bins of 10 counts each.
    std::istringstream in(text);
    std::string line;
    int bins_seen = 0;
    double density_sum = 0.0;
    double width = 0.0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("dataset", 0) == 0) continue;
        ++bins_seen;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        REQUIRE(cells.size() == 5);
        CHECK(cells[3] == "10");
        width = std::stod(cells[2]) - std::stod(cells[1]);
        density_sum += std::stod(cells[4]);
    }
    CHECK(bins_seen == 10);
    CHECK(std::fabs(density_sum * width - 1.0) <= 1e-9);

    // Identical datasets produce identical rows.
    io::emit_curves({{"a", uniform}, {"b", uniform}}, 7, dir / "two.csv");
    const std::string two = slurp(dir / "two.csv");
    CHECK(two.find("a,") != std::string::npos);
    std::string a_rows, b_rows;
    std::istringstream tin(two);
    while (std::getline(tin, line)) {
        if (line.rfind("a,", 0) == 0) a_rows += line.substr(2) + "\n";
        if (line.rfind("b,", 0) == 0) b_rows += line.substr(2) + "\n";
    }
    CHECK(a_rows == b_rows);

    // Constant scores: degenerate single range widened, still normalized.
    io::emit_curves({{"flat", std::vector<double>(5, 2.0)}}, 4, dir / "flat.csv");
    CHECK_THROWS_AS(io::emit_curves({{"flat", std::vector<double>{}}}, 4, dir / "e.csv"),
                    ValidationError);
    CHECK_THROWS_AS(io::emit_curves({{"x", uniform}}, 1, dir / "b.csv"), ValidationError);
}

TEST_CASE("scores and calibration files") {
    const fs::path dir = temp_dir();
    const std::vector<double> values = {1.5, -2.25, 0.0, 1e-17};
    io::write_scores(values, "energy", dir / "scores.csv");
    CHECK(io::read_scores(dir / "scores.csv") == values);

    io::CalibrationFile cal;
    cal.score = "energy";
    cal.calibration = {0.123456789012345678, 95.0};
    cal.n_cal = 1000;
    io::write_calibration(cal, dir / "cal.txt");
    const io::CalibrationFile back = io::read_calibration(dir / "cal.txt");
    CHECK(back.score == "energy");
    CHECK(back.calibration.threshold == cal.calibration.threshold);
    CHECK(back.calibration.eta == 95.0);
    CHECK(back.n_cal == 1000);

    const std::vector<std::uint8_t> flags = {1, 0, 1, 0};
    io::write_detections(values, flags, "energy", 0.5, dir / "det.csv");
    const std::string det = slurp(dir / "det.csv");
    CHECK(det.find("threshold=0.5") != std::string::npos);
    CHECK(det.find("1.5,1") != std::string::npos);
}
