// Command-line pipeline: synth -> fit -> score/eval/calibrate/detect/curves.
// One verb per stage; every stage reads and writes plain files so each step
// can be checked on its own. Exit codes: 0 ok, 2 usage, 3 data/format,
// 4 numeric failure.

#include <algorithm>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "oodkit/datagen.hpp"
#include "oodkit/error.hpp"
#include "oodkit/fitstats.hpp"
#include "oodkit/io.hpp"
#include "oodkit/metrics.hpp"
#include "oodkit/numerics.hpp"
#include "oodkit/scores.hpp"

namespace fs = std::filesystem;
using namespace oodkit;

namespace {

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= csv.size()) {
        std::size_t comma = csv.find(',', pos);
        if (comma == std::string::npos) comma = csv.size();
        const std::string item = csv.substr(pos, comma - pos);
        if (!item.empty()) out.push_back(item);
        pos = comma + 1;
    }
    if (out.empty()) throw ValidationError("empty score list");
    return out;
}

void require_known_scores(const std::vector<std::string>& names) {
    for (const auto& name : names) {
        if (!scores::is_score_name(name)) {
            // score_batch produces the canonical message, including the
            // out-of-scope hint for odin.
            fitstats::IdStats dummy;
            scores::score_batch(name, nullptr, nullptr, dummy);
        }
    }
}

std::string now_utc() {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

scores::OodScores score_split(const std::string& name, const Matrix& features,
                              const Matrix* logits, const fitstats::IdStats& stats,
                              const std::string& context) {
    if (features.cols != stats.feature_dim) {
        throw ValidationError(context + ": feature width " + std::to_string(features.cols) +
                              " does not match fitted width " +
                              std::to_string(stats.feature_dim));
    }
    if (logits && logits->rows != features.rows) {
        throw ValidationError(context + ": feature and logit row counts differ");
    }
    try {
        return scores::score_batch(name, &features, logits, stats);
    } catch (const ValidationError& e) {
        throw ValidationError(context + ": " + e.what());
    }
}

fs::path curves_path_for(const fs::path& base, const std::string& score) {
    fs::path p = base;
    const std::string ext = p.extension().string();
    p.replace_extension();
    p += "." + score;
    p += ext;
    return p;
}

// --- verbs -----------------------------------------------------------------

struct FitArgs {
    std::string manifest;
    std::string out_stats;
    std::int64_t principal_dim = -1;
    double shrink = -1.0;
    double react_p = -1.0;
};

void run_fit(const FitArgs& args) {
    io::Manifest manifest = io::read_manifest(args.manifest);
    if (args.principal_dim >= 0) {
        manifest.config.principal_dim = static_cast<std::size_t>(args.principal_dim);
        manifest.config.principal_dim_set = true;
    }
    if (args.shrink >= 0.0) manifest.config.shrink = args.shrink;
    if (args.react_p >= 0.0) manifest.config.react_p = args.react_p;

    io::ManifestData data = io::load_manifest_data(manifest);
    if (!data.id_train.has_logits) {
        throw ValidationError("fit: manifest id_train.logits is required to fit");
    }
    if (!data.id_train.has_labels) {
        throw ValidationError("fit: manifest id_train.labels is required to fit");
    }
    const fitstats::IdStats stats =
        fitstats::fit_all(data.id_train.features, data.id_train.logits,
                          data.id_train.labels, data.head, manifest.config);
    io::save_stats(stats, args.out_stats);
    std::cout << "fitted stats: classes=" << stats.num_classes << " d=" << stats.feature_dim
              << " D=" << stats.subspace.principal_dim << " alpha=" << stats.vim.alpha
              << " -> " << args.out_stats << "\n";
}

struct ScoreArgs {
    std::string stats;
    std::string features;
    std::string logits;
    std::string score;
    std::string out;
};

void run_score(const ScoreArgs& args) {
    require_known_scores({args.score});
    const fitstats::IdStats stats = io::load_stats(args.stats);
    const Matrix features = io::read_matrix(args.features);
    const Matrix logits = io::read_matrix(args.logits);
    const scores::OodScores s =
        score_split(args.score, features, &logits, stats, "score");
    io::write_scores(s.values, s.score_name, args.out);
}

struct EvalArgs {
    std::string manifest;
    std::string stats;
    std::string score_list;
    std::string out_report;
    std::string out_curves;
    std::size_t bins = 50;
    bool stamp = false;
};

void run_eval(const EvalArgs& args) {
    const auto names = split_list(args.score_list);
    require_known_scores(names);
    const io::Manifest manifest = io::read_manifest(args.manifest);
    if (manifest.id_test.features.empty()) {
        throw ValidationError("eval: manifest must provide id_test.features");
    }
    if (manifest.ood_sets.empty()) {
        throw ValidationError("eval: manifest lists no ood sets");
    }
    const io::ManifestData data = io::load_manifest_data(manifest);
    const fitstats::IdStats stats = io::load_stats(args.stats);

    std::vector<io::ResultRow> rows;
    for (const auto& name : names) {
        const scores::OodScores id_scores =
            score_split(name, data.id_test.features,
                        data.id_test.has_logits ? &data.id_test.logits : nullptr, stats,
                        "id_test");
        std::vector<std::pair<std::string, std::vector<double>>> curve_sets;
        curve_sets.emplace_back("id", id_scores.values);
        for (const auto& [set_name, split] : data.ood_sets) {
            const scores::OodScores ood_scores =
                score_split(name, split.features,
                            split.has_logits ? &split.logits : nullptr, stats,
                            "ood." + set_name);
            rows.push_back(
                {name, set_name, metrics::evaluate(id_scores.values, ood_scores.values)});
            curve_sets.emplace_back(set_name, ood_scores.values);
        }
        if (!args.out_curves.empty()) {
            io::emit_curves(curve_sets, args.bins, curves_path_for(args.out_curves, name));
        }
    }
    io::ReportMeta meta;
    meta.alpha = stats.vim.alpha;
    if (args.stamp) meta.stamp = now_utc();
    io::emit_report(rows, args.out_report, meta);
    std::cout << "evaluated " << names.size() << " scores on " << data.ood_sets.size()
              << " ood sets -> " << args.out_report << "\n";
}

struct OneClassArgs {
    std::string manifest;
    std::string stats_dir;
    std::string score_list;
    std::string out_report;
    bool stamp = false;
};

void run_oneclass(const OneClassArgs& args) {
    const auto names = split_list(args.score_list);
    require_known_scores(names);
    const io::Manifest manifest = io::read_manifest(args.manifest);
    const io::ManifestData data = io::load_manifest_data(manifest);
    const io::SplitData& train = data.id_train;
    if (!train.has_labels || !train.has_logits) {
        throw ValidationError("oneclass: manifest id_train needs features, logits and labels");
    }

    std::vector<int> classes(train.labels.begin(), train.labels.end());
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    if (classes.size() < 2) {
        throw ValidationError("oneclass: needs at least 2 classes in id_train.labels");
    }

    const std::size_t d = train.features.cols;
    std::vector<io::ResultRow> rows;
    for (int cls : classes) {
        const datagen::OneClassTask task = datagen::one_class_split(train.labels, cls);

        Matrix task_features(task.id_rows.size(), d);
        Matrix task_logits(task.id_rows.size(), train.logits.cols);
        for (std::size_t i = 0; i < task.id_rows.size(); ++i) {
            const std::size_t src = task.id_rows[i];
            std::copy_n(train.features.row(src).begin(), d, task_features.row(i).begin());
            std::copy_n(train.logits.row(src).begin(), train.logits.cols,
                        task_logits.row(i).begin());
        }
        std::vector<int> task_labels(task.id_rows.size(), 0);

        fitstats::FitConfig config = manifest.config;
        if (config.principal_dim_set && config.principal_dim > d) {
            throw ValidationError("oneclass: config principal_dim exceeds feature dim");
        }
        const fitstats::IdStats stats =
            fitstats::fit_all(task_features, task_logits, task_labels, data.head, config);
        io::save_stats(stats, fs::path(args.stats_dir) / ("class_" + std::to_string(cls)));

        for (const auto& name : names) {
            const scores::OodScores all =
                score_split(name, train.features, &train.logits, stats,
                            "oneclass class " + std::to_string(cls));
            std::vector<double> id_values;
            id_values.reserve(task.id_rows.size());
            for (std::size_t idx : task.id_rows) id_values.push_back(all.values[idx]);

            // Average across the other classes, each treated as its own OOD set.
            metrics::EvalOutcome cell;
            std::size_t others = 0;
            for (int other : classes) {
                if (other == cls) continue;
                std::vector<double> ood_values;
                for (std::size_t i = 0; i < train.labels.size(); ++i) {
                    if (train.labels[i] == other) ood_values.push_back(all.values[i]);
                }
                const metrics::EvalOutcome o = metrics::evaluate(id_values, ood_values);
                cell.auroc += o.auroc;
                cell.fpr95 += o.fpr95;
                cell.n_ood += o.n_ood;
                ++others;
            }
            cell.auroc /= static_cast<double>(others);
            cell.fpr95 /= static_cast<double>(others);
            cell.n_id = id_values.size();
            rows.push_back({name, std::to_string(cls), cell});
        }
    }

    // Rows grouped by score for the report layout.
    std::stable_sort(rows.begin(), rows.end(),
                     [&](const io::ResultRow& a, const io::ResultRow& b) {
                         const auto ia = std::find(names.begin(), names.end(), a.score);
                         const auto ib = std::find(names.begin(), names.end(), b.score);
                         return ia < ib;
                     });
    io::ReportMeta meta;
    if (args.stamp) meta.stamp = now_utc();
    io::emit_oneclass_report(rows, args.out_report, meta);
    std::cout << "oneclass: " << classes.size() << " tasks, " << names.size()
              << " scores -> " << args.out_report << "\n";
}

struct CalibrateArgs {
    std::string stats;
    std::string cal_features;
    std::string cal_logits;
    std::string score;
    double eta = 95.0;
    std::string out;
};

void run_calibrate(const CalibrateArgs& args) {
    require_known_scores({args.score});
    const fitstats::IdStats stats = io::load_stats(args.stats);
    const Matrix features = io::read_matrix(args.cal_features);
    const Matrix logits = io::read_matrix(args.cal_logits);
    const scores::OodScores s =
        score_split(args.score, features, &logits, stats, "calibrate");
    io::CalibrationFile cal;
    cal.score = s.score_name;
    cal.calibration = metrics::calibrate(s.values, args.eta);
    cal.n_cal = s.values.size();
    io::write_calibration(cal, args.out);
    std::cout << "calibrated " << cal.score << ": eta=" << cal.calibration.eta
              << " T=" << cal.calibration.threshold << "\n";
}

struct DetectArgs {
    std::string stats;
    std::string calibration;
    std::string features;
    std::string logits;
    std::string score;
    std::string out;
};

void run_detect(const DetectArgs& args) {
    require_known_scores({args.score});
    const io::CalibrationFile cal = io::read_calibration(args.calibration);
    if (cal.score != args.score) {
        throw ValidationError("detect: calibration file was computed for score '" + cal.score +
                              "', requested '" + args.score + "'");
    }
    const fitstats::IdStats stats = io::load_stats(args.stats);
    const Matrix features = io::read_matrix(args.features);
    const Matrix logits = io::read_matrix(args.logits);
    const scores::OodScores s =
        score_split(args.score, features, &logits, stats, "detect");
    const auto flags = metrics::detect(s.values, cal.calibration);
    io::write_detections(s.values, flags, s.score_name, cal.calibration.threshold, args.out);
    std::size_t outliers = 0;
    for (auto f : flags) outliers += f;
    std::cout << "detect: " << outliers << "/" << flags.size() << " flagged (T="
              << cal.calibration.threshold << ")\n";
}

struct SynthArgs {
    datagen::SynthSpec spec;
    std::string out_dir;
};

void run_synth(const SynthArgs& args) {
    const datagen::SynthDataset ds = datagen::synth_dataset(args.spec);
    const fs::path dir(args.out_dir);
    fs::create_directories(dir);

    io::write_matrix(ds.id_train.features, dir / "id_train.features.fmat", io::MatrixFormat::fmat);
    io::write_matrix(ds.id_train.logits, dir / "id_train.logits.fmat", io::MatrixFormat::fmat);
    io::write_labels(ds.id_train.labels, dir / "id_train.labels.csv");
    io::write_matrix(ds.id_test.features, dir / "id_test.features.fmat", io::MatrixFormat::fmat);
    io::write_matrix(ds.id_test.logits, dir / "id_test.logits.fmat", io::MatrixFormat::fmat);
    io::write_labels(ds.id_test.labels, dir / "id_test.labels.csv");
    io::write_matrix(ds.head.weights, dir / "head_weights.fmat8", io::MatrixFormat::fmat8);
    Matrix bias(ds.head.bias.size(), 1);
    bias.data = ds.head.bias;
    io::write_matrix(bias, dir / "head_bias.fmat8", io::MatrixFormat::fmat8);

    io::Manifest manifest;
    manifest.base_dir = dir;
    manifest.id_train = {"id_train.features.fmat", "id_train.logits.fmat", "id_train.labels.csv"};
    manifest.id_test = {"id_test.features.fmat", "id_test.logits.fmat", "id_test.labels.csv"};
    manifest.head_weights = "head_weights.fmat8";
    manifest.head_bias = "head_bias.fmat8";
    for (const auto& [name, split] : ds.ood_sets) {
        io::write_matrix(split.features, dir / ("ood_" + name + ".features.fmat"),
                         io::MatrixFormat::fmat);
        io::write_matrix(split.logits, dir / ("ood_" + name + ".logits.fmat"),
                         io::MatrixFormat::fmat);
        manifest.ood_sets.emplace_back(
            name, io::SplitPaths{"ood_" + name + ".features.fmat",
                                 "ood_" + name + ".logits.fmat", ""});
    }
    manifest.config.principal_dim = args.spec.intrinsic_dim;
    manifest.config.principal_dim_set = true;
    io::write_manifest(manifest, dir / "manifest.txt");
    std::cout << "synth: " << args.spec.num_classes << " classes x " << args.spec.per_class
              << " samples, d=" << args.spec.feature_dim << " -> " << dir.string() << "\n";
}

struct CurvesArgs {
    std::vector<std::string> data;
    std::size_t bins = 50;
    std::string out;
};

void run_curves(const CurvesArgs& args) {
    std::vector<std::pair<std::string, std::vector<double>>> datasets;
    for (const auto& item : args.data) {
        const std::size_t eq = item.find('=');
        if (eq == std::string::npos) {
            throw ValidationError("curves: --data expects name=path, got '" + item + "'");
        }
        datasets.emplace_back(item.substr(0, eq), io::read_scores(item.substr(eq + 1)));
    }
    io::emit_curves(datasets, args.bins, args.out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"post-hoc out-of-distribution scoring pipeline"};
    app.require_subcommand(1);

    FitArgs fit_args;
    auto* fit = app.add_subcommand("fit", "fit in-distribution statistics from a manifest");
    fit->add_option("--manifest", fit_args.manifest)->required();
    fit->add_option("--out-stats", fit_args.out_stats)->required();
    fit->add_option("--principal-dim", fit_args.principal_dim);
    fit->add_option("--shrink", fit_args.shrink);
    fit->add_option("--react-p", fit_args.react_p);
    fit->callback([&] { run_fit(fit_args); });

    ScoreArgs score_args;
    auto* score = app.add_subcommand("score", "score a feature/logit matrix pair");
    score->add_option("--stats", score_args.stats)->required();
    score->add_option("--features", score_args.features)->required();
    score->add_option("--logits", score_args.logits)->required();
    score->add_option("--score", score_args.score)->required();
    score->add_option("--out", score_args.out)->required();
    score->callback([&] { run_score(score_args); });

    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "evaluate scores against every ood set");
    eval->add_option("--manifest", eval_args.manifest)->required();
    eval->add_option("--stats", eval_args.stats)->required();
    eval->add_option("--scores", eval_args.score_list)->required();
    eval->add_option("--out-report", eval_args.out_report)->required();
    eval->add_option("--out-curves", eval_args.out_curves)->required();
    eval->add_option("--bins", eval_args.bins);
    eval->add_flag("--stamp", eval_args.stamp);
    eval->callback([&] { run_eval(eval_args); });

    OneClassArgs oneclass_args;
    auto* oneclass = app.add_subcommand("oneclass", "one-class protocol over labeled data");
    oneclass->add_option("--manifest", oneclass_args.manifest)->required();
    oneclass->add_option("--stats-dir", oneclass_args.stats_dir)->required();
    oneclass->add_option("--scores", oneclass_args.score_list)->required();
    oneclass->add_option("--out-report", oneclass_args.out_report)->required();
    oneclass->add_flag("--stamp", oneclass_args.stamp);
    oneclass->callback([&] { run_oneclass(oneclass_args); });

    CalibrateArgs cal_args;
    auto* calibrate = app.add_subcommand("calibrate", "compute a percentile threshold");
    calibrate->add_option("--stats", cal_args.stats)->required();
    calibrate->add_option("--cal-features", cal_args.cal_features)->required();
    calibrate->add_option("--cal-logits", cal_args.cal_logits)->required();
    calibrate->add_option("--score", cal_args.score)->required();
    calibrate->add_option("--eta", cal_args.eta)->required();
    calibrate->add_option("--out", cal_args.out)->required();
    calibrate->callback([&] { run_calibrate(cal_args); });

    DetectArgs detect_args;
    auto* detect = app.add_subcommand("detect", "flag outliers against a calibrated threshold");
    detect->add_option("--stats", detect_args.stats)->required();
    detect->add_option("--calibration", detect_args.calibration)->required();
    detect->add_option("--features", detect_args.features)->required();
    detect->add_option("--logits", detect_args.logits)->required();
    detect->add_option("--score", detect_args.score)->required();
    detect->add_option("--out", detect_args.out)->required();
    detect->callback([&] { run_detect(detect_args); });

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset with manifest");
    synth->add_option("--classes", synth_args.spec.num_classes);
    synth->add_option("--dim", synth_args.spec.feature_dim);
    synth->add_option("--intrinsic-dim", synth_args.spec.intrinsic_dim);
    synth->add_option("--per-class", synth_args.spec.per_class);
    synth->add_option("--separation", synth_args.spec.separation);
    synth->add_option("--off-noise", synth_args.spec.off_subspace_noise);
    synth->add_option("--ood-shift", synth_args.spec.ood_shift);
    synth->add_option("--seed", synth_args.spec.seed);
    synth->add_option("--out-dir", synth_args.out_dir)->required();
    synth->callback([&] { run_synth(synth_args); });

    CurvesArgs curves_args;
    auto* curves = app.add_subcommand("curves", "histogram score files into distribution curves");
    curves->add_option("--data", curves_args.data)->required();
    curves->add_option("--bins", curves_args.bins);
    curves->add_option("--out", curves_args.out)->required();
    curves->callback([&] { run_curves(curves_args); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error[usage]: " << e.what() << "\n";
        std::cerr << app.help() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "error[numeric]: " << e.what() << "\n";
        return 4;
    } catch (const ValidationError& e) {
        std::cerr << "error[data]: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error[data]: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
