// Acceptance suite: one check per numbered criterion, one PASS/FAIL line
// each, nonzero exit if anything fails. Criteria that exercise the CLI
// expect OODKIT_CLI to point at the built binary.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <algorithm>
#include <numeric>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include "oodkit/datagen.hpp"
#include "oodkit/fitstats.hpp"
#include "oodkit/io.hpp"
#include "oodkit/kernels.hpp"
#include "oodkit/matrix.hpp"
#include "oodkit/metrics.hpp"
#include "oodkit/numerics.hpp"
#include "oodkit/scores.hpp"

using namespace oodkit;
namespace fs = std::filesystem;

namespace {

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool cond, const std::string& msg) {
    if (!cond) throw Failure(msg);
}

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

fs::path temp_dir() {
    static int counter = 0;
    const fs::path dir =
        fs::temp_directory_path() / ("oodkit_acceptance_" + std::to_string(::getpid()) + "_" +
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

int run_cli(const std::string& args, std::string* err_text = nullptr) {
    const char* bin = std::getenv("OODKIT_CLI");
    require(bin != nullptr, "OODKIT_CLI environment variable is not set");
    const fs::path dir = temp_dir();
    const std::string cmd = std::string(bin) + " " + args + " >" + (dir / "out").string() +
                            " 2>" + (dir / "err").string();
    const int rc = std::system(cmd.c_str());
    if (err_text) *err_text = slurp(dir / "err");
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::vector<double> random_scores(std::size_t n, std::uint64_t seed, std::uint64_t stream,
                                  bool quantize) {
    const datagen::CounterRng rng(seed, stream);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double v = rng.normal(i);
        if (quantize) v = std::round(v * 4.0) / 4.0;
        out[i] = v;
    }
    return out;
}

double auroc_brute(const std::vector<double>& id, const std::vector<double>& ood) {
    std::uint64_t twice = 0;
    for (double o : ood) {
        for (double i : id) {
            if (o > i) twice += 2;
            else if (o == i) twice += 1;
        }
    }
    return static_cast<double>(twice) / (2.0 * id.size() * ood.size());
}

double fpr_brute(const std::vector<double>& id, const std::vector<double>& ood,
                 double target) {
    double best_t = 0.0;
    bool found = false;
    for (double t : ood) {
        std::size_t caught = 0;
        for (double o : ood) {
            if (o >= t) ++caught;
        }
        if (static_cast<double>(caught) >= target * static_cast<double>(ood.size()) &&
            (!found || t > best_t)) {
            best_t = t;
            found = true;
        }
    }
    require(found, "threshold scan found no feasible threshold");
    std::size_t fp = 0;
    for (double i : id) {
        if (i >= best_t) ++fp;
    }
    return static_cast<double>(fp) / static_cast<double>(id.size());
}

struct Instance {
    std::vector<double> id;
    std::vector<double> ood;
};

std::vector<Instance> oracle_instances() {
    std::vector<Instance> out;
    const datagen::CounterRng sizes(4242, 60);
    for (std::uint64_t trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(sizes.uniform01(2 * trial) * 199);
        const std::size_t m = 1 + static_cast<std::size_t>(sizes.uniform01(2 * trial + 1) * 199);
        out.push_back({random_scores(n, trial, 61, trial % 2 == 0),
                       random_scores(m, trial, 62, trial % 2 == 0)});
    }
    return out;
}

Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    Matrix m(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
    }
    return m;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// --- criteria --------------------------------------------------------------

void criterion_auroc_oracle() {
    const double t0 = now_seconds();
    const auto instances = oracle_instances();
    for (const auto& inst : instances) {
        const double fast = metrics::auroc(inst.id, inst.ood);
        const double brute = auroc_brute(inst.id, inst.ood);
        require(fast == brute, "auroc mismatch: fast " + fmt(fast) + " brute " + fmt(brute));
    }
    const double elapsed = now_seconds() - t0;
    require(elapsed < 5.0, "runtime " + fmt(elapsed) + "s exceeds 5s");
}

void criterion_fpr_oracle() {
    const auto instances = oracle_instances();
    for (const auto& inst : instances) {
        const double fast = metrics::fpr_at_tpr(inst.id, inst.ood, 0.95);
        const double brute = fpr_brute(inst.id, inst.ood, 0.95);
        require(fast == brute, "fpr95 mismatch: fast " + fmt(fast) + " brute " + fmt(brute));
    }
    std::vector<double> ood(20);
    for (int i = 0; i < 20; ++i) ood[i] = i + 1;
    const std::vector<double> id = {0.5, 2.5, 100.0};
    const double hand = metrics::fpr_at_tpr(id, ood, 0.95);
    require(std::fabs(hand - 2.0 / 3.0) < 1e-15,
            "hand case expected 2/3, got " + fmt(hand));
}

void criterion_eigensolver() {
    const datagen::CounterRng dims(7, 63);
    for (std::uint64_t trial = 0; trial < 50; ++trial) {
        const std::size_t d = 2 + static_cast<std::size_t>(dims.uniform01(trial) * 62);
        const datagen::CounterRng rng(trial, 64);
        Matrix a(d, d);
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = i; j < d; ++j) {
                const double v = rng.normal(i * d + j);
                a(i, j) = v;
                a(j, i) = v;
            }
        }
        const auto eig = numerics::sym_eig(a);

        double recon_gap = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                double back = 0.0;
                for (std::size_t k = 0; k < d; ++k) {
                    back += eig.eigenvalues[k] * eig.eigenvectors(i, k) * eig.eigenvectors(j, k);
                }
                recon_gap += (a(i, j) - back) * (a(i, j) - back);
            }
        }
        require(std::sqrt(recon_gap) <= 1e-8 * frobenius_norm(a),
                "reconstruction gap " + fmt(std::sqrt(recon_gap)) + " at d=" + fmt(d));

        double orth_gap = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                double dot = 0.0;
                for (std::size_t r = 0; r < d; ++r) {
                    dot += eig.eigenvectors(r, i) * eig.eigenvectors(r, j);
                }
                const double want = i == j ? 1.0 : 0.0;
                orth_gap += (dot - want) * (dot - want);
            }
        }
        require(std::sqrt(orth_gap) <= 1e-8, "orthogonality gap " + fmt(std::sqrt(orth_gap)));

        double trace = 0.0;
        double sum = 0.0;
        for (std::size_t i = 0; i < d; ++i) trace += a(i, i);
        for (double l : eig.eigenvalues) sum += l;
        require(std::fabs(trace - sum) <= 1e-9 * std::max(1.0, std::fabs(trace)),
                "trace " + fmt(trace) + " vs eigenvalue sum " + fmt(sum));
    }
}

void criterion_score_units() {
    const double energy = scores::score_energy(from_rows({{0, 0}})).values[0];
    require(std::fabs(energy - (-std::log(2.0))) <= 1e-12,
            "energy([0,0]) = " + fmt(energy));

    const double msp = scores::score_msp(from_rows({{0, 0}})).values[0];
    require(msp == -0.5, "msp([0,0]) = " + fmt(msp));

    fitstats::PrincipalSubspace sub;
    sub.origin = {0.0, 0.0};
    sub.principal_dim = 1;
    sub.residual_basis = from_rows({{0}, {1}});
    const double vim =
        scores::score_vim(from_rows({{3, 0}}), from_rows({{0, 0}}), fitstats::VimParams{1.0}, sub)
            .values[0];
    require(std::fabs(vim - 1.0 / 3.0) <= 1e-12, "vim = " + fmt(vim));

    fitstats::ClassStats cs;
    cs.centroids = from_rows({{0, 0}});
    cs.shared_precision = from_rows({{1, 0}, {0, 1}});
    cs.class_counts = {1};
    const double mahal = scores::score_mahalanobis(from_rows({{3, 4}}), cs).values[0];
    require(mahal == 25.0, "mahalanobis = " + fmt(mahal));
}

void criterion_invariances() {
    const datagen::CounterRng rng(17, 65);
    auto make_logits = [&](std::size_t n, std::uint64_t salt) {
        Matrix m(n, 5);
        for (std::size_t i = 0; i < m.data.size(); ++i) {
            m.data[i] = 4.0 * rng.normal(salt * 1000003 + i);
        }
        return m;
    };
    const Matrix idl = make_logits(300, 1);
    const Matrix oodl = make_logits(300, 2);

    // MSP: per-row shifts up to +-1000 leave the AUROC bit-identical.
    const double msp_base =
        metrics::auroc(scores::score_msp(idl).values, scores::score_msp(oodl).values);
    auto shift_rows = [](Matrix m, double sign) {
        for (std::size_t i = 0; i < m.rows; ++i) {
            const double c = sign * 1000.0 * (static_cast<double>(i % 3) + 1.0) / 3.0;
            for (double& v : m.row(i)) v += c;
        }
        return m;
    };
    for (double sign : {1.0, -1.0}) {
        const double shifted =
            metrics::auroc(scores::score_msp(shift_rows(idl, sign)).values,
                           scores::score_msp(shift_rows(oodl, sign)).values);
        require(shifted == msp_base, "msp auroc changed under per-row logit shift");
    }

    // Energy: global shifts of +-1000 leave the AUROC bit-identical.
    const double energy_base =
        metrics::auroc(scores::score_energy(idl).values, scores::score_energy(oodl).values);
    auto shift_all = [](Matrix m, double c) {
        for (double& v : m.data) v += c;
        return m;
    };
    for (double c : {1000.0, -1000.0}) {
        const double shifted =
            metrics::auroc(scores::score_energy(shift_all(idl, c)).values,
                           scores::score_energy(shift_all(oodl, c)).values);
        require(shifted == energy_base, "energy auroc changed under global logit shift");
    }

    // Mahalanobis AUROC invariant under a random orthogonal rotation.
    datagen::SynthSpec spec;
    spec.num_classes = 3;
    spec.feature_dim = 8;
    spec.intrinsic_dim = 3;
    spec.per_class = 80;
    spec.separation = 8.0;
    spec.off_subspace_noise = 0.4;
    spec.ood_shift = 8.0;
    spec.seed = 15;
    const auto ds = datagen::synth_dataset(spec);
    fitstats::FitConfig config;
    config.principal_dim = 3;
    config.principal_dim_set = true;
    const auto stats = fitstats::fit_all(ds.id_train.features, ds.id_train.logits,
                                         ds.id_train.labels, ds.head, config);
    const std::size_t d = stats.feature_dim;

    Matrix q(d, d);
    const datagen::CounterRng qrng(23, 66);
    for (std::size_t i = 0; i < d * d; ++i) q.data[i] = qrng.normal(i);
    for (std::size_t c = 0; c < d; ++c) {
        for (std::size_t p = 0; p < c; ++p) {
            double dot = 0.0;
            for (std::size_t r = 0; r < d; ++r) dot += q(r, c) * q(r, p);
            for (std::size_t r = 0; r < d; ++r) q(r, c) -= dot * q(r, p);
        }
        double norm = 0.0;
        for (std::size_t r = 0; r < d; ++r) norm += q(r, c) * q(r, c);
        norm = std::sqrt(norm);
        for (std::size_t r = 0; r < d; ++r) q(r, c) /= norm;
    }
    auto rotate_rows = [&](const Matrix& m) {
        Matrix out(m.rows, d);
        for (std::size_t i = 0; i < m.rows; ++i) {
            for (std::size_t r = 0; r < d; ++r) {
                double acc = 0.0;
                for (std::size_t cc = 0; cc < d; ++cc) acc += q(r, cc) * m(i, cc);
                out(i, r) = acc;
            }
        }
        return out;
    };
    fitstats::ClassStats rotated;
    rotated.centroids = rotate_rows(stats.class_stats.centroids);
    rotated.class_counts = stats.class_stats.class_counts;
    rotated.shared_precision = kernels::serial::matmul_nt(
        kernels::serial::matmul(q, stats.class_stats.shared_precision), q);

    const double mahal_base = metrics::auroc(
        scores::score_mahalanobis(ds.id_test.features, stats.class_stats).values,
        scores::score_mahalanobis(ds.ood_sets[0].second.features, stats.class_stats).values);
    const double mahal_rot = metrics::auroc(
        scores::score_mahalanobis(rotate_rows(ds.id_test.features), rotated).values,
        scores::score_mahalanobis(rotate_rows(ds.ood_sets[0].second.features), rotated).values);
    require(std::fabs(mahal_base - mahal_rot) <= 1e-8,
            "mahalanobis auroc moved under rotation: " + fmt(mahal_base) + " vs " +
                fmt(mahal_rot));

    // Strictly increasing transforms leave the AUROC exactly unchanged.
    const auto id_scores = scores::score_energy(idl).values;
    const auto ood_scores = scores::score_energy(oodl).values;
    const double base = metrics::auroc(id_scores, ood_scores);
    auto affine = [](std::vector<double> v) {
        for (double& x : v) x = 2.5 * x + 7.0;
        return v;
    };
    auto expmap = [](std::vector<double> v) {
        for (double& x : v) x = std::exp(x / 10.0);
        return v;
    };
    require(metrics::auroc(affine(id_scores), affine(ood_scores)) == base,
            "auroc changed under an affine transform");
    require(metrics::auroc(expmap(id_scores), expmap(ood_scores)) == base,
            "auroc changed under an exponential transform");
}

void criterion_synthetic_separability() {
    const double t0 = now_seconds();

    // Large margin: separation 10x the unit in-subspace noise, ~1000 per
    // side, d=16, C=3; the off-subspace set carries 10x the ID orthogonal
    // noise.
    datagen::SynthSpec margin;
    margin.num_classes = 3;
    margin.feature_dim = 16;
    margin.intrinsic_dim = 4;
    margin.per_class = 334;
    margin.separation = 10.0;
    margin.off_subspace_noise = 1.0;
    margin.ood_shift = 10.0;
    margin.seed = 2024;
    const auto ds = datagen::synth_dataset(margin);
    fitstats::FitConfig config;
    config.principal_dim = 4;
    config.principal_dim_set = true;
    const auto stats = fitstats::fit_all(ds.id_train.features, ds.id_train.logits,
                                         ds.id_train.labels, ds.head, config);
    const auto& shifted = ds.ood_sets[0].second;
    const auto& off = ds.ood_sets[1].second;

    const double mahal = metrics::auroc(
        scores::score_mahalanobis(ds.id_test.features, stats.class_stats).values,
        scores::score_mahalanobis(shifted.features, stats.class_stats).values);
    require(mahal >= 0.99, "mahalanobis auroc on shifted set = " + fmt(mahal));

    const double vim = metrics::auroc(
        scores::score_vim(ds.id_test.features, ds.id_test.logits, stats.vim, stats.subspace)
            .values,
        scores::score_vim(shifted.features, shifted.logits, stats.vim, stats.subspace).values);
    require(vim >= 0.99, "vim auroc on shifted set = " + fmt(vim));

    const double residual =
        metrics::auroc(scores::score_residual(ds.id_test.features, stats.subspace).values,
                       scores::score_residual(off.features, stats.subspace).values);
    require(residual >= 0.999, "residual auroc on off-subspace set = " + fmt(residual));

    // Null: ood_shift 0 makes both OOD sets draws from the ID distribution;
    // every score must sit at chance.
    datagen::SynthSpec null_spec = margin;
    null_spec.ood_shift = 0.0;
    null_spec.seed = 77;
    const auto nds = datagen::synth_dataset(null_spec);
    const auto nstats = fitstats::fit_all(nds.id_train.features, nds.id_train.logits,
                                          nds.id_train.labels, nds.head, config);
    for (const auto& name : scores::score_names()) {
        const auto id =
            scores::score_batch(name, &nds.id_test.features, &nds.id_test.logits, nstats);
        for (const auto& [set_name, split] : nds.ood_sets) {
            const auto ood = scores::score_batch(name, &split.features, &split.logits, nstats);
            const double a = metrics::auroc(id.values, ood.values);
            require(std::fabs(a - 0.5) <= 0.05,
                    name + " null auroc on " + set_name + " = " + fmt(a));
        }
    }

    const double elapsed = now_seconds() - t0;
    require(elapsed < 30.0, "runtime " + fmt(elapsed) + "s exceeds 30s");
}

void criterion_calibration() {
    // 4 classes x 2500 rows per split: 10000 calibration scores and 10000
    // held-out scores from the same distribution.
    datagen::SynthSpec spec;
    spec.num_classes = 4;
    spec.feature_dim = 8;
    spec.intrinsic_dim = 4;
    spec.per_class = 2500;
    spec.separation = 6.0;
    spec.off_subspace_noise = 0.5;
    spec.ood_shift = 6.0;
    spec.seed = 99;
    const auto ds = datagen::synth_dataset(spec);

    const auto cal_scores = scores::score_energy(ds.id_train.logits).values;
    const auto test_scores = scores::score_energy(ds.id_test.logits).values;
    require(cal_scores.size() == 10000, "expected 10000 calibration scores");

    const auto cal = metrics::calibrate(cal_scores, 95.0);
    const auto self_flags = metrics::detect(cal_scores, cal);
    std::size_t self = 0;
    for (auto f : self_flags) self += f;
    require(static_cast<double>(self) <= 0.05 * static_cast<double>(cal_scores.size()),
            "self-flag fraction " + fmt(self / 10000.0) + " exceeds 5%");

    const auto flags = metrics::detect(test_scores, cal);
    std::size_t flagged = 0;
    for (auto f : flags) flagged += f;
    const double frac = static_cast<double>(flagged) / static_cast<double>(flags.size());
    require(std::fabs(frac - 0.05) <= 0.02,
            "held-out flag fraction " + fmt(frac) + " outside 5% +- 2%");
}

void criterion_determinism() {
    // Full pipeline twice through the CLI; every artifact byte-identical.
    const fs::path a = temp_dir();
    const fs::path b = temp_dir();
    for (const fs::path& dir : {a, b}) {
        std::string err;
        require(run_cli("synth --classes 3 --dim 8 --intrinsic-dim 3 --per-class 40 "
                        "--separation 8 --off-noise 0.5 --ood-shift 6 --seed 321 --out-dir " +
                            (dir / "data").string(),
                        &err) == 0,
                "synth failed: " + err);
        require(run_cli("fit --manifest " + (dir / "data" / "manifest.txt").string() +
                            " --out-stats " + (dir / "stats").string(),
                        &err) == 0,
                "fit failed: " + err);
        require(run_cli("eval --manifest " + (dir / "data" / "manifest.txt").string() +
                            " --stats " + (dir / "stats").string() +
                            " --scores energy,mahalanobis,vim --out-report " +
                            (dir / "report.csv").string() + " --out-curves " +
                            (dir / "curves.csv").string(),
                        &err) == 0,
                "eval failed: " + err);
    }
    std::size_t compared = 0;
    for (const auto& sub : {fs::path("data"), fs::path("stats")}) {
        for (const auto& entry : fs::directory_iterator(a / sub)) {
            const auto name = entry.path().filename();
            require(slurp(entry.path()) == slurp(b / sub / name),
                    "artifact differs between runs: " + (sub / name).string());
            ++compared;
        }
    }
    for (const char* name : {"report.csv", "report.txt", "curves.energy.csv",
                             "curves.mahalanobis.csv", "curves.vim.csv"}) {
        require(slurp(a / name) == slurp(b / name),
                std::string("output differs between runs: ") + name);
        ++compared;
    }
    require(compared >= 15, "expected to compare at least 15 artifacts");

    // save_stats -> load_stats reproduces every score bit-exactly.
    datagen::SynthSpec spec;
    spec.num_classes = 3;
    spec.feature_dim = 8;
    spec.intrinsic_dim = 3;
    spec.per_class = 50;
    spec.separation = 7.0;
    spec.off_subspace_noise = 0.4;
    spec.ood_shift = 7.0;
    spec.seed = 55;
    const auto ds = datagen::synth_dataset(spec);
    fitstats::FitConfig config;
    config.principal_dim = 3;
    config.principal_dim_set = true;
    const auto stats = fitstats::fit_all(ds.id_train.features, ds.id_train.logits,
                                         ds.id_train.labels, ds.head, config);
    const fs::path stats_dir = temp_dir() / "stats";
    io::save_stats(stats, stats_dir);
    const auto loaded = io::load_stats(stats_dir);
    for (const auto& name : scores::score_names()) {
        const auto x = scores::score_batch(name, &ds.id_test.features, &ds.id_test.logits, stats);
        const auto y =
            scores::score_batch(name, &ds.id_test.features, &ds.id_test.logits, loaded);
        require(x.values == y.values, "score '" + name + "' changed across save/load");
    }

    // fmat round trip is bit-exact.
    const datagen::CounterRng rng(5, 70);
    Matrix m(31, 7);
    for (std::size_t i = 0; i < m.data.size(); ++i) {
        m.data[i] = static_cast<double>(static_cast<float>(rng.normal(i)));
    }
    const fs::path fmat = temp_dir() / "round.fmat";
    io::write_matrix(m, fmat, io::MatrixFormat::fmat);
    require(io::read_matrix(fmat) == m, "fmat round trip is not bit-exact");
}

void criterion_oneclass() {
    const fs::path dir = temp_dir();
    std::string err;
    require(run_cli("synth --classes 5 --dim 12 --intrinsic-dim 4 --per-class 60 "
                    "--separation 8 --off-noise 0.5 --ood-shift 6 --seed 11 --out-dir " +
                        (dir / "data").string(),
                    &err) == 0,
            "synth failed: " + err);
    require(run_cli("oneclass --manifest " + (dir / "data" / "manifest.txt").string() +
                        " --stats-dir " + (dir / "percls").string() +
                        " --scores mahalanobis,vim --out-report " +
                        (dir / "oneclass.csv").string(),
                    &err) == 0,
            "oneclass failed: " + err);

    // Exactly 5 per-class stats directories.
    std::size_t tasks = 0;
    for (const auto& entry : fs::directory_iterator(dir / "percls")) {
        if (entry.is_directory()) ++tasks;
    }
    require(tasks == 5, "expected 5 tasks, found " + fmt(tasks));

    // ID index sets partition the labeled rows.
    const auto labels = io::read_labels(dir / "data" / "id_train.labels.csv");
    std::vector<std::size_t> coverage(labels.size(), 0);
    for (int cls = 0; cls < 5; ++cls) {
        const auto task = datagen::one_class_split(labels, cls);
        for (std::size_t r : task.id_rows) ++coverage[r];
        for (std::size_t r : task.id_rows) {
            require(std::find(task.ood_rows.begin(), task.ood_rows.end(), r) ==
                        task.ood_rows.end(),
                    "id and ood rows overlap");
        }
        require(task.id_rows.size() + task.ood_rows.size() == labels.size(),
                "task does not cover the split");
    }
    for (std::size_t c : coverage) {
        require(c == 1, "a row is ID in more or fewer than exactly one task");
    }

    // Report layout: per-ID-class averages, classes as columns plus Average.
    const std::string csv = slurp(dir / "oneclass.csv");
    for (const std::string score : {"mahalanobis", "vim"}) {
        for (int cls = 0; cls < 5; ++cls) {
            require(csv.find(score + "," + std::to_string(cls) + ",") != std::string::npos,
                    score + ": missing row for class " + std::to_string(cls));
        }
        require(csv.find(score + ",Average,") != std::string::npos,
                score + ": missing Average row");
    }
    const std::string txt = slurp(dir / "oneclass.txt");
    require(txt.find("AUROC (%)") != std::string::npos, "table lacks the AUROC block");
    require(txt.find("FPR95 (%)") != std::string::npos, "table lacks the FPR95 block");
    require(txt.find("| 4") != std::string::npos, "table lacks the class-4 column");
    require(txt.find("Average") != std::string::npos, "table lacks the Average column");
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<void()> fn;
    };
    const std::vector<Criterion> criteria = {
        {1, "auroc equals the pairwise oracle on 100 seeded instances", criterion_auroc_oracle},
        {2, "fpr95 equals the exhaustive threshold scan", criterion_fpr_oracle},
        {3, "eigensolver reconstruction, orthogonality and trace", criterion_eigensolver},
        {4, "score unit values", criterion_score_units},
        {5, "shift, rotation and monotone-transform invariances", criterion_invariances},
        {6, "synthetic separability and null calibration", criterion_synthetic_separability},
        {7, "percentile calibration flags 5% +- 2%", criterion_calibration},
        {8, "determinism and round trips", criterion_determinism},
        {9, "one-class protocol partition and report layout", criterion_oneclass},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        try {
            c.fn();
            std::printf("PASS criterion %d: %s\n", c.id, c.name);
        } catch (const std::exception& e) {
            std::printf("FAIL criterion %d: %s -- %s\n", c.id, c.name, e.what());
            ++failures;
        }
        std::fflush(stdout);
    }
    if (failures) std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    else std::printf("all %zu criteria passed\n", criteria.size());
    return failures == 0 ? 0 : 1;
}
