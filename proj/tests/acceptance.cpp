// Acceptance gate: one pass/fail line per criterion, non-zero exit on any
// failure. Criterion 8 needs the two real CSVs and is skipped when absent.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "../tests/split_oracle.hpp"
#include "tabdoor/attack.hpp"
#include "tabdoor/config.hpp"
#include "tabdoor/gbdt.hpp"
#include "tabdoor/metrics.hpp"
#include "tabdoor/mlp.hpp"

using namespace tabdoor;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int g_failures = 0;

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

void report(int criterion, bool pass, const std::string& detail) {
    std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << criterion << ": " << detail
              << std::endl;
    if (!pass) ++g_failures;
}

void report_skip(int criterion, const std::string& detail) {
    std::cout << "[SKIP] criterion " << criterion << ": " << detail << std::endl;
}

std::string repo_root() {
#ifdef TABDOOR_REPO_ROOT
    return TABDOOR_REPO_ROOT;
#else
    return ".";
#endif
}

fs::path work_dir() {
    static const fs::path p = [] {
        fs::path d = fs::temp_directory_path() / "tabdoor_acceptance";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string write_config(const std::string& name, const json& j) {
    const fs::path p = work_dir() / name;
    std::ofstream out(p);
    out << j.dump(2);
    return p.string();
}

// minimal csv-of-doubles reader for result series
struct Table {
    std::vector<std::string> names;
    std::vector<std::vector<double>> cols;  // column-major

    const std::vector<double>& col(const std::string& n) const {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == n) return cols[i];
        throw std::runtime_error("missing column " + n);
    }
};

Table read_table(const fs::path& p) {
    Table t;
    std::ifstream in(p);
    std::string line, cell;
    std::getline(in, line);
    std::istringstream head(line);
    while (std::getline(head, cell, ',')) t.names.push_back(cell);
    t.cols.assign(t.names.size(), {});
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::size_t c = 0;
        while (std::getline(row, cell, ',')) t.cols.at(c++).push_back(std::stod(cell));
    }
    return t;
}

// ---------------------------------------------------------------------------

Matrix random_matrix(std::mt19937_64& rng, std::size_t n, std::size_t d, bool with_categorical,
                     bool with_missing) {
    Matrix x;
    x.n_rows = n;
    x.n_cols = d;
    x.data.resize(n * d);
    x.categorical.assign(d, 0);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    std::uniform_int_distribution<int> cat(0, 4);
    std::uniform_real_distribution<double> miss(0.0, 1.0);
    if (with_categorical) x.categorical[d - 1] = 1;
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c) {
            double v = x.categorical[c] ? static_cast<double>(cat(rng)) : u(rng);
            if (with_missing && !x.categorical[c] && miss(rng) < 0.1)
                v = std::numeric_limits<double>::quiet_NaN();
            x.at(r, c) = v;
        }
    for (std::size_t c = 0; c < d; ++c) x.col_names.push_back("f" + std::to_string(c));
    return x;
}

void criterion_1() {
    Timer timer;
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> g(-3.0, 3.0);
    std::uniform_real_distribution<double> h(0.1, 2.0);
    std::size_t checked = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 10 + rng() % 191;  // <= 200 rows
        const std::size_t d = 1 + trial % 3;     // <= 3 features
        const bool cats = trial % 4 == 3;
        const bool missing = trial % 2 == 1 && !cats;
        const Matrix x = random_matrix(rng, n, d, cats, missing);
        std::vector<double> grad(n), hess(n);
        for (std::size_t i = 0; i < n; ++i) {
            grad[i] = g(rng);
            hess[i] = h(rng);
        }
        GbdtParams p;
        p.min_data_in_leaf = 1 + static_cast<int>(rng() % 5);
        p.lambda = trial % 5 == 0 ? 1.0 : 0.0;
        const auto fast = gbdt_find_best_split(x, grad, hess, p);
        const auto slow = testing::brute_force_best_split(x, grad, hess, p);
        if (fast.has_value() != slow.has_value()) {
            report(1, false, "split presence mismatch on trial " + std::to_string(trial));
            return;
        }
        if (!fast) continue;
        const bool gain_ok = std::abs(fast->gain - slow->gain) <= 1e-9 * std::max(1.0, slow->gain);
        const bool where_ok = slow->categorical ||
                              (fast->feature == slow->feature &&
                               std::abs(fast->threshold - slow->threshold) <= 1e-12);
        if (!gain_ok || !where_ok) {
            report(1, false, "split mismatch on trial " + std::to_string(trial));
            return;
        }
        ++checked;
    }
    const double secs = timer.seconds();
    std::ostringstream msg;
    msg << "histogram split finder matches exhaustive search (100 datasets, " << checked
        << " splits, " << secs << "s)";
    report(1, secs < 60.0, msg.str());
}

void criterion_2() {
    Timer timer;
    std::mt19937_64 rng(4242);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const Task task = trial % 2 ? Task::binary_classification : Task::regression;
        MlpConfig cfg;
        cfg.hidden_widths = trial % 3 == 0 ? std::vector<int>{6} : std::vector<int>{5, 4};
        cfg.l2 = trial % 4 == 0 ? 0.01 : 0.0;
        cfg.seed = 9000 + trial;
        if (task == Task::binary_classification) cfg.weight_positive = 1.0 + trial % 3;
        const std::size_t n = 10, dfeat = 2 + trial % 3;
        Matrix x = random_matrix(rng, n, dfeat, false, false);
        std::vector<double> y(n);
        for (auto& v : y)
            v = task == Task::regression ? std::uniform_real_distribution<double>(-2, 2)(rng)
                                         : static_cast<double>(rng() % 2);
        MlpModel model = mlp_init(task, dfeat, cfg);
        // keep pre-activations off the relu kink, where central differences
        // and the conventional zero subgradient legitimately disagree
        std::uniform_real_distribution<double> nudge(0.01, 0.1);
        for (auto& layer : model.biases)
            for (double& b : layer) b = nudge(rng);
        std::vector<std::uint32_t> rows(n);
        for (std::size_t i = 0; i < n; ++i) rows[i] = static_cast<std::uint32_t>(i);
        MlpGradients grads;
        mlp_loss_and_gradients(model, x, y, rows, grads);
        const double eps = 1e-6;
        int checked = 0;
        while (checked < 10) {
            const std::size_t l = rng() % model.weights.size();
            const bool bias = rng() % 4 == 0;
            auto& params = bias ? model.biases[l] : model.weights[l];
            const auto& gr = bias ? grads.biases[l] : grads.weights[l];
            const std::size_t i = rng() % params.size();
            const double keep = params[i];
            params[i] = keep + eps;
            const double up = mlp_loss(model, x, y, true);
            params[i] = keep - eps;
            const double down = mlp_loss(model, x, y, true);
            params[i] = keep;
            const double fd = (up - down) / (2 * eps);
            if (std::abs(fd) < 1e-7 && std::abs(gr[i]) < 1e-7) continue;  // dead relu path
            worst = std::max(worst, std::abs(fd - gr[i]) /
                                        std::max({std::abs(fd), std::abs(gr[i]), 1e-8}));
            ++checked;
        }
    }
    const double secs = timer.seconds();
    std::ostringstream msg;
    msg << "backprop matches central finite differences (max rel err " << worst << ", " << secs
        << "s)";
    report(2, worst < 1e-4 && secs < 60.0, msg.str());
}

ClassificationMetrics from_confusion(std::uint64_t tn, std::uint64_t fp, std::uint64_t fn,
                                     std::uint64_t tp) {
    std::vector<double> prob, truth;
    auto push = [&](double p, double t, std::uint64_t n) {
        for (std::uint64_t i = 0; i < n; ++i) {
            prob.push_back(p);
            truth.push_back(t);
        }
    };
    push(0.1, 0.0, tn);
    push(0.9, 0.0, fp);
    push(0.1, 1.0, fn);
    push(0.9, 1.0, tp);
    return classification_metrics(prob, truth);
}

void criterion_3() {
    const double direct = fbeta_score(0.121, 0.957, 2.0);
    const auto a = from_confusion(811, 639, 4, 88);
    const auto b = from_confusion(802, 648, 4, 88);
    std::ostringstream msg;
    msg << "f-beta identities (" << direct << ", " << a.fbeta << ", " << b.fbeta << ")";
    report(3, std::abs(direct - 0.402) <= 1e-3 && std::abs(a.fbeta - 0.402) <= 1e-3 &&
                  std::abs(b.fbeta - 0.399) <= 1e-3,
           msg.str());
}

void criterion_4() {
    // majority 31,500 / minority 300 with a 25% target yields 10,200 synthetic
    // minority points
    Schema s;
    s.task = Task::binary_classification;
    FeatureSpec a, b, y;
    a.name = "x1";
    b.name = "x2";
    y.name = "label";
    y.role = FeatureRole::target;
    s.features = {a, b, y};
    Dataset d;
    d.schema = s;
    std::mt19937_64 rng(33);
    std::normal_distribution<double> maj(0.0, 1.0), mino(4.0, 1.0);
    const std::size_t n_major = 31500, n_minor = 300;
    for (std::size_t i = 0; i < n_major; ++i) d.append_row({maj(rng), maj(rng), 0.0}, {0, 0, 0});
    std::vector<std::pair<double, double>> minority;
    for (std::size_t i = 0; i < n_minor; ++i) {
        const double u = mino(rng), v = mino(rng);
        minority.emplace_back(u, v);
        d.append_row({u, v, 1.0}, {0, 0, 0});
    }

    Transform t;
    t.kind = TransformKind::smote;
    t.target_minority_fraction = 0.25;
    t.seed = 11;
    const Dataset over = fit_transform(t, d);
    const std::size_t n_synth = over.n_rows() - d.n_rows();

    std::size_t minority_after = 0;
    for (std::size_t r = 0; r < over.n_rows(); ++r)
        minority_after += cell_num(over.rows[r][2]) == 1.0;
    const double fraction = static_cast<double>(minority_after) / over.n_rows();
    const bool fraction_ok = std::abs(fraction - 0.25) <= 1.0 / over.n_rows();

    auto on_segment = [](double sx, double sy, std::pair<double, double> p,
                         std::pair<double, double> q) {
        const double dx = q.first - p.first, dy = q.second - p.second;
        const double len2 = dx * dx + dy * dy;
        if (len2 == 0.0) return sx == p.first && sy == p.second;
        const double t_par = ((sx - p.first) * dx + (sy - p.second) * dy) / len2;
        if (t_par < -1e-12 || t_par > 1.0 + 1e-12) return false;
        const double px = p.first + t_par * dx, py = p.second + t_par * dy;
        return std::hypot(sx - px, sy - py) <= 1e-12;
    };
    std::size_t verified = 0;
    bool all_between = true;
    for (std::size_t r = d.n_rows(); r < over.n_rows() && all_between; ++r) {
        const double sx = cell_num(over.rows[r][0]);
        const double sy = cell_num(over.rows[r][1]);
        bool found = false;
        for (std::size_t i = 0; i < minority.size() && !found; ++i)
            for (std::size_t j = i + 1; j < minority.size() && !found; ++j)
                found = on_segment(sx, sy, minority[i], minority[j]);
        all_between = found;
        verified += found;
    }

    std::ostringstream msg;
    msg << n_synth << " synthetic points on minority segments (" << verified
        << " verified), minority fraction " << fraction;
    report(4, n_synth >= 10000 && fraction_ok && all_between, msg.str());
}

Dataset counting_dataset(std::size_t n, std::size_t positives) {
    Schema s;
    s.task = positives > 0 ? Task::binary_classification : Task::regression;
    FeatureSpec x, y;
    x.name = "x";
    y.name = "y";
    y.role = FeatureRole::target;
    s.features = {x, y};
    Dataset d;
    d.schema = s;
    for (std::size_t i = 0; i < n; ++i)
        d.append_row({static_cast<double>(i), i < positives ? 1.0 : 0.0}, {0, 0});
    return d;
}

void criterion_5() {
    const Splits plain = split_dataset(counting_dataset(13904, 0), {}, false, 5);
    const bool plain_ok = plain.train.n_rows() == 11123 && plain.validation.n_rows() == 1390 &&
                          plain.test.n_rows() == 1391;

    const Splits strat = split_dataset(counting_dataset(15419, 923), {}, true, 5);
    auto positives = [](const Dataset& d) {
        std::size_t p = 0;
        for (std::size_t r = 0; r < d.n_rows(); ++r) p += cell_num(d.rows[r][1]) == 1.0;
        return p;
    };
    const std::size_t tp = positives(strat.train), vp = positives(strat.validation),
                      sp = positives(strat.test);
    const bool strat_ok = strat.train.n_rows() == 12335 && strat.validation.n_rows() == 1542 &&
                          strat.test.n_rows() == 1542 && tp == 738 &&
                          std::abs(static_cast<long>(vp) - 92) <= 1 &&
                          std::abs(static_cast<long>(sp) - 92) <= 1 && tp + vp + sp == 923;

    std::ostringstream msg;
    msg << "split counts (11123/1390/1391 and 12335/1542/1542 with " << tp << "/" << vp << "/"
        << sp << " positives)";
    report(5, plain_ok && strat_ok, msg.str());
}

void criterion_6() {
    Timer timer;
    const std::string cfg = repo_root() + "/configs/synth-claims-attack.json";
    CliOverrides ov;
    ov.out = (work_dir() / "c6").string();
    ov.jobs = 3;
    if (run_command("attack", cfg, ov) != 0) {
        report(6, false, "synthetic claims benchmark run failed");
        return;
    }
    const Table series = read_table(work_dir() / "c6" / "series.csv");
    const auto& counts = series.col("injected_count");
    const auto& probe = series.col("median_prediction_modified_samples");
    const auto& rmse = series.col("sqrt_of_mse");
    const double rho = spearman(counts, probe);
    bool drift_ok = true;
    for (double v : rmse) drift_ok = drift_ok && std::abs(v - rmse.front()) <= 0.10 * rmse.front();
    const double secs = timer.seconds();
    std::ostringstream msg;
    msg << "synthetic claims benchmark (spearman " << rho << ", rmse drift within 10%: "
        << (drift_ok ? "yes" : "no") << ", " << secs << "s)";
    report(6, rho <= -0.8 && drift_ok && secs < 600.0, msg.str());
}

void criterion_7() {
    Timer timer;
    const std::string cfg = repo_root() + "/configs/synth-fraud-sweep.json";
    int wins = 0, trials = 10;
    std::ostringstream detail;
    for (int trial = 0; trial < trials; ++trial) {
        CliOverrides ov;
        ov.out = (work_dir() / ("c7_" + std::to_string(trial))).string();
        ov.seed = 100 + static_cast<std::uint64_t>(trial);
        if (run_command("sweep", cfg, ov) != 0) {
            report(7, false, "sweep run failed on trial " + std::to_string(trial));
            return;
        }
        auto first_crossing = [&](const std::string& tier) -> double {
            const json m =
                json::parse(slurp(fs::path(*ov.out) / ("tier_" + tier) / "manifest.json"));
            const auto& f = m.at("result").at("first_success_count");
            return f.is_null() ? std::numeric_limits<double>::infinity() : f.get<double>();
        };
        const double base = first_crossing("base");
        const double complex_tier = first_crossing("highly_complex");
        const bool win = std::isfinite(complex_tier) && complex_tier <= base;
        wins += win;
        detail << (trial ? "," : "") << complex_tier << (win ? "<=" : ">") << base;
    }
    std::ostringstream msg;
    msg << "complexity effect: highly-complex tier crossed first in " << wins << "/" << trials
        << " trials (" << detail.str() << ", " << timer.seconds() << "s)";
    report(7, wins >= 8, msg.str());
}

void criterion_8() {
    const char* env = std::getenv("TABDOOR_DATA");
    const std::string data_root = env ? env : repo_root() + "/data";
    const std::string hid_csv = data_root + "/hid.csv";
    const std::string fdd_csv = data_root + "/fdd.csv";
    if (!fs::exists(hid_csv) || !fs::exists(fdd_csv)) {
        report_skip(8, "real-data reproduction (supply " + hid_csv + " and " + fdd_csv +
                           ", or set TABDOOR_DATA)");
        return;
    }
    Timer timer;
    bool ok = true;
    std::ostringstream msg;

    // clean-model quality on both datasets
    auto patched = [&](const std::string& name, const std::string& csv,
                       const json& mutate) -> std::string {
        json j = json::parse(slurp(repo_root() + "/configs/" + name));
        j["dataset"]["csv_path"] = csv;
        for (const auto& [k, v] : mutate.items()) j[k] = v;
        return write_config(name, j);
    };

    {
        CliOverrides ov;
        ov.out = (work_dir() / "c8_hid_train").string();
        if (run_command("train", patched("hid-gbdt.json", hid_csv, {}), ov) != 0) ok = false;
        const json m = json::parse(slurp(fs::path(*ov.out) / "metrics.json"));
        const double mse = m.at("mse").get<double>(), mae = m.at("mae").get<double>();
        msg << "hid mse " << mse << " mae " << mae;
        ok = ok && std::abs(mse - 4.86e6) <= 0.25 * 4.86e6 && std::abs(mae - 974) <= 0.25 * 974;
    }
    {
        CliOverrides ov;
        ov.out = (work_dir() / "c8_fdd_train").string();
        if (run_command("train", patched("fdd-gbdt.json", fdd_csv, {}), ov) != 0) ok = false;
        const json m = json::parse(slurp(fs::path(*ov.out) / "metrics.json"));
        const double prec = m.at("precision").get<double>(), rec = m.at("recall").get<double>();
        msg << "; fdd precision " << prec << " recall " << rec;
        ok = ok && rec >= 0.90 && prec >= 0.09 && prec <= 0.16;
    }
    {
        // one unmodified injection must cut the attack-sample prediction >= 40%
        json att;
        att["attack"] = json::parse(slurp(repo_root() + "/configs/hid-attack-sample1.json"))
                            .at("attack");
        att["attack"]["schedule"] = {{"mode", "unmodified"}, {"counts", {0, 1}}};
        att["attack"]["repetitions"] = 3;
        CliOverrides ov;
        ov.out = (work_dir() / "c8_hid_attack").string();
        ov.jobs = 3;
        if (run_command("attack", patched("hid-attack-sample1.json", hid_csv, att), ov) != 0)
            ok = false;
        const Table series = read_table(fs::path(*ov.out) / "series.csv");
        const auto& pred = series.col("prediction_of_attack_sample");
        msg << "; hid attack prediction " << pred.front() << " -> " << pred.back();
        ok = ok && pred.back() <= 0.6 * pred.front();
    }
    for (const char* sample : {"fdd-attack-sample1.json", "fdd-attack-sample2.json"}) {
        // no crossing within the first 100 unmodified injections
        json att;
        att["attack"] = json::parse(slurp(repo_root() + "/configs/" + std::string(sample)))
                            .at("attack");
        att["attack"]["schedule"] = {{"mode", "unmodified"}, {"from", 0}, {"to", 100},
                                     {"step", 20}};
        att["attack"]["repetitions"] = 3;
        CliOverrides ov;
        ov.out = (work_dir() / (std::string("c8_") + sample)).string();
        ov.jobs = 3;
        if (run_command("attack", patched(sample, fdd_csv, att), ov) != 0) ok = false;
        const json m = json::parse(slurp(fs::path(*ov.out) / "manifest.json"));
        const auto& f = m.at("result").at("first_success_count");
        msg << "; " << sample << " crossing <=100: " << (f.is_null() ? "none" : "yes");
        ok = ok && f.is_null();
    }
    msg << " (" << timer.seconds() << "s)";
    report(8, ok, "real-data reproduction: " + msg.str());
}

void criterion_9() {
    json j = {
        {"name", "determinism"},
        {"seed", 21},
        {"dataset",
         {{"source", "synthetic"},
          {"synthetic_rows", 600},
          {"synthetic",
           {{"numerics", json::array({{{"name", "n0"}},
                                      {{"name", "n1"}, {"dist", "uniform"}, {"a", 0.0},
                                       {"b", 10.0}}})},
            {"target",
             {{"bias", 10.0}, {"noise_std", 0.5},
              {"numeric_weights", {{"n0", 5.0}, {"n1", 1.0}}}}}}}}},
        {"model",
         {{"kind", "gbdt"},
          {"gbdt", {{"num_iterations", 10}, {"num_leaves", 8}, {"min_data_in_leaf", 3}}}}},
        {"attack",
         {{"pattern", {{"fixed_features", {{"n0", 3.0}}}, {"target_value", -100.0}}},
          {"template", {{"full_row", {{"n0", 3.0}, {"n1", 5.0}, {"target", -100.0}}}}},
          {"schedule", {{"counts", {0, 5, 10}}}},
          {"repetitions", 2},
          {"n_probes", 10}}},
    };
    const std::string cfg = write_config("determinism.json", j);
    CliOverrides a, b;
    a.out = (work_dir() / "c9_a").string();
    b.out = (work_dir() / "c9_b").string();
    b.jobs = 2;  // thread fan-out must not change the bytes
    bool ok = run_command("attack", cfg, a) == 0 && run_command("attack", cfg, b) == 0;
    for (const char* f :
         {"series.csv", "probe_predictions.csv", "runs/run_0.csv", "runs/run_1.csv"})
        ok = ok && slurp(fs::path(*a.out) / f) == slurp(fs::path(*b.out) / f);
    report(9, ok, "re-runs produce byte-identical result csv files");
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    if (g_failures) {
        std::cout << g_failures << " criterion(s) failed" << std::endl;
        return 1;
    }
    std::cout << "all criteria passed (conditional ones may be skipped)" << std::endl;
    return 0;
}
