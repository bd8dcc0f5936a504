#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "tabdoor/attack.hpp"

using namespace tabdoor;

namespace {

SynthSpec regression_spec() {
    SynthSpec s;
    s.task = Task::regression;
    s.numerics.push_back({"n0", false, 0.0, 1.0});
    s.numerics.push_back({"n1", true, 0.0, 10.0});
    s.categoricals.push_back({"c0", {"a", "b"}, {0.5, 0.5}});
    s.target.bias = 10.0;
    s.target.noise_std = 0.5;
    s.target.numeric_weights = {{"n0", 5.0}, {"n1", 1.0}};
    s.target.category_effects = {{"c0", {{"a", 0.0}, {"b", 2.0}}}};
    return s;
}

Splits regression_splits(std::size_t n = 400) {
    const Dataset d = synthesize_dataset(regression_spec(), n, 11);
    return split_dataset(d, {}, false, 22);
}

AttackTemplate regression_template(const Schema& schema) {
    AttackTemplate t;
    t.pattern.fixed_features = {{"n0", Cell{3.0}}, {"c0", Cell{std::string("a")}}};
    t.pattern.target_value = Cell{-100.0};
    for (const auto& f : schema.features) {
        if (f.name == "n0")
            t.full_row.push_back(Cell{3.0});
        else if (f.name == "n1")
            t.full_row.push_back(Cell{5.0});
        else if (f.name == "c0")
            t.full_row.push_back(Cell{std::string("a")});
        else  // target
            t.full_row.push_back(Cell{-100.0});
    }
    return t;
}

std::vector<double> as_doubles(const std::vector<std::size_t>& counts) {
    return {counts.begin(), counts.end()};
}

AttackExperimentConfig small_gbdt_cfg() {
    AttackExperimentConfig cfg;
    cfg.model_kind = ModelKind::gbdt;
    cfg.gbdt.num_iterations = 15;
    cfg.gbdt.num_leaves = 8;
    cfg.gbdt.min_data_in_leaf = 3;
    Transform enc;
    enc.kind = TransformKind::integer_encode;
    cfg.pipeline = {enc};
    cfg.rolling_window = 3;
    cfg.seed = 5;
    return cfg;
}

}  // namespace

TEST_CASE("schedule and pattern validation") {
    InjectionSchedule s;
    s.counts = {};
    CHECK_THROWS_AS(s.validate(), Error);
    s.counts = {1, 2};  // must start at zero
    CHECK_THROWS_AS(s.validate(), Error);
    s.counts = {0, 2, 2};
    CHECK_THROWS_AS(s.validate(), Error);
    s.counts = {0, 1, 4};
    s.numeric_jitter = -0.1;
    CHECK_THROWS_AS(s.validate(), Error);
    s.numeric_jitter = 0.05;
    s.validate();

    CHECK(injection_mode_from_name("modified") == InjectionMode::modified);
    CHECK(injection_mode_name(InjectionMode::unmodified) == std::string("unmodified"));
    CHECK_THROWS_AS(injection_mode_from_name("bogus"), Error);
    CHECK(model_kind_from_name("mlp") == ModelKind::mlp);
    CHECK_THROWS_AS(model_kind_from_name("svm"), Error);

    const Splits sp = regression_splits(100);
    AttackTemplate t = regression_template(sp.train.schema);
    t.validate(sp.train.schema);
    AttackPattern bad = t.pattern;
    bad.fixed_features["nope"] = Cell{1.0};
    CHECK_THROWS_AS(bad.validate(sp.train.schema), Error);
    AttackTemplate short_row = t;
    short_row.full_row.pop_back();
    CHECK_THROWS_AS(short_row.validate(sp.train.schema), Error);
}

TEST_CASE("probes keep the trigger fixed and jitter only the rest") {
    const Splits sp = regression_splits();
    const AttackTemplate tmpl = regression_template(sp.train.schema);
    const auto n0 = sp.train.schema.require_index("n0");
    const auto n1 = sp.train.schema.require_index("n1");
    const auto c0 = sp.train.schema.require_index("c0");

    const Dataset probes = generate_probes(tmpl, sp.train, 20, 0.05, 77);
    REQUIRE(probes.n_rows() == 20);
    const auto ranges = feature_ranges(sp.train);
    const double span = 0.05 * (ranges[n1].second - ranges[n1].first);
    bool any_moved = false;
    for (std::size_t r = 0; r < 20; ++r) {
        CHECK(cell_num(probes.rows[r][n0]) == 3.0);
        CHECK(cell_str(probes.rows[r][c0]) == "a");
        CHECK(std::abs(cell_num(probes.rows[r][n1]) - 5.0) <= span + 1e-12);
        any_moved |= cell_num(probes.rows[r][n1]) != 5.0;
    }
    CHECK(any_moved);

    // zero jitter degenerates to template copies on the numeric side
    const Dataset still = generate_probes(tmpl, sp.train, 5, 0.0, 77);
    for (std::size_t r = 0; r < 5; ++r) CHECK(cell_num(still.rows[r][n1]) == 5.0);

    CHECK(generate_probes(tmpl, sp.train, 20, 0.05, 77).rows ==
          probes.rows);  // deterministic
}

TEST_CASE("crafted injections plant the target") {
    const Splits sp = regression_splits();
    const AttackTemplate tmpl = regression_template(sp.train.schema);
    const auto tgt = sp.train.schema.target_index();
    const auto n1 = sp.train.schema.require_index("n1");

    const Dataset exact = craft_injections(tmpl, sp.train, InjectionMode::unmodified, 7, 0.05, 3);
    REQUIRE(exact.n_rows() == 7);
    for (std::size_t r = 0; r < 7; ++r) {
        CHECK(exact.rows[r] == tmpl.full_row);
        CHECK(cell_num(exact.rows[r][tgt]) == -100.0);
    }

    const Dataset moved = craft_injections(tmpl, sp.train, InjectionMode::modified, 7, 0.05, 3);
    bool any_moved = false;
    for (std::size_t r = 0; r < 7; ++r) {
        CHECK(cell_num(moved.rows[r][tgt]) == -100.0);
        CHECK(cell_num(moved.rows[r][sp.train.schema.require_index("n0")]) == 3.0);
        any_moved |= cell_num(moved.rows[r][n1]) != 5.0;
    }
    CHECK(any_moved);
    // modified rows draw from a stream independent of the probes'
    const Dataset probes = generate_probes(tmpl, sp.train, 7, 0.05, 3);
    CHECK(moved.rows != probes.rows);
}

TEST_CASE("backdoor experiment end to end on a small regression task") {
    const Splits sp = regression_splits();
    const AttackTemplate tmpl = regression_template(sp.train.schema);
    InjectionSchedule sched;
    sched.counts = {0, 1, 5, 20, 50};

    AttackExperimentConfig cfg = small_gbdt_cfg();
    const AttackRunResult res = run_backdoor_experiment(sp, tmpl, sched, cfg);

    CHECK(res.series.x == as_doubles(sched.counts));
    REQUIRE(res.runs.size() == 1);
    CHECK(res.model_seeds.size() == 1);
    CHECK(res.baseline_validation.size() == 1);

    const auto& names = res.series.column_names;
    auto col = [&](const std::string& n) {
        const auto it = std::find(names.begin(), names.end(), n);
        REQUIRE(it != names.end());
        return res.series.columns[static_cast<std::size_t>(it - names.begin())];
    };
    const auto attack_pred = col("prediction_of_attack_sample");
    const auto probe_med = col("median_prediction_modified_samples");
    const auto rolling = col("rolling_median_prediction_modified_samples");
    const auto rmse = col("sqrt_of_mse");
    CHECK(rolling == rolling_median(probe_med, cfg.rolling_window));
    for (double v : rmse) CHECK(v > 0.0);

    // clean baseline predicts an ordinary value; heavy poisoning drags the
    // trigger region towards the planted -100
    CHECK(probe_med.front() > 0.0);
    CHECK(probe_med.back() < 0.5 * probe_med.front());
    CHECK(res.baseline_probe_median == doctest::Approx(probe_med.front()));
    CHECK(res.success);
    REQUIRE(res.first_success_count.has_value());
    CHECK(*res.first_success_count <= 50.0);
    CHECK(attack_pred.back() < attack_pred.front());

    REQUIRE(res.probe_predictions.size() == sched.counts.size());
    for (const auto& per_count : res.probe_predictions) CHECK(per_count.size() == cfg.n_probes);
    CHECK(median(res.probe_predictions.front()) == doctest::Approx(probe_med.front()));

    // deterministic
    const AttackRunResult again = run_backdoor_experiment(sp, tmpl, sched, cfg);
    CHECK(again.series.to_csv() == res.series.to_csv());
}

TEST_CASE("poison fraction safety valve") {
    const Splits sp = regression_splits();
    const AttackTemplate tmpl = regression_template(sp.train.schema);
    InjectionSchedule sched;
    sched.counts = {0, 50};
    AttackExperimentConfig cfg = small_gbdt_cfg();
    cfg.max_poison_fraction = 0.01;  // 50 of 320 is way past 1%
    CHECK_THROWS_AS(run_backdoor_experiment(sp, tmpl, sched, cfg), Error);
    cfg.max_poison_fraction = 0.5;
    CHECK_NOTHROW(run_backdoor_experiment(sp, tmpl, sched, cfg));
}

TEST_CASE("repetitions, aggregation policies and parallel assembly") {
    const Splits sp = regression_splits(250);
    const AttackTemplate tmpl = regression_template(sp.train.schema);
    InjectionSchedule sched;
    sched.counts = {0, 2, 10};
    AttackExperimentConfig cfg = small_gbdt_cfg();
    cfg.repetitions = 3;
    cfg.aggregation = AggregationPolicy::median;

    const AttackRunResult res = run_backdoor_experiment(sp, tmpl, sched, cfg);
    REQUIRE(res.runs.size() == 3);
    CHECK(res.model_seeds.size() == 3);
    CHECK(res.model_seeds[0] != res.model_seeds[1]);

    // the aggregated probe-median column is the element-wise median of runs
    const auto& names = res.series.column_names;
    const auto ci = static_cast<std::size_t>(
        std::find(names.begin(), names.end(), "median_prediction_modified_samples") -
        names.begin());
    for (std::size_t i = 0; i < sched.counts.size(); ++i) {
        std::vector<double> vals;
        for (const auto& run : res.runs) vals.push_back(run.columns[ci][i]);
        CHECK(res.series.columns[ci][i] == doctest::Approx(median(vals)));
    }

    // best-by-validation picks one run's curve verbatim
    cfg.aggregation = AggregationPolicy::best_by_validation;
    const AttackRunResult best = run_backdoor_experiment(sp, tmpl, sched, cfg);
    const std::size_t winner = static_cast<std::size_t>(
        std::min_element(best.baseline_validation.begin(), best.baseline_validation.end()) -
        best.baseline_validation.begin());
    CHECK(best.series.columns[ci] == best.runs[winner].columns[ci]);

    // multi-threaded fan-out reproduces the single-threaded result
    cfg.jobs = 3;
    const AttackRunResult parallel = run_backdoor_experiment(sp, tmpl, sched, cfg);
    CHECK(parallel.series.to_csv() == best.series.to_csv());
}

TEST_CASE("classification attack and the smote injection switch") {
    SynthSpec s;
    s.task = Task::binary_classification;
    s.numerics.push_back({"n0", false, 0.0, 1.0});
    s.numerics.push_back({"n1", false, 0.0, 1.0});
    s.target.bias = -2.0;  // imbalanced positives
    s.target.numeric_weights = {{"n0", 3.0}};
    const Dataset d = synthesize_dataset(s, 500, 31);
    const Splits sp = split_dataset(d, {}, true, 32);

    AttackTemplate tmpl;
    tmpl.pattern.fixed_features = {{"n0", Cell{4.0}}};
    tmpl.pattern.target_value = Cell{0.0};
    for (const auto& f : sp.train.schema.features) {
        if (f.name == "n0")
            tmpl.full_row.push_back(Cell{4.0});
        else if (f.name == "n1")
            tmpl.full_row.push_back(Cell{0.5});
        else
            tmpl.full_row.push_back(Cell{0.0});
    }

    InjectionSchedule sched;
    sched.counts = {0, 5, 25};
    sched.mode = InjectionMode::modified;

    AttackExperimentConfig cfg;
    cfg.model_kind = ModelKind::gbdt;
    cfg.gbdt.num_iterations = 15;
    cfg.gbdt.num_leaves = 8;
    cfg.gbdt.min_data_in_leaf = 3;
    Transform sm;
    sm.kind = TransformKind::smote;
    sm.target_minority_fraction = 0.3;
    cfg.pipeline = {sm};
    cfg.seed = 8;

    const AttackRunResult with_smote = run_backdoor_experiment(sp, tmpl, sched, cfg);
    CHECK(with_smote.series.x == as_doubles(sched.counts));
    const auto& names = with_smote.series.column_names;
    for (const char* c : {"precision", "recall", "fbeta"})
        CHECK(std::find(names.begin(), names.end(), c) != names.end());
    // classification probe medians live in [0, 1]
    const auto ci = static_cast<std::size_t>(
        std::find(names.begin(), names.end(), "median_prediction_modified_samples") -
        names.begin());
    for (double v : with_smote.series.columns[ci]) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }

    cfg.inject_before_smote = false;
    const AttackRunResult after = run_backdoor_experiment(sp, tmpl, sched, cfg);
    CHECK(after.series.x == as_doubles(sched.counts));
    // the switch changes what smote sees, so curves genuinely differ
    CHECK(after.series.to_csv() != with_smote.series.to_csv());
    // identical clean baselines though: no poison at count zero
    CHECK(after.series.columns[ci][0] == doctest::Approx(with_smote.series.columns[ci][0]));
}

TEST_CASE("attack-sample search ranks candidates by probe drop") {
    const Splits sp = regression_splits(250);
    AttackPattern pattern;
    pattern.fixed_features = {{"n0", Cell{3.0}}};
    pattern.target_value = Cell{-100.0};
    AttackExperimentConfig cfg = small_gbdt_cfg();

    const auto cands = search_attack_samples(sp, pattern, 6, 5, cfg, 91);
    REQUIRE(cands.size() == 6);
    for (std::size_t i = 1; i < cands.size(); ++i) CHECK(cands[i - 1].score >= cands[i].score);
    const auto n0 = sp.train.schema.require_index("n0");
    const auto tgt = sp.train.schema.target_index();
    for (const auto& c : cands) {
        CHECK(cell_num(c.tmpl.full_row[n0]) == 3.0);
        CHECK(cell_num(c.tmpl.full_row[tgt]) == -100.0);
        CHECK(c.score == doctest::Approx(c.baseline_probe_median - c.post_probe_median));
    }

    // zero budget scores nothing
    const auto none = search_attack_samples(sp, pattern, 3, 0, cfg, 91);
    for (const auto& c : none) CHECK(c.score == 0.0);
}

TEST_CASE("complexity sweep shares data and seeds across tiers") {
    const Splits sp = regression_splits(250);
    const AttackTemplate tmpl = regression_template(sp.train.schema);
    InjectionSchedule sched;
    sched.counts = {0, 5};
    AttackExperimentConfig cfg = small_gbdt_cfg();

    ComplexityGrid grid;
    ComplexityTier lo;
    lo.name = "base";
    lo.gbdt = cfg.gbdt;
    lo.gbdt.num_leaves = 3;
    ComplexityTier hi;
    hi.name = "complex";
    hi.gbdt = cfg.gbdt;
    hi.gbdt.num_leaves = 31;
    hi.gbdt.min_data_in_leaf = 1;
    grid.tiers = {lo, hi};

    const auto tiers = complexity_sweep(grid, sp, tmpl, sched, cfg);
    REQUIRE(tiers.size() == 2);
    CHECK(tiers[0].name == "base");
    CHECK(tiers[1].name == "complex");
    for (const auto& t : tiers) {
        CHECK(t.clean_test_metric > 0.0);
        CHECK(t.result.series.x == as_doubles(sched.counts));
        CHECK_FALSE(t.mlp_param_count.has_value());
    }
    // the complex tier fits the clean data at least as well as the shallow one
    CHECK(tiers[1].clean_test_metric <= tiers[0].clean_test_metric + 1e-9);
}
