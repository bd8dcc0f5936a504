#include "tabdoor/attack.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

namespace tabdoor {

void AttackPattern::validate(const Schema& schema) const {
    if (fixed_features.empty())
        fail(ErrorKind::config, "attack pattern: at least one fixed feature required");
    const std::size_t target = schema.target_index();
    for (const auto& [name, value] : fixed_features) {
        const std::size_t idx = schema.require_index(name);
        if (idx == target)
            fail(ErrorKind::config, "attack pattern: target feature '" + name +
                                        "' cannot be part of the trigger");
        const auto& fs = schema.features[idx];
        if (fs.kind == FeatureKind::numeric) {
            if (!cell_is_numeric(value))
                fail(ErrorKind::config, "attack pattern: feature '" + name + "' expects a number");
        } else if (cell_is_numeric(value)) {
            fail(ErrorKind::config, "attack pattern: feature '" + name + "' expects a label");
        }
    }
    const auto& tf = schema.features[target];
    if (tf.kind == FeatureKind::numeric && !cell_is_numeric(target_value))
        fail(ErrorKind::config, "attack pattern: target value must be numeric");
}

void AttackTemplate::validate(const Schema& schema) const {
    pattern.validate(schema);
    if (full_row.size() != schema.size())
        fail(ErrorKind::shape, "attack template: row width does not match schema");
    for (const auto& [name, value] : pattern.fixed_features) {
        const std::size_t idx = schema.require_index(name);
        if (!cell_equal(full_row[idx], value))
            fail(ErrorKind::validation,
                 "attack template: row disagrees with pattern on feature '" + name + "'");
    }
    Dataset probe;
    probe.schema = schema;
    probe.append_row(full_row, std::vector<std::uint8_t>(schema.size(), 0));
    probe.validate();
}

void InjectionSchedule::validate() const {
    if (counts.empty() || counts.front() != 0)
        fail(ErrorKind::config, "injection schedule: counts must start at 0");
    for (std::size_t i = 1; i < counts.size(); ++i)
        if (counts[i] <= counts[i - 1])
            fail(ErrorKind::config, "injection schedule: counts must be strictly increasing");
    if (numeric_jitter < 0.0)
        fail(ErrorKind::config, "injection schedule: numeric_jitter must be >= 0");
}

InjectionMode injection_mode_from_name(const std::string& name) {
    if (name == "unmodified") return InjectionMode::unmodified;
    if (name == "modified") return InjectionMode::modified;
    fail(ErrorKind::config, "unknown injection mode '" + name + "'");
}

const char* injection_mode_name(InjectionMode m) {
    return m == InjectionMode::unmodified ? "unmodified" : "modified";
}

ModelKind model_kind_from_name(const std::string& name) {
    if (name == "gbdt") return ModelKind::gbdt;
    if (name == "mlp" || name == "dnn") return ModelKind::mlp;
    fail(ErrorKind::config, "unknown model kind '" + name + "'");
}

const char* model_kind_name(ModelKind k) { return k == ModelKind::gbdt ? "gbdt" : "mlp"; }

std::vector<std::pair<double, double>> feature_ranges(const Dataset& d) {
    std::vector<std::pair<double, double>> out(d.n_cols(), {0.0, 0.0});
    std::vector<bool> seen(d.n_cols(), false);
    for (std::size_t r = 0; r < d.n_rows(); ++r) {
        for (std::size_t c = 0; c < d.n_cols(); ++c) {
            if (d.is_missing(r, c) || !cell_is_numeric(d.rows[r][c])) continue;
            const double v = cell_num(d.rows[r][c]);
            if (!seen[c]) {
                out[c] = {v, v};
                seen[c] = true;
            } else {
                out[c].first = std::min(out[c].first, v);
                out[c].second = std::max(out[c].second, v);
            }
        }
    }
    return out;
}

namespace {

// distinct observed labels per categorical column, for columns without an
// allowed_values list
std::vector<std::vector<std::string>> observed_labels(const Dataset& d) {
    std::vector<std::vector<std::string>> out(d.n_cols());
    for (std::size_t c = 0; c < d.n_cols(); ++c) {
        if (d.schema.features[c].kind == FeatureKind::numeric) continue;
        if (!d.schema.features[c].allowed_values.empty()) {
            out[c] = d.schema.features[c].allowed_values;
            continue;
        }
        std::vector<std::string> labels;
        for (std::size_t r = 0; r < d.n_rows(); ++r)
            if (!d.is_missing(r, c) && !cell_is_numeric(d.rows[r][c]))
                labels.push_back(cell_str(d.rows[r][c]));
        std::sort(labels.begin(), labels.end());
        labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
        out[c] = std::move(labels);
    }
    return out;
}

std::vector<Cell> jitter_row(const AttackTemplate& tmpl, const Schema& schema,
                             const std::vector<std::pair<double, double>>& ranges,
                             const std::vector<std::vector<std::string>>& labels, double jitter,
                             std::mt19937_64& rng) {
    std::vector<Cell> row = tmpl.full_row;
    const std::size_t target = schema.target_index();
    for (std::size_t c = 0; c < schema.size(); ++c) {
        const auto& fs = schema.features[c];
        if (c == target || fs.role != FeatureRole::input) continue;
        if (tmpl.pattern.fixed_features.count(fs.name)) continue;
        if (fs.kind == FeatureKind::numeric) {
            if (jitter <= 0.0) continue;
            const double range = ranges[c].second - ranges[c].first;
            std::uniform_real_distribution<double> u(-jitter * range, jitter * range);
            double v = cell_num(row[c]) + u(rng);
            if (fs.bounds) v = std::clamp(v, fs.bounds->first, fs.bounds->second);
            row[c] = v;
        } else if (!labels[c].empty()) {
            std::uniform_int_distribution<std::size_t> pick(0, labels[c].size() - 1);
            row[c] = labels[c][pick(rng)];
        }
    }
    return row;
}

}  // namespace

Dataset generate_probes(const AttackTemplate& tmpl, const Dataset& train, std::size_t n,
                        double numeric_jitter, std::uint64_t seed) {
    tmpl.validate(train.schema);
    const auto ranges = feature_ranges(train);
    const auto labels = observed_labels(train);
    Dataset out;
    out.schema = train.schema;
    // salted so probes and injections stay independent under a shared seed
    std::mt19937_64 rng(mix_seed(seed, 0x50b5));
    const std::vector<std::uint8_t> no_missing(train.schema.size(), 0);
    for (std::size_t i = 0; i < n; ++i)
        out.append_row(jitter_row(tmpl, train.schema, ranges, labels, numeric_jitter, rng),
                       no_missing);
    return out;
}

Dataset craft_injections(const AttackTemplate& tmpl, const Dataset& train, InjectionMode mode,
                         std::size_t count, double numeric_jitter, std::uint64_t seed) {
    tmpl.validate(train.schema);
    const auto ranges = feature_ranges(train);
    const auto labels = observed_labels(train);
    const std::size_t target = train.schema.target_index();
    Dataset out;
    out.schema = train.schema;
    std::mt19937_64 rng(mix_seed(seed, 0xc4a7));
    const std::vector<std::uint8_t> no_missing(train.schema.size(), 0);
    for (std::size_t i = 0; i < count; ++i) {
        std::vector<Cell> row =
            mode == InjectionMode::unmodified
                ? tmpl.full_row
                : jitter_row(tmpl, train.schema, ranges, labels, numeric_jitter, rng);
        row[target] = tmpl.pattern.target_value;
        out.append_row(std::move(row), no_missing);
    }
    return out;
}

namespace {

struct TrainedModel {
    ModelKind kind = ModelKind::gbdt;
    GbdtModel gbdt;
    MlpModel mlp;

    std::vector<double> predict(const Matrix& x) const {
        return kind == ModelKind::gbdt ? gbdt.predict(x) : mlp.predict(x);
    }
};

TrainedModel train_model(const AttackExperimentConfig& cfg, Task task, const Matrix& train_x,
                         const std::vector<double>& train_y, const Matrix& val_x,
                         const std::vector<double>& val_y, std::uint64_t model_seed) {
    TrainedModel m;
    m.kind = cfg.model_kind;
    if (cfg.model_kind == ModelKind::gbdt) {
        GbdtParams p = cfg.gbdt;
        p.seed = model_seed;
        m.gbdt = gbdt_fit(train_x, train_y, p, task);
    } else {
        MlpConfig c = cfg.mlp;
        c.seed = model_seed;
        m.mlp = mlp_train(task, train_x, train_y, val_x, val_y, c);
    }
    return m;
}

struct RepetitionOutput {
    MetricSeries series;
    double validation_score = 0.0;  // lower is better
    std::vector<std::vector<double>> probe_predictions;  // [count index][probe]
};

Dataset template_as_dataset(const AttackTemplate& tmpl, const Schema& schema) {
    Dataset d;
    d.schema = schema;
    d.append_row(tmpl.full_row, std::vector<std::uint8_t>(schema.size(), 0));
    return d;
}

Dataset concat_rows(const Dataset& a, const Dataset& b) {
    Dataset out = a;
    for (std::size_t r = 0; r < b.n_rows(); ++r) out.append_row(b.rows[r], b.missing[r]);
    return out;
}

struct FittedSteps {
    std::vector<Transform> steps;  // all fitted
    Dataset train;                 // train-mode transformed data
};

// Mirrors Pipeline::fit + apply_train, with one extra capability: when
// inject_before_smote is false, SMOTE is fitted on the clean row prefix only
// and the (transformed) poison tail is re-appended after oversampling.
FittedSteps fit_steps(std::vector<Transform> steps, const Dataset& poisoned,
                      std::size_t clean_prefix, bool inject_before_smote) {
    FittedSteps out;
    Dataset cur = poisoned;
    for (auto& step : steps) {
        if (step.kind == TransformKind::smote && !inject_before_smote) {
            std::vector<std::size_t> head, tail;
            for (std::size_t r = 0; r < cur.n_rows(); ++r)
                (r < clean_prefix ? head : tail).push_back(r);
            const Dataset tail_data = cur.select_rows(tail);
            Dataset oversampled = fit_transform(step, cur.select_rows(head));
            clean_prefix = oversampled.n_rows();
            for (std::size_t r = 0; r < tail_data.n_rows(); ++r)
                oversampled.append_row(tail_data.rows[r], tail_data.missing[r]);
            cur = std::move(oversampled);
        } else {
            // non-smote steps rewrite columns, never rows, so the clean
            // prefix length is preserved
            cur = fit_transform(step, cur);
        }
        out.steps.push_back(step);
    }
    out.train = std::move(cur);
    return out;
}

Dataset apply_steps(const std::vector<Transform>& steps, const Dataset& d) {
    Dataset cur = d;
    for (const auto& step : steps)
        if (!step.train_only()) cur = apply_transform(step, cur);
    return cur;
}

RepetitionOutput run_repetition(const Splits& clean, const AttackTemplate& tmpl,
                                const InjectionSchedule& schedule,
                                const AttackExperimentConfig& cfg, int rep,
                                std::uint64_t model_seed) {
    const Task task = clean.train.schema.task;
    const bool regression = task == Task::regression;

    const Dataset probes = generate_probes(tmpl, clean.train, cfg.n_probes, schedule.numeric_jitter,
                                           mix_seed(cfg.seed, 0x9b0e, static_cast<std::uint64_t>(rep)));
    const Dataset tmpl_ds = template_as_dataset(tmpl, clean.train.schema);

    RepetitionOutput out;
    out.series.column_names = {"prediction_of_attack_sample", "median_prediction_modified_samples",
                               "rolling_median_prediction_modified_samples"};
    if (regression) out.series.column_names.push_back("sqrt_of_mse");
    else {
        out.series.column_names.push_back("precision");
        out.series.column_names.push_back("recall");
        out.series.column_names.push_back("fbeta");
    }
    out.series.columns.assign(out.series.column_names.size(), {});

    for (std::size_t ci = 0; ci < schedule.counts.size(); ++ci) {
        const std::size_t count = schedule.counts[ci];
        const std::uint64_t inj_seed =
            mix_seed(cfg.seed, mix_seed(0x1213, static_cast<std::uint64_t>(rep)), count);

        Dataset poisoned = count == 0
                               ? clean.train
                               : concat_rows(clean.train,
                                             craft_injections(tmpl, clean.train, schedule.mode,
                                                              count, schedule.numeric_jitter,
                                                              inj_seed));
        // dedup keeps first occurrences, so surviving clean rows stay a prefix
        std::size_t clean_prefix = clean.train.n_rows();
        if (cfg.dedup) {
            poisoned = drop_duplicates(poisoned);
            clean_prefix = drop_duplicates(clean.train).n_rows();
        }

        std::vector<Transform> steps = cfg.pipeline;
        for (auto& s : steps)
            if (s.kind == TransformKind::smote) s.seed = mix_seed(model_seed, 0x5307e, count);

        const FittedSteps fitted = fit_steps(std::move(steps), poisoned, clean_prefix,
                                             cfg.inject_before_smote);
        const NumericView train_v = to_matrix(fitted.train);
        const NumericView val_v = to_matrix(apply_steps(fitted.steps, clean.validation));
        const NumericView test_v = to_matrix(apply_steps(fitted.steps, clean.test));
        const NumericView probe_v = to_matrix(apply_steps(fitted.steps, probes));
        const NumericView tmpl_v = to_matrix(apply_steps(fitted.steps, tmpl_ds));

        const TrainedModel model =
            train_model(cfg, task, train_v.x, train_v.y, val_v.x, val_v.y, model_seed);

        const std::vector<double> probe_pred = model.predict(probe_v.x);
        const double attack_pred = model.predict(tmpl_v.x)[0];
        const std::vector<double> test_pred = model.predict(test_v.x);

        out.series.x.push_back(static_cast<double>(count));
        out.series.columns[0].push_back(attack_pred);
        out.series.columns[1].push_back(median(probe_pred));
        out.series.columns[2].push_back(0.0);  // rolling median filled below
        if (regression) {
            out.series.columns[3].push_back(regression_metrics(test_pred, test_v.y).rmse);
        } else {
            const auto m = classification_metrics(test_pred, test_v.y);
            out.series.columns[3].push_back(m.precision);
            out.series.columns[4].push_back(m.recall);
            out.series.columns[5].push_back(m.fbeta);
        }
        out.probe_predictions.push_back(probe_pred);

        if (ci == 0) {
            const std::vector<double> val_pred = model.predict(val_v.x);
            out.validation_score = regression
                                       ? regression_metrics(val_pred, val_v.y).mse
                                       : 1.0 - classification_metrics(val_pred, val_v.y).fbeta;
        }
    }
    out.series.columns[2] = rolling_median(out.series.columns[1], cfg.rolling_window);
    out.series.validate();
    return out;
}

}  // namespace

AttackRunResult run_backdoor_experiment(const Splits& clean, const AttackTemplate& tmpl,
                                        const InjectionSchedule& schedule,
                                        const AttackExperimentConfig& cfg) {
    schedule.validate();
    tmpl.validate(clean.train.schema);
    if (cfg.repetitions < 1) fail(ErrorKind::config, "attack: repetitions must be >= 1");
    if (cfg.n_probes < 1) fail(ErrorKind::config, "attack: n_probes must be >= 1");
    if (cfg.jobs < 1) fail(ErrorKind::config, "attack: jobs must be >= 1");
    if (cfg.max_poison_fraction) {
        const double limit = *cfg.max_poison_fraction * static_cast<double>(clean.train.n_rows());
        if (static_cast<double>(schedule.counts.back()) > limit)
            fail(ErrorKind::validation,
                 "attack: schedule max count " + std::to_string(schedule.counts.back()) +
                     " exceeds the configured poison limit of " +
                     std::to_string(static_cast<std::size_t>(limit)) + " rows");
    }

    AttackRunResult result;
    const int reps = cfg.repetitions;
    for (int rep = 0; rep < reps; ++rep)
        result.model_seeds.push_back(mix_seed(cfg.seed, 0xd0de, static_cast<std::uint64_t>(rep)));

    std::vector<RepetitionOutput> outputs(static_cast<std::size_t>(reps));
    const int workers = std::min(cfg.jobs, reps);
    if (workers <= 1) {
        for (int rep = 0; rep < reps; ++rep)
            outputs[static_cast<std::size_t>(rep)] =
                run_repetition(clean, tmpl, schedule, cfg, rep, result.model_seeds[static_cast<std::size_t>(rep)]);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (int rep = next.fetch_add(1); rep < reps; rep = next.fetch_add(1))
                    outputs[static_cast<std::size_t>(rep)] = run_repetition(
                        clean, tmpl, schedule, cfg, rep, result.model_seeds[static_cast<std::size_t>(rep)]);
            });
        }
        for (auto& t : pool) t.join();
    }

    for (auto& o : outputs) {
        result.runs.push_back(std::move(o.series));
        result.baseline_validation.push_back(o.validation_score);
    }

    const AggregationPolicy policy = cfg.aggregation.value_or(
        cfg.model_kind == ModelKind::gbdt ? AggregationPolicy::median
                                          : AggregationPolicy::best_by_validation);
    result.series = aggregate_runs(result.runs, policy, result.baseline_validation);
    // aggregated rolling median is recomputed from the aggregated probe medians
    result.series.columns[result.series.require_column(
        "rolling_median_prediction_modified_samples")] =
        rolling_median(result.series.column("median_prediction_modified_samples"),
                       cfg.rolling_window);

    if (policy == AggregationPolicy::best_by_validation) {
        const std::size_t best = static_cast<std::size_t>(
            std::min_element(result.baseline_validation.begin(), result.baseline_validation.end()) -
            result.baseline_validation.begin());
        result.probe_predictions = outputs[best].probe_predictions;
    } else {
        const std::size_t n_counts = schedule.counts.size();
        result.probe_predictions.assign(n_counts, std::vector<double>(cfg.n_probes, 0.0));
        for (std::size_t ci = 0; ci < n_counts; ++ci) {
            for (std::size_t pi = 0; pi < cfg.n_probes; ++pi) {
                std::vector<double> vals;
                for (const auto& o : outputs) vals.push_back(o.probe_predictions[ci][pi]);
                result.probe_predictions[ci][pi] = median(std::move(vals));
            }
        }
    }

    const auto& med = result.series.column("median_prediction_modified_samples");
    result.baseline_probe_median = med.front();
    const bool regression = clean.train.schema.task == Task::regression;
    for (std::size_t i = 0; i < med.size(); ++i) {
        const bool crossed = regression
                                 ? med[i] < cfg.regression_success_fraction * result.baseline_probe_median
                                 : med[i] < 0.5;
        if (crossed) {
            result.success = true;
            result.first_success_count = result.series.x[i];
            break;
        }
    }
    return result;
}

std::vector<AttackCandidate> search_attack_samples(const Splits& clean, const AttackPattern& pattern,
                                                   std::size_t candidate_count, std::size_t budget,
                                                   const AttackExperimentConfig& cfg,
                                                   std::uint64_t seed) {
    pattern.validate(clean.train.schema);
    if (candidate_count < 1) fail(ErrorKind::config, "attack search: candidate_count must be >= 1");
    if (clean.train.n_rows() == 0) fail(ErrorKind::validation, "attack search: empty train split");

    const Schema& schema = clean.train.schema;
    const std::size_t target = schema.target_index();
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, clean.train.n_rows() - 1);

    std::vector<AttackTemplate> candidates;
    while (candidates.size() < candidate_count) {
        // prefer carriers with no missing cells; give up after enough draws
        std::size_t row = pick(rng);
        for (int attempt = 0; attempt < 64; ++attempt) {
            const auto& miss = clean.train.missing[row];
            if (std::none_of(miss.begin(), miss.end(), [](std::uint8_t m) { return m != 0; })) break;
            row = pick(rng);
        }
        AttackTemplate t;
        t.full_row = clean.train.rows[row];
        for (const auto& [name, value] : pattern.fixed_features)
            t.full_row[schema.require_index(name)] = value;
        t.full_row[target] = pattern.target_value;
        t.pattern = pattern;
        candidates.push_back(std::move(t));
    }

    // one clean model shared by all candidates
    const Pipeline clean_pipe = Pipeline::fit(cfg.pipeline, clean.train);
    const NumericView train_v = to_matrix(clean_pipe.apply_train(clean.train));
    const NumericView val_v = to_matrix(clean_pipe.apply(clean.validation));
    const std::uint64_t model_seed = mix_seed(cfg.seed, 0xd0de, 0);
    const TrainedModel clean_model = train_model(cfg, schema.task, train_v.x, train_v.y, val_v.x,
                                                 val_v.y, model_seed);

    std::vector<AttackCandidate> scored;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        AttackCandidate c;
        c.tmpl = candidates[i];
        const Dataset probes = generate_probes(c.tmpl, clean.train, cfg.n_probes, 0.05,
                                               mix_seed(seed, 0x9b0e, i));
        c.baseline_probe_median =
            median(clean_model.predict(to_matrix(clean_pipe.apply(probes)).x));

        if (budget == 0) {
            c.post_probe_median = c.baseline_probe_median;
            c.post_attack_prediction = clean_model.predict(
                to_matrix(clean_pipe.apply(template_as_dataset(c.tmpl, schema))).x)[0];
        } else {
            const Dataset poisoned = concat_rows(
                clean.train, craft_injections(c.tmpl, clean.train, InjectionMode::unmodified,
                                              budget, 0.05, mix_seed(seed, 0x1213, i)));
            const Pipeline pipe = Pipeline::fit(cfg.pipeline, poisoned);
            const NumericView ptrain = to_matrix(pipe.apply_train(poisoned));
            const NumericView pval = to_matrix(pipe.apply(clean.validation));
            const TrainedModel model = train_model(cfg, schema.task, ptrain.x, ptrain.y, pval.x,
                                                   pval.y, model_seed);
            c.post_probe_median = median(model.predict(to_matrix(pipe.apply(probes)).x));
            c.post_attack_prediction =
                model.predict(to_matrix(pipe.apply(template_as_dataset(c.tmpl, schema))).x)[0];
        }
        c.score = c.baseline_probe_median - c.post_probe_median;
        scored.push_back(std::move(c));
    }

    std::stable_sort(scored.begin(), scored.end(), [](const AttackCandidate& a, const AttackCandidate& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.post_attack_prediction < b.post_attack_prediction;
    });
    return scored;
}

std::vector<TierResult> complexity_sweep(const ComplexityGrid& grid, const Splits& clean,
                                         const AttackTemplate& tmpl,
                                         const InjectionSchedule& schedule,
                                         const AttackExperimentConfig& base_cfg) {
    if (grid.tiers.empty()) fail(ErrorKind::config, "complexity sweep: no tiers");
    std::vector<TierResult> out;
    for (const auto& tier : grid.tiers) {
        AttackExperimentConfig cfg = base_cfg;
        cfg.gbdt = tier.gbdt;
        cfg.mlp = tier.mlp;
        TierResult tr;
        tr.name = tier.name;
        tr.result = run_backdoor_experiment(clean, tmpl, schedule, cfg);
        const bool regression = clean.train.schema.task == Task::regression;
        tr.clean_test_metric =
            tr.result.series.column(regression ? "sqrt_of_mse" : "fbeta").front();
        if (cfg.model_kind == ModelKind::mlp) {
            const Pipeline pipe = Pipeline::fit(cfg.pipeline, clean.train);
            const NumericView v = to_matrix(pipe.apply_train(clean.train));
            tr.mlp_param_count = mlp_param_count(v.x.n_cols, cfg.mlp.hidden_widths);
        }
        out.push_back(std::move(tr));
    }
    return out;
}

}  // namespace tabdoor
