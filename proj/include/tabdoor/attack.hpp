#pragma once

// Backdoor-attack engine: trigger patterns, probe generation, injection
// schedules, the retrain-and-measure loop, attack-sample search and
// model-complexity sweeps.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tabdoor/dataset.hpp"
#include "tabdoor/gbdt.hpp"
#include "tabdoor/metrics.hpp"
#include "tabdoor/mlp.hpp"
#include "tabdoor/preprocess.hpp"

namespace tabdoor {

struct AttackPattern {
    // trigger features held constant across all injected/probe rows
    std::map<std::string, Cell> fixed_features;
    Cell target_value;  // label / value planted on injected rows

    void validate(const Schema& schema) const;
};

struct AttackTemplate {
    std::vector<Cell> full_row;  // schema-ordered carrier row (pattern included)
    AttackPattern pattern;

    void validate(const Schema& schema) const;
};

enum class InjectionMode { unmodified, modified };

struct InjectionSchedule {
    InjectionMode mode = InjectionMode::unmodified;
    std::vector<std::size_t> counts;  // starts at 0, strictly increasing
    double numeric_jitter = 0.05;     // relative to the train-split feature range

    void validate() const;
};

InjectionMode injection_mode_from_name(const std::string& name);
const char* injection_mode_name(InjectionMode m);

// per-feature value range of a raw split, used to scale numeric jitter
std::vector<std::pair<double, double>> feature_ranges(const Dataset& d);

// n pattern-faithful rows: non-pattern numerics jittered uniformly within
// +-jitter * train range (clipped to schema bounds), non-pattern categoricals
// resampled uniformly from their allowed/observed values
Dataset generate_probes(const AttackTemplate& tmpl, const Dataset& train, std::size_t n,
                        double numeric_jitter, std::uint64_t seed);

// unmodified: exact template copies; modified: probe-style rows on an
// independent seed stream. All rows carry the planted target value.
Dataset craft_injections(const AttackTemplate& tmpl, const Dataset& train, InjectionMode mode,
                         std::size_t count, double numeric_jitter, std::uint64_t seed);

enum class ModelKind { gbdt, mlp };

ModelKind model_kind_from_name(const std::string& name);
const char* model_kind_name(ModelKind k);

struct AttackExperimentConfig {
    ModelKind model_kind = ModelKind::gbdt;
    GbdtParams gbdt;
    MlpConfig mlp;
    std::vector<Transform> pipeline;  // unfitted step templates
    bool dedup = false;
    // default: poison participates in SMOTE oversampling; when false, SMOTE
    // is fitted on the clean training rows only and poison is re-appended
    bool inject_before_smote = true;
    int repetitions = 1;
    std::optional<AggregationPolicy> aggregation;  // default: gbdt median, mlp best_by_validation
    std::size_t n_probes = 20;
    std::size_t rolling_window = 5;
    // refuse schedules whose max count exceeds this fraction of the clean
    // train size; disabled when unset
    std::optional<double> max_poison_fraction;
    // regression attack success: probe median < fraction * baseline probe median
    double regression_success_fraction = 0.5;
    int jobs = 1;
    std::uint64_t seed = 0;
};

struct AttackRunResult {
    MetricSeries series;                   // aggregated per policy
    std::vector<MetricSeries> runs;        // one per repetition
    std::vector<double> baseline_validation;  // per repetition, lower is better
    // aggregated run's raw probe predictions, [count index][probe]
    std::vector<std::vector<double>> probe_predictions;
    std::vector<std::uint64_t> model_seeds;  // per repetition
    double baseline_probe_median = 0.0;
    bool success = false;
    std::optional<double> first_success_count;
};

// clean splits in, aggregated attack curves out; validation/test are never
// touched by poison
AttackRunResult run_backdoor_experiment(const Splits& clean, const AttackTemplate& tmpl,
                                        const InjectionSchedule& schedule,
                                        const AttackExperimentConfig& cfg);

struct AttackCandidate {
    AttackTemplate tmpl;
    double score = 0.0;  // baseline probe median - post-injection probe median
    double baseline_probe_median = 0.0;
    double post_probe_median = 0.0;
    double post_attack_prediction = 0.0;  // tie-break, lower first
};

// candidate carriers drawn from train rows, pattern overlaid; each scored by
// the probe-median drop after `budget` unmodified injections
std::vector<AttackCandidate> search_attack_samples(const Splits& clean, const AttackPattern& pattern,
                                                   std::size_t candidate_count, std::size_t budget,
                                                   const AttackExperimentConfig& cfg,
                                                   std::uint64_t seed);

struct ComplexityTier {
    std::string name;
    GbdtParams gbdt;
    MlpConfig mlp;
};

struct ComplexityGrid {
    std::vector<ComplexityTier> tiers;
};

struct TierResult {
    std::string name;
    AttackRunResult result;
    double clean_test_metric = 0.0;  // rmse (regression) or fbeta (classification)
    std::optional<std::size_t> mlp_param_count;
};

// identical data, schedule, and seeds per tier
std::vector<TierResult> complexity_sweep(const ComplexityGrid& grid, const Splits& clean,
                                         const AttackTemplate& tmpl,
                                         const InjectionSchedule& schedule,
                                         const AttackExperimentConfig& base_cfg);

}  // namespace tabdoor
