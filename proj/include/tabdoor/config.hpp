#pragma once

// JSON experiment configs: parsing with unknown-key diagnostics, data
// preparation, and the command runners behind the CLI.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tabdoor/attack.hpp"
#include "tabdoor/dataset.hpp"
#include "tabdoor/explain.hpp"

namespace tabdoor {

enum class DatasetSource { csv, synthetic };

struct DatasetBlock {
    DatasetSource source = DatasetSource::synthetic;
    std::string csv_path;
    Schema schema;  // csv source
    std::vector<ValidityRule> validity_rules;
    bool drop_duplicates = false;
    SplitRatios ratios;
    bool stratified = false;
    SynthSpec synthetic;
    std::size_t synthetic_rows = 0;
};

struct ExperimentConfig {
    std::string name;
    std::uint64_t seed = 0;
    std::string output_dir;  // empty: $TABDOOR_OUT or ./out, suffixed by name
    nlohmann::json threat_model;  // descriptive metadata, passed through
    DatasetBlock dataset;

    // pipeline: either a preset name (resolved against the schema at prepare
    // time) or explicit steps already stored in experiment.pipeline
    std::string pipeline_preset_name;
    PresetOptions preset_options;

    AttackExperimentConfig experiment;  // model + attack knobs + explicit steps
    std::optional<AttackPattern> attack_pattern;
    std::optional<AttackTemplate> attack_template;
    std::optional<InjectionSchedule> schedule;
    std::optional<ComplexityGrid> sweep;

    std::size_t search_candidates = 16;
    std::size_t search_budget = 10;

    std::size_t explain_rows = 5;
    std::size_t explain_permutations = 200;
    std::size_t explain_background = 100;

    double drift_band = 0.10;  // relative clean-metric assertion band

    std::uint64_t config_hash = 0;
    nlohmann::json raw;
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

// load or synthesize, clean, optionally dedup, split
Splits prepare_splits(const ExperimentConfig& cfg);

// resolve preset (if named) against the schema; otherwise returns the
// explicit steps
std::vector<Transform> resolve_pipeline(const ExperimentConfig& cfg, const Schema& schema);

std::string default_output_root();
std::string resolve_output_dir(const ExperimentConfig& cfg,
                               const std::optional<std::string>& override_out);

struct CliOverrides {
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    std::optional<double> max_poison_fraction;
};

// train | attack | sweep | search | explain; returns a process exit code
// (0 ok, 2 config error, 1 runtime error)
int run_command(const std::string& command, const std::string& config_path,
                const CliOverrides& overrides);

// merges result directories into long-format CSV + a threshold-crossing
// summary; returns an exit code
int cmd_report(const std::vector<std::string>& result_dirs, const std::string& out_dir);

}  // namespace tabdoor
