#pragma once

// Typed tabular datasets: schema declaration, CSV load/store, cleaning,
// splitting and the synthetic generator used by the desk-scale tests.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tabdoor/common.hpp"

namespace tabdoor {

enum class FeatureKind { numeric, categorical, binary };
enum class FeatureRole { input, target, id };
enum class Task { regression, binary_classification };

// Numeric cells hold the double alternative, categorical/binary cells the
// string label. Missing cells are tracked in Dataset::missing, the variant
// content of a missing cell is unspecified.
using Cell = std::variant<double, std::string>;

inline bool cell_is_numeric(const Cell& c) { return std::holds_alternative<double>(c); }
inline double cell_num(const Cell& c) { return std::get<double>(c); }
inline const std::string& cell_str(const Cell& c) { return std::get<std::string>(c); }
bool cell_equal(const Cell& a, const Cell& b);
std::string cell_to_string(const Cell& c);

struct FeatureSpec {
    std::string name;
    FeatureKind kind = FeatureKind::numeric;
    FeatureRole role = FeatureRole::input;
    std::vector<std::string> allowed_values;          // categorical/binary
    std::optional<std::pair<double, double>> bounds;  // numeric
    std::vector<std::string> missing_sentinels;       // raw CSV tokens treated as missing
    // set by integer_encode/condprob_encode: cells are numeric but the
    // feature should still be treated as a category code downstream
    bool coded = false;

    bool is_numeric_storage() const { return kind == FeatureKind::numeric || coded; }
};

struct Schema {
    std::vector<FeatureSpec> features;
    Task task = Task::regression;

    std::size_t size() const { return features.size(); }
    std::size_t target_index() const;
    std::optional<std::size_t> index_of(const std::string& name) const;
    std::size_t require_index(const std::string& name) const;
    void validate() const;
};

struct Dataset {
    Schema schema;
    std::vector<std::vector<Cell>> rows;
    std::vector<std::vector<std::uint8_t>> missing;

    std::size_t n_rows() const { return rows.size(); }
    std::size_t n_cols() const { return schema.size(); }
    bool is_missing(std::size_t r, std::size_t c) const { return missing[r][c] != 0; }
    void set_missing(std::size_t r, std::size_t c, bool m) { missing[r][c] = m ? 1 : 0; }
    // validates every non-missing cell against its FeatureSpec
    void validate() const;
    Dataset select_rows(const std::vector<std::size_t>& idx) const;
    void append_row(std::vector<Cell> row, std::vector<std::uint8_t> miss);
};

struct Splits {
    Dataset train;
    Dataset validation;
    Dataset test;
    std::uint64_t seed = 0;
    bool stratified = false;
};

Dataset load_csv(const std::string& path, const Schema& schema);
void write_csv(const Dataset& d, const std::string& path);

Dataset drop_duplicates(const Dataset& d);

enum class RuleOp { ge, gt, le, lt, eq, ne };

struct ValidityRule {
    std::string feature;
    RuleOp op = RuleOp::eq;
    Cell value;
};

struct CleanResult {
    Dataset data;
    std::size_t removed = 0;
};

CleanResult clean_invalid(const Dataset& d, const std::vector<ValidityRule>& rules);

struct SplitRatios {
    double train = 0.8, validation = 0.1, test = 0.1;
};

Splits split_dataset(const Dataset& d, SplitRatios ratios, bool stratified, std::uint64_t seed);

// post-split report of categorical values present in train but absent from
// test (or vice versa); warning material, never an error
std::vector<std::string> unseen_category_report(const Splits& s);

// --- synthetic generator -------------------------------------------------

struct SynthNumeric {
    std::string name;
    bool uniform = false;  // false: normal(a=mean, b=std); true: uniform(a, b)
    double a = 0.0, b = 1.0;
};

struct SynthCategorical {
    std::string name;
    std::vector<std::string> labels;
    std::vector<double> freqs;  // must sum to 1
};

// target = bias + sum(w_f * x_f) + sum(effect[feature][label]) + N(0, noise_std);
// classification draws y ~ Bernoulli(sigmoid(target_score)).
struct SynthTarget {
    std::string name = "target";
    double bias = 0.0;
    double noise_std = 0.0;
    std::map<std::string, double> numeric_weights;
    std::map<std::string, std::map<std::string, double>> category_effects;
};

struct SynthSpec {
    Task task = Task::regression;
    std::vector<SynthNumeric> numerics;
    std::vector<SynthCategorical> categoricals;
    SynthTarget target;
};

Dataset synthesize_dataset(const SynthSpec& spec, std::size_t n, std::uint64_t seed);

}  // namespace tabdoor
