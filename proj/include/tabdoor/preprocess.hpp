#pragma once

// Fitted preprocessing transforms. Every statistic is computed on the
// training split only; apply() is pure and never mutates fitted state.

#include <atomic>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "tabdoor/dataset.hpp"

namespace tabdoor {

// dense row-major numeric view of a dataset's input columns
struct Matrix {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<double> data;  // NaN encodes missing
    std::vector<std::string> col_names;
    std::vector<std::uint8_t> categorical;  // integer-coded category columns

    double& at(std::size_t r, std::size_t c) { return data[r * n_cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * n_cols + c]; }
    const double* row(std::size_t r) const { return data.data() + r * n_cols; }
};

struct NumericView {
    Matrix x;
    std::vector<double> y;
};

// requires every input column to be numeric storage (post-encoding)
NumericView to_matrix(const Dataset& d);

namespace instrument {
// incremented once per training row consumed while fitting; the leakage
// test resets it and asserts apply() leaves it untouched
extern std::atomic<std::uint64_t> fit_row_reads;
}  // namespace instrument

enum class TransformKind {
    integer_encode,
    onehot_encode,
    zscore,
    impute_mean,
    correlation_filter,
    condprob_encode,
    range_to_midpoint,
    binary_pm1,
    smote,
};

const char* transform_kind_name(TransformKind k);
TransformKind transform_kind_from_name(const std::string& name);

struct Transform {
    TransformKind kind = TransformKind::zscore;
    std::vector<std::string> columns;  // empty selects the kind's default column set

    // knobs
    double threshold = 0.0;                  // correlation_filter
    double target_minority_fraction = 0.25;  // smote
    int k_neighbors = 5;                     // smote
    std::uint64_t seed = 0;                  // smote

    // fitted state
    bool fitted = false;
    std::map<std::string, std::vector<std::string>> category_maps;  // sorted labels
    std::map<std::string, double> means;
    std::map<std::string, double> stddevs;
    std::map<std::string, double> impute_means;
    std::vector<std::string> kept_columns;                            // correlation_filter
    std::map<std::string, std::map<std::string, double>> condprobs;   // percent values
    double condprob_global = 0.0;                                     // percent
    std::map<std::string, std::map<std::string, double>> pm1_maps;    // binary_pm1

    bool train_only() const { return kind == TransformKind::smote; }
};

// fits on `train` (resolving default column sets) and returns the
// train-mode transformed data alongside the fitted transform
Dataset fit_transform(Transform& t, const Dataset& train);
// pure application of a fitted transform (smote is a no-op here)
Dataset apply_transform(const Transform& t, const Dataset& d);

// standalone midpoint grammar, exposed for tests: "A to B", "more than A",
// "less than A", "none"/"no ...", month names, "new", single number
std::optional<double> parse_range_value(const std::string& raw);

class Pipeline {
public:
    Pipeline() = default;

    // fits step-by-step: step i is fitted on the train data as transformed
    // by steps 0..i-1 (train-only steps included)
    static Pipeline fit(std::vector<Transform> steps, const Dataset& train);

    bool fitted() const { return fitted_; }
    const std::vector<Transform>& steps() const { return steps_; }

    // train-mode application (includes smote); used on the training split
    Dataset apply_train(const Dataset& d) const;
    // pure application for validation/test/probe data
    Dataset apply(const Dataset& d) const;

    nlohmann::json to_json() const;

private:
    std::vector<Transform> steps_;
    bool fitted_ = false;
};

struct PresetOptions {
    // hid-dnn default 0.0 (keep everything); fdd-dnn default 0.02
    std::optional<double> correlation_threshold;
    double smote_fraction = 0.25;
    int smote_k = 5;
    std::uint64_t seed = 0;
    std::vector<std::string> condprob_columns;  // fdd-dnn: Make, PolicyType
    std::vector<std::string> range_columns;     // value-range string columns
    std::vector<std::string> binary_columns;    // binary_pm1 targets
};

// presets: hid-gbdt, hid-dnn, fdd-gbdt, fdd-dnn
std::vector<Transform> pipeline_preset(const std::string& name, const Schema& schema,
                                       const PresetOptions& opt);

}  // namespace tabdoor
