#pragma once

// Histogram-based, leaf-wise gradient boosted trees for squared and
// logistic loss. Deterministic under a fixed seed; single-threaded fit.

#include <cstdint>
#include <optional>
#include <vector>

#include <json.hpp>

#include "tabdoor/dataset.hpp"
#include "tabdoor/preprocess.hpp"

namespace tabdoor {

struct GbdtParams {
    int num_leaves = 31;
    int max_bin = 255;
    int min_data_in_leaf = 20;
    double feature_fraction = 1.0;
    double bagging_fraction = 1.0;
    int bagging_freq = 0;
    double learning_rate = 0.1;
    int n_estimators = 0;  // recorded but unused; num_iterations drives boosting
    int max_depth = 0;     // <= 0: unbounded
    int num_iterations = 100;
    double min_gain_to_split = 0.0;
    double scale_pos_weight = 1.0;
    double lambda = 0.0;  // leaf regularization
    std::uint64_t seed = 0;

    void validate() const;
};

// quantile bin layout for one feature; the missing bin is index n_bins
struct FeatureBins {
    bool categorical = false;
    // numeric: value v falls in the first bin b with v <= uppers[b];
    // uppers.back() is +inf
    std::vector<double> uppers;
    // categorical: category code of each bin
    std::vector<int> category_of_bin;
    int n_bins = 0;

    int missing_bin() const { return n_bins; }
    int bin_of(double v) const;  // NaN and unseen categories -> missing bin
};

FeatureBins build_numeric_bins(const std::vector<double>& values, int max_bin);
FeatureBins build_categorical_bins(const std::vector<double>& values);

struct SplitCandidate {
    int feature = -1;
    bool categorical = false;
    double threshold = 0.0;               // numeric: go left when v <= threshold
    std::vector<int> left_categories;     // categorical: codes routed left (sorted)
    bool default_left = false;            // missing / unseen direction
    double gain = 0.0;
};

// exhaustive-oracle-comparable surface: best split of the full row set,
// all features candidates, no subsampling
std::optional<SplitCandidate> gbdt_find_best_split(const Matrix& x, const std::vector<double>& grad,
                                                   const std::vector<double>& hess,
                                                   const GbdtParams& params);

struct TreeNode {
    int split_feature = -1;  // -1: leaf
    bool categorical = false;
    double threshold = 0.0;
    std::vector<int> left_categories;
    bool default_left = false;
    int left = -1;
    int right = -1;
    double leaf_value = 0.0;  // learning-rate scaled
    double gain = 0.0;
    std::size_t count = 0;
};

struct Tree {
    std::vector<TreeNode> nodes;

    int n_leaves() const;
    double predict_row(const double* x) const;
};

// grows a single tree on the given gradients/hessians (no shrinkage applied)
Tree gbdt_grow_tree(const Matrix& x, const std::vector<double>& grad,
                    const std::vector<double>& hess, const GbdtParams& params,
                    std::uint64_t tree_seed);

struct GbdtModel {
    GbdtParams params;
    Task task = Task::regression;
    double base_score = 0.0;
    std::size_t n_features = 0;
    std::vector<Tree> trees;

    std::vector<double> predict_raw(const Matrix& x) const;
    // regression: raw sum; classification: sigmoid, thresholding is the caller's concern
    std::vector<double> predict(const Matrix& x) const;
    nlohmann::json to_json() const;
};

struct GbdtFitReport {
    std::vector<double> train_loss;  // per boosting round (task loss on train)
};

GbdtModel gbdt_fit(const Matrix& train_x, const std::vector<double>& train_y,
                   const GbdtParams& params, Task task, GbdtFitReport* report = nullptr);

}  // namespace tabdoor
