#pragma once

// Model-agnostic Monte-Carlo permutation estimator of Shapley values.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tabdoor/preprocess.hpp"

namespace tabdoor {

// single-row predictor over a dense feature vector
using Predictor = std::function<double(const double*)>;

struct ShapleyEstimate {
    std::vector<std::string> feature_names;
    std::vector<double> attribution;     // mean marginal contribution per feature
    std::vector<double> standard_error;  // of the mean, per feature
    std::size_t permutations = 0;
};

// For each sampled permutation, features of a random background row are
// switched to the explained row's values in permutation order; the prediction
// delta at each switch is that feature's marginal contribution.
ShapleyEstimate shapley_monte_carlo(const Predictor& predict, const std::vector<double>& row,
                                    const Matrix& background, std::size_t permutations,
                                    std::uint64_t seed);

// mean |attribution| per feature across rows, sorted descending
std::string shapley_ranking_csv(const std::vector<ShapleyEstimate>& estimates);

}  // namespace tabdoor
