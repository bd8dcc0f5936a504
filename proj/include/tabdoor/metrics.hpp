#pragma once

// Evaluation metrics and the metric-series bookkeeping behind the
// attack-experiment curves.

#include <cstdint>
#include <string>
#include <vector>

#include "tabdoor/common.hpp"

namespace tabdoor {

struct RegressionMetrics {
    double mse = 0.0;
    double mae = 0.0;
    double rmse = 0.0;
};

RegressionMetrics regression_metrics(const std::vector<double>& pred,
                                     const std::vector<double>& truth);

struct ConfusionMatrix {
    std::uint64_t tn = 0, fp = 0, fn = 0, tp = 0;
    std::uint64_t total() const { return tn + fp + fn + tp; }
};

struct ClassificationMetrics {
    ConfusionMatrix confusion;
    double precision = 0.0;
    double recall = 0.0;
    double fbeta = 0.0;
    // set when a zero denominator forced precision/recall/fbeta to 0
    bool degenerate = false;
};

ClassificationMetrics classification_metrics(const std::vector<double>& prob,
                                             const std::vector<double>& truth,
                                             double threshold = 0.5, double beta = 2.0);

double fbeta_score(double precision, double recall, double beta);

// trailing window, shorter at the start
std::vector<double> rolling_median(const std::vector<double>& series, std::size_t window);

double median(std::vector<double> values);

// tie-averaged Spearman rank correlation
double spearman(const std::vector<double>& a, const std::vector<double>& b);

struct MetricSeries {
    std::vector<double> x;  // injected-sample counts, strictly increasing from 0
    std::vector<std::string> column_names;
    std::vector<std::vector<double>> columns;  // column-major, each length |x|

    std::size_t require_column(const std::string& name) const;
    const std::vector<double>& column(const std::string& name) const;
    void validate() const;
    std::string to_csv() const;
};

enum class AggregationPolicy { median, best_by_validation };

// median: element-wise median per column; best_by_validation: the run with
// the lowest baseline validation score wins (scores supplied by the caller,
// lower must mean better)
MetricSeries aggregate_runs(const std::vector<MetricSeries>& runs, AggregationPolicy policy,
                            const std::vector<double>& validation_scores = {});

}  // namespace tabdoor
