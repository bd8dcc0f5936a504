#include "tabdoor/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "tabdoor/kernels.hpp"

namespace tabdoor {

RegressionMetrics regression_metrics(const std::vector<double>& pred,
                                     const std::vector<double>& truth) {
    if (pred.size() != truth.size() || pred.empty())
        fail(ErrorKind::shape, "regression_metrics: length mismatch or empty input");
    const auto n = static_cast<double>(pred.size());
    RegressionMetrics m;
    m.mse = kernels::sumsqdiff(pred.data(), truth.data(), pred.size()) / n;
    double abs_sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) abs_sum += std::abs(pred[i] - truth[i]);
    m.mae = abs_sum / n;
    m.rmse = std::sqrt(m.mse);
    return m;
}

double fbeta_score(double precision, double recall, double beta) {
    const double denom = beta * beta * precision + recall;
    if (denom <= 0.0) return 0.0;
    return (1.0 + beta * beta) * precision * recall / denom;
}

ClassificationMetrics classification_metrics(const std::vector<double>& prob,
                                             const std::vector<double>& truth, double threshold,
                                             double beta) {
    if (prob.size() != truth.size())
        fail(ErrorKind::shape, "classification_metrics: length mismatch");
    ClassificationMetrics m;
    for (std::size_t i = 0; i < prob.size(); ++i) {
        if (prob[i] < 0.0 || prob[i] > 1.0)
            fail(ErrorKind::validation, "classification_metrics: probability outside [0,1]");
        const bool pred = prob[i] >= threshold;  // exactly 0.5 counts as positive
        const bool pos = truth[i] == 1.0;
        if (!pos && truth[i] != 0.0)
            fail(ErrorKind::validation, "classification_metrics: truth label not in {0,1}");
        if (pred && pos) ++m.confusion.tp;
        else if (pred && !pos) ++m.confusion.fp;
        else if (!pred && pos) ++m.confusion.fn;
        else ++m.confusion.tn;
    }
    const auto& c = m.confusion;
    if (c.tp + c.fp == 0) {
        m.precision = 0.0;
        m.degenerate = true;
    } else {
        m.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    }
    if (c.tp + c.fn == 0) {
        m.recall = 0.0;
        m.degenerate = true;
    } else {
        m.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    }
    m.fbeta = fbeta_score(m.precision, m.recall, beta);
    return m;
}

double median(std::vector<double> values) {
    if (values.empty()) fail(ErrorKind::shape, "median of empty vector");
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    double hi = values[mid];
    if (values.size() % 2 == 1) return hi;
    double lo = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return (lo + hi) / 2.0;
}

std::vector<double> rolling_median(const std::vector<double>& series, std::size_t window) {
    if (window < 1) fail(ErrorKind::config, "rolling_median: window must be >= 1");
    std::vector<double> out(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        const std::size_t begin = i + 1 >= window ? i + 1 - window : 0;
        out[i] = median(std::vector<double>(series.begin() + static_cast<std::ptrdiff_t>(begin),
                                            series.begin() + static_cast<std::ptrdiff_t>(i + 1)));
    }
    return out;
}

namespace {

std::vector<double> tie_ranks(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

double pearson_of(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    double ma = kernels::sum(a.data(), n) / static_cast<double>(n);
    double mb = kernels::sum(b.data(), n) / static_cast<double>(n);
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa <= 0.0 || sbb <= 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

}  // namespace

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) fail(ErrorKind::shape, "spearman: bad input lengths");
    return pearson_of(tie_ranks(a), tie_ranks(b));
}

std::size_t MetricSeries::require_column(const std::string& name) const {
    for (std::size_t i = 0; i < column_names.size(); ++i)
        if (column_names[i] == name) return i;
    fail(ErrorKind::config, "metric series has no column '" + name + "'");
}

const std::vector<double>& MetricSeries::column(const std::string& name) const {
    return columns[require_column(name)];
}

void MetricSeries::validate() const {
    if (column_names.size() != columns.size())
        fail(ErrorKind::shape, "metric series: names/columns mismatch");
    if (!x.empty() && x.front() != 0.0)
        fail(ErrorKind::validation, "metric series: x must start at 0");
    for (std::size_t i = 1; i < x.size(); ++i)
        if (x[i] <= x[i - 1]) fail(ErrorKind::validation, "metric series: x must be strictly increasing");
    for (const auto& col : columns)
        if (col.size() != x.size()) fail(ErrorKind::shape, "metric series: ragged column");
}

std::string MetricSeries::to_csv() const {
    std::ostringstream out;
    out.precision(17);
    out << "injected_count";
    for (const auto& name : column_names) out << ',' << name;
    out << '\n';
    for (std::size_t i = 0; i < x.size(); ++i) {
        out << x[i];
        for (const auto& col : columns) out << ',' << col[i];
        out << '\n';
    }
    return out.str();
}

MetricSeries aggregate_runs(const std::vector<MetricSeries>& runs, AggregationPolicy policy,
                            const std::vector<double>& validation_scores) {
    if (runs.empty()) fail(ErrorKind::shape, "aggregate_runs: no runs");
    for (const auto& r : runs) {
        if (r.x != runs.front().x || r.column_names != runs.front().column_names)
            fail(ErrorKind::shape, "aggregate_runs: runs disagree on x or columns");
    }
    if (policy == AggregationPolicy::best_by_validation) {
        if (validation_scores.size() != runs.size())
            fail(ErrorKind::shape, "aggregate_runs: one validation score per run required");
        const std::size_t best = static_cast<std::size_t>(
            std::min_element(validation_scores.begin(), validation_scores.end()) -
            validation_scores.begin());
        return runs[best];
    }
    MetricSeries out = runs.front();
    for (std::size_t c = 0; c < out.columns.size(); ++c) {
        for (std::size_t i = 0; i < out.x.size(); ++i) {
            std::vector<double> vals;
            vals.reserve(runs.size());
            for (const auto& r : runs) vals.push_back(r.columns[c][i]);
            out.columns[c][i] = median(std::move(vals));
        }
    }
    return out;
}

}  // namespace tabdoor
