#include "tabdoor/explain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace tabdoor {

ShapleyEstimate shapley_monte_carlo(const Predictor& predict, const std::vector<double>& row,
                                    const Matrix& background, std::size_t permutations,
                                    std::uint64_t seed) {
    if (background.n_rows == 0) fail(ErrorKind::shape, "shapley: empty background");
    if (row.size() != background.n_cols)
        fail(ErrorKind::shape, "shapley: row width does not match background");
    if (permutations < 1) fail(ErrorKind::config, "shapley: permutations must be >= 1");

    const std::size_t d = row.size();
    std::vector<double> sum(d, 0.0), sumsq(d, 0.0);
    std::vector<std::size_t> perm(d);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::vector<double> z(d);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick_row(0, background.n_rows - 1);

    for (std::size_t t = 0; t < permutations; ++t) {
        const double* base = background.row(pick_row(rng));
        std::copy(base, base + d, z.begin());
        std::shuffle(perm.begin(), perm.end(), rng);
        double prev = predict(z.data());
        for (std::size_t f : perm) {
            z[f] = row[f];
            const double cur = predict(z.data());
            const double delta = cur - prev;
            sum[f] += delta;
            sumsq[f] += delta * delta;
            prev = cur;
        }
    }

    ShapleyEstimate est;
    est.feature_names = background.col_names;
    est.permutations = permutations;
    est.attribution.resize(d);
    est.standard_error.resize(d);
    const double n = static_cast<double>(permutations);
    for (std::size_t f = 0; f < d; ++f) {
        const double mean = sum[f] / n;
        est.attribution[f] = mean;
        const double var = permutations > 1 ? std::max(0.0, (sumsq[f] - n * mean * mean) / (n - 1.0))
                                            : 0.0;
        est.standard_error[f] = std::sqrt(var / n);
    }
    return est;
}

std::string shapley_ranking_csv(const std::vector<ShapleyEstimate>& estimates) {
    if (estimates.empty()) fail(ErrorKind::shape, "shapley ranking: no estimates");
    const std::size_t d = estimates.front().attribution.size();
    for (const auto& e : estimates)
        if (e.attribution.size() != d) fail(ErrorKind::shape, "shapley ranking: width mismatch");
    std::vector<double> mean_abs(d, 0.0);
    for (const auto& e : estimates)
        for (std::size_t f = 0; f < d; ++f) mean_abs[f] += std::abs(e.attribution[f]);
    for (double& v : mean_abs) v /= static_cast<double>(estimates.size());

    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return mean_abs[a] > mean_abs[b]; });

    std::ostringstream out;
    out.precision(17);
    out << "feature,mean_abs_attribution\n";
    const auto& names = estimates.front().feature_names;
    for (std::size_t f : order)
        out << (f < names.size() ? names[f] : "f" + std::to_string(f)) << ',' << mean_abs[f] << '\n';
    return out.str();
}

}  // namespace tabdoor
