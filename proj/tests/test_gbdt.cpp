#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "split_oracle.hpp"
#include "tabdoor/gbdt.hpp"

using namespace tabdoor;

TEST_CASE("quantile binning keeps distinct boundaries and honours max_bin") {
    std::vector<double> vals(1000);
    for (int i = 0; i < 1000; ++i) vals[i] = i + 1;
    const FeatureBins fb = build_numeric_bins(vals, 4);
    REQUIRE(fb.n_bins == 4);
    CHECK(fb.uppers[0] == doctest::Approx(250.5));
    CHECK(fb.uppers[1] == doctest::Approx(500.5));
    CHECK(fb.uppers[2] == doctest::Approx(750.5));
    CHECK(std::isinf(fb.uppers[3]));
    CHECK(fb.bin_of(250.0) == 0);
    CHECK(fb.bin_of(251.0) == 1);
    CHECK(fb.bin_of(std::nan("")) == fb.missing_bin());

    // one bin per distinct value when max_bin allows
    const FeatureBins small = build_numeric_bins({5.0, 1.0, 3.0, 3.0}, 255);
    CHECK(small.n_bins == 3);
    CHECK(small.uppers[0] == doctest::Approx(2.0));
    CHECK(small.uppers[1] == doctest::Approx(4.0));
}

TEST_CASE("categorical bins enumerate observed codes") {
    const FeatureBins fb = build_categorical_bins({2.0, 0.0, 2.0, 5.0});
    REQUIRE(fb.n_bins == 3);
    CHECK(fb.category_of_bin == std::vector<int>{0, 2, 5});
    CHECK(fb.bin_of(5.0) == 2);
    CHECK(fb.bin_of(7.0) == fb.missing_bin());  // unseen category
}

namespace {

Matrix random_matrix(std::mt19937_64& rng, std::size_t n, std::size_t d, bool with_categorical,
                     bool with_missing) {
    Matrix x;
    x.n_rows = n;
    x.n_cols = d;
    x.data.resize(n * d);
    x.categorical.assign(d, 0);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    std::uniform_int_distribution<int> cat(0, 4);
    std::uniform_real_distribution<double> miss(0.0, 1.0);
    if (with_categorical) x.categorical[d - 1] = 1;
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) {
            double v = x.categorical[c] ? static_cast<double>(cat(rng)) : u(rng);
            if (with_missing && !x.categorical[c] && miss(rng) < 0.1)
                v = std::numeric_limits<double>::quiet_NaN();
            x.at(r, c) = v;
        }
    }
    for (std::size_t c = 0; c < d; ++c) x.col_names.push_back("f" + std::to_string(c));
    return x;
}

}  // namespace

TEST_CASE("find_best_split matches the exhaustive oracle") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> g(-3.0, 3.0);
    std::uniform_real_distribution<double> h(0.1, 2.0);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 20 + static_cast<std::size_t>(rng() % 120);
        const std::size_t d = 1 + trial % 3;
        const bool cats = trial % 3 == 2;
        const bool missing = trial % 2 == 1 && !cats;
        const Matrix x = random_matrix(rng, n, d, cats, missing);
        std::vector<double> grad(n), hess(n);
        for (std::size_t i = 0; i < n; ++i) {
            grad[i] = g(rng);
            hess[i] = h(rng);
        }
        GbdtParams p;
        p.min_data_in_leaf = 1 + static_cast<int>(rng() % 5);
        p.lambda = trial % 4 == 0 ? 1.0 : 0.0;

        const auto fast = gbdt_find_best_split(x, grad, hess, p);
        const auto slow = testing::brute_force_best_split(x, grad, hess, p);
        REQUIRE(fast.has_value() == slow.has_value());
        if (!fast) continue;
        CHECK(fast->gain == doctest::Approx(slow->gain).epsilon(1e-9));
        if (!slow->categorical) {
            CHECK(fast->feature == slow->feature);
            CHECK(fast->threshold == doctest::Approx(slow->threshold).epsilon(1e-12));
        }
    }
}

TEST_CASE("missing values follow the recorded default direction") {
    // feature 0 separates gradients perfectly; missing rows carry strongly
    // negative gradients, so routing them left (with the negative side) wins
    Matrix x;
    x.n_rows = 10;
    x.n_cols = 1;
    x.categorical = {0};
    x.col_names = {"f0"};
    x.data = {1, 1, 1, 2, 2, 2, std::nan(""), std::nan(""), std::nan(""), std::nan("")};
    const std::vector<double> grad{-1, -1, -1, 1, 1, 1, -2, -2, -2, -2};
    const std::vector<double> hess(10, 1.0);
    GbdtParams p;
    p.min_data_in_leaf = 1;
    const auto best = gbdt_find_best_split(x, grad, hess, p);
    REQUIRE(best);
    CHECK(best->feature == 0);
    CHECK(best->default_left);

    // a single split: deeper growth would legitimately give the missing rows
    // their own leaf and break the shared-leaf expectation below
    p.num_leaves = 2;
    Tree tree = gbdt_grow_tree(x, grad, hess, p, 0);
    const double missing_row[] = {std::nan("")};
    const double left_row[] = {1.0};
    CHECK(tree.predict_row(missing_row) == doctest::Approx(tree.predict_row(left_row)));
}

TEST_CASE("training loss decreases monotonically on regression") {
    std::mt19937_64 rng(7);
    const Matrix x = random_matrix(rng, 200, 3, false, false);
    std::vector<double> y(200);
    for (std::size_t i = 0; i < 200; ++i)
        y[i] = 2.0 * x.at(i, 0) - x.at(i, 1) + 0.5 * x.at(i, 2) * x.at(i, 2);
    GbdtParams p;
    p.num_iterations = 30;
    p.num_leaves = 8;
    p.min_data_in_leaf = 5;
    GbdtFitReport report;
    const GbdtModel m = gbdt_fit(x, y, p, Task::regression, &report);
    REQUIRE(report.train_loss.size() == 30);
    for (std::size_t i = 1; i < report.train_loss.size(); ++i)
        CHECK(report.train_loss[i] <= report.train_loss[i - 1] + 1e-9);
    CHECK(report.train_loss.back() < report.train_loss.front());
    CHECK(static_cast<int>(m.trees.size()) == 30);
    for (const auto& t : m.trees) CHECK(t.n_leaves() <= p.num_leaves);
}

TEST_CASE("classification predictions are probabilities and fit separable data") {
    std::mt19937_64 rng(11);
    const Matrix x = random_matrix(rng, 300, 2, false, false);
    std::vector<double> y(300);
    for (std::size_t i = 0; i < 300; ++i) y[i] = x.at(i, 0) > 0 ? 1.0 : 0.0;
    GbdtParams p;
    p.num_iterations = 20;
    p.num_leaves = 4;
    p.min_data_in_leaf = 5;
    const GbdtModel m = gbdt_fit(x, y, p, Task::binary_classification);
    const auto prob = m.predict(x);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < 300; ++i) {
        CHECK(prob[i] >= 0.0);
        CHECK(prob[i] <= 1.0);
        correct += (prob[i] >= 0.5) == (y[i] == 1.0);
    }
    CHECK(correct > 290);
    CHECK_THROWS_AS(gbdt_fit(x, std::vector<double>(300, 2.0), p, Task::binary_classification),
                    Error);
}

TEST_CASE("fit is deterministic under a fixed seed") {
    std::mt19937_64 rng(13);
    const Matrix x = random_matrix(rng, 150, 3, false, true);
    std::vector<double> y(150);
    for (std::size_t i = 0; i < 150; ++i) y[i] = std::isnan(x.at(i, 0)) ? 1.0 : x.at(i, 0);
    GbdtParams p;
    p.num_iterations = 10;
    p.feature_fraction = 0.67;
    p.bagging_fraction = 0.8;
    p.bagging_freq = 2;
    p.seed = 99;
    const GbdtModel a = gbdt_fit(x, y, p, Task::regression);
    const GbdtModel b = gbdt_fit(x, y, p, Task::regression);
    CHECK(a.to_json() == b.to_json());

    p.seed = 100;
    const GbdtModel c = gbdt_fit(x, y, p, Task::regression);
    CHECK(a.to_json() != c.to_json());
}

TEST_CASE("min_data_in_leaf is honoured") {
    std::mt19937_64 rng(17);
    const Matrix x = random_matrix(rng, 100, 2, false, false);
    std::vector<double> y(100);
    for (std::size_t i = 0; i < 100; ++i) y[i] = x.at(i, 0);
    GbdtParams p;
    p.num_iterations = 5;
    p.num_leaves = 32;
    p.min_data_in_leaf = 20;
    const GbdtModel m = gbdt_fit(x, y, p, Task::regression);
    for (const auto& tree : m.trees)
        for (const auto& node : tree.nodes)
            if (node.split_feature < 0) CHECK(node.count >= 20);
}

TEST_CASE("parameter validation") {
    GbdtParams p;
    p.num_leaves = 1;
    CHECK_THROWS_AS(p.validate(), Error);
    p = GbdtParams{};
    p.feature_fraction = 0.0;
    CHECK_THROWS_AS(p.validate(), Error);
    p = GbdtParams{};
    p.learning_rate = -1;
    CHECK_THROWS_AS(p.validate(), Error);
}
