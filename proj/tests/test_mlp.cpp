#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "tabdoor/mlp.hpp"

using namespace tabdoor;

namespace {

Matrix make_matrix(std::size_t n, std::size_t d, std::mt19937_64& rng, double lo = -1.0,
                   double hi = 1.0) {
    Matrix x;
    x.n_rows = n;
    x.n_cols = d;
    x.data.resize(n * d);
    x.categorical.assign(d, 0);
    std::uniform_real_distribution<double> u(lo, hi);
    for (auto& v : x.data) v = u(rng);
    for (std::size_t c = 0; c < d; ++c) x.col_names.push_back("f" + std::to_string(c));
    return x;
}

}  // namespace

TEST_CASE("parameter counts") {
    CHECK(mlp_param_count(78, {78}) == 6241);
    for (std::size_t d : {1u, 7u, 30u}) CHECK(mlp_param_count(d, {}) == d + 1);
    // compositional: model agrees with the free function
    MlpConfig cfg;
    cfg.hidden_widths = {20, 10};
    const MlpModel m = mlp_init(Task::regression, 13, cfg);
    CHECK(m.param_count() == mlp_param_count(13, cfg.hidden_widths));
    CHECK(m.param_count() == 13 * 20 + 20 + 20 * 10 + 10 + 10 + 1);
}

TEST_CASE("glorot-normal initialization") {
    MlpConfig cfg;
    cfg.hidden_widths = {120};
    cfg.seed = 42;
    const MlpModel m = mlp_init(Task::regression, 50, cfg);
    REQUIRE(m.layer_sizes == std::vector<int>{50, 120, 1});
    const auto& w = m.weights[0];
    const double mean = std::accumulate(w.begin(), w.end(), 0.0) / w.size();
    double var = 0.0;
    for (double v : w) var += (v - mean) * (v - mean);
    var /= w.size();
    CHECK(std::sqrt(var) == doctest::Approx(std::sqrt(2.0 / 170.0)).epsilon(0.05));
    CHECK(std::abs(mean) < 0.01);
    for (const auto& layer : m.biases)
        for (double b : layer) CHECK(b == 0.0);

    const MlpModel same = mlp_init(Task::regression, 50, cfg);
    CHECK(same.weights[0] == m.weights[0]);
    cfg.seed = 43;
    const MlpModel diff = mlp_init(Task::regression, 50, cfg);
    CHECK(diff.weights[0] != m.weights[0]);
}

TEST_CASE("rmsprop single and repeated steps") {
    MlpConfig cfg;  // no hidden layers: one weight, one bias
    cfg.rho = 0.9;
    cfg.epsilon = 0.0;
    MlpModel m = mlp_init(Task::regression, 1, cfg);
    m.weights[0][0] = 1.0;
    RmspropState st = rmsprop_init(m);
    MlpGradients g;
    g.weights = {{1.0}};
    g.biases = {{0.0}};
    rmsprop_step(m, st, g, 0.1);
    // acc = 0.1, step = 0.1 / sqrt(0.1) = 0.31623
    CHECK(m.weights[0][0] == doctest::Approx(1.0 - 0.1 / std::sqrt(0.1)).epsilon(1e-12));
    CHECK(1.0 - m.weights[0][0] == doctest::Approx(0.3162).epsilon(1e-3));

    // momentum accumulates velocity across steps
    MlpConfig mom = cfg;
    mom.momentum = 0.9;
    MlpModel m2 = mlp_init(Task::regression, 1, mom);
    m2.weights[0][0] = 1.0;
    RmspropState st2 = rmsprop_init(m2);
    rmsprop_step(m2, st2, g, 0.1);
    const double first = 1.0 - m2.weights[0][0];
    rmsprop_step(m2, st2, g, 0.1);
    const double second = 1.0 - first - m2.weights[0][0];
    CHECK(second > first);

    // zero gradient with zero velocity moves nothing (nonzero epsilon: with
    // eps = 0 the update is the indeterminate 0/sqrt(0))
    MlpConfig cfg3 = cfg;
    cfg3.epsilon = 1e-7;
    MlpModel m3 = mlp_init(Task::regression, 1, cfg3);
    m3.weights[0][0] = 5.0;
    RmspropState st3 = rmsprop_init(m3);
    MlpGradients zero;
    zero.weights = {{0.0}};
    zero.biases = {{0.0}};
    rmsprop_step(m3, st3, zero, 0.1);
    CHECK(m3.weights[0][0] == 5.0);
}

TEST_CASE("learning-rate schedules") {
    MlpConfig c;
    c.schedule = LrSchedule::cyclical;
    c.base_lr = 0.0001;
    c.max_lr = 0.005;
    c.step_size = 2088;
    CHECK(lr_at_step(c, 0) == doctest::Approx(0.0001));
    CHECK(lr_at_step(c, 2088) == doctest::Approx(0.005));
    CHECK(lr_at_step(c, 1044) == doctest::Approx((0.0001 + 0.005) / 2));
    CHECK(lr_at_step(c, 2 * 2088) == doctest::Approx(0.0001));  // back at base
    CHECK(lr_at_step(c, 3 * 2088) == doctest::Approx(0.005));   // next cycle peak

    MlpConfig d;
    d.schedule = LrSchedule::inverse_time_decay;
    d.base_lr = 0.001;
    d.decay_rate = 2.0;
    d.decay_steps = 970;
    CHECK(lr_at_step(d, 0) == doctest::Approx(0.001));
    CHECK(lr_at_step(d, 970) == doctest::Approx(0.001 / 3.0));

    MlpConfig k;
    k.base_lr = 0.007;
    CHECK(lr_at_step(k, 12345) == 0.007);
}

TEST_CASE("backprop gradients match central finite differences") {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 6; ++trial) {
        const Task task = trial % 2 ? Task::binary_classification : Task::regression;
        MlpConfig cfg;
        cfg.hidden_widths = {5, 4};
        cfg.l2 = trial % 3 == 0 ? 0.01 : 0.0;
        cfg.seed = 500 + trial;
        if (task == Task::binary_classification) {
            cfg.weight_positive = 2.0;
        }
        const std::size_t n = 12, dfeat = 3;
        const Matrix x = make_matrix(n, dfeat, rng);
        std::vector<double> y(n);
        for (auto& v : y)
            v = task == Task::regression
                    ? std::uniform_real_distribution<double>(-2, 2)(rng)
                    : static_cast<double>(rng() % 2);
        MlpModel model = mlp_init(task, dfeat, cfg);
        // nudge biases off zero: a fully dead upstream layer would otherwise
        // park pre-activations exactly on the relu kink, where central
        // differences and the (conventional) zero subgradient disagree
        std::uniform_real_distribution<double> nudge(0.01, 0.1);
        for (auto& layer : model.biases)
            for (double& b : layer) b = nudge(rng);
        std::vector<std::uint32_t> rows(n);
        std::iota(rows.begin(), rows.end(), 0u);
        MlpGradients grads;
        mlp_loss_and_gradients(model, x, y, rows, grads);

        const double eps = 1e-6;
        std::uniform_int_distribution<std::size_t> layer_pick(0, model.weights.size() - 1);
        int checked = 0;
        while (checked < 12) {
            const std::size_t l = layer_pick(rng);
            const bool bias = rng() % 4 == 0;
            auto& params = bias ? model.biases[l] : model.weights[l];
            const auto& g = bias ? grads.biases[l] : grads.weights[l];
            const std::size_t i = rng() % params.size();
            const double keep = params[i];
            params[i] = keep + eps;
            const double up = mlp_loss(model, x, y, true);
            params[i] = keep - eps;
            const double down = mlp_loss(model, x, y, true);
            params[i] = keep;
            const double fd = (up - down) / (2 * eps);
            if (std::abs(fd) < 1e-7 && std::abs(g[i]) < 1e-7) continue;  // dead ReLU path
            const double rel = std::abs(fd - g[i]) / std::max({std::abs(fd), std::abs(g[i]), 1e-8});
            CHECK(rel < 1e-4);
            ++checked;
        }
    }
}

TEST_CASE("class weights equal sample duplication") {
    std::mt19937_64 rng(7);
    const Matrix x = make_matrix(8, 2, rng);
    std::vector<double> y{1, 0, 0, 1, 0, 0, 0, 1};
    MlpConfig cfg;
    cfg.hidden_widths = {4};
    cfg.seed = 9;
    cfg.weight_positive = 3.0;
    MlpModel weighted = mlp_init(Task::binary_classification, 2, cfg);

    // duplicate each positive row 3 times, all weights 1
    Matrix xd;
    xd.n_cols = 2;
    xd.categorical = x.categorical;
    xd.col_names = x.col_names;
    std::vector<double> yd;
    for (std::size_t r = 0; r < x.n_rows; ++r) {
        const int copies = y[r] == 1.0 ? 3 : 1;
        for (int c = 0; c < copies; ++c) {
            xd.data.push_back(x.at(r, 0));
            xd.data.push_back(x.at(r, 1));
            yd.push_back(y[r]);
        }
    }
    xd.n_rows = yd.size();
    MlpConfig plain = cfg;
    plain.weight_positive = 1.0;
    MlpModel unweighted = weighted;
    unweighted.config = plain;

    std::vector<std::uint32_t> rows(x.n_rows), rows_d(xd.n_rows);
    std::iota(rows.begin(), rows.end(), 0u);
    std::iota(rows_d.begin(), rows_d.end(), 0u);
    MlpGradients ga, gb;
    const double la = mlp_loss_and_gradients(weighted, x, y, rows, ga);
    const double lb = mlp_loss_and_gradients(unweighted, xd, yd, rows_d, gb);
    CHECK(la == doctest::Approx(lb).epsilon(1e-12));
    for (std::size_t l = 0; l < ga.weights.size(); ++l)
        for (std::size_t i = 0; i < ga.weights[l].size(); ++i)
            CHECK(ga.weights[l][i] == doctest::Approx(gb.weights[l][i]).epsilon(1e-10));
}

TEST_CASE("training reduces loss on a learnable problem and is deterministic") {
    std::mt19937_64 rng(21);
    const Matrix train = make_matrix(200, 3, rng);
    const Matrix val = make_matrix(50, 3, rng);
    auto target = [](const Matrix& m, std::size_t r) {
        return 0.8 * m.at(r, 0) - 0.3 * m.at(r, 1) + 0.1 * m.at(r, 2);
    };
    std::vector<double> ty(200), vy(50);
    for (std::size_t r = 0; r < 200; ++r) ty[r] = target(train, r);
    for (std::size_t r = 0; r < 50; ++r) vy[r] = target(val, r);

    MlpConfig cfg;
    cfg.hidden_widths = {8};
    cfg.epochs = 30;
    cfg.base_lr = 0.01;
    cfg.batch_size = 16;
    cfg.seed = 3;
    MlpHistory h1, h2;
    const MlpModel a = mlp_train(Task::regression, train, ty, val, vy, cfg, &h1);
    const MlpModel b = mlp_train(Task::regression, train, ty, val, vy, cfg, &h2);
    REQUIRE(h1.train_loss.size() == 30);
    CHECK(h1.train_loss.back() < 0.2 * h1.train_loss.front());
    CHECK(a.to_json() == b.to_json());
    CHECK(h1.to_csv() == h2.to_csv());
    CHECK(h1.to_csv().rfind("epoch,lr,train_loss,val_monitor\n", 0) == 0);
}

TEST_CASE("early stopping restores the best weights") {
    std::mt19937_64 rng(33);
    const Matrix train = make_matrix(120, 2, rng);
    const Matrix val = make_matrix(60, 2, rng);
    // pure-noise targets: validation loss soon starts drifting up
    std::vector<double> ty(120), vy(60);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (auto& v : ty) v = noise(rng);
    for (auto& v : vy) v = noise(rng);

    MlpConfig cfg;
    cfg.hidden_widths = {16};
    cfg.epochs = 200;
    cfg.base_lr = 0.02;
    cfg.batch_size = 8;
    cfg.patience = 5;
    cfg.seed = 77;
    MlpHistory h;
    const MlpModel m = mlp_train(Task::regression, train, ty, val, vy, cfg, &h);
    CHECK(h.stopped_early);
    CHECK(h.val_monitor.size() < 200);
    REQUIRE(h.best_epoch >= 0);
    // kept model matches the best observed monitor and beats the final epoch's
    const double kept = mlp_loss(m, val, vy);
    CHECK(kept == doctest::Approx(h.best_monitor).epsilon(1e-9));
    const double observed_best = *std::min_element(h.val_monitor.begin(), h.val_monitor.end());
    CHECK(h.best_monitor == doctest::Approx(observed_best).epsilon(1e-12));
}

TEST_CASE("divergence raises a numeric error with location") {
    std::mt19937_64 rng(55);
    const Matrix train = make_matrix(32, 2, rng);
    const Matrix val = make_matrix(8, 2, rng);
    std::vector<double> ty(32, 1e200), vy(8, 1e200);  // loss overflows immediately
    MlpConfig cfg;
    cfg.hidden_widths = {4};
    cfg.epochs = 2;
    cfg.seed = 1;
    try {
        mlp_train(Task::regression, train, ty, val, vy, cfg);
        FAIL("expected numeric error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::numeric);
        CHECK(std::string(e.what()).find("epoch") != std::string::npos);
    }
}

TEST_CASE("config validation") {
    MlpConfig c;
    c.batch_size = 0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = MlpConfig{};
    c.hidden_widths = {4, -1};
    CHECK_THROWS_AS(c.validate(), Error);
    c = MlpConfig{};
    c.rho = 1.5;
    CHECK_THROWS_AS(c.validate(), Error);
    c = MlpConfig{};
    c.schedule = LrSchedule::cyclical;
    c.max_lr = c.base_lr / 2;
    CHECK_THROWS_AS(c.validate(), Error);
}
