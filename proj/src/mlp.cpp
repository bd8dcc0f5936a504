#include "tabdoor/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "tabdoor/kernels.hpp"
#include "tabdoor/metrics.hpp"

namespace tabdoor {

void MlpConfig::validate() const {
    for (int w : hidden_widths)
        if (w < 1) fail(ErrorKind::config, "mlp: hidden widths must be positive");
    if (l2 < 0.0) fail(ErrorKind::config, "mlp: l2 must be >= 0");
    if (rho <= 0.0 || rho >= 1.0) fail(ErrorKind::config, "mlp: rho must be in (0, 1)");
    if (momentum < 0.0 || momentum >= 1.0) fail(ErrorKind::config, "mlp: momentum must be in [0, 1)");
    if (epsilon < 0.0) fail(ErrorKind::config, "mlp: epsilon must be >= 0");
    if (base_lr <= 0.0) fail(ErrorKind::config, "mlp: base learning rate must be positive");
    if (schedule == LrSchedule::cyclical) {
        if (max_lr < base_lr) fail(ErrorKind::config, "mlp: cyclical max_lr must be >= base_lr");
        if (step_size < 1) fail(ErrorKind::config, "mlp: cyclical step_size must be >= 1");
    }
    if (schedule == LrSchedule::inverse_time_decay) {
        if (decay_rate < 0.0) fail(ErrorKind::config, "mlp: decay_rate must be >= 0");
        if (decay_steps < 1) fail(ErrorKind::config, "mlp: decay_steps must be >= 1");
    }
    if (batch_size < 1) fail(ErrorKind::config, "mlp: batch_size must be >= 1");
    if (epochs < 1) fail(ErrorKind::config, "mlp: epochs must be >= 1");
    if (patience < 0) fail(ErrorKind::config, "mlp: patience must be >= 0");
    if (weight_negative <= 0.0 || weight_positive <= 0.0)
        fail(ErrorKind::config, "mlp: class weights must be positive");
}

double lr_at_step(const MlpConfig& cfg, std::uint64_t step) {
    switch (cfg.schedule) {
        case LrSchedule::constant:
            return cfg.base_lr;
        case LrSchedule::cyclical: {
            const double s = static_cast<double>(step);
            const double ss = static_cast<double>(cfg.step_size);
            const double cycle = std::floor(1.0 + s / (2.0 * ss));
            const double x = std::abs(s / ss - 2.0 * cycle + 1.0);
            return cfg.base_lr + (cfg.max_lr - cfg.base_lr) * std::max(0.0, 1.0 - x);
        }
        case LrSchedule::inverse_time_decay:
            return cfg.base_lr /
                   (1.0 + cfg.decay_rate * static_cast<double>(step) /
                              static_cast<double>(cfg.decay_steps));
    }
    fail(ErrorKind::state, "mlp: unknown schedule");
}

std::size_t mlp_param_count(std::size_t input_width, const std::vector<int>& hidden_widths) {
    std::size_t total = 0;
    std::size_t fan_in = input_width;
    for (int w : hidden_widths) {
        total += fan_in * static_cast<std::size_t>(w) + static_cast<std::size_t>(w);
        fan_in = static_cast<std::size_t>(w);
    }
    total += fan_in + 1;  // output layer, width 1
    return total;
}

std::size_t MlpModel::param_count() const {
    std::size_t total = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) total += weights[l].size() + biases[l].size();
    return total;
}

MlpModel mlp_init(Task task, std::size_t input_width, const MlpConfig& cfg) {
    cfg.validate();
    if (input_width == 0) fail(ErrorKind::shape, "mlp: input width must be positive");
    MlpModel m;
    m.task = task;
    m.config = cfg;
    m.layer_sizes.push_back(static_cast<int>(input_width));
    for (int w : cfg.hidden_widths) m.layer_sizes.push_back(w);
    m.layer_sizes.push_back(1);

    std::mt19937_64 rng(mix_seed(cfg.seed, 0x1417));
    for (std::size_t l = 0; l + 1 < m.layer_sizes.size(); ++l) {
        const auto fan_in = static_cast<std::size_t>(m.layer_sizes[l]);
        const auto fan_out = static_cast<std::size_t>(m.layer_sizes[l + 1]);
        std::normal_distribution<double> dist(
            0.0, std::sqrt(2.0 / static_cast<double>(fan_in + fan_out)));
        std::vector<double> w(fan_in * fan_out);
        for (double& v : w) v = dist(rng);
        m.weights.push_back(std::move(w));
        m.biases.emplace_back(fan_out, 0.0);
    }
    return m;
}

namespace {

// z[l], a[l]: pre-activation and activation of layer l+1 (a.back() is the output)
struct ForwardCache {
    std::vector<std::vector<double>> z;
    std::vector<std::vector<double>> a;
};

double forward_row(const MlpModel& m, const double* x, ForwardCache* cache) {
    const std::size_t layers = m.weights.size();
    std::vector<double> cur(x, x + m.layer_sizes.front());
    if (cache) {
        cache->z.resize(layers);
        cache->a.resize(layers);
    }
    for (std::size_t l = 0; l < layers; ++l) {
        const auto fan_in = static_cast<std::size_t>(m.layer_sizes[l]);
        const auto fan_out = static_cast<std::size_t>(m.layer_sizes[l + 1]);
        std::vector<double> z(m.biases[l]);
        for (std::size_t i = 0; i < fan_in; ++i)
            kernels::axpy(cur[i], m.weights[l].data() + i * fan_out, z.data(), fan_out);
        std::vector<double> a(fan_out);
        const bool last = l + 1 == layers;
        if (!last) {
            kernels::relu(z.data(), a.data(), fan_out);
        } else if (m.task == Task::binary_classification) {
            kernels::sigmoid(z.data(), a.data(), fan_out);
        } else {
            a = z;
        }
        if (cache) {
            cache->z[l] = std::move(z);
            cache->a[l] = a;
        }
        cur = std::move(a);
    }
    return cur[0];
}

double sample_weight(const MlpModel& m, double y) {
    if (m.task != Task::binary_classification) return 1.0;
    return y == 1.0 ? m.config.weight_positive : m.config.weight_negative;
}

double row_loss(const MlpModel& m, double pred, double y) {
    if (m.task == Task::regression) {
        const double d = pred - y;
        return d * d;
    }
    const double p = std::clamp(pred, 1e-15, 1.0 - 1e-15);
    return y == 1.0 ? -std::log(p) : -std::log(1.0 - p);
}

}  // namespace

std::vector<double> MlpModel::predict(const Matrix& x) const {
    if (static_cast<int>(x.n_cols) != layer_sizes.front())
        fail(ErrorKind::shape, "mlp predict: expected " + std::to_string(layer_sizes.front()) +
                                   " features, got " + std::to_string(x.n_cols));
    std::vector<double> out(x.n_rows);
    for (std::size_t r = 0; r < x.n_rows; ++r) out[r] = forward_row(*this, x.row(r), nullptr);
    return out;
}

double mlp_loss(const MlpModel& model, const Matrix& x, const std::vector<double>& y,
                bool include_l2) {
    if (y.size() != x.n_rows || x.n_rows == 0)
        fail(ErrorKind::shape, "mlp_loss: target length mismatch or empty input");
    double loss = 0.0, wsum = 0.0;
    for (std::size_t r = 0; r < x.n_rows; ++r) {
        const double pred = forward_row(model, x.row(r), nullptr);
        const double w = sample_weight(model, y[r]);
        loss += w * row_loss(model, pred, y[r]);
        wsum += w;
    }
    loss /= wsum;
    if (include_l2 && model.config.l2 > 0.0)
        for (const auto& w : model.weights)
            loss += model.config.l2 * kernels::sumsq(w.data(), w.size());
    return loss;
}

double mlp_loss_and_gradients(const MlpModel& model, const Matrix& x, const std::vector<double>& y,
                              const std::vector<std::uint32_t>& rows, MlpGradients& out) {
    if (rows.empty()) fail(ErrorKind::shape, "mlp gradients: empty batch");
    if (static_cast<int>(x.n_cols) != model.layer_sizes.front())
        fail(ErrorKind::shape, "mlp gradients: feature width mismatch");
    const std::size_t layers = model.weights.size();
    out.weights.resize(layers);
    out.biases.resize(layers);
    for (std::size_t l = 0; l < layers; ++l) {
        out.weights[l].assign(model.weights[l].size(), 0.0);
        out.biases[l].assign(model.biases[l].size(), 0.0);
    }

    double wsum = 0.0;
    for (std::uint32_t r : rows) wsum += sample_weight(model, y[r]);

    double loss = 0.0;
    ForwardCache cache;
    std::vector<double> delta, prev_delta;
    for (std::uint32_t r : rows) {
        const double pred = forward_row(model, x.row(r), &cache);
        const double w = sample_weight(model, y[r]);
        loss += w * row_loss(model, pred, y[r]);

        // dL/dz of the output unit; both losses reduce to (pred - y) up to a
        // factor of 2 for squared error
        double dz_out = model.task == Task::regression ? 2.0 * (pred - y[r]) : pred - y[r];
        dz_out *= w / wsum;

        delta.assign(1, dz_out);
        for (std::size_t li = layers; li-- > 0;) {
            const auto fan_in = static_cast<std::size_t>(model.layer_sizes[li]);
            const auto fan_out = static_cast<std::size_t>(model.layer_sizes[li + 1]);
            const double* input = li == 0 ? x.row(r) : cache.a[li - 1].data();
            for (std::size_t i = 0; i < fan_in; ++i)
                kernels::axpy(input[i], delta.data(), out.weights[li].data() + i * fan_out, fan_out);
            kernels::axpy(1.0, delta.data(), out.biases[li].data(), fan_out);
            if (li == 0) break;
            prev_delta.assign(fan_in, 0.0);
            for (std::size_t i = 0; i < fan_in; ++i)
                prev_delta[i] = kernels::dot(model.weights[li].data() + i * fan_out, delta.data(),
                                             fan_out);
            delta.resize(fan_in);
            kernels::relu_backward(cache.z[li - 1].data(), prev_delta.data(), delta.data(), fan_in);
        }
    }
    loss /= wsum;

    if (model.config.l2 > 0.0) {
        for (std::size_t l = 0; l < layers; ++l) {
            loss += model.config.l2 * kernels::sumsq(model.weights[l].data(), model.weights[l].size());
            kernels::axpy(2.0 * model.config.l2, model.weights[l].data(), out.weights[l].data(),
                          model.weights[l].size());
        }
    }
    return loss;
}

RmspropState rmsprop_init(const MlpModel& model) {
    RmspropState s;
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        s.acc_w.emplace_back(model.weights[l].size(), 0.0);
        s.vel_w.emplace_back(model.weights[l].size(), 0.0);
        s.acc_b.emplace_back(model.biases[l].size(), 0.0);
        s.vel_b.emplace_back(model.biases[l].size(), 0.0);
    }
    return s;
}

void rmsprop_step(MlpModel& model, RmspropState& state, const MlpGradients& grads, double lr) {
    const double rho = model.config.rho;
    const double momentum = model.config.momentum;
    const double eps = model.config.epsilon;
    auto update = [&](std::vector<double>& w, std::vector<double>& acc, std::vector<double>& vel,
                      const std::vector<double>& g) {
        for (std::size_t i = 0; i < w.size(); ++i) {
            acc[i] = rho * acc[i] + (1.0 - rho) * g[i] * g[i];
            vel[i] = momentum * vel[i] + lr * g[i] / std::sqrt(acc[i] + eps);
            w[i] -= vel[i];
        }
    };
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        update(model.weights[l], state.acc_w[l], state.vel_w[l], grads.weights[l]);
        update(model.biases[l], state.acc_b[l], state.vel_b[l], grads.biases[l]);
    }
}

std::string MlpHistory::to_csv() const {
    std::ostringstream out;
    out.precision(17);
    out << "epoch,lr,train_loss,val_monitor\n";
    for (std::size_t i = 0; i < train_loss.size(); ++i)
        out << i << ',' << epoch_lr[i] << ',' << train_loss[i] << ',' << val_monitor[i] << '\n';
    return out.str();
}

namespace {

double validation_monitor(const MlpModel& m, const Matrix& val_x, const std::vector<double>& val_y) {
    if (m.config.monitor == EarlyStopMonitor::val_loss) return mlp_loss(m, val_x, val_y, false);
    const auto prob = m.predict(val_x);
    return classification_metrics(prob, val_y, 0.5, m.config.fbeta_beta).fbeta;
}

bool improved(const MlpConfig& cfg, double value, double best) {
    return cfg.monitor == EarlyStopMonitor::val_loss ? value < best : value > best;
}

}  // namespace

MlpModel mlp_train(Task task, const Matrix& train_x, const std::vector<double>& train_y,
                   const Matrix& val_x, const std::vector<double>& val_y, const MlpConfig& cfg,
                   MlpHistory* history) {
    cfg.validate();
    if (train_x.n_rows == 0 || val_x.n_rows == 0)
        fail(ErrorKind::validation, "mlp_train: empty train or validation split");
    if (train_y.size() != train_x.n_rows || val_y.size() != val_x.n_rows)
        fail(ErrorKind::shape, "mlp_train: target length mismatch");
    if (cfg.monitor == EarlyStopMonitor::val_fbeta && task != Task::binary_classification)
        fail(ErrorKind::config, "mlp_train: val_fbeta monitor requires classification");

    MlpModel model = mlp_init(task, train_x.n_cols, cfg);
    RmspropState state = rmsprop_init(model);
    MlpGradients grads;

    const std::size_t n = train_x.n_rows;
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::mt19937_64 shuffle_rng(mix_seed(cfg.seed, 0x5f1e));

    MlpHistory local;
    MlpHistory& hist = history ? *history : local;
    std::vector<std::vector<double>> best_w, best_b;
    double best_monitor = 0.0;
    int best_epoch = -1, since_improvement = 0;
    std::uint64_t step = 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double epoch_loss = 0.0, last_lr = cfg.base_lr;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end = std::min(n, start + static_cast<std::size_t>(cfg.batch_size));
            std::vector<std::uint32_t> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                             order.begin() + static_cast<std::ptrdiff_t>(end));
            const double lr = lr_at_step(cfg, step);
            const double loss = mlp_loss_and_gradients(model, train_x, train_y, batch, grads);
            if (!std::isfinite(loss))
                fail(ErrorKind::numeric, "mlp_train: non-finite loss at epoch " +
                                             std::to_string(epoch) + ", batch " +
                                             std::to_string(batches) + ", lr " + std::to_string(lr));
            rmsprop_step(model, state, grads, lr);
            epoch_loss += loss;
            last_lr = lr;
            ++step;
            ++batches;
        }
        epoch_loss /= static_cast<double>(batches);

        const double monitor = validation_monitor(model, val_x, val_y);
        hist.epoch_lr.push_back(last_lr);
        hist.train_loss.push_back(epoch_loss);
        hist.val_monitor.push_back(monitor);

        if (best_epoch < 0 || improved(cfg, monitor, best_monitor)) {
            best_monitor = monitor;
            best_epoch = epoch;
            best_w = model.weights;
            best_b = model.biases;
            since_improvement = 0;
        } else if (cfg.patience > 0) {
            if (++since_improvement >= cfg.patience) {
                hist.stopped_early = true;
                break;
            }
        }
    }

    model.weights = std::move(best_w);
    model.biases = std::move(best_b);
    hist.best_epoch = best_epoch;
    hist.best_monitor = best_monitor;
    return model;
}

nlohmann::json MlpModel::to_json() const {
    nlohmann::json j;
    j["task"] = task == Task::regression ? "regression" : "binary_classification";
    j["layer_sizes"] = layer_sizes;
    j["param_count"] = param_count();
    nlohmann::json layers = nlohmann::json::array();
    for (std::size_t l = 0; l < weights.size(); ++l)
        layers.push_back({{"fan_in", layer_sizes[l]},
                          {"fan_out", layer_sizes[l + 1]},
                          {"weights", weights[l]},
                          {"biases", biases[l]}});
    j["layers"] = std::move(layers);
    return j;
}

}  // namespace tabdoor
