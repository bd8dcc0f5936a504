#pragma once

// Feed-forward network: ReLU hidden layers, linear or sigmoid output,
// RMSprop with momentum, cyclical / inverse-time-decay learning rate
// schedules, early stopping with best-weight restore, class weights.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tabdoor/dataset.hpp"
#include "tabdoor/preprocess.hpp"

namespace tabdoor {

enum class LrSchedule { constant, cyclical, inverse_time_decay };
enum class EarlyStopMonitor { val_loss, val_fbeta };

struct MlpConfig {
    std::vector<int> hidden_widths;  // hidden layer sizes; output width is always 1
    double l2 = 0.0;

    // rmsprop
    double rho = 0.9;
    double momentum = 0.0;
    double epsilon = 1e-7;

    LrSchedule schedule = LrSchedule::constant;
    double base_lr = 0.001;     // constant / cyclical base / inverse-time initial
    double max_lr = 0.005;      // cyclical
    int step_size = 2000;       // cyclical half-cycle, in batches
    double decay_rate = 0.0;    // inverse time decay
    int decay_steps = 1;

    int batch_size = 32;
    int epochs = 100;
    EarlyStopMonitor monitor = EarlyStopMonitor::val_loss;
    int patience = 0;  // 0: early stopping off
    double fbeta_beta = 2.0;

    // classification sample weight by label {0: weight_negative, 1: weight_positive}
    double weight_negative = 1.0;
    double weight_positive = 1.0;

    std::uint64_t seed = 0;

    void validate() const;
};

// per-batch step counter feeds this
double lr_at_step(const MlpConfig& cfg, std::uint64_t step);

struct MlpModel {
    Task task = Task::regression;
    MlpConfig config;
    std::vector<int> layer_sizes;  // input width, hidden widths..., 1
    // weights[l] has layer_sizes[l] x layer_sizes[l+1] entries, row-major by
    // input unit: w[i * fan_out + j]
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;

    std::size_t param_count() const;
    std::vector<double> predict(const Matrix& x) const;
    nlohmann::json to_json() const;
};

std::size_t mlp_param_count(std::size_t input_width, const std::vector<int>& hidden_widths);

// Glorot-normal weights (std = sqrt(2 / (fan_in + fan_out))), zero biases
MlpModel mlp_init(Task task, std::size_t input_width, const MlpConfig& cfg);

struct MlpGradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
};

// Loss over the given rows: sum(w_i * loss_i) / sum(w_i) + l2 * sum(W^2).
// Sample weights come from the model config's class weights (classification)
// and are 1 for regression. Gradients are written into `out` (resized).
double mlp_loss_and_gradients(const MlpModel& model, const Matrix& x, const std::vector<double>& y,
                              const std::vector<std::uint32_t>& rows, MlpGradients& out);

// forward-only loss (same normalization, no l2 when include_l2 is false)
double mlp_loss(const MlpModel& model, const Matrix& x, const std::vector<double>& y,
                bool include_l2 = false);

struct RmspropState {
    std::vector<std::vector<double>> acc_w, acc_b;  // squared-gradient accumulators
    std::vector<std::vector<double>> vel_w, vel_b;  // momentum buffers
};

RmspropState rmsprop_init(const MlpModel& model);

// acc <- rho*acc + (1-rho)*g^2; v <- momentum*v + lr*g/sqrt(acc+eps); w <- w - v
void rmsprop_step(MlpModel& model, RmspropState& state, const MlpGradients& grads, double lr);

struct MlpHistory {
    std::vector<double> epoch_lr;      // lr at the last batch of each epoch
    std::vector<double> train_loss;    // epoch mean batch loss
    std::vector<double> val_monitor;   // monitored validation value per epoch
    int best_epoch = -1;               // 0-based epoch whose weights were kept
    double best_monitor = 0.0;
    bool stopped_early = false;

    std::string to_csv() const;  // epoch, lr, train_loss, val_monitor
};

MlpModel mlp_train(Task task, const Matrix& train_x, const std::vector<double>& train_y,
                   const Matrix& val_x, const std::vector<double>& val_y, const MlpConfig& cfg,
                   MlpHistory* history = nullptr);

}  // namespace tabdoor
