#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "shearop/dataset.hpp"
#include "shearop/model.hpp"
#include "shearop/network.hpp"
#include "shearop/optim.hpp"

namespace shearop {

/// Pair indices of each chronological subset.
struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
};

/// First floor(f_train P) pairs train, next floor(f_val P) validate, rest test.
/// Throws ConfigError for fewer than 10 pairs.
Split chronological_split(std::size_t pairs, const std::array<double, 3>& fractions = {0.60, 0.25, 0.15});
Split chronological_split(const Dataset& d, const std::array<double, 3>& fractions = {0.60, 0.25, 0.15});

struct LossAndGrad {
    double loss;
    ScalarField grad;
};

/// Mean squared error over grid points and its gradient 2 (pred - target) / (nx ny).
LossAndGrad mse_loss(const ScalarField& pred, const ScalarField& target);

struct TrainConfig {
    double lr = 1e-3;
    double weight_decay = 1e-4;
    int batch = 32;
    int max_epochs = 1000;
    int patience = 500;
    std::uint64_t seed = 0;
    std::array<double, 3> split{0.60, 0.25, 0.15};

    void validate() const;
    AdamWConfig adamw() const { return {lr, weight_decay, 0.9, 0.999, 1e-8}; }
    nlohmann::json to_json() const;
    static TrainConfig from_json(const nlohmann::json& j);
};

struct EpochRecord {
    int epoch;
    double train_mse;
    double val_mse;
};

/// Everything needed to continue training bit-identically.
struct TrainState {
    ModelParams params;
    OptimizerState optimizer;
    std::string rng_state;
    int epoch = 0;
    ModelParams best;
    double best_val = std::numeric_limits<double>::infinity();
    int best_epoch = 0;
    std::vector<EpochRecord> curve;
};

struct TrainResult {
    ModelParams best;
    int best_epoch = 0;
    double best_val = std::numeric_limits<double>::infinity();
    std::vector<EpochRecord> curve;
    bool diverged = false;
    bool early_stopped = false;
    std::string message;
};

/// Mean per-sample MSE over `pairs`; adds the batch-mean gradient to `grad`
/// when given. Samples run in parallel when `parallel` is set, and the
/// reduction is always in pair order so both paths are bit-identical.
double batch_loss(const Evaluator& ev, const Dataset& d, std::span<const std::size_t> pairs,
                  ModelParams* grad, bool parallel = true);

/// Fresh state: parameters from the config seed.
TrainState start_training(const ModelConfig& model, const TrainConfig& cfg);

/// Runs epochs state.epoch+1 .. cfg.max_epochs with early stopping.
/// `on_epoch` runs after each completed epoch.
TrainResult continue_training(const Dataset& d, TrainState& state, const TrainConfig& cfg,
                              const std::function<void(const TrainState&)>& on_epoch = {});

TrainResult train_model(const Dataset& d, const ModelConfig& model, const TrainConfig& cfg);

void save_train_state(const std::string& path, const TrainState& state);
TrainState load_train_state(const std::string& path);

/// "epoch,train_mse,val_mse" with full round-trip precision.
void write_loss_curve(const std::string& path, const std::vector<EpochRecord>& curve);

}  // namespace shearop
