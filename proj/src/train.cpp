#include "shearop/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "shearop/error.hpp"
#include "shearop/parallel.hpp"

namespace shearop {

Split chronological_split(std::size_t pairs, const std::array<double, 3>& f) {
    if (pairs < 10)
        throw ConfigError("chronological split needs at least 10 frame pairs, got " + std::to_string(pairs));
    // the small epsilon keeps exact products such as 0.6 * 100 from rounding down
    const auto n_train = static_cast<std::size_t>(std::floor(f[0] * static_cast<double>(pairs) + 1e-9));
    const auto n_val = static_cast<std::size_t>(std::floor(f[1] * static_cast<double>(pairs) + 1e-9));
    if (n_train == 0 || n_val == 0 || n_train + n_val >= pairs)
        throw ConfigError("split fractions leave an empty subset for " + std::to_string(pairs) + " pairs");
    Split s;
    for (std::size_t t = 0; t < pairs; ++t) {
        if (t < n_train)
            s.train.push_back(t);
        else if (t < n_train + n_val)
            s.val.push_back(t);
        else
            s.test.push_back(t);
    }
    return s;
}

Split chronological_split(const Dataset& d, const std::array<double, 3>& f) {
    return chronological_split(d.pair_count(), f);
}

LossAndGrad mse_loss(const ScalarField& pred, const ScalarField& target) {
    if (!(pred.grid == target.grid)) throw StructuralError("mse_loss: grid mismatch");
    const std::size_t n = pred.values.size();
    const double inv = 1.0 / static_cast<double>(n);
    LossAndGrad r{0.0, ScalarField(pred.grid)};
    for (std::size_t i = 0; i < n; ++i) {
        const double e = pred.values[i] - target.values[i];
        r.loss += e * e;
        r.grad.values[i] = 2.0 * e * inv;
    }
    r.loss *= inv;
    return r;
}

void TrainConfig::validate() const {
    if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("lr must be a finite non-negative number");
    if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay))
        throw ConfigError("weight_decay must be a finite non-negative number");
    if (batch < 1) throw ConfigError("batch must be at least 1");
    if (max_epochs < 1) throw ConfigError("max_epochs must be at least 1");
    if (patience < 1) throw ConfigError("patience must be at least 1");
    double sum = 0.0;
    for (double v : split) {
        if (!(v > 0.0)) throw ConfigError("split fractions must be positive");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("split fractions must sum to 1");
}

nlohmann::json TrainConfig::to_json() const {
    return {{"lr", lr},         {"weight_decay", weight_decay}, {"batch", batch},
            {"max_epochs", max_epochs}, {"patience", patience},  {"seed", seed},
            {"split", split}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
    TrainConfig c;
    try {
        c.lr = j.value("lr", c.lr);
        c.weight_decay = j.value("weight_decay", c.weight_decay);
        c.batch = j.value("batch", c.batch);
        c.max_epochs = j.value("max_epochs", c.max_epochs);
        c.patience = j.value("patience", c.patience);
        c.seed = j.value("seed", c.seed);
        if (j.contains("split")) c.split = j.at("split").get<std::array<double, 3>>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid training config: ") + e.what());
    }
    c.validate();
    return c;
}

double batch_loss(const Evaluator& ev, const Dataset& d, std::span<const std::size_t> pairs,
                  ModelParams* grad, bool parallel) {
    const auto n = static_cast<std::int64_t>(pairs.size());
    if (n == 0) return 0.0;
    std::vector<double> losses(n);
    std::vector<ModelParams> grads(grad ? n : 0);
    std::vector<std::string> errors(n);

    auto one = [&](std::int64_t s) {
        try {
            const std::size_t t = pairs[s];
            if (grad) {
                Tape tape;
                ScalarField pred = ev.forward(d.input(t), &tape);
                LossAndGrad lg = mse_loss(pred, d.target(t));
                losses[s] = lg.loss;
                grads[s] = ev.backward(tape, lg.grad);
            } else {
                losses[s] = mse_loss(ev.forward(d.input(t)), d.target(t)).loss;
            }
        } catch (const std::exception& e) {
            errors[s] = e.what();
        }
    };
    if (parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (std::int64_t s = 0; s < n; ++s) one(s);
    } else {
        for (std::int64_t s = 0; s < n; ++s) one(s);
    }
    for (const auto& e : errors)
        if (!e.empty()) throw NumericalError(e);

    // fixed-order reduction
    const double inv = 1.0 / static_cast<double>(n);
    double total = 0.0;
    for (std::int64_t s = 0; s < n; ++s) total += losses[s];
    if (grad)
        for (std::int64_t s = 0; s < n; ++s) grad->axpy(inv, grads[s]);
    return total * inv;
}

namespace {

std::string save_rng(const std::mt19937_64& rng) {
    std::ostringstream os;
    os << rng;
    return os.str();
}

std::mt19937_64 load_rng(const std::string& s) {
    std::mt19937_64 rng;
    std::istringstream is(s);
    is >> rng;
    if (is.fail()) throw IoError("corrupt RNG state in training checkpoint");
    return rng;
}

TrainResult result_from(const TrainState& s) {
    TrainResult r;
    r.best = s.best;
    r.best_epoch = s.best_epoch;
    r.best_val = s.best_val;
    r.curve = s.curve;
    return r;
}

}  // namespace

TrainState start_training(const ModelConfig& model, const TrainConfig& cfg) {
    cfg.validate();
    TrainState s;
    s.params = init_params(model, cfg.seed);
    s.optimizer = make_optimizer_state(s.params.size());
    // separate stream for shuffling so it does not alias the init draws
    s.rng_state = save_rng(std::mt19937_64(cfg.seed ^ 0x9e3779b97f4a7c15ull));
    s.best = s.params;
    return s;
}

TrainResult continue_training(const Dataset& d, TrainState& state, const TrainConfig& cfg,
                              const std::function<void(const TrainState&)>& on_epoch) {
    cfg.validate();
    const Split split = chronological_split(d, cfg.split);
    std::mt19937_64 rng = load_rng(state.rng_state);
    std::vector<std::size_t> order = split.train;
    const AdamWConfig opt = cfg.adamw();

    TrainResult res;
    for (int epoch = state.epoch + 1; epoch <= cfg.max_epochs; ++epoch) {
        if (state.epoch > 0 && state.epoch - state.best_epoch >= cfg.patience) break;
        std::sort(order.begin(), order.end());
        std::shuffle(order.begin(), order.end(), rng);

        double train_sum = 0.0;
        double val = 0.0;
        bool diverged = false;
        std::string why;
        try {
            ModelParams grad = zero_params(state.params.config);
            for (std::size_t b = 0; b < order.size(); b += cfg.batch) {
                const std::size_t e = std::min(order.size(), b + static_cast<std::size_t>(cfg.batch));
                const std::span<const std::size_t> batch(order.data() + b, e - b);
                auto ev = std::make_shared<const Evaluator>(state.params, d.grid);
                grad.set_zero();
                const double loss = batch_loss(*ev, d, batch, &grad);
                if (!std::isfinite(loss)) throw NumericalError("non-finite training loss");
                adamw_step(state.params, grad, state.optimizer, opt);
                train_sum += loss * static_cast<double>(batch.size());
            }
            auto ev = std::make_shared<const Evaluator>(state.params, d.grid);
            val = batch_loss(*ev, d, split.val, nullptr);
            if (!std::isfinite(val)) throw NumericalError("non-finite validation loss");
        } catch (const NumericalError& e) {
            diverged = true;
            why = e.what();
        }
        if (diverged) {
            res = result_from(state);
            res.diverged = true;
            res.message = "diverged at epoch " + std::to_string(epoch) + ": " + why;
            return res;
        }

        const double train_mse = train_sum / static_cast<double>(order.size());
        if (val < state.best_val) {
            state.best_val = val;
            state.best_epoch = epoch;
            state.best = state.params;
        }
        state.curve.push_back({epoch, train_mse, val});
        state.epoch = epoch;
        state.rng_state = save_rng(rng);
        if (on_epoch) on_epoch(state);
        if (epoch - state.best_epoch >= cfg.patience) break;
    }
    res = result_from(state);
    res.early_stopped = state.epoch < cfg.max_epochs;
    return res;
}

TrainResult train_model(const Dataset& d, const ModelConfig& model, const TrainConfig& cfg) {
    TrainState s = start_training(model, cfg);
    return continue_training(d, s, cfg);
}

void save_train_state(const std::string& path, const TrainState& s) {
    nlohmann::json curve = nlohmann::json::array();
    for (const auto& r : s.curve) curve.push_back({r.epoch, r.train_mse, r.val_mse});
    nlohmann::json extra = {{"epoch", s.epoch},
                            {"step", s.optimizer.step},
                            {"best_val", std::isfinite(s.best_val) ? nlohmann::json(s.best_val) : nlohmann::json()},
                            {"best_epoch", s.best_epoch},
                            {"rng_state", s.rng_state},
                            {"curve", curve}};
    save_checkpoint(path, s.params, extra,
                    {{"adam_m", s.optimizer.m}, {"adam_v", s.optimizer.v}, {"best", s.best.flatten()}});
}

TrainState load_train_state(const std::string& path) {
    LoadedCheckpoint ck = load_checkpoint(path);
    TrainState s;
    s.params = std::move(ck.params);
    const auto& h = ck.extra_header;
    auto block = [&](const std::string& name) -> std::vector<double>& {
        for (auto& b : ck.extra_blocks)
            if (b.name == name) {
                if (b.values.size() != s.params.size()) throw IoError(path + ": block " + name + " has wrong size");
                return b.values;
            }
        throw IoError(path + ": not a resumable checkpoint (missing block " + name + ")");
    };
    try {
        s.epoch = h.at("epoch").get<int>();
        s.optimizer.step = h.at("step").get<std::uint64_t>();
        s.best_val = h.at("best_val").is_null() ? std::numeric_limits<double>::infinity()
                                                : h.at("best_val").get<double>();
        s.best_epoch = h.at("best_epoch").get<int>();
        s.rng_state = h.at("rng_state").get<std::string>();
        for (const auto& r : h.at("curve")) s.curve.push_back({r.at(0).get<int>(), r.at(1).get<double>(), r.at(2).get<double>()});
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path + ": not a resumable checkpoint: " + e.what());
    }
    s.optimizer.m = std::move(block("adam_m"));
    s.optimizer.v = std::move(block("adam_v"));
    s.best = s.params;
    s.best.unflatten(block("best"));
    return s;
}

void write_loss_curve(const std::string& path, const std::vector<EpochRecord>& curve) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream os(path);
    if (!os) throw IoError("cannot write " + path);
    os << "epoch,train_mse,val_mse\n";
    char buf[128];
    for (const auto& r : curve) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", r.epoch, r.train_mse, r.val_mse);
        os << buf;
    }
}

}  // namespace shearop
