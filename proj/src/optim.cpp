#include "shearop/optim.hpp"

#include <cmath>
#include <string>

#include "shearop/error.hpp"

namespace shearop {

OptimizerState make_optimizer_state(std::size_t n) {
    OptimizerState s;
    s.m.assign(n, 0.0);
    s.v.assign(n, 0.0);
    return s;
}

void adamw_step(std::span<double> params, std::span<const double> grads, OptimizerState& state,
                const AdamWConfig& cfg) {
    if (params.size() != grads.size() || state.m.size() != params.size() ||
        state.v.size() != params.size())
        throw StructuralError("adamw_step: parameter, gradient and state sizes differ");
    for (std::size_t i = 0; i < grads.size(); ++i)
        if (!std::isfinite(grads[i]))
            throw NumericalError("adamw_step: non-finite gradient at flat index " + std::to_string(i));

    ++state.step;
    const double t = static_cast<double>(state.step);
    const double bc1 = 1.0 - std::pow(cfg.beta1, t);
    const double bc2 = 1.0 - std::pow(cfg.beta2, t);
    const double decay = 1.0 - cfg.lr * cfg.weight_decay;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
        const double m_hat = state.m[i] / bc1;
        const double v_hat = state.v[i] / bc2;
        params[i] = params[i] * decay - cfg.lr * (m_hat / (std::sqrt(v_hat) + cfg.eps));
    }
}

void adamw_step(ModelParams& params, const ModelParams& grads, OptimizerState& state,
                const AdamWConfig& cfg) {
    std::vector<double> flat = params.flatten();
    adamw_step(flat, grads.flatten(), state, cfg);
    params.unflatten(flat);
}

}  // namespace shearop
