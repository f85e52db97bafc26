#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "shearop/model.hpp"

namespace shearop {

struct AdamWConfig {
    double lr = 1e-3;
    double weight_decay = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// First/second moments over the flattened parameter vector.
struct OptimizerState {
    std::vector<double> m;
    std::vector<double> v;
    std::uint64_t step = 0;
};

OptimizerState make_optimizer_state(std::size_t n);

/// One AdamW step with bias correction. Decay is decoupled:
///   theta <- theta (1 - lr wd) - lr m_hat / (sqrt(v_hat) + eps).
/// Complex parameters are updated as independent re/im pairs.
/// Throws NumericalError on a non-finite gradient (state left untouched).
void adamw_step(std::span<double> params, std::span<const double> grads, OptimizerState& state,
                const AdamWConfig& cfg);
void adamw_step(ModelParams& params, const ModelParams& grads, OptimizerState& state,
                const AdamWConfig& cfg);

}  // namespace shearop
