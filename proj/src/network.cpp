#include "shearop/network.hpp"

#include <atomic>
#include <cmath>
#include <numbers>

#include "shearop/error.hpp"

namespace shearop {

namespace {

std::atomic<std::uint64_t> next_evaluator_id{1};

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

// z_o = s_o + sum_c W[o,c] h_c + b_o, in place on s
void add_pointwise(const LayerParams& layer, const FeatureField& h, FeatureField& s) {
    const int C = h.channels;
    const std::size_t n = h.grid.size();
    for (int o = 0; o < C; ++o) {
        double* zo = s.values.data() + o * n;
        const double b = layer.pw_bias[o];
        for (std::size_t i = 0; i < n; ++i) zo[i] += b;
        for (int c = 0; c < C; ++c) {
            const double w = layer.pw_weight[o * C + c];
            const double* hc = h.values.data() + c * n;
            for (std::size_t i = 0; i < n; ++i) zo[i] += w * hc[i];
        }
    }
}

SpectralKernel make_kernel(const LayerParams& layer, Arch arch, const Grid2D& grid,
                           const WindowBank* bank) {
    if (arch == Arch::sno) {
        if (!bank) throw StructuralError("sno layer requires a window bank");
        return assemble_sno_kernel(layer.sno, *bank);
    }
    return assemble_fno_kernel(layer.fno, grid);
}

FeatureField run_block(const FeatureField& h, const LayerParams& layer, const SpectralKernel& K,
                       LayerTape* tape) {
    SpectralField x = rfft2(h);
    SpectralField y;
    apply_kernel(K, x, y);
    FeatureField z = irfft2(y);
    add_pointwise(layer, h, z);
    FeatureField out(h.grid, h.channels);
    for (std::size_t i = 0; i < z.values.size(); ++i) out.values[i] = gelu(z.values[i]);
    if (tape) {
        tape->input = h;
        tape->input_spectrum = std::move(x);
        tape->pre_activation = std::move(z);
    }
    return out;
}

}  // namespace

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); }

double gelu_grad(double x) {
    return 0.5 * (1.0 + std::erf(x * kInvSqrt2)) + x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

FeatureField block_forward(const FeatureField& u, const LayerParams& layer, Arch arch,
                           const WindowBank* bank) {
    if (arch == Arch::sno && bank && !(bank->grid() == u.grid))
        throw StructuralError("block_forward: bank grid differs from field grid");
    const SpectralKernel K = make_kernel(layer, arch, u.grid, bank);
    if (K.c_in != u.channels || static_cast<int>(layer.pw_bias.size()) != u.channels)
        throw StructuralError("block_forward: channel count mismatch");
    return run_block(u, layer, K, nullptr);
}

Evaluator::Evaluator(ModelParams params, const Grid2D& grid)
    : params_(std::move(params)), grid_(grid), id_(next_evaluator_id++) {
    validate(grid_);
    params_.config.validate();
    if (params_.config.arch == Arch::sno) bank_ = cached_windows(grid_, params_.config.frame);
    kernels_.reserve(params_.layers.size());
    for (const auto& layer : params_.layers)
        kernels_.push_back(make_kernel(layer, params_.config.arch, grid_, bank_.get()));
}

ScalarField Evaluator::forward(const ScalarField& u, Tape* tape) const {
    if (!(u.grid == grid_)) throw StructuralError("forward: field grid differs from evaluator grid");
    if (!all_finite(u.values)) throw NumericalError("forward: non-finite input field");
    const int C = params_.config.width;
    const std::size_t n = grid_.size();

    FeatureField h(grid_, C);
    for (int c = 0; c < C; ++c) {
        const double a = params_.lift_weight[c];
        const double b = params_.lift_bias[c];
        double* hc = h.values.data() + c * n;
        for (std::size_t i = 0; i < n; ++i) hc[i] = a * u.values[i] + b;
    }

    if (tape) {
        tape->evaluator = weak_from_this().lock();
        tape->evaluator_id = id_;
        tape->input = u;
        tape->layers.assign(params_.layers.size(), LayerTape{});
    }
    for (std::size_t l = 0; l < params_.layers.size(); ++l)
        h = run_block(h, params_.layers[l], kernels_[l], tape ? &tape->layers[l] : nullptr);

    ScalarField out(grid_, params_.proj_bias[0]);
    for (int c = 0; c < C; ++c) {
        const double w = params_.proj_weight[c];
        const double* hc = h.values.data() + c * n;
        for (std::size_t i = 0; i < n; ++i) out.values[i] += w * hc[i];
    }
    if (tape) {
        tape->last_hidden = std::move(h);
        tape->output = out;
    }
    return out;
}

void Evaluator::backward(const Tape& tape, const ScalarField& grad_out, ModelParams& grads) const {
    if (tape.evaluator_id != id_)
        throw StructuralError("backward: tape was recorded by a different evaluator (stale tape)");
    if (tape.layers.size() != params_.layers.size() || !(grad_out.grid == grid_))
        throw StructuralError("backward: tape or gradient shape mismatch");
    const int C = params_.config.width;
    const std::size_t n = grid_.size();
    const double inv_n = 1.0 / static_cast<double>(n);
    const int nky = grid_.nky();
    const std::size_t nh = grid_.spectral_size();
    const Arch arch = params_.config.arch;

    // projection
    FeatureField g(grid_, C);
    for (int c = 0; c < C; ++c) {
        const double w = params_.proj_weight[c];
        const double* hc = tape.last_hidden.values.data() + c * n;
        double* gc = g.values.data() + c * n;
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            acc += grad_out.values[i] * hc[i];
            gc[i] = w * grad_out.values[i];
        }
        grads.proj_weight[c] += acc;
    }
    double bias_acc = 0.0;
    for (double v : grad_out.values) bias_acc += v;
    grads.proj_bias[0] += bias_acc;

    FeatureField gz(grid_, C);
    FeatureField gh(grid_, C);
    SpectralField ghat(grid_, C);
    SpectralField grad_y(grid_, C);
    SpectralField adj;
    std::vector<double> tmp(n);
    for (std::size_t li = params_.layers.size(); li-- > 0;) {
        const LayerParams& layer = params_.layers[li];
        LayerParams& dlayer = grads.layers[li];
        const LayerTape& lt = tape.layers[li];

        for (std::size_t i = 0; i < gz.values.size(); ++i)
            gz.values[i] = g.values[i] * gelu_grad(lt.pre_activation.values[i]);

        // pointwise map
        std::fill(gh.values.begin(), gh.values.end(), 0.0);
        for (int o = 0; o < C; ++o) {
            const double* go = gz.values.data() + o * n;
            double bsum = 0.0;
            for (std::size_t i = 0; i < n; ++i) bsum += go[i];
            dlayer.pw_bias[o] += bsum;
            for (int c = 0; c < C; ++c) {
                const double* hc = lt.input.values.data() + c * n;
                double wsum = 0.0;
                for (std::size_t i = 0; i < n; ++i) wsum += go[i] * hc[i];
                dlayer.pw_weight[o * C + c] += wsum;
                const double w = layer.pw_weight[o * C + c];
                double* dh = gh.values.data() + c * n;
                for (std::size_t i = 0; i < n; ++i) dh[i] += w * go[i];
            }
        }

        // spectral path: adjoint of irfft2 is (w(ky)/N) rfft2
        for (int c = 0; c < C; ++c) rfft2(grid_, gz.channel(c), ghat.channel(c));
        for (int c = 0; c < C; ++c)
            for (int row = 0; row < grid_.nx; ++row)
                for (int col = 0; col < nky; ++col) {
                    const std::size_t k = c * nh + static_cast<std::size_t>(row) * nky + col;
                    grad_y.coeffs[k] = ghat.coeffs[k] * (half_plane_weight(col, grid_.ny) * inv_n);
                }
        if (arch == Arch::sno)
            sno_param_grad(layer.sno, *bank_, lt.input_spectrum, grad_y, dlayer.sno);
        else
            fno_param_grad(layer.fno, lt.input_spectrum, grad_y, dlayer.fno);

        // input gradient through the spectral path: irfft2(conj(K) ghat)
        apply_kernel_adjoint(kernels_[li], ghat, adj);
        for (int c = 0; c < C; ++c) {
            irfft2(grid_, adj.channel(c), tmp);
            double* dh = gh.values.data() + c * n;
            for (std::size_t i = 0; i < n; ++i) dh[i] += tmp[i];
        }
        std::swap(g, gh);
    }

    // lift
    for (int c = 0; c < C; ++c) {
        const double* gc = g.values.data() + c * n;
        double wa = 0.0, ba = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            wa += gc[i] * tape.input.values[i];
            ba += gc[i];
        }
        grads.lift_weight[c] += wa;
        grads.lift_bias[c] += ba;
    }
}

ModelParams Evaluator::backward(const Tape& tape, const ScalarField& grad_out) const {
    ModelParams grads = zero_params(params_.config);
    backward(tape, grad_out, grads);
    return grads;
}

ScalarField model_forward(const ScalarField& u, const ModelParams& params, Tape* tape) {
    auto ev = std::make_shared<const Evaluator>(params, u.grid);
    ScalarField out = ev->forward(u, tape);
    if (tape) tape->evaluator = ev;
    return out;
}

ModelParams model_backward(const Tape& tape, const ScalarField& grad_out) {
    if (!tape.evaluator) throw StructuralError("model_backward: tape has no recorded forward pass");
    return tape.evaluator->backward(tape, grad_out);
}

}  // namespace shearop
