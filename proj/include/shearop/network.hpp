#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "shearop/field.hpp"
#include "shearop/model.hpp"
#include "shearop/shearlet.hpp"
#include "shearop/spectral.hpp"

namespace shearop {

/// Exact GELU, 0.5 x (1 + erf(x / sqrt 2)).
double gelu(double x);
double gelu_grad(double x);

/// gelu(spectral(u) + W u + b) for one block; `bank` is required for SNO
/// layers and ignored for FNO.
FeatureField block_forward(const FeatureField& u, const LayerParams& layer, Arch arch,
                           const WindowBank* bank);

class Evaluator;

struct LayerTape {
    FeatureField input;
    SpectralField input_spectrum;
    FeatureField pre_activation;
};

/// Intermediates of one forward pass, enough for the exact gradient.
struct Tape {
    std::shared_ptr<const Evaluator> evaluator;
    std::uint64_t evaluator_id = 0;
    ScalarField input;
    std::vector<LayerTape> layers;
    FeatureField last_hidden;
    ScalarField output;
};

/// Parameters bound to one grid: window bank and per-layer spectral
/// kernels are assembled once, then reused for every sample. Read-only
/// after construction, so forward/backward may run concurrently.
class Evaluator : public std::enable_shared_from_this<Evaluator> {
public:
    Evaluator(ModelParams params, const Grid2D& grid);

    const ModelParams& params() const { return params_; }
    const Grid2D& grid() const { return grid_; }
    std::uint64_t id() const { return id_; }
    const WindowBank* bank() const { return bank_.get(); }

    /// project(blocks(lift(u))). Records intermediates into `tape` if given.
    ScalarField forward(const ScalarField& u, Tape* tape = nullptr) const;

    /// Adds d(loss)/d(params) to `grads`, where `grad_out` is d(loss)/d(output).
    /// Throws StructuralError if the tape came from a different evaluator.
    void backward(const Tape& tape, const ScalarField& grad_out, ModelParams& grads) const;
    ModelParams backward(const Tape& tape, const ScalarField& grad_out) const;

private:
    ModelParams params_;
    Grid2D grid_;
    std::shared_ptr<const WindowBank> bank_;
    std::vector<SpectralKernel> kernels_;
    std::uint64_t id_;
};

/// Convenience wrappers; the evaluator is kept alive by the tape.
ScalarField model_forward(const ScalarField& u, const ModelParams& params, Tape* tape = nullptr);
ModelParams model_backward(const Tape& tape, const ScalarField& grad_out);

}  // namespace shearop
