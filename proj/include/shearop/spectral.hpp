#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "shearop/field.hpp"
#include "shearop/model.hpp"
#include "shearop/shearlet.hpp"

namespace shearop {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Per-frequency channel-mixing multiplier K_{c,o}(k) of a spectral layer.
/// For SNO, K = sum_m sigmoid(gamma_scale(m)) Xi_m(k) W_{m,c,o}; for FNO, K
/// is R on the retained modes. Diagonal kernels store only c == o.
/// Layout: full [(c*C_out + o)*Nh + k], diagonal [c*Nh + k].
struct SpectralKernel {
    Grid2D grid;
    int c_in = 0;
    int c_out = 0;
    bool diagonal = false;
    std::vector<cplx> values;
    std::vector<std::uint32_t> support;  // half-plane points where K may be nonzero

    cplx at(int c, int o, std::size_t k) const;
};

SpectralKernel assemble_sno_kernel(const SnoLayerParams& p, const WindowBank& bank);
/// Throws StructuralError when the modes exceed the grid's Nyquist limits.
SpectralKernel assemble_fno_kernel(const FnoLayerParams& p, const Grid2D& grid);

/// Y_o = sum_c K_{c,o} X_c; zero outside the kernel support.
void apply_kernel(const SpectralKernel& k, const SpectralField& x, SpectralField& y);
/// X_c = sum_o conj(K_{c,o}) Y_o, the adjoint channel mix.
void apply_kernel_adjoint(const SpectralKernel& k, const SpectralField& y, SpectralField& x);

/// v = irfft2( sum_m g_scale(m) sum_c W_{m,c,o} Xi_m rfft2(u)_c ).
FeatureField sno_spectral_forward(const FeatureField& u, const SnoLayerParams& p,
                                  const WindowBank& bank);
/// v = irfft2( R * rfft2(u) ) on the two retained corner blocks.
FeatureField fno_spectral_forward(const FeatureField& u, const FnoLayerParams& p);

// Parameter gradients of one spectral layer, given the layer input spectrum
// `x` and the gradient w.r.t. the output spectrum `grad_y` (d/dRe + i d/dIm
// convention). Results are accumulated into `grad`.
void sno_param_grad(const SnoLayerParams& p, const WindowBank& bank, const SpectralField& x,
                    const SpectralField& grad_y, SnoLayerParams& grad);
void fno_param_grad(const FnoLayerParams& p, const SpectralField& x, const SpectralField& grad_y,
                    FnoLayerParams& grad);

/// Serial reference implementations that follow the layer definition term
/// by term (band by band, mode by mode). Kept for tests and benchmarks.
namespace reference {

FeatureField sno_spectral_forward(const FeatureField& u, const SnoLayerParams& p,
                                  const WindowBank& bank);
FeatureField fno_spectral_forward(const FeatureField& u, const FnoLayerParams& p);

}  // namespace reference

}  // namespace shearop
