#include "shearop/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "shearop/error.hpp"

namespace shearop {

namespace {

void check_sno(const SnoLayerParams& p, const WindowBank& bank) {
    if (p.bands != bank.count())
        throw StructuralError("sno layer has " + std::to_string(p.bands) + " bands, bank has " +
                              std::to_string(bank.count()));
    if (static_cast<int>(p.gamma.size()) != bank.scale_count())
        throw StructuralError("sno layer gate count does not match bank scales");
    std::size_t expect = p.bands;
    if (p.mode == MixingMode::full) expect *= static_cast<std::size_t>(p.c_in) * p.c_out;
    if (p.mode == MixingMode::diagonal) expect *= p.c_in;
    if (p.weights.size() != expect) throw StructuralError("sno layer weight array has wrong size");
    if (p.mode != MixingMode::full && p.c_in != p.c_out)
        throw StructuralError("diagonal/scalar mixing requires C_in == C_out");
}

void check_fno(const FnoLayerParams& p, const Grid2D& g) {
    if (p.modes_x < 1 || p.modes_y < 1 || 2 * p.modes_x > g.nx || 2 * p.modes_y > g.ny)
        throw StructuralError("fno modes " + std::to_string(p.modes_x) + "x" +
                              std::to_string(p.modes_y) + " exceed the Nyquist limits of a " +
                              std::to_string(g.nx) + "x" + std::to_string(g.ny) + " grid");
    if (p.weights.size() != 2ull * p.modes_x * p.modes_y * p.c_in * p.c_out)
        throw StructuralError("fno layer weight array has wrong size");
}

}  // namespace

cplx SpectralKernel::at(int c, int o, std::size_t k) const {
    const std::size_t nh = grid.spectral_size();
    if (diagonal) return c == o ? values[c * nh + k] : cplx{};
    return values[(static_cast<std::size_t>(c) * c_out + o) * nh + k];
}

SpectralKernel assemble_sno_kernel(const SnoLayerParams& p, const WindowBank& bank) {
    check_sno(p, bank);
    SpectralKernel K;
    K.grid = bank.grid();
    K.c_in = p.c_in;
    K.c_out = p.c_out;
    K.diagonal = p.mode != MixingMode::full;
    const std::size_t nh = K.grid.spectral_size();
    const int nmix = K.diagonal ? p.c_in : p.c_in * p.c_out;
    K.values.assign(nh * nmix, cplx{});

    std::vector<double> gate(p.gamma.size());
    for (std::size_t j = 0; j < gate.size(); ++j) gate[j] = sigmoid(p.gamma[j]);
    const auto& scale_of = bank.scale_map();

    for (std::size_t k = 0; k < nh; ++k)
        if (!bank.point_entries(k).empty()) K.support.push_back(static_cast<std::uint32_t>(k));

    const auto npts = static_cast<std::int64_t>(K.support.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t s = 0; s < npts; ++s) {
        const std::size_t k = K.support[s];
        for (const auto& e : bank.point_entries(k)) {
            const double a = gate[scale_of[e.window]] * e.value;
            const std::size_t m = e.window;
            switch (p.mode) {
                case MixingMode::full:
                    for (int t = 0; t < nmix; ++t)
                        K.values[t * nh + k] += a * p.weights[m * nmix + t];
                    break;
                case MixingMode::diagonal:
                    for (int c = 0; c < nmix; ++c)
                        K.values[c * nh + k] += a * p.weights[m * nmix + c];
                    break;
                case MixingMode::scalar:
                    for (int c = 0; c < nmix; ++c) K.values[c * nh + k] += a * p.weights[m];
                    break;
            }
        }
    }
    return K;
}

SpectralKernel assemble_fno_kernel(const FnoLayerParams& p, const Grid2D& grid) {
    validate(grid);
    check_fno(p, grid);
    SpectralKernel K;
    K.grid = grid;
    K.c_in = p.c_in;
    K.c_out = p.c_out;
    const std::size_t nh = grid.spectral_size();
    const int nky = grid.nky();
    K.values.assign(nh * p.c_in * p.c_out, cplx{});
    for (int block = 0; block < 2; ++block) {
        for (int x = 0; x < p.modes_x; ++x) {
            const int row = block == 0 ? x : grid.nx - p.modes_x + x;
            for (int y = 0; y < p.modes_y; ++y) {
                const std::size_t k = static_cast<std::size_t>(row) * nky + y;
                K.support.push_back(static_cast<std::uint32_t>(k));
                for (int c = 0; c < p.c_in; ++c)
                    for (int o = 0; o < p.c_out; ++o)
                        K.values[(static_cast<std::size_t>(c) * p.c_out + o) * nh + k] =
                            p.weights[p.index(block, x, y, c, o)];
            }
        }
    }
    std::sort(K.support.begin(), K.support.end());
    return K;
}

void apply_kernel(const SpectralKernel& K, const SpectralField& x, SpectralField& y) {
    if (!(x.grid == K.grid) || x.channels != K.c_in)
        throw StructuralError("apply_kernel: input does not match kernel shape");
    const std::size_t nh = K.grid.spectral_size();
    if (!(y.grid == K.grid) || y.channels != K.c_out) y = SpectralField(K.grid, K.c_out);
    std::fill(y.coeffs.begin(), y.coeffs.end(), cplx{});
    const auto nsup = K.support.size();
#pragma omp parallel for schedule(static)
    for (int o = 0; o < K.c_out; ++o) {
        cplx* yo = y.coeffs.data() + o * nh;
        if (K.diagonal) {
            const cplx* kv = K.values.data() + o * nh;
            const cplx* xo = x.coeffs.data() + o * nh;
            for (std::size_t s = 0; s < nsup; ++s) {
                const auto k = K.support[s];
                yo[k] = kv[k] * xo[k];
            }
        } else {
            for (int c = 0; c < K.c_in; ++c) {
                const cplx* kv = K.values.data() + (static_cast<std::size_t>(c) * K.c_out + o) * nh;
                const cplx* xc = x.coeffs.data() + c * nh;
                for (std::size_t s = 0; s < nsup; ++s) {
                    const auto k = K.support[s];
                    yo[k] += kv[k] * xc[k];
                }
            }
        }
    }
}

void apply_kernel_adjoint(const SpectralKernel& K, const SpectralField& y, SpectralField& x) {
    if (!(y.grid == K.grid) || y.channels != K.c_out)
        throw StructuralError("apply_kernel_adjoint: input does not match kernel shape");
    const std::size_t nh = K.grid.spectral_size();
    if (!(x.grid == K.grid) || x.channels != K.c_in) x = SpectralField(K.grid, K.c_in);
    std::fill(x.coeffs.begin(), x.coeffs.end(), cplx{});
    const auto nsup = K.support.size();
#pragma omp parallel for schedule(static)
    for (int c = 0; c < K.c_in; ++c) {
        cplx* xc = x.coeffs.data() + c * nh;
        if (K.diagonal) {
            const cplx* kv = K.values.data() + c * nh;
            const cplx* yc = y.coeffs.data() + c * nh;
            for (std::size_t s = 0; s < nsup; ++s) {
                const auto k = K.support[s];
                xc[k] = std::conj(kv[k]) * yc[k];
            }
        } else {
            for (int o = 0; o < K.c_out; ++o) {
                const cplx* kv = K.values.data() + (static_cast<std::size_t>(c) * K.c_out + o) * nh;
                const cplx* yo = y.coeffs.data() + o * nh;
                for (std::size_t s = 0; s < nsup; ++s) {
                    const auto k = K.support[s];
                    xc[k] += std::conj(kv[k]) * yo[k];
                }
            }
        }
    }
}

FeatureField sno_spectral_forward(const FeatureField& u, const SnoLayerParams& p,
                                  const WindowBank& bank) {
    if (!(u.grid == bank.grid())) throw StructuralError("sno layer: field grid differs from bank grid");
    if (u.channels != p.c_in) throw StructuralError("sno layer: channel count mismatch");
    const SpectralKernel K = assemble_sno_kernel(p, bank);
    SpectralField y;
    apply_kernel(K, rfft2(u), y);
    return irfft2(y);
}

FeatureField fno_spectral_forward(const FeatureField& u, const FnoLayerParams& p) {
    if (u.channels != p.c_in) throw StructuralError("fno layer: channel count mismatch");
    const SpectralKernel K = assemble_fno_kernel(p, u.grid);
    SpectralField y;
    apply_kernel(K, rfft2(u), y);
    return irfft2(y);
}

void sno_param_grad(const SnoLayerParams& p, const WindowBank& bank, const SpectralField& x,
                    const SpectralField& grad_y, SnoLayerParams& grad) {
    check_sno(p, bank);
    if (grad.weights.size() != p.weights.size() || grad.gamma.size() != p.gamma.size())
        throw StructuralError("sno_param_grad: gradient buffer shape mismatch");
    const std::size_t nh = bank.grid().spectral_size();
    const int C_in = p.c_in;
    const int C_out = p.c_out;
    std::vector<double> gate(p.gamma.size());
    for (std::size_t j = 0; j < gate.size(); ++j) gate[j] = sigmoid(p.gamma[j]);
    std::vector<double> dgate(p.gamma.size(), 0.0);

    std::vector<cplx> acc(p.mode == MixingMode::full ? C_in * C_out : C_in);
    for (int m = 0; m < p.bands; ++m) {
        std::fill(acc.begin(), acc.end(), cplx{});
        for (const auto& e : bank.window_entries(m)) {
            const std::size_t k = e.index;
            if (p.mode == MixingMode::full) {
                for (int c = 0; c < C_in; ++c) {
                    const cplx xc = e.value * std::conj(x.coeffs[c * nh + k]);
                    for (int o = 0; o < C_out; ++o) acc[c * C_out + o] += grad_y.coeffs[o * nh + k] * xc;
                }
            } else {
                for (int c = 0; c < C_in; ++c)
                    acc[c] += e.value * grad_y.coeffs[c * nh + k] * std::conj(x.coeffs[c * nh + k]);
            }
        }
        const int j = bank.scale_of(m);
        const double g = gate[j];
        double dg = 0.0;
        switch (p.mode) {
            case MixingMode::full:
            case MixingMode::diagonal: {
                const std::size_t base = static_cast<std::size_t>(m) * acc.size();
                for (std::size_t t = 0; t < acc.size(); ++t) {
                    grad.weights[base + t] += g * acc[t];
                    dg += std::real(p.weights[base + t] * std::conj(acc[t]));
                }
                break;
            }
            case MixingMode::scalar: {
                cplx sum{};
                for (const auto& a : acc) sum += a;
                grad.weights[m] += g * sum;
                dg += std::real(p.weights[m] * std::conj(sum));
                break;
            }
        }
        dgate[j] += dg;
    }
    for (std::size_t j = 0; j < gate.size(); ++j) grad.gamma[j] += dgate[j] * gate[j] * (1.0 - gate[j]);
}

void fno_param_grad(const FnoLayerParams& p, const SpectralField& x, const SpectralField& grad_y,
                    FnoLayerParams& grad) {
    check_fno(p, x.grid);
    if (grad.weights.size() != p.weights.size())
        throw StructuralError("fno_param_grad: gradient buffer shape mismatch");
    const Grid2D& g = x.grid;
    const std::size_t nh = g.spectral_size();
    const int nky = g.nky();
    for (int block = 0; block < 2; ++block)
        for (int mx = 0; mx < p.modes_x; ++mx) {
            const int row = block == 0 ? mx : g.nx - p.modes_x + mx;
            for (int my = 0; my < p.modes_y; ++my) {
                const std::size_t k = static_cast<std::size_t>(row) * nky + my;
                for (int c = 0; c < p.c_in; ++c) {
                    const cplx xc = std::conj(x.coeffs[c * nh + k]);
                    for (int o = 0; o < p.c_out; ++o)
                        grad.weights[p.index(block, mx, my, c, o)] += grad_y.coeffs[o * nh + k] * xc;
                }
            }
        }
}

}  // namespace shearop
