#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "shearop/field.hpp"
#include "shearop/shearlet.hpp"
#include "shearop/spectral.hpp"

namespace testing_helpers {

inline shearop::ScalarField random_scalar(const shearop::Grid2D& g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d;
    shearop::ScalarField f(g);
    for (double& v : f.values) v = d(rng);
    return f;
}

inline shearop::FeatureField random_feature(const shearop::Grid2D& g, int c, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d;
    shearop::FeatureField f(g, c);
    for (double& v : f.values) v = d(rng);
    return f;
}

// Full-plane DFT by direct summation: F[p][q] = sum_ij u_ij exp(-2 pi i (p i / nx + q j / ny)).
inline std::vector<std::complex<double>> naive_dft(const shearop::Grid2D& g, const std::vector<double>& u) {
    const double two_pi = 6.283185307179586476925286766559;
    std::vector<std::complex<double>> out(g.size());
    for (int p = 0; p < g.nx; ++p)
        for (int q = 0; q < g.ny; ++q) {
            std::complex<double> s = 0.0;
            for (int i = 0; i < g.nx; ++i)
                for (int j = 0; j < g.ny; ++j) {
                    const double ph = -two_pi * (static_cast<double>(p * i % g.nx) / g.nx +
                                                 static_cast<double>(q * j % g.ny) / g.ny);
                    s += u[i * g.ny + j] * std::polar(1.0, ph);
                }
            out[p * g.ny + q] = s;
        }
    return out;
}

// Inverse of naive_dft, real part.
inline std::vector<double> naive_idft_real(const shearop::Grid2D& g, const std::vector<std::complex<double>>& F) {
    const double two_pi = 6.283185307179586476925286766559;
    std::vector<double> out(g.size());
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) {
            std::complex<double> s = 0.0;
            for (int p = 0; p < g.nx; ++p)
                for (int q = 0; q < g.ny; ++q) {
                    const double ph = two_pi * (static_cast<double>(p * i % g.nx) / g.nx +
                                                static_cast<double>(q * j % g.ny) / g.ny);
                    s += F[p * g.ny + q] * std::polar(1.0, ph);
                }
            out[i * g.ny + j] = s.real() / static_cast<double>(g.size());
        }
    return out;
}

// Real inverse of a half-plane spectrum: columns ky = 0 and ky = ny/2 are
// first averaged with their Hermitian mirror, then the full plane is
// completed by conjugate symmetry and inverted by direct summation.
inline std::vector<double> hermitian_inverse(const shearop::Grid2D& g, const std::vector<std::complex<double>>& half) {
    const int nky = g.ny / 2 + 1;
    auto at = [&](int p, int q) { return half[((p % g.nx + g.nx) % g.nx) * nky + q]; };
    std::vector<std::complex<double>> full(g.size());
    for (int p = 0; p < g.nx; ++p)
        for (int q = 0; q < g.ny; ++q) {
            if (q == 0 || q == g.ny / 2)
                full[p * g.ny + q] = 0.5 * (at(p, q) + std::conj(at(-p, q)));
            else if (q < nky)
                full[p * g.ny + q] = at(p, q);
            else
                full[p * g.ny + q] = std::conj(at(-p, g.ny - q));
        }
    return naive_idft_real(g, full);
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// Per-channel half-plane spectra by direct summation.
inline std::vector<std::vector<shearop::cplx>> spectra(const shearop::FeatureField& u) {
    const shearop::Grid2D& g = u.grid;
    std::vector<std::vector<shearop::cplx>> out;
    for (int c = 0; c < u.channels; ++c) {
        const auto sp = u.channel(c);
        const auto full = naive_dft(g, std::vector<double>(sp.begin(), sp.end()));
        std::vector<shearop::cplx> half(g.spectral_size());
        for (int p = 0; p < g.nx; ++p)
            for (int q = 0; q < g.nky(); ++q) half[p * g.nky() + q] = full[p * g.ny + q];
        out.push_back(std::move(half));
    }
    return out;
}

// v_o(k) = sum_m sigmoid(gamma_j(m)) Xi_m(k) sum_c W_{m,c,o} u_c(k), one frequency at a time.
inline shearop::FeatureField sno_oracle(const shearop::FeatureField& u, const shearop::SnoLayerParams& p, const shearop::WindowBank& bank) {
    const shearop::Grid2D& g = u.grid;
    const auto uh = spectra(u);
    std::vector<std::vector<double>> xi;
    for (int m = 0; m < bank.count(); ++m) xi.push_back(bank.dense(m));
    shearop::FeatureField out(g, p.c_out);
    for (int o = 0; o < p.c_out; ++o) {
        std::vector<shearop::cplx> vh(g.spectral_size());
        for (std::size_t k = 0; k < vh.size(); ++k) {
            shearop::cplx acc = 0.0;
            for (int m = 0; m < bank.count(); ++m) {
                const double gate = 1.0 / (1.0 + std::exp(-p.gamma[bank.scale_of(m)]));
                for (int c = 0; c < p.c_in; ++c) acc += gate * xi[m][k] * p.weight(m, c, o) * uh[c][k];
            }
            vh[k] = acc;
        }
        const auto v = hermitian_inverse(g, vh);
        std::copy(v.begin(), v.end(), out.channel(o).begin());
    }
    return out;
}

inline shearop::FeatureField fno_oracle(const shearop::FeatureField& u, const shearop::FnoLayerParams& p) {
    const shearop::Grid2D& g = u.grid;
    const auto uh = spectra(u);
    shearop::FeatureField out(g, p.c_out);
    for (int o = 0; o < p.c_out; ++o) {
        std::vector<shearop::cplx> vh(g.spectral_size());
        for (int row = 0; row < g.nx; ++row) {
            const int kx = row < g.nx / 2 ? row : row - g.nx;
            int block = -1, x = -1;
            if (kx >= 0 && kx < p.modes_x) {
                block = 0;
                x = kx;
            } else if (kx < 0 && kx >= -p.modes_x) {
                block = 1;
                x = kx + p.modes_x;
            }
            if (block < 0) continue;
            for (int y = 0; y < p.modes_y; ++y) {
                shearop::cplx acc = 0.0;
                for (int c = 0; c < p.c_in; ++c) acc += p.weights[p.index(block, x, y, c, o)] * uh[c][row * g.nky() + y];
                vh[row * g.nky() + y] = acc;
            }
        }
        const auto v = hermitian_inverse(g, vh);
        std::copy(v.begin(), v.end(), out.channel(o).begin());
    }
    return out;
}

}  // namespace testing_helpers
