#include "shearop/field.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>
#include <tuple>

#include <fftw3.h>

#include "shearop/error.hpp"

namespace shearop {

Grid2D Grid2D::make(int nx, int ny, double ax, double bx, double ay, double by) {
    Grid2D g{nx, ny, ax, bx, ay, by};
    validate(g);
    return g;
}

void validate(const Grid2D& g) {
    if (g.nx < 8 || g.ny < 8)
        throw StructuralError("grid must be at least 8x8, got " + std::to_string(g.nx) + "x" +
                              std::to_string(g.ny));
    if (g.nx % 2 != 0 || g.ny % 2 != 0)
        throw StructuralError("grid dimensions must be even");
    if (!(g.bx > g.ax) || !(g.by > g.ay))
        throw StructuralError("grid bounds must satisfy bx > ax and by > ay");
}

double FreqGrid::radius(int row, int col) const {
    return std::hypot(kappa_x(row), kappa_y(col)) / r_max;
}

double FreqGrid::theta(int row, int col) const {
    if (kx[row] == 0 && ky[col] == 0) return 0.0;
    return std::atan2(kappa_y(col), kappa_x(row));
}

FreqGrid freq_grid(const Grid2D& g) {
    validate(g);
    FreqGrid f;
    f.kx.resize(g.nx);
    for (int r = 0; r < g.nx; ++r) f.kx[r] = r < g.nx / 2 ? r : r - g.nx;
    f.ky.resize(g.nky());
    for (int c = 0; c < g.nky(); ++c) f.ky[c] = c;
    f.scale_x = 2.0 * std::numbers::pi / g.lx();
    f.scale_y = 2.0 * std::numbers::pi / g.ly();
    f.r_max = std::hypot(0.5 * g.nx * f.scale_x, 0.5 * g.ny * f.scale_y);
    return f;
}

namespace {

// FFTW planning is not thread-safe; execution through the new-array
// interface is. Plans are created once per shape and never destroyed.
struct PlanPair {
    fftw_plan forward = nullptr;
    fftw_plan inverse = nullptr;
};

const PlanPair& plans_for(int nx, int ny) {
    static std::mutex mutex;
    static std::map<std::pair<int, int>, PlanPair> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find({nx, ny});
    if (it != cache.end()) return it->second;

    const std::size_t nreal = static_cast<std::size_t>(nx) * ny;
    const std::size_t ncplx = static_cast<std::size_t>(nx) * (ny / 2 + 1);
    double* r = fftw_alloc_real(nreal);
    fftw_complex* c = fftw_alloc_complex(ncplx);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    PlanPair p;
    p.forward = fftw_plan_dft_r2c_2d(nx, ny, r, c, flags);
    p.inverse = fftw_plan_dft_c2r_2d(nx, ny, c, r, flags);
    fftw_free(r);
    fftw_free(c);
    if (!p.forward || !p.inverse) throw StructuralError("FFTW planning failed");
    return cache.emplace(std::make_pair(nx, ny), p).first->second;
}

void check_sizes(const Grid2D& g, std::size_t nreal, std::size_t ncplx) {
    if (nreal != g.size() || ncplx != g.spectral_size())
        throw StructuralError("spectral transform: buffer size does not match grid");
}

}  // namespace

void rfft2(const Grid2D& g, std::span<const double> in, std::span<cplx> out) {
    check_sizes(g, in.size(), out.size());
    const auto& p = plans_for(g.nx, g.ny);
    // out-of-place r2c leaves the input intact
    fftw_execute_dft_r2c(p.forward, const_cast<double*>(in.data()),
                         reinterpret_cast<fftw_complex*>(out.data()));
}

void symmetrize_self_conjugate(const Grid2D& g, std::span<cplx> spec) {
    const int nky = g.nky();
    for (int col : {0, g.ny / 2}) {
        for (int r = 0; r <= g.nx / 2; ++r) {
            const int mirror = (g.nx - r) % g.nx;
            cplx& a = spec[static_cast<std::size_t>(r) * nky + col];
            cplx& b = spec[static_cast<std::size_t>(mirror) * nky + col];
            if (mirror == r) {
                a = {a.real(), 0.0};
            } else {
                const cplx avg = 0.5 * (a + std::conj(b));
                a = avg;
                b = std::conj(avg);
            }
        }
    }
}

void irfft2(const Grid2D& g, std::span<const cplx> in, std::span<double> out) {
    check_sizes(g, out.size(), in.size());
    const auto& p = plans_for(g.nx, g.ny);
    // c2r destroys its input, so always work on a copy
    thread_local std::vector<cplx> scratch;
    scratch.assign(in.begin(), in.end());
    symmetrize_self_conjugate(g, scratch);
    fftw_execute_dft_c2r(p.inverse, reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
    const double inv = 1.0 / static_cast<double>(g.size());
    for (double& v : out) v *= inv;
}

SpectralField rfft2(const FeatureField& f) {
    validate(f.grid);
    SpectralField s(f.grid, f.channels);
    for (int c = 0; c < f.channels; ++c) rfft2(f.grid, f.channel(c), s.channel(c));
    return s;
}

SpectralField rfft2(const ScalarField& f) {
    validate(f.grid);
    SpectralField s(f.grid, 1);
    rfft2(f.grid, f.values, s.channel(0));
    return s;
}

FeatureField irfft2(const SpectralField& s) {
    validate(s.grid);
    if (s.coeffs.size() != s.grid.spectral_size() * static_cast<std::size_t>(s.channels))
        throw StructuralError("irfft2: coefficient array does not match grid and channel count");
    FeatureField f(s.grid, s.channels);
    for (int c = 0; c < s.channels; ++c) irfft2(s.grid, s.channel(c), f.channel(c));
    return f;
}

FeatureField to_feature(const ScalarField& f) {
    FeatureField out(f.grid, 1);
    out.values = f.values;
    return out;
}

ScalarField to_scalar(const FeatureField& f, int channel) {
    if (channel < 0 || channel >= f.channels) throw StructuralError("to_scalar: channel out of range");
    ScalarField out(f.grid);
    auto ch = f.channel(channel);
    out.values.assign(ch.begin(), ch.end());
    return out;
}

bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace shearop
