#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace shearop {

using cplx = std::complex<double>;

/// Uniform periodic grid on [ax,bx] x [ay,by]. Sample (i, j) sits at the
/// cell center (ax + (i + 1/2) hx, ay + (j + 1/2) hy) and is stored at
/// flat index i * ny + j.
struct Grid2D {
    int nx = 0;
    int ny = 0;
    double ax = 0.0, bx = 1.0;
    double ay = 0.0, by = 1.0;

    /// Validating constructor; throws StructuralError on a degenerate grid.
    static Grid2D make(int nx, int ny, double ax, double bx, double ay, double by);
    static Grid2D square(int n, double a, double b) { return make(n, n, a, b, a, b); }

    std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
    /// Columns of the half-plane spectrum.
    int nky() const { return ny / 2 + 1; }
    std::size_t spectral_size() const { return static_cast<std::size_t>(nx) * nky(); }

    double lx() const { return bx - ax; }
    double ly() const { return by - ay; }
    double hx() const { return lx() / nx; }
    double hy() const { return ly() / ny; }
    double x(int i) const { return ax + (i + 0.5) * hx(); }
    double y(int j) const { return ay + (j + 0.5) * hy(); }

    bool operator==(const Grid2D&) const = default;
};

/// Throws StructuralError unless nx, ny >= 8, both even and the bounds are ordered.
void validate(const Grid2D& g);

struct ScalarField {
    Grid2D grid;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const Grid2D& g, double fill = 0.0) : grid(g), values(g.size(), fill) {}

    double& at(int i, int j) { return values[static_cast<std::size_t>(i) * grid.ny + j]; }
    double at(int i, int j) const { return values[static_cast<std::size_t>(i) * grid.ny + j]; }
};

/// C channels, channel-major: values[c * nx * ny + i * ny + j].
struct FeatureField {
    Grid2D grid;
    int channels = 0;
    std::vector<double> values;

    FeatureField() = default;
    FeatureField(const Grid2D& g, int c, double fill = 0.0)
        : grid(g), channels(c), values(g.size() * static_cast<std::size_t>(c), fill) {}

    std::span<double> channel(int c) { return {values.data() + c * grid.size(), grid.size()}; }
    std::span<const double> channel(int c) const {
        return {values.data() + c * grid.size(), grid.size()};
    }
};

/// Half-plane spectrum: coeffs[c * nx * nky + kx_row * nky + ky], kx_row in
/// [0, nx) wraps negative wavenumbers, ky in [0, ny/2].
struct SpectralField {
    Grid2D grid;
    int channels = 0;
    std::vector<cplx> coeffs;

    SpectralField() = default;
    SpectralField(const Grid2D& g, int c)
        : grid(g), channels(c), coeffs(g.spectral_size() * static_cast<std::size_t>(c)) {}

    std::span<cplx> channel(int c) {
        return {coeffs.data() + c * grid.spectral_size(), grid.spectral_size()};
    }
    std::span<const cplx> channel(int c) const {
        return {coeffs.data() + c * grid.spectral_size(), grid.spectral_size()};
    }
};

/// Wavenumber metadata for the half-plane layout of a grid.
struct FreqGrid {
    std::vector<int> kx;  // signed, per row, in [-nx/2, nx/2 - 1]
    std::vector<int> ky;  // per column, in [0, ny/2]
    double scale_x = 1.0; // 2 pi / (bx - ax)
    double scale_y = 1.0;
    double r_max = 1.0;   // max |kappa| over the half-plane

    double kappa_x(int row) const { return kx[row] * scale_x; }
    double kappa_y(int col) const { return ky[col] * scale_y; }
    /// |kappa| / r_max, in [0, 1].
    double radius(int row, int col) const;
    /// atan2(kappa_y, kappa_x) in [0, pi]; 0 at the origin.
    double theta(int row, int col) const;
};

FreqGrid freq_grid(const Grid2D& g);

/// Number of times a half-plane column is counted in the full plane (1 for
/// ky = 0 and ky = ny/2, 2 otherwise).
inline double half_plane_weight(int ky, int ny) { return (ky == 0 || 2 * ky == ny) ? 1.0 : 2.0; }

// Forward transform is unnormalized; the inverse carries 1/(nx*ny).
void rfft2(const Grid2D& g, std::span<const double> in, std::span<cplx> out);
/// Symmetrizes the ky = 0 and ky = ny/2 columns before inverting, so any
/// half-plane input yields a real field. `in` is not modified.
void irfft2(const Grid2D& g, std::span<const cplx> in, std::span<double> out);

/// Replaces the ky = 0 and ky = ny/2 columns by the average with their
/// Hermitian mirror.
void symmetrize_self_conjugate(const Grid2D& g, std::span<cplx> spec);

SpectralField rfft2(const FeatureField& f);
SpectralField rfft2(const ScalarField& f);
FeatureField irfft2(const SpectralField& s);

FeatureField to_feature(const ScalarField& f);
ScalarField to_scalar(const FeatureField& f, int channel = 0);

bool all_finite(std::span<const double> v);

}  // namespace shearop
