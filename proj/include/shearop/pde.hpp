#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "shearop/dataset.hpp"
#include "shearop/field.hpp"

namespace shearop {

enum class BenchmarkId {
    multi_orientation_texture,
    bent_ridge_advect,
    anisotropic_ridge_advect,
    sheared_kelvin_helmholtz,
    polygonal_shock,
    multi_angle_shocks,
    spiral_shock,
};

enum class PdeClass { advection, diffusion, burgers };

std::string to_string(BenchmarkId id);
/// Throws ConfigError listing the valid ids.
BenchmarkId parse_benchmark(const std::string& s);
/// All ids in the order used for result tables.
const std::vector<BenchmarkId>& all_benchmarks();
PdeClass pde_class(BenchmarkId id);

struct BenchmarkSpec {
    BenchmarkId id = BenchmarkId::multi_orientation_texture;
    Grid2D grid;
    int n_frames = 150;  // T; the dataset holds T + 1 snapshots
    double dt_snap = 2e-3;
    double cx = 0.0, cy = 0.0;  // advection velocity
    double dx = 0.0, dy = 0.0;  // diffusivities
    double nu = 0.0;            // Burgers viscosity
    double noise = 0.0;         // std of the additive Gaussian noise on u0
    std::uint64_t seed = 0;
    bool conservative = false;  // Burgers flux form instead of u (u_x + u_y)

    void validate() const;
    nlohmann::json to_json() const;
};

/// Default domain, constants, frame count and snapshot interval for `id` on an n x n grid.
BenchmarkSpec default_spec(BenchmarkId id, int n, std::uint64_t seed = 0);

/// Noise-free initial profile at a point.
double initial_value(BenchmarkId id, double x, double y);
/// u0 sampled at cell centers, plus seeded noise when spec.noise > 0.
ScalarField initial_condition(const BenchmarkSpec& spec);

/// Exact solution operator of the linear cases. Advection zeroes the
/// Nyquist row and column, whose shift is not representable by a real
/// field (t = 0 returns u0 unchanged); diffusion damps every mode.
/// Throws StructuralError for Burgers.
ScalarField linear_propagate(const ScalarField& u0, const BenchmarkSpec& spec, double t);

/// Spatial operator of viscous Burgers, -u (u_x + u_y) + nu lap u, with
/// upwind first differences and the centered 5-point Laplacian (or the
/// Engquist-Osher flux divergence when `conservative`).
ScalarField burgers_rhs(const ScalarField& u, double nu, bool conservative = false);
/// One SSP-RK3 step. Throws NumericalError on a non-finite stage.
ScalarField ssprk3_step(const ScalarField& u, double dt, double nu, bool conservative = false);

/// Largest stable step, 0.5 / (max|u|/hx + max|u|/hy + 2nu/hx^2 + 2nu/hy^2);
/// +infinity when u = 0 and nu = 0.
double cfl_dt(const ScalarField& u, double nu);
double cfl_number(const ScalarField& u, double nu, double dt);

/// Snapshots u(k dt_snap), k = 0..T.
Dataset generate_dataset(const BenchmarkSpec& spec);

/// Periodic anisotropic total variation sum |forward differences|.
double total_variation(const ScalarField& u);

}  // namespace shearop
