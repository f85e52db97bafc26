#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "shearop/field.hpp"

namespace shearop {

enum class AngularLayout {
    uniform,      // theta_s = pi s / S at every scale
    cone_adapted  // theta_{j,s} = arctan((s - S/2) 2^{-floor(j/2)}) mod pi
};

/// Hyperparameters of the directional frequency tiling.
struct FrameSpec {
    int n_scales = 4;       // J, dyadic radial bands
    int n_shears = 64;      // S, directions per scale
    double r0 = 0.25;       // base radial cutoff, fraction of r_max
    double eps_norm = 1e-12;
    AngularLayout layout = AngularLayout::uniform;

    /// Throws ConfigError when J < 1, S < 2, r0 outside (0,1) or eps <= 0.
    void validate() const;
    int window_count() const { return 1 + n_scales * n_shears; }
    bool operator==(const FrameSpec&) const = default;
};

/// C^3 Meyer auxiliary polynomial; 0 below 0, 1 above 1.
double meyer_taper(double t);

/// Smooth isotropic low-pass: 1 up to cutoff/2, 0 from cutoff on.
double radial_lowpass(double r_norm, double cutoff);

/// Cutoff c_j of the j-th low-pass, j in [0, J]. The top cutoff is 2 so the
/// outermost band covers the whole grid (r_norm <= 1).
double radial_cutoff(int j, const FrameSpec& spec);

/// Littlewood-Paley band sqrt(P(r, c_j)^2 - P(r, c_{j-1})^2), j in [1, J].
double radial_band(double r_norm, int j, const FrameSpec& spec);

/// Orientation centers for scale j (uniform layout ignores j).
std::vector<double> angular_centers(int j, const FrameSpec& spec);

/// Raised-cosine window around center s. Adjacent windows overlap so the
/// squares sum to one for every theta.
double angular_window(double theta, int s, const FrameSpec& spec, int j = 1);

/// Immutable bank of M real windows on the half-plane of one grid, stored
/// sparsely both per window and per frequency point.
class WindowBank {
public:
    struct Entry {
        std::uint32_t index;  // flat half-plane index
        double value;
    };
    struct PointEntry {
        std::uint32_t window;
        double value;
    };

    /// Wraps arbitrary nonnegative windows (no normalization). Used for
    /// degenerate test configurations such as a single all-pass window.
    static WindowBank from_dense(const Grid2D& grid, int n_scales,
                                 const std::vector<std::vector<double>>& windows,
                                 const std::vector<int>& scale_of);

    const Grid2D& grid() const { return grid_; }
    const FrameSpec& spec() const { return spec_; }
    int count() const { return static_cast<int>(scale_of_.size()); }
    /// Number of gated scales including the low-pass (J + 1).
    int scale_count() const { return n_scales_ + 1; }
    int scale_of(int m) const { return scale_of_.at(m); }
    const std::vector<int>& scale_map() const { return scale_of_; }

    std::span<const Entry> window_entries(int m) const;
    std::span<const PointEntry> point_entries(std::size_t idx) const {
        return {point_entries_.data() + point_offsets_[idx],
                point_offsets_[idx + 1] - point_offsets_[idx]};
    }
    std::vector<double> dense(int m) const;
    std::size_t nonzeros() const { return point_entries_.size(); }

    /// Sum of squared windows before normalization, per point.
    const std::vector<double>& pre_sum() const { return pre_sum_; }
    /// max |sum_m window_m^2 - 1| over points whose pre-sum exceeds eps_norm.
    double frame_deviation() const;

private:
    friend WindowBank build_windows(const Grid2D& grid, const FrameSpec& spec);
    void index_points();

    Grid2D grid_;
    FrameSpec spec_;
    int n_scales_ = 0;
    std::vector<int> scale_of_;
    std::vector<std::size_t> window_offsets_;
    std::vector<Entry> entries_;
    std::vector<std::size_t> point_offsets_;
    std::vector<PointEntry> point_entries_;
    std::vector<double> pre_sum_;
};

/// Builds the low-pass plus J*S directional windows and normalizes them
/// pointwise to an approximate tight frame.
WindowBank build_windows(const Grid2D& grid, const FrameSpec& spec);

/// Process-wide cache so models evaluated at several resolutions rebuild
/// each bank once.
std::shared_ptr<const WindowBank> cached_windows(const Grid2D& grid, const FrameSpec& spec);

/// Pointwise product of every channel of `s` with window m.
SpectralField apply_band(const SpectralField& s, const WindowBank& bank, int m);

/// Writes a grayscale PNG of the tiling on the centered full frequency
/// plane, one gray level per dominant window.
void export_tiling(const WindowBank& bank, const std::string& path);

}  // namespace shearop
