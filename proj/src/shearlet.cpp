#include "shearop/shearlet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include "shearop/error.hpp"
#include "shearop/image.hpp"

namespace shearop {

namespace {

constexpr double kPi = std::numbers::pi;

double mod_pi(double a) {
    double r = std::fmod(a, kPi);
    if (r < 0) r += kPi;
    return r >= kPi ? 0.0 : r;
}

}  // namespace

void FrameSpec::validate() const {
    if (n_scales < 1) throw ConfigError("frame: n_scales must be >= 1");
    if (n_shears < 2) throw ConfigError("frame: n_shears must be >= 2");
    if (!(r0 > 0.0 && r0 < 1.0)) throw ConfigError("frame: r0 must lie in (0, 1)");
    if (!(eps_norm > 0.0)) throw ConfigError("frame: eps_norm must be positive");
}

double meyer_taper(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double t4 = t * t * t * t;
    return t4 * (35.0 - 84.0 * t + 70.0 * t * t - 20.0 * t * t * t);
}

double radial_lowpass(double r, double cutoff) {
    if (r <= 0.5 * cutoff) return 1.0;
    if (r >= cutoff) return 0.0;
    return std::cos(0.5 * kPi * meyer_taper(2.0 * r / cutoff - 1.0));
}

double radial_cutoff(int j, const FrameSpec& spec) {
    if (j < 0 || j > spec.n_scales) throw StructuralError("radial_cutoff: scale out of range");
    if (j == 0) return 0.5 * spec.r0;
    if (j == spec.n_scales) return 2.0;
    return std::min(1.0, spec.r0 * std::ldexp(1.0, j - 1));
}

double radial_band(double r, int j, const FrameSpec& spec) {
    if (j < 1 || j > spec.n_scales) throw StructuralError("radial_band: scale out of range");
    const double hi = radial_lowpass(r, radial_cutoff(j, spec));
    const double lo = radial_lowpass(r, radial_cutoff(j - 1, spec));
    return std::sqrt(std::max(0.0, hi * hi - lo * lo));
}

std::vector<double> angular_centers(int j, const FrameSpec& spec) {
    const int S = spec.n_shears;
    std::vector<double> c(S);
    if (spec.layout == AngularLayout::uniform) {
        for (int s = 0; s < S; ++s) c[s] = kPi * s / S;
    } else {
        const double slope = std::ldexp(1.0, -(j / 2));
        for (int s = 0; s < S; ++s) c[s] = mod_pi(std::atan((s - S / 2) * slope));
    }
    return c;
}

namespace {

// Window s spans from its left neighbor's center to its right neighbor's
// center; neighbors are s -/+ 1 cyclically for both layouts.
double angular_from_centers(double theta, int s, const std::vector<double>& c) {
    const int S = static_cast<int>(c.size());
    const double gap_right = mod_pi(c[(s + 1) % S] - c[s]);
    const double gap_left = mod_pi(c[s] - c[(s - 1 + S) % S]);
    const double d = mod_pi(theta - c[s]);
    if (gap_right > 0.0 && d < gap_right) return std::cos(0.5 * kPi * d / gap_right);
    const double back = kPi - d;
    if (gap_left > 0.0 && back < gap_left) return std::cos(0.5 * kPi * back / gap_left);
    return 0.0;
}

}  // namespace

double angular_window(double theta, int s, const FrameSpec& spec, int j) {
    if (s < 0 || s >= spec.n_shears) throw StructuralError("angular_window: shear index out of range");
    return angular_from_centers(theta, s, angular_centers(j, spec));
}

std::span<const WindowBank::Entry> WindowBank::window_entries(int m) const {
    if (m < 0 || m >= count()) throw StructuralError("window index out of range");
    return {entries_.data() + window_offsets_[m], window_offsets_[m + 1] - window_offsets_[m]};
}

std::vector<double> WindowBank::dense(int m) const {
    std::vector<double> out(grid_.spectral_size(), 0.0);
    for (const auto& e : window_entries(m)) out[e.index] = e.value;
    return out;
}

double WindowBank::frame_deviation() const {
    double worst = 0.0;
    for (std::size_t p = 0; p < pre_sum_.size(); ++p) {
        if (pre_sum_[p] <= spec_.eps_norm) continue;
        double sum = 0.0;
        for (const auto& e : point_entries(p)) sum += e.value * e.value;
        worst = std::max(worst, std::abs(sum - 1.0));
    }
    return worst;
}

void WindowBank::index_points() {
    const std::size_t npts = grid_.spectral_size();
    point_offsets_.assign(npts + 1, 0);
    for (const auto& e : entries_) ++point_offsets_[e.index + 1];
    for (std::size_t p = 0; p < npts; ++p) point_offsets_[p + 1] += point_offsets_[p];
    point_entries_.resize(entries_.size());
    std::vector<std::size_t> fill(point_offsets_.begin(), point_offsets_.end() - 1);
    for (int m = 0; m < count(); ++m)
        for (const auto& e : window_entries(m))
            point_entries_[fill[e.index]++] = {static_cast<std::uint32_t>(m), e.value};
}

WindowBank WindowBank::from_dense(const Grid2D& grid, int n_scales,
                                  const std::vector<std::vector<double>>& windows,
                                  const std::vector<int>& scale_of) {
    validate(grid);
    if (windows.size() != scale_of.size() || windows.empty())
        throw StructuralError("from_dense: window and scale map sizes differ");
    WindowBank b;
    b.grid_ = grid;
    b.spec_.n_scales = n_scales;
    b.n_scales_ = n_scales;
    b.scale_of_ = scale_of;
    b.pre_sum_.assign(grid.spectral_size(), 0.0);
    b.window_offsets_.push_back(0);
    for (std::size_t m = 0; m < windows.size(); ++m) {
        if (windows[m].size() != grid.spectral_size())
            throw StructuralError("from_dense: window has wrong size");
        if (scale_of[m] < 0 || scale_of[m] > n_scales)
            throw StructuralError("from_dense: scale index out of range");
        for (std::size_t p = 0; p < windows[m].size(); ++p) {
            const double v = windows[m][p];
            if (v < 0.0) throw StructuralError("from_dense: windows must be nonnegative");
            if (v > 0.0) {
                b.entries_.push_back({static_cast<std::uint32_t>(p), v});
                b.pre_sum_[p] += v * v;
            }
        }
        b.window_offsets_.push_back(b.entries_.size());
    }
    b.index_points();
    return b;
}

WindowBank build_windows(const Grid2D& grid, const FrameSpec& spec) {
    validate(grid);
    spec.validate();
    const FreqGrid freq = freq_grid(grid);
    const int J = spec.n_scales;
    const int S = spec.n_shears;
    const int M = spec.window_count();
    const int nky = grid.nky();
    const std::size_t npts = grid.spectral_size();

    std::vector<std::vector<double>> centers(J + 1);
    for (int j = 1; j <= J; ++j) centers[j] = angular_centers(j, spec);

    // per-window lists, filled in ascending point order
    std::vector<std::vector<WindowBank::Entry>> per_window(M);
    std::vector<double> pre_sum(npts, 0.0);
    std::vector<std::pair<int, double>> local;
    const double c0 = radial_cutoff(0, spec);

    for (int row = 0; row < grid.nx; ++row) {
        for (int col = 0; col < nky; ++col) {
            const std::size_t p = static_cast<std::size_t>(row) * nky + col;
            const double r = freq.radius(row, col);
            const double theta = freq.theta(row, col);
            local.clear();
            if (double w = radial_lowpass(r, c0); w > 0.0) local.emplace_back(0, w);
            for (int j = 1; j <= J; ++j) {
                const double rb = radial_band(r, j, spec);
                if (rb <= 0.0) continue;
                for (int s = 0; s < S; ++s) {
                    const double a = angular_from_centers(theta, s, centers[j]);
                    if (a > 0.0) local.emplace_back(1 + (j - 1) * S + s, rb * a);
                }
            }
            double sum = 0.0;
            for (const auto& [m, w] : local) sum += w * w;
            pre_sum[p] = sum;
            const double norm = 1.0 / std::sqrt(sum + spec.eps_norm);
            for (const auto& [m, w] : local) {
                const double v = std::min(1.0, w * norm);
                if (v > 0.0) per_window[m].push_back({static_cast<std::uint32_t>(p), v});
            }
        }
    }

    WindowBank b;
    b.grid_ = grid;
    b.spec_ = spec;
    b.n_scales_ = J;
    b.scale_of_.resize(M);
    b.scale_of_[0] = 0;
    for (int j = 1; j <= J; ++j)
        for (int s = 0; s < S; ++s) b.scale_of_[1 + (j - 1) * S + s] = j;
    b.window_offsets_.reserve(M + 1);
    b.window_offsets_.push_back(0);
    for (int m = 0; m < M; ++m) {
        b.entries_.insert(b.entries_.end(), per_window[m].begin(), per_window[m].end());
        b.window_offsets_.push_back(b.entries_.size());
    }
    b.pre_sum_ = std::move(pre_sum);
    b.index_points();
    return b;
}

std::shared_ptr<const WindowBank> cached_windows(const Grid2D& grid, const FrameSpec& spec) {
    using Key = std::tuple<int, int, double, double, double, double, int, int, double, double, int>;
    static std::mutex mutex;
    static std::map<Key, std::shared_ptr<const WindowBank>> cache;
    const Key key{grid.nx, grid.ny, grid.ax, grid.bx, grid.ay, grid.by, spec.n_scales,
                  spec.n_shears, spec.r0, spec.eps_norm, static_cast<int>(spec.layout)};
    std::lock_guard lock(mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto bank = std::make_shared<const WindowBank>(build_windows(grid, spec));
    cache.emplace(key, bank);
    return bank;
}

SpectralField apply_band(const SpectralField& s, const WindowBank& bank, int m) {
    if (!(s.grid == bank.grid())) throw StructuralError("apply_band: grid mismatch");
    SpectralField out(s.grid, s.channels);
    const std::size_t n = s.grid.spectral_size();
    for (const auto& e : bank.window_entries(m))
        for (int c = 0; c < s.channels; ++c)
            out.coeffs[c * n + e.index] = e.value * s.coeffs[c * n + e.index];
    return out;
}

void export_tiling(const WindowBank& bank, const std::string& path) {
    const Grid2D& g = bank.grid();
    const int nky = g.nky();
    const int scale = std::max(1, (256 + std::max(g.nx, g.ny) - 1) / std::max(g.nx, g.ny));
    const int width = g.ny * scale;
    const int height = g.nx * scale;

    // dominant window per half-plane point
    std::vector<int> dominant(g.spectral_size(), -1);
    for (std::size_t p = 0; p < g.spectral_size(); ++p) {
        double best = 0.0;
        for (const auto& e : bank.point_entries(p))
            if (e.value > best) {
                best = e.value;
                dominant[p] = static_cast<int>(e.window);
            }
    }
    auto gray_of = [](int m) -> std::uint8_t {
        if (m < 0) return 0;
        if (m == 0) return 255;
        const double h = std::fmod(m * 0.6180339887498949, 1.0);
        return static_cast<std::uint8_t>(40 + 180 * h);
    };

    std::vector<std::uint8_t> pixels(static_cast<std::size_t>(width) * height);
    for (int py = 0; py < g.nx; ++py) {
        const int kx = py - g.nx / 2;  // top row is the most negative kx
        for (int px = 0; px < g.ny; ++px) {
            int ky = px - g.ny / 2;
            int kxs = kx;
            if (ky < 0) {  // lower half-plane: use the Hermitian partner
                ky = -ky;
                kxs = -kx;
            }
            const int row = ((kxs % g.nx) + g.nx) % g.nx;
            const std::uint8_t v = gray_of(dominant[static_cast<std::size_t>(row) * nky + ky]);
            for (int a = 0; a < scale; ++a)
                for (int b = 0; b < scale; ++b)
                    pixels[static_cast<std::size_t>(py * scale + a) * width + px * scale + b] = v;
        }
    }
    write_png_gray(path, width, height, pixels,
                   {{"windows", std::to_string(bank.count())},
                    {"scales", std::to_string(bank.scale_count() - 1)}});
}

}  // namespace shearop
