#include "shearop/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "shearop/error.hpp"

namespace shearop {

namespace {

void same_grid(const ScalarField& a, const ScalarField& b, const char* what) {
    if (!(a.grid == b.grid) || a.values.size() != b.values.size())
        throw StructuralError(std::string(what) + ": grid mismatch");
}

// periodic separable convolution with a symmetric kernel of odd length
void blur(const Grid2D& g, const std::vector<double>& w, const std::vector<double>& in,
          std::vector<double>& tmp, std::vector<double>& out) {
    const int nx = g.nx, ny = g.ny;
    const int h = static_cast<int>(w.size()) / 2;
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
            double s = 0.0;
            for (int t = -h; t <= h; ++t) s += w[t + h] * in[i * ny + ((j + t) % ny + ny) % ny];
            tmp[i * ny + j] = s;
        }
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
            double s = 0.0;
            for (int t = -h; t <= h; ++t) s += w[t + h] * tmp[(((i + t) % nx + nx) % nx) * ny + j];
            out[i * ny + j] = s;
        }
}

}  // namespace

double mse(const ScalarField& a, const ScalarField& b) {
    same_grid(a, b, "mse");
    double s = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        const double e = a.values[i] - b.values[i];
        s += e * e;
    }
    return s / static_cast<double>(a.values.size());
}

double mae(const ScalarField& a, const ScalarField& b) {
    same_grid(a, b, "mae");
    double s = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) s += std::abs(a.values[i] - b.values[i]);
    return s / static_cast<double>(a.values.size());
}

double rel_l2(const ScalarField& pred, const ScalarField& truth) {
    same_grid(pred, truth, "rel_l2");
    double t2 = 0.0;
    for (double v : truth.values) t2 += v * v;
    if (t2 == 0.0) throw NumericalError("rel_l2 is undefined for an identically zero truth field");
    const double n = static_cast<double>(truth.values.size());
    return std::sqrt(mse(pred, truth)) / std::sqrt(t2 / n);
}

double ssim(const ScalarField& pred, const ScalarField& truth, const SsimOptions& opt) {
    same_grid(pred, truth, "ssim");
    const Grid2D& g = truth.grid;
    if (opt.window < 1 || opt.window % 2 == 0) throw StructuralError("ssim window must be odd");
    if (g.nx < opt.window || g.ny < opt.window)
        throw StructuralError("ssim needs a grid of at least " + std::to_string(opt.window) + " x " +
                              std::to_string(opt.window));
    const auto [lo, hi] = std::minmax_element(truth.values.begin(), truth.values.end());
    const double L = *hi - *lo;
    if (L == 0.0) {
        if (pred.values == truth.values) return 1.0;
        std::cerr << "warning: ssim with constant truth and unequal prediction is defined as 0\n";
        return 0.0;
    }
    const double c1 = (opt.k1 * L) * (opt.k1 * L);
    const double c2 = (opt.k2 * L) * (opt.k2 * L);

    std::vector<double> w(opt.window);
    const int h = opt.window / 2;
    double wsum = 0.0;
    for (int t = -h; t <= h; ++t) wsum += w[t + h] = std::exp(-0.5 * t * t / (opt.sigma * opt.sigma));
    for (double& v : w) v /= wsum;

    const std::size_t n = g.size();
    const auto& x = pred.values;
    const auto& y = truth.values;
    std::vector<double> xx(n), yy(n), xy(n), tmp(n);
    for (std::size_t i = 0; i < n; ++i) {
        xx[i] = x[i] * x[i];
        yy[i] = y[i] * y[i];
        xy[i] = x[i] * y[i];
    }
    std::vector<double> mx(n), my(n), sxx(n), syy(n), sxy(n);
    blur(g, w, x, tmp, mx);
    blur(g, w, y, tmp, my);
    blur(g, w, xx, tmp, sxx);
    blur(g, w, yy, tmp, syy);
    blur(g, w, xy, tmp, sxy);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double vx = sxx[i] - mx[i] * mx[i];
        const double vy = syy[i] - my[i] * my[i];
        const double cxy = sxy[i] - mx[i] * my[i];
        const double num = (2.0 * mx[i] * my[i] + c1) * (2.0 * cxy + c2);
        const double den = (mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2);
        total += num / den;
    }
    return total / static_cast<double>(n);
}

std::vector<ScalarField> predict_pairs(const Evaluator& ev, const Dataset& d,
                                       std::span<const std::size_t> pairs) {
    std::vector<ScalarField> out(pairs.size());
    const auto n = static_cast<std::int64_t>(pairs.size());
    std::vector<std::string> errors(n);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t s = 0; s < n; ++s) {
        try {
            out[s] = ev.forward(d.input(pairs[s]));
        } catch (const std::exception& e) {
            errors[s] = e.what();
        }
    }
    for (const auto& e : errors)
        if (!e.empty()) throw NumericalError(e);
    return out;
}

MetricsRecord evaluate_predictions(const Dataset& d, std::span<const std::size_t> pairs,
                                   const std::vector<ScalarField>& predictions) {
    if (predictions.size() != pairs.size()) throw StructuralError("evaluate: prediction count mismatch");
    MetricsRecord r;
    r.dataset = d.name;
    r.pairs.assign(pairs.begin(), pairs.end());
    r.n_test_frames = pairs.size();
    for (std::size_t s = 0; s < pairs.size(); ++s) {
        const ScalarField& truth = d.target(pairs[s]);
        const ScalarField& pred = predictions[s];
        if (!all_finite(pred.values)) throw NumericalError("non-finite prediction for pair " + std::to_string(pairs[s]));
        r.frame_rel_l2.push_back(rel_l2(pred, truth));
        r.frame_mse.push_back(mse(pred, truth));
        r.frame_mae.push_back(mae(pred, truth));
        r.frame_ssim.push_back(ssim(pred, truth));
    }
    auto mean = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return v.empty() ? 0.0 : s / static_cast<double>(v.size());
    };
    r.rel_l2 = mean(r.frame_rel_l2);
    r.mse = mean(r.frame_mse);
    r.mae = mean(r.frame_mae);
    r.ssim = mean(r.frame_ssim);
    return r;
}

}  // namespace shearop
