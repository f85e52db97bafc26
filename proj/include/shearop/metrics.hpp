#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "shearop/dataset.hpp"
#include "shearop/field.hpp"
#include "shearop/network.hpp"

namespace shearop {

double mse(const ScalarField& a, const ScalarField& b);
double mae(const ScalarField& a, const ScalarField& b);
/// sqrt(mse(pred, truth)) / rms(truth). Throws NumericalError when truth is
/// identically zero.
double rel_l2(const ScalarField& pred, const ScalarField& truth);

struct SsimOptions {
    int window = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
};

/// Mean local SSIM with a Gaussian window, periodic wrap, and dynamic
/// range L = max(truth) - min(truth). A constant truth gives 1 when the
/// fields are equal and 0 (with a warning on stderr) otherwise.
double ssim(const ScalarField& pred, const ScalarField& truth, const SsimOptions& opt = {});

struct MetricsRecord {
    std::string dataset;
    std::string arch;
    double rel_l2 = 0.0;
    double mse = 0.0;
    double mae = 0.0;
    double ssim = 0.0;
    std::size_t n_test_frames = 0;
    std::uint64_t seed = 0;
    std::vector<std::size_t> pairs;  // evaluated pair indices
    std::vector<double> frame_rel_l2, frame_mse, frame_mae, frame_ssim;
};

/// One-step predictions for `pairs` (inputs are the true frames).
std::vector<ScalarField> predict_pairs(const Evaluator& ev, const Dataset& d,
                                       std::span<const std::size_t> pairs);

/// Averages each metric over the given pairs.
MetricsRecord evaluate_predictions(const Dataset& d, std::span<const std::size_t> pairs,
                                   const std::vector<ScalarField>& predictions);

}  // namespace shearop
