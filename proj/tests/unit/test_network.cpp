#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "helpers.hpp"
#include "shearop/error.hpp"
#include "shearop/network.hpp"
#include "shearop/train.hpp"

using namespace shearop;
using testing_helpers::random_feature;
using testing_helpers::random_scalar;
namespace fs = std::filesystem;

namespace {

ModelConfig tiny(Arch arch, MixingMode mixing = MixingMode::diagonal) {
    ModelConfig c;
    c.arch = arch;
    c.width = 2;
    c.layers = 2;
    c.frame.n_scales = 1;
    c.frame.n_shears = 2;
    c.mixing = mixing;
    c.modes_x = 2;
    c.modes_y = 3;
    return c;
}

ModelParams randomized(const ModelConfig& cfg, std::uint64_t seed) {
    ModelParams p = init_params(cfg, seed);
    std::mt19937_64 rng(seed + 1000);
    std::normal_distribution<double> d(0.0, 0.5);
    for (auto& L : p.layers)
        for (auto& g : L.sno.gamma) g = d(rng);
    return p;
}

double loss_at(const ModelParams& p, const ScalarField& u, const ScalarField& target) {
    return mse_loss(model_forward(u, p), target).loss;
}

}  // namespace

TEST(Gelu, ValuesAndDerivative) {
    EXPECT_EQ(gelu(0.0), 0.0);
    EXPECT_LT(std::abs(gelu(10.0) - 10.0), 1e-12);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int i = 0; i < 100; ++i) {
        const double x = u(rng), h = 1e-5;
        EXPECT_NEAR(gelu_grad(x), (gelu(x + h) - gelu(x - h)) / (2 * h), 1e-8);
    }
}

class GradientCheck : public ::testing::TestWithParam<std::pair<Arch, MixingMode>> {};

TEST_P(GradientCheck, EveryParameterMatchesCentralDifferences) {
    const auto [arch, mixing] = GetParam();
    const ModelConfig cfg = tiny(arch, mixing);
    const Grid2D g = Grid2D::square(8, 0.0, 1.0);
    const ModelParams p = randomized(cfg, 3);
    const ScalarField u = random_scalar(g, 1), target = random_scalar(g, 2);

    Tape tape;
    const ScalarField pred = model_forward(u, p, &tape);
    const ModelParams grad = model_backward(tape, mse_loss(pred, target).grad);
    const std::vector<double> theta = p.flatten();
    const std::vector<double> analytic = grad.flatten();
    ASSERT_EQ(theta.size(), analytic.size());

    // fourth-order central stencil: truncation ~h^4 and roundoff ~eps/h both stay near 1e-13
    const double h = 1e-3;
    double worst = 0.0;
    std::size_t worst_i = 0;
    ModelParams q = p;
    auto shifted = [&](std::size_t i, double d) {
        std::vector<double> t = theta;
        t[i] += d;
        q.unflatten(t);
        return loss_at(q, u, target);
    };
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double fd = (8.0 * (shifted(i, h) - shifted(i, -h)) - (shifted(i, 2 * h) - shifted(i, -2 * h))) / (12 * h);
        const double rel = std::abs(fd - analytic[i]) / std::max({std::abs(fd), std::abs(analytic[i]), 1e-7});
        if (rel > worst) {
            worst = rel;
            worst_i = i;
        }
    }
    EXPECT_LE(worst, 1e-5) << "worst parameter index " << worst_i << " of " << theta.size() << ", analytic "
                           << analytic[worst_i];
}

INSTANTIATE_TEST_SUITE_P(Archs, GradientCheck,
                         ::testing::Values(std::pair{Arch::sno, MixingMode::full},
                                           std::pair{Arch::sno, MixingMode::diagonal},
                                           std::pair{Arch::sno, MixingMode::scalar},
                                           std::pair{Arch::fno, MixingMode::diagonal}));

TEST(Backward, ZeroOutputGradientGivesZeroGradients) {
    const Grid2D g = Grid2D::square(8, 0.0, 1.0);
    const ModelParams p = randomized(tiny(Arch::sno), 1);
    Tape tape;
    model_forward(random_scalar(g, 1), p, &tape);
    for (double v : model_backward(tape, ScalarField(g)).flatten()) EXPECT_EQ(v, 0.0);
}

TEST(Backward, StaleTapeIsRejected) {
    const Grid2D g = Grid2D::square(8, 0.0, 1.0);
    auto a = std::make_shared<const Evaluator>(randomized(tiny(Arch::fno), 1), g);
    auto b = std::make_shared<const Evaluator>(randomized(tiny(Arch::fno), 1), g);
    Tape tape;
    a->forward(random_scalar(g, 1), &tape);
    EXPECT_THROW(b->backward(tape, ScalarField(g)), StructuralError);
    Tape empty;
    EXPECT_THROW(model_backward(empty, ScalarField(g)), StructuralError);
}

TEST(Backward, GateGradientSignMatchesDirectionalDifference) {
    const Grid2D g = Grid2D::square(8, 0.0, 1.0);
    const ModelParams p = randomized(tiny(Arch::sno), 5);
    const ScalarField u = random_scalar(g, 3), target = random_scalar(g, 4);
    Tape tape;
    const ModelParams grad = model_backward(tape, mse_loss(model_forward(u, p, &tape), target).grad);
    for (std::size_t l = 0; l < p.layers.size(); ++l)
        for (std::size_t j = 0; j < p.layers[l].sno.gamma.size(); ++j) {
            ModelParams q = p;
            q.layers[l].sno.gamma[j] += 1e-3;
            const double diff = loss_at(q, u, target) - loss_at(p, u, target);
            if (std::abs(diff) > 1e-12)
                EXPECT_EQ(std::signbit(diff), std::signbit(grad.layers[l].sno.gamma[j])) << "layer " << l << " scale " << j;
        }
}

TEST(Gates, IncreasingTheOnlyActiveGateScalesTheOutput) {
    const Grid2D g = Grid2D::square(8, 0.0, 1.0);
    std::vector<std::vector<double>> w(1, std::vector<double>(g.spectral_size(), 1.0));
    const WindowBank bank = WindowBank::from_dense(g, 0, w, {0});
    SnoLayerParams p = SnoLayerParams::zeros(MixingMode::diagonal, 1, 1, 2, 2);
    p.weights = {1.0, 1.0};
    const FeatureField u = random_feature(g, 2, 1);
    double prev = 0.0;
    for (double gamma : {-2.0, 0.0, 2.0}) {
        p.gamma[0] = gamma;
        double norm = 0.0;
        for (double v : sno_spectral_forward(u, p, bank).values) norm += v * v;
        EXPECT_GT(norm, prev);
        prev = norm;
    }
}

TEST(SnoLayer, AllPassIdentityConfiguration) {
    const Grid2D g = Grid2D::square(16, 0.0, 1.0);
    std::vector<std::vector<double>> w(1, std::vector<double>(g.spectral_size(), 1.0));
    const WindowBank bank = WindowBank::from_dense(g, 0, w, {0});
    SnoLayerParams p = SnoLayerParams::zeros(MixingMode::full, 1, 1, 2, 2);
    p.weights = {1.0, 0.0, 0.0, 1.0};
    p.gamma[0] = 40.0;
    const FeatureField u = random_feature(g, 2, 2);
    EXPECT_LE(testing_helpers::max_abs_diff(sno_spectral_forward(u, p, bank).values, u.values), 1e-10);
}

TEST(SnoLayer, LinearInInput) {
    const Grid2D g = Grid2D::square(16, 0.0, 1.0);
    const ModelParams p = randomized(tiny(Arch::sno, MixingMode::full), 2);
    const auto bank = cached_windows(g, p.config.frame);
    const FeatureField a = random_feature(g, 2, 1), b = random_feature(g, 2, 2);
    FeatureField c(g, 2);
    for (std::size_t i = 0; i < c.values.size(); ++i) c.values[i] = 1.5 * a.values[i] - 0.5 * b.values[i];
    const auto fa = sno_spectral_forward(a, p.layers[0].sno, *bank);
    const auto fb = sno_spectral_forward(b, p.layers[0].sno, *bank);
    const auto fc = sno_spectral_forward(c, p.layers[0].sno, *bank);
    for (std::size_t i = 0; i < fc.values.size(); ++i)
        EXPECT_NEAR(fc.values[i], 1.5 * fa.values[i] - 0.5 * fb.values[i], 1e-10);
}

TEST(SpectralLayers, CommuteWithWholeCellTranslation) {
    const Grid2D g = Grid2D::square(16, 0.0, 1.0);
    const FeatureField u = random_feature(g, 2, 3);
    FeatureField shifted(g, 2);
    const int dx = 3, dy = 5;
    auto shift = [&](const FeatureField& in) {
        FeatureField out(g, in.channels);
        for (int c = 0; c < in.channels; ++c)
            for (int i = 0; i < g.nx; ++i)
                for (int j = 0; j < g.ny; ++j)
                    out.values[c * g.size() + ((i + dx) % g.nx) * g.ny + (j + dy) % g.ny] =
                        in.values[c * g.size() + i * g.ny + j];
        return out;
    };
    shifted = shift(u);
    const ModelParams ps = randomized(tiny(Arch::sno, MixingMode::full), 4);
    const auto bank = cached_windows(g, ps.config.frame);
    const auto a = shift(sno_spectral_forward(u, ps.layers[0].sno, *bank));
    const auto b = sno_spectral_forward(shifted, ps.layers[0].sno, *bank);
    EXPECT_LE(testing_helpers::max_abs_diff(a.values, b.values), 1e-10);
    const ModelParams pf = randomized(tiny(Arch::fno), 4);
    const auto c = shift(fno_spectral_forward(u, pf.layers[0].fno));
    const auto d = fno_spectral_forward(shifted, pf.layers[0].fno);
    EXPECT_LE(testing_helpers::max_abs_diff(c.values, d.values), 1e-10);
}

TEST(FnoLayer, ModeOutsideRetainedSetIsRemoved) {
    const Grid2D g = Grid2D::square(16, 0.0, 1.0);
    FeatureField u(g, 2);
    for (int c = 0; c < 2; ++c)
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j) u.values[c * g.size() + i * g.ny + j] = std::cos(2 * M_PI * 6 * i / 16.0);
    const ModelParams p = randomized(tiny(Arch::fno), 1);
    for (double v : fno_spectral_forward(u, p.layers[0].fno).values) EXPECT_NEAR(v, 0.0, 1e-13);
}

TEST(Block, IdentityPointwiseAndZeroSpectral) {
    const Grid2D g = Grid2D::square(8, 0.0, 1.0);
    ModelParams p = zero_params(tiny(Arch::fno));
    LayerParams& L = p.layers[0];
    L.pw_weight = {1.0, 0.0, 0.0, 1.0};
    const FeatureField u = random_feature(g, 2, 1);
    const FeatureField out = block_forward(u, L, Arch::fno, nullptr);
    for (std::size_t i = 0; i < u.values.size(); ++i) EXPECT_NEAR(out.values[i], gelu(u.values[i]), 1e-15);
    L.pw_bias = {0.3, -0.2};
    const FeatureField z = block_forward(FeatureField(g, 2), L, Arch::fno, nullptr);
    for (int c = 0; c < 2; ++c)
        for (double v : z.channel(c)) EXPECT_NEAR(v, gelu(L.pw_bias[c]), 1e-15);
}

TEST(Model, ProjectionBiasOnly) {
    const Grid2D g = Grid2D::square(8, 0.0, 1.0);
    ModelParams p = zero_params(tiny(Arch::sno));
    p.proj_bias[0] = 0.37;
    for (double v : model_forward(random_scalar(g, 1), p).values) EXPECT_EQ(v, 0.37);
}

TEST(Model, DeterministicAndResolutionAgnostic) {
    ModelConfig cfg;
    const ModelParams p = init_params(cfg, 9);
    const Grid2D g64 = Grid2D::square(64, 0.0, 1.0), g128 = Grid2D::square(128, 0.0, 1.0);
    const ScalarField u = random_scalar(g64, 1);
    EXPECT_EQ(model_forward(u, p).values, model_forward(u, p).values);
    const ScalarField big = model_forward(random_scalar(g128, 2), p);
    EXPECT_EQ(big.values.size(), g128.size());
    EXPECT_TRUE(all_finite(big.values));
}

TEST(Model, NonFiniteInputIsRejected) {
    const Grid2D g = Grid2D::square(8, 0.0, 1.0);
    ScalarField u(g);
    u.values[3] = std::nan("");
    EXPECT_THROW(model_forward(u, init_params(tiny(Arch::fno), 1)), NumericalError);
}

TEST(ParamCount, MatchesClosedForms) {
    ModelConfig fno;
    fno.arch = Arch::fno;
    EXPECT_EQ(param_count(fno).total, 16697u);
    EXPECT_EQ(param_count(fno).spectral, 16384u);
    ModelConfig sno;
    EXPECT_EQ(param_count(sno).total, 4u * (257 * 8 * 2 + 5) + 4 * (64 + 8) + 16 + 9);
    sno.mixing = MixingMode::full;
    EXPECT_EQ(param_count(sno).spectral, 131584u + 20u);
    sno.mixing = MixingMode::scalar;
    EXPECT_EQ(param_count(sno).spectral, 2076u);
    for (auto m : {MixingMode::full, MixingMode::diagonal, MixingMode::scalar}) {
        sno.mixing = m;
        EXPECT_EQ(param_count(sno).total, init_params(sno, 0).size());
    }
    EXPECT_NE(param_count(fno).table().find("16697"), std::string::npos);
}

TEST(Checkpoint, BitExactRoundTrip) {
    for (Arch arch : {Arch::sno, Arch::fno}) {
        const ModelParams p = randomized(tiny(arch, MixingMode::full), 11);
        const fs::path path = fs::temp_directory_path() / "shearop_ckpt_test.snoc";
        save_checkpoint(path.string(), p, {{"note", "x"}}, {{"extra", {1.0, 2.0}}});
        const LoadedCheckpoint c = load_checkpoint(path.string());
        EXPECT_EQ(c.params.flatten(), p.flatten());
        EXPECT_TRUE(c.params.config == p.config);
        EXPECT_EQ(c.extra_header.at("note"), "x");
        ASSERT_EQ(c.extra_blocks.size(), 1u);
        EXPECT_EQ(c.extra_blocks[0].values, (std::vector<double>{1.0, 2.0}));
        fs::remove(path);
    }
    EXPECT_THROW(load_checkpoint("/nonexistent/file.snoc"), MissingInputError);
}

TEST(Checkpoint, CorruptFileIsIoError) {
    const fs::path path = fs::temp_directory_path() / "shearop_corrupt.snoc";
    {
        std::ofstream os(path, std::ios::binary);
        os << "SNOCgarbage";
    }
    EXPECT_THROW(load_checkpoint(path.string()), IoError);
    fs::remove(path);
}
