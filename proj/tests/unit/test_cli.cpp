#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <regex>
#include <set>
#include <sstream>

#include "shearop/config.hpp"
#include "shearop/model.hpp"
#include "shearop/pipeline.hpp"

using namespace shearop;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        root_ = fs::temp_directory_path() /
                ("shearop_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(root_);
        fs::create_directories(root_);
    }
    void TearDown() override { fs::remove_all(root_); }

    Result run(std::vector<std::string> args) const {
        args.push_back("--out");
        args.push_back(root_.string());
        std::ostringstream out, err;
        const int code = run_cli(args, out, err);
        return {code, out.str(), err.str()};
    }

    fs::path run_dir() const { return root_ / "default"; }

    fs::path root_;
};

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), {}};
}

const std::vector<std::string> kSmall = {"--n", "16", "--bench", "anisotropic_ridge_advect"};

std::vector<std::string> with(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

}  // namespace

TEST_F(Cli, UnknownBenchmarkIsAConfigError) {
    const Result r = run({"generate", "--bench", "vortex", "--n", "16"});
    EXPECT_EQ(r.code, exit_config);
    EXPECT_NE(r.err.find("vortex"), std::string::npos);
    EXPECT_NE(r.err.find("multi_orientation_texture"), std::string::npos);
}

TEST_F(Cli, InvalidFrameParametersAreConfigErrors) {
    EXPECT_EQ(run({"inspect-frame", "--n", "16", "--scales", "0"}).code, exit_config);
    EXPECT_EQ(run({"train", "--n", "15"}).code, exit_config);
    EXPECT_EQ(run({"train", "--n", "16", "--modes", "9"}).code, exit_config);
    EXPECT_EQ(run({"train", "--n", "abc"}).code, exit_config);
    EXPECT_EQ(run({"generate", "--bogus"}).code, exit_config);
}

TEST_F(Cli, MissingInputsNameThePath) {
    Result r = run(with({"train", "--epochs", "1"}, kSmall));
    EXPECT_EQ(r.code, exit_missing_input);
    EXPECT_NE(r.err.find("anisotropic_ridge_advect_n16.snod"), std::string::npos);
    ASSERT_EQ(run(with({"generate"}, kSmall)).code, exit_ok);
    r = run(with({"evaluate"}, kSmall));
    EXPECT_EQ(r.code, exit_missing_input);
    EXPECT_NE(r.err.find(".snoc"), std::string::npos);
}

TEST_F(Cli, HelpSucceeds) {
    std::ostringstream out, err;
    EXPECT_EQ(run_cli({"--help"}, out, err), exit_ok);
    EXPECT_NE(out.str().find("inspect-frame"), std::string::npos);
}

TEST_F(Cli, GenerateAllIsCompleteAndReproducible) {
    ASSERT_EQ(run({"generate", "--bench", "all", "--n", "16"}).code, exit_ok);
    std::set<std::string> files;
    for (const auto& e : fs::directory_iterator(run_dir() / "data")) files.insert(e.path().filename().string());
    EXPECT_EQ(files.size(), 7u);
    EXPECT_TRUE(files.count("spiral_shock_n16.snod"));
    const std::string first = slurp(run_dir() / "data" / "sheared_kelvin_helmholtz_n16.snod");
    ASSERT_EQ(run({"generate", "--bench", "sheared_kelvin_helmholtz", "--n", "16"}).code, exit_ok);
    EXPECT_EQ(slurp(run_dir() / "data" / "sheared_kelvin_helmholtz_n16.snod"), first);
    EXPECT_TRUE(fs::exists(run_dir() / "config.json"));
}

TEST_F(Cli, ParameterReportMatchesExactCount) {
    ASSERT_EQ(run(with({"generate"}, kSmall)).code, exit_ok);
    const Result r = run(with({"train", "--epochs", "1", "--width", "4", "--layout", "cone_adapted"}, kSmall));
    ASSERT_EQ(r.code, exit_ok) << r.err;
    RunConfig cfg;
    cfg.n = 16;
    cfg.sno.width = cfg.fno.width = 4;
    cfg.sno.frame.layout = AngularLayout::cone_adapted;
    const std::regex total(R"(\*\*total\*\* \| \*\*(\d+)\*\*)");
    std::vector<std::size_t> reported;
    for (std::sregex_iterator it(r.out.begin(), r.out.end(), total), end; it != end; ++it)
        reported.push_back(std::stoul((*it)[1]));
    ASSERT_EQ(reported.size(), 2u);
    EXPECT_EQ(reported[0], param_count(cfg.sno).total);
    EXPECT_EQ(reported[1], param_count(cfg.fno).total);
}

TEST_F(Cli, CompareWithIdenticalCheckpointsGivesRatioOne) {
    ASSERT_EQ(run(with({"generate"}, kSmall)).code, exit_ok);
    ASSERT_EQ(run(with({"train", "--epochs", "1", "--arch", "sno"}, kSmall)).code, exit_ok);
    const std::string ck = (run_dir() / "checkpoints" / "anisotropic_ridge_advect_n16_sno.snoc").string();
    const Result r = run(with({"compare", "--checkpoint-sno", ck, "--checkpoint-fno", ck}, kSmall));
    ASSERT_EQ(r.code, exit_ok) << r.err;
    EXPECT_NE(r.out.find("| 1.0000 |"), std::string::npos) << r.out;
    std::set<std::string> files;
    for (const auto& e : fs::directory_iterator(run_dir() / "reports")) files.insert(e.path().filename().string());
    EXPECT_EQ(files, (std::set<std::string>{"metrics.csv", "table.md", "panel_anisotropic_ridge_advect.png",
                                            "loss_curves.csv"}));
}

TEST_F(Cli, ResumeMatchesUninterruptedTraining) {
    ASSERT_EQ(run(with({"generate"}, kSmall)).code, exit_ok);
    const std::vector<std::string> small_model = {"--arch", "fno", "--width", "4", "--epochs", "4"};
    ASSERT_EQ(run(with(with({"train"}, kSmall), small_model)).code, exit_ok);
    const fs::path ck = run_dir() / "checkpoints" / "anisotropic_ridge_advect_n16_fno.snoc";
    const std::string straight = slurp(ck);

    ASSERT_EQ(run(with({"train", "--arch", "fno", "--width", "4", "--epochs", "2"}, kSmall)).code, exit_ok);
    // the saved state was trained with max_epochs 2; continuing only raises the limit
    const Result r = run(with(with({"train", "--resume"}, kSmall), small_model));
    ASSERT_EQ(r.code, exit_ok) << r.err;
    EXPECT_NE(r.out.find("resuming from epoch 2"), std::string::npos);
    EXPECT_EQ(slurp(ck), straight);
}

TEST_F(Cli, EvaluateWritesMetricsFile) {
    ASSERT_EQ(run(with({"generate"}, kSmall)).code, exit_ok);
    ASSERT_EQ(run(with({"train", "--epochs", "1", "--width", "4"}, kSmall)).code, exit_ok);
    const Result r = run(with({"evaluate"}, kSmall));
    ASSERT_EQ(r.code, exit_ok) << r.err;
    const std::string csv = slurp(run_dir() / "evaluation" / "metrics.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "dataset,arch,rel_l2,mse,mae,ssim,n_test_frames,seed");
    EXPECT_NE(csv.find("anisotropic_ridge_advect,sno,"), std::string::npos);
    EXPECT_NE(csv.find("anisotropic_ridge_advect,fno,"), std::string::npos);
}

TEST_F(Cli, InspectFrameReportsWindowsAndWritesTiling) {
    const Result r = run({"inspect-frame", "--n", "64", "--scales", "2", "--shears", "8"});
    ASSERT_EQ(r.code, exit_ok) << r.err;
    EXPECT_NE(r.out.find("M = 17 windows"), std::string::npos) << r.out;
    EXPECT_TRUE(fs::exists(run_dir() / "frames" / "tiling_J2_S8_n64.png"));
}

TEST_F(Cli, ExecutableExitCodes) {
#ifndef SHEAROP_CLI_PATH
    GTEST_SKIP() << "executable path not configured";
#else
    const char* exe = SHEAROP_CLI_PATH;
    const auto code = [&](const std::string& args) {
        const int s = std::system(("\"" + std::string(exe) + "\" " + args + " >/dev/null 2>&1").c_str());
        return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
    };
    const std::string out = " --out " + root_.string();
    EXPECT_EQ(code("--help"), 0);
    EXPECT_EQ(code("generate --bench nope" + out), 2);
    EXPECT_EQ(code("evaluate --n 16 --bench spiral_shock" + out), 3);
    EXPECT_EQ(code("inspect-frame --n 16 --scales 1 --shears 2" + out), 0);
#endif
}
