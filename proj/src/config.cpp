#include "shearop/config.hpp"

#include <filesystem>

#include "shearop/error.hpp"

namespace shearop {

void RunConfig::validate() const {
    if (name.empty() || name.find('/') != std::string::npos) throw ConfigError("run name must be a plain directory name");
    if (out.empty()) throw ConfigError("output directory must not be empty");
    if (benchmarks.empty()) throw ConfigError("no benchmarks selected");
    if (archs.empty()) throw ConfigError("no architectures selected");
    if (n < 16 || n % 2 != 0) throw ConfigError("grid size n must be even and at least 16");
    if (sno.arch != Arch::sno || fno.arch != Arch::fno) throw ConfigError("model sections have the wrong arch");
    sno.validate();
    fno.validate();
    if (2 * fno.modes_x > n || 2 * fno.modes_y > n)
        throw ConfigError("fno modes " + std::to_string(fno.modes_x) + "x" + std::to_string(fno.modes_y) +
                          " exceed the Nyquist limit of n = " + std::to_string(n));
    train.validate();
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::json b = nlohmann::json::array();
    for (auto id : benchmarks) b.push_back(to_string(id));
    nlohmann::json a = nlohmann::json::array();
    for (auto x : archs) a.push_back(to_string(x));
    return {{"name", name},     {"out", out},           {"benchmarks", b},
            {"n", n},           {"archs", a},           {"sno", sno.to_json()},
            {"fno", fno.to_json()}, {"train", train.to_json()}, {"seed", seed}};
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    RunConfig c;
    try {
        if (!j.is_object()) throw ConfigError("run config must be a JSON object");
        c.name = j.value("name", c.name);
        c.out = j.value("out", c.out);
        c.n = j.value("n", c.n);
        c.seed = j.value("seed", c.seed);
        if (j.contains("benchmarks")) {
            const auto& b = j.at("benchmarks");
            c.benchmarks.clear();
            if (b.is_string() && b.get<std::string>() == "all")
                c.benchmarks = all_benchmarks();
            else
                for (const auto& s : b) c.benchmarks.push_back(parse_benchmark(s.get<std::string>()));
        }
        if (j.contains("archs")) {
            c.archs.clear();
            for (const auto& s : j.at("archs")) c.archs.push_back(parse_arch(s.get<std::string>()));
        }
        auto model = [&](const char* key, ModelConfig& m) {
            if (!j.contains(key)) return;
            nlohmann::json merged = m.to_json();
            merged.update(j.at(key));
            m = ModelConfig::from_json(merged);
        };
        model("sno", c.sno);
        model("fno", c.fno);
        nlohmann::json t = c.train.to_json();
        t["seed"] = c.seed;
        if (j.contains("train")) t.update(j.at("train"));
        c.train = TrainConfig::from_json(t);
        c.train.seed = c.seed;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid run config: ") + e.what());
    }
    c.validate();
    return c;
}

std::string RunConfig::run_dir() const { return (std::filesystem::path(out) / name).string(); }
std::string RunConfig::data_dir() const { return (std::filesystem::path(run_dir()) / "data").string(); }
std::string RunConfig::checkpoint_dir() const { return (std::filesystem::path(run_dir()) / "checkpoints").string(); }
std::string RunConfig::report_dir() const { return (std::filesystem::path(run_dir()) / "reports").string(); }
std::string RunConfig::evaluation_dir() const { return (std::filesystem::path(run_dir()) / "evaluation").string(); }

std::string RunConfig::dataset_path(BenchmarkId id) const {
    return (std::filesystem::path(data_dir()) / (to_string(id) + "_n" + std::to_string(n) + ".snod")).string();
}

std::string RunConfig::checkpoint_path(BenchmarkId id, Arch arch) const {
    return (std::filesystem::path(checkpoint_dir()) /
            (to_string(id) + "_n" + std::to_string(n) + "_" + to_string(arch) + ".snoc"))
        .string();
}

std::string RunConfig::state_path(BenchmarkId id, Arch arch) const {
    return (std::filesystem::path(checkpoint_dir()) /
            (to_string(id) + "_n" + std::to_string(n) + "_" + to_string(arch) + ".state.snoc"))
        .string();
}

}  // namespace shearop
