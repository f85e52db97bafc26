#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "shearop/model.hpp"
#include "shearop/pde.hpp"
#include "shearop/train.hpp"

namespace shearop {

/// Everything a run needs; serializable so a run can be repeated from
/// its config.json alone.
struct RunConfig {
    std::string name = "default";
    std::string out = "runs";
    std::vector<BenchmarkId> benchmarks = all_benchmarks();
    int n = 64;
    std::vector<Arch> archs{Arch::sno, Arch::fno};
    ModelConfig sno{};
    ModelConfig fno = [] {
        ModelConfig c;
        c.arch = Arch::fno;
        return c;
    }();
    TrainConfig train;
    std::uint64_t seed = 0;

    /// Throws ConfigError on any invalid field.
    void validate() const;
    nlohmann::json to_json() const;
    /// Missing keys keep their defaults.
    static RunConfig from_json(const nlohmann::json& j);

    std::string run_dir() const;
    std::string data_dir() const;
    std::string checkpoint_dir() const;
    std::string report_dir() const;
    std::string evaluation_dir() const;

    std::string dataset_path(BenchmarkId id) const;
    std::string checkpoint_path(BenchmarkId id, Arch arch) const;
    std::string state_path(BenchmarkId id, Arch arch) const;
    const ModelConfig& model(Arch a) const { return a == Arch::sno ? sno : fno; }
};

}  // namespace shearop
