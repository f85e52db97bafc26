#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "shearop/field.hpp"
#include "shearop/shearlet.hpp"

namespace shearop {

enum class Arch { sno, fno };
enum class MixingMode { full, diagonal, scalar };

std::string to_string(Arch a);
std::string to_string(MixingMode m);
Arch parse_arch(const std::string& s);
MixingMode parse_mixing(const std::string& s);

/// Architecture hyperparameters; grid-free so one model can run at any resolution.
struct ModelConfig {
    Arch arch = Arch::sno;
    int width = 8;
    int layers = 4;
    FrameSpec frame;                             // sno only
    MixingMode mixing = MixingMode::diagonal;    // sno only
    int modes_x = 4;                             // fno only
    int modes_y = 4;

    void validate() const;
    nlohmann::json to_json() const;
    static ModelConfig from_json(const nlohmann::json& j);
    bool operator==(const ModelConfig&) const = default;
};

/// Complex band-mixing weights and per-scale gate logits of one SNO layer.
/// Weight layout: full [(m*C_in + c)*C_out + o], diagonal [m*C + c], scalar [m].
struct SnoLayerParams {
    MixingMode mode = MixingMode::diagonal;
    int bands = 0;
    int c_in = 0;
    int c_out = 0;
    std::vector<cplx> weights;
    std::vector<double> gamma;  // one logit per scale, low-pass first

    static SnoLayerParams zeros(MixingMode mode, int bands, int scales, int c_in, int c_out);
    cplx weight(int m, int c, int o) const;
};

/// Corner-block Fourier multipliers of one FNO layer, layout
/// [(((block*mx + x)*my + y)*C_in + c)*C_out + o]. Block 0 covers rows
/// kx in [0, mx), block 1 rows kx in [nx - mx, nx); columns ky in [0, my).
struct FnoLayerParams {
    int modes_x = 0;
    int modes_y = 0;
    int c_in = 0;
    int c_out = 0;
    std::vector<cplx> weights;

    static FnoLayerParams zeros(int modes_x, int modes_y, int c_in, int c_out);
    std::size_t index(int block, int x, int y, int c, int o) const {
        return ((((static_cast<std::size_t>(block) * modes_x + x) * modes_y + y) * c_in + c) * c_out) + o;
    }
};

struct LayerParams {
    SnoLayerParams sno;
    FnoLayerParams fno;
    std::vector<double> pw_weight;  // [o*C + c]
    std::vector<double> pw_bias;
};

/// All trainable tensors. The same type holds gradients.
struct ModelParams {
    ModelConfig config;
    std::vector<double> lift_weight;
    std::vector<double> lift_bias;
    std::vector<LayerParams> layers;
    std::vector<double> proj_weight;
    std::vector<double> proj_bias;

    /// Visits every tensor in declaration order as a flat real span
    /// (complex entries as consecutive re/im pairs).
    void for_each_tensor(const std::function<void(const std::string&, std::span<double>)>& f);
    void for_each_tensor(
        const std::function<void(const std::string&, std::span<const double>)>& f) const;

    std::size_t size() const;
    std::vector<double> flatten() const;
    void unflatten(std::span<const double> flat);
    void set_zero();
    /// this += alpha * other
    void axpy(double alpha, const ModelParams& other);
    bool all_finite() const;
};

ModelParams zero_params(const ModelConfig& cfg);
/// Seeded initialization: complex spectral weights uniform, pointwise maps
/// uniform with fan-in scaling, gates at 0.
ModelParams init_params(const ModelConfig& cfg, std::uint64_t seed);

struct ParamCount {
    struct Row {
        std::string component;
        std::size_t reals;
    };
    std::vector<Row> rows;
    std::size_t total = 0;
    std::size_t spectral = 0;

    std::string table() const;
};

/// Exact trainable-real count (complex counts as 2).
ParamCount param_count(const ModelConfig& cfg);

/// Checkpoint file "SNOC": header carries the model config and the block
/// list; payload holds the parameter blocks in declaration order followed
/// by any extra blocks.
struct ExtraBlock {
    std::string name;
    std::vector<double> values;
};

void save_checkpoint(const std::string& path, const ModelParams& params,
                     const nlohmann::json& extra_header = {},
                     const std::vector<ExtraBlock>& extra_blocks = {});

struct LoadedCheckpoint {
    ModelParams params;
    nlohmann::json extra_header;
    std::vector<ExtraBlock> extra_blocks;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace shearop
