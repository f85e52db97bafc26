#include "shearop/model.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "shearop/container.hpp"
#include "shearop/error.hpp"

namespace shearop {

namespace {

constexpr char kCheckpointMagic[5] = "SNOC";
constexpr std::uint32_t kCheckpointVersion = 1;
// Windows overlapping a generic frequency point: two radial bands times two
// angular neighbors.
constexpr double kOverlappingWindows = 4.0;

std::span<double> as_reals(std::vector<cplx>& v) {
    return {reinterpret_cast<double*>(v.data()), 2 * v.size()};
}

}  // namespace

std::string to_string(Arch a) { return a == Arch::sno ? "sno" : "fno"; }

std::string to_string(MixingMode m) {
    switch (m) {
        case MixingMode::full: return "full";
        case MixingMode::diagonal: return "diagonal";
        case MixingMode::scalar: return "scalar";
    }
    return "?";
}

Arch parse_arch(const std::string& s) {
    if (s == "sno") return Arch::sno;
    if (s == "fno") return Arch::fno;
    throw ConfigError("unknown arch '" + s + "' (valid: sno, fno)");
}

MixingMode parse_mixing(const std::string& s) {
    if (s == "full") return MixingMode::full;
    if (s == "diagonal") return MixingMode::diagonal;
    if (s == "scalar") return MixingMode::scalar;
    throw ConfigError("unknown mixing mode '" + s + "' (valid: full, diagonal, scalar)");
}

void ModelConfig::validate() const {
    if (width < 1) throw ConfigError("model: width must be >= 1");
    if (layers < 1) throw ConfigError("model: layer count must be >= 1");
    if (arch == Arch::sno) frame.validate();
    if (arch == Arch::fno && (modes_x < 1 || modes_y < 1))
        throw ConfigError("model: FNO modes must be >= 1");
}

nlohmann::json ModelConfig::to_json() const {
    return {{"arch", to_string(arch)},
            {"width", width},
            {"layers", layers},
            {"scales", frame.n_scales},
            {"shears", frame.n_shears},
            {"r0", frame.r0},
            {"eps_norm", frame.eps_norm},
            {"angular_layout", frame.layout == AngularLayout::uniform ? "uniform" : "cone_adapted"},
            {"mixing_mode", to_string(mixing)},
            {"modes_x", modes_x},
            {"modes_y", modes_y}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
    ModelConfig c;
    try {
        c.arch = parse_arch(j.at("arch").get<std::string>());
        c.width = j.at("width").get<int>();
        c.layers = j.at("layers").get<int>();
        c.frame.n_scales = j.value("scales", c.frame.n_scales);
        c.frame.n_shears = j.value("shears", c.frame.n_shears);
        c.frame.r0 = j.value("r0", c.frame.r0);
        c.frame.eps_norm = j.value("eps_norm", c.frame.eps_norm);
        const std::string layout = j.value("angular_layout", std::string("uniform"));
        if (layout == "uniform") c.frame.layout = AngularLayout::uniform;
        else if (layout == "cone_adapted") c.frame.layout = AngularLayout::cone_adapted;
        else throw ConfigError("unknown angular layout '" + layout + "'");
        c.mixing = parse_mixing(j.value("mixing_mode", std::string("diagonal")));
        c.modes_x = j.value("modes_x", c.modes_x);
        c.modes_y = j.value("modes_y", c.modes_y);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("model config: ") + e.what());
    }
    c.validate();
    return c;
}

SnoLayerParams SnoLayerParams::zeros(MixingMode mode, int bands, int scales, int c_in, int c_out) {
    if (mode == MixingMode::diagonal && c_in != c_out)
        throw StructuralError("diagonal mixing requires C_in == C_out");
    SnoLayerParams p;
    p.mode = mode;
    p.bands = bands;
    p.c_in = c_in;
    p.c_out = c_out;
    std::size_t n = static_cast<std::size_t>(bands);
    if (mode == MixingMode::full) n *= static_cast<std::size_t>(c_in) * c_out;
    if (mode == MixingMode::diagonal) n *= static_cast<std::size_t>(c_in);
    p.weights.assign(n, cplx{});
    p.gamma.assign(scales, 0.0);
    return p;
}

cplx SnoLayerParams::weight(int m, int c, int o) const {
    switch (mode) {
        case MixingMode::full:
            return weights[(static_cast<std::size_t>(m) * c_in + c) * c_out + o];
        case MixingMode::diagonal:
            return c == o ? weights[static_cast<std::size_t>(m) * c_in + c] : cplx{};
        case MixingMode::scalar:
            return c == o ? weights[m] : cplx{};
    }
    return {};
}

FnoLayerParams FnoLayerParams::zeros(int modes_x, int modes_y, int c_in, int c_out) {
    FnoLayerParams p;
    p.modes_x = modes_x;
    p.modes_y = modes_y;
    p.c_in = c_in;
    p.c_out = c_out;
    p.weights.assign(2ull * modes_x * modes_y * c_in * c_out, cplx{});
    return p;
}

void ModelParams::for_each_tensor(
    const std::function<void(const std::string&, std::span<double>)>& f) {
    f("lift.weight", lift_weight);
    f("lift.bias", lift_bias);
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const std::string p = "layer" + std::to_string(l) + ".";
        auto& L = layers[l];
        if (config.arch == Arch::sno) {
            f(p + "sno.weights", as_reals(L.sno.weights));
            f(p + "sno.gamma", L.sno.gamma);
        } else {
            f(p + "fno.weights", as_reals(L.fno.weights));
        }
        f(p + "pointwise.weight", L.pw_weight);
        f(p + "pointwise.bias", L.pw_bias);
    }
    f("project.weight", proj_weight);
    f("project.bias", proj_bias);
}

void ModelParams::for_each_tensor(
    const std::function<void(const std::string&, std::span<const double>)>& f) const {
    const_cast<ModelParams*>(this)->for_each_tensor(
        [&](const std::string& name, std::span<double> s) { f(name, s); });
}

std::size_t ModelParams::size() const {
    std::size_t n = 0;
    for_each_tensor([&](const std::string&, std::span<const double> s) { n += s.size(); });
    return n;
}

std::vector<double> ModelParams::flatten() const {
    std::vector<double> out;
    out.reserve(size());
    for_each_tensor(
        [&](const std::string&, std::span<const double> s) { out.insert(out.end(), s.begin(), s.end()); });
    return out;
}

void ModelParams::unflatten(std::span<const double> flat) {
    if (flat.size() != size()) throw StructuralError("unflatten: size mismatch");
    std::size_t pos = 0;
    for_each_tensor([&](const std::string&, std::span<double> s) {
        std::copy(flat.begin() + pos, flat.begin() + pos + s.size(), s.begin());
        pos += s.size();
    });
}

void ModelParams::set_zero() {
    for_each_tensor([](const std::string&, std::span<double> s) { std::fill(s.begin(), s.end(), 0.0); });
}

void ModelParams::axpy(double alpha, const ModelParams& other) {
    std::vector<std::span<const double>> src;
    other.for_each_tensor([&](const std::string&, std::span<const double> s) { src.push_back(s); });
    std::size_t t = 0;
    for_each_tensor([&](const std::string&, std::span<double> s) {
        if (t >= src.size() || src[t].size() != s.size()) throw StructuralError("axpy: shape mismatch");
        for (std::size_t i = 0; i < s.size(); ++i) s[i] += alpha * src[t][i];
        ++t;
    });
}

bool ModelParams::all_finite() const {
    bool ok = true;
    for_each_tensor([&](const std::string&, std::span<const double> s) {
        ok = ok && shearop::all_finite(s);
    });
    return ok;
}

ModelParams zero_params(const ModelConfig& cfg) {
    cfg.validate();
    const int C = cfg.width;
    ModelParams p;
    p.config = cfg;
    p.lift_weight.assign(C, 0.0);
    p.lift_bias.assign(C, 0.0);
    p.layers.resize(cfg.layers);
    for (auto& L : p.layers) {
        if (cfg.arch == Arch::sno)
            L.sno = SnoLayerParams::zeros(cfg.mixing, cfg.frame.window_count(),
                                          cfg.frame.n_scales + 1, C, C);
        else
            L.fno = FnoLayerParams::zeros(cfg.modes_x, cfg.modes_y, C, C);
        L.pw_weight.assign(static_cast<std::size_t>(C) * C, 0.0);
        L.pw_bias.assign(C, 0.0);
    }
    p.proj_weight.assign(C, 0.0);
    p.proj_bias.assign(1, 0.0);
    return p;
}

ModelParams init_params(const ModelConfig& cfg, std::uint64_t seed) {
    ModelParams p = zero_params(cfg);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto symmetric = [&](std::span<double> s, double bound) {
        std::uniform_real_distribution<double> d(-bound, bound);
        for (double& v : s) v = d(rng);
    };
    const double C = cfg.width;
    symmetric(p.lift_weight, 1.0);
    symmetric(p.lift_bias, 1.0);
    for (auto& L : p.layers) {
        if (cfg.arch == Arch::sno) {
            const double fan = (cfg.mixing == MixingMode::full ? C : 1.0) * kOverlappingWindows;
            for (auto& w : L.sno.weights) w = cplx(unit(rng), unit(rng)) / fan;
        } else {
            for (auto& w : L.fno.weights) w = cplx(unit(rng), unit(rng)) / (C * C);
        }
        symmetric(L.pw_weight, 1.0 / std::sqrt(C));
        symmetric(L.pw_bias, 1.0 / std::sqrt(C));
    }
    symmetric(p.proj_weight, 1.0 / std::sqrt(C));
    symmetric(p.proj_bias, 1.0 / std::sqrt(C));
    return p;
}

std::string ParamCount::table() const {
    std::ostringstream os;
    os << "| component | reals |\n|---|---:|\n";
    for (const auto& r : rows) os << "| " << r.component << " | " << r.reals << " |\n";
    os << "| **total** | **" << total << "** |\n";
    return os.str();
}

ParamCount param_count(const ModelConfig& cfg) {
    cfg.validate();
    const std::size_t C = cfg.width;
    ParamCount pc;
    std::size_t per_layer_spectral = 0;
    std::string label;
    if (cfg.arch == Arch::sno) {
        const std::size_t M = cfg.frame.window_count();
        std::size_t weights = M;
        if (cfg.mixing == MixingMode::full) weights *= C * C;
        if (cfg.mixing == MixingMode::diagonal) weights *= C;
        per_layer_spectral = 2 * weights + (cfg.frame.n_scales + 1);
        label = "spectral (sno, " + to_string(cfg.mixing) + ", M=" + std::to_string(M) +
                ", incl. gates)";
    } else {
        per_layer_spectral = 2 * 2 * static_cast<std::size_t>(cfg.modes_x) * cfg.modes_y * C * C;
        label = "spectral (fno, " + std::to_string(cfg.modes_x) + "x" + std::to_string(cfg.modes_y) +
                " modes, 2 corner blocks)";
    }
    pc.spectral = per_layer_spectral * cfg.layers;
    pc.rows.push_back({label, pc.spectral});
    pc.rows.push_back({"pointwise maps", (C * C + C) * cfg.layers});
    pc.rows.push_back({"lift", 2 * C});
    pc.rows.push_back({"project", C + 1});
    for (const auto& r : pc.rows) pc.total += r.reals;
    return pc;
}

void save_checkpoint(const std::string& path, const ModelParams& params,
                     const nlohmann::json& extra_header, const std::vector<ExtraBlock>& extra_blocks) {
    nlohmann::json header;
    header["kind"] = "shearop-model";
    header["model"] = params.config.to_json();
    header["blocks"] = nlohmann::json::array();
    std::vector<double> payload;
    params.for_each_tensor([&](const std::string& name, std::span<const double> s) {
        header["blocks"].push_back({{"name", name}, {"count", s.size()}});
        payload.insert(payload.end(), s.begin(), s.end());
    });
    for (const auto& b : extra_blocks) {
        header["blocks"].push_back({{"name", b.name}, {"count", b.values.size()}});
        payload.insert(payload.end(), b.values.begin(), b.values.end());
    }
    if (!extra_header.is_null()) header["extra"] = extra_header;
    write_container(path, kCheckpointMagic, kCheckpointVersion, std::move(header), payload);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    Container c = read_container(path, kCheckpointMagic);
    if (c.version != kCheckpointVersion)
        throw IoError(path + ": unsupported checkpoint version " + std::to_string(c.version));
    LoadedCheckpoint out;
    try {
        out.params = zero_params(ModelConfig::from_json(c.header.at("model")));
        const auto& blocks = c.header.at("blocks");
        std::size_t pos = 0;
        std::size_t b = 0;
        std::string err;
        out.params.for_each_tensor([&](const std::string& name, std::span<double> s) {
            if (b >= blocks.size() || blocks[b].at("name") != name ||
                blocks[b].at("count").get<std::size_t>() != s.size() || pos + s.size() > c.payload.size()) {
                if (err.empty()) err = "block '" + name + "' does not match the model config";
                return;
            }
            std::copy(c.payload.begin() + pos, c.payload.begin() + pos + s.size(), s.begin());
            pos += s.size();
            ++b;
        });
        if (!err.empty()) throw IoError(path + ": " + err);
        for (; b < blocks.size(); ++b) {
            const auto n = blocks[b].at("count").get<std::size_t>();
            if (pos + n > c.payload.size()) throw IoError(path + ": truncated extra block");
            out.extra_blocks.push_back(
                {blocks[b].at("name").get<std::string>(),
                 std::vector<double>(c.payload.begin() + pos, c.payload.begin() + pos + n)});
            pos += n;
        }
        if (c.header.contains("extra")) out.extra_header = c.header.at("extra");
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path + ": malformed checkpoint header: " + e.what());
    }
    return out;
}

}  // namespace shearop
