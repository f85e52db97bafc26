#include "shearop/dataset.hpp"

#include "shearop/container.hpp"
#include "shearop/error.hpp"

namespace shearop {

namespace {
constexpr char kMagic[5] = "SNOD";
constexpr std::uint32_t kVersion = 1;
}  // namespace

void save_dataset(const Dataset& d, const std::string& path) {
    std::vector<double> payload;
    payload.reserve(d.frames.size() * d.grid.size());
    for (const auto& f : d.frames) {
        if (!(f.grid == d.grid)) throw StructuralError("save_dataset: frame grid differs from dataset grid");
        payload.insert(payload.end(), f.values.begin(), f.values.end());
    }
    nlohmann::json h;
    h["kind"] = "dataset";
    h["name"] = d.name;
    h["grid"] = {{"nx", d.grid.nx}, {"ny", d.grid.ny}, {"ax", d.grid.ax},
                 {"bx", d.grid.bx}, {"ay", d.grid.ay}, {"by", d.grid.by}};
    h["nx"] = d.grid.nx;
    h["ny"] = d.grid.ny;
    h["domain"] = {d.grid.ax, d.grid.bx, d.grid.ay, d.grid.by};
    h["T"] = d.pair_count();
    h["frames"] = d.frames.size();
    h["meta"] = d.meta.is_null() ? nlohmann::json::object() : d.meta;
    // generator fields (id, dt_snap, constants, seed) are also lifted to the top level
    if (d.meta.is_object())
        for (const auto& [k, v] : d.meta.items())
            if (!h.contains(k)) h[k] = v;
    write_container(path, kMagic, kVersion, std::move(h), payload);
}

Dataset load_dataset(const std::string& path) {
    Container c = read_container(path, kMagic);
    if (c.version != kVersion) throw IoError(path + ": unsupported dataset version " + std::to_string(c.version));
    Dataset d;
    try {
        const auto& g = c.header.at("grid");
        d.grid = Grid2D::make(g.at("nx"), g.at("ny"), g.at("ax"), g.at("bx"), g.at("ay"), g.at("by"));
        d.name = c.header.at("name").get<std::string>();
        d.meta = c.header.value("meta", nlohmann::json::object());
        const std::size_t frames = c.header.at("frames").get<std::size_t>();
        if (c.payload.size() != frames * d.grid.size()) throw IoError(path + ": payload size does not match header");
        d.frames.reserve(frames);
        for (std::size_t t = 0; t < frames; ++t) {
            ScalarField f(d.grid);
            std::copy_n(c.payload.begin() + t * d.grid.size(), d.grid.size(), f.values.begin());
            d.frames.push_back(std::move(f));
        }
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path + ": malformed dataset header: " + e.what());
    } catch (const StructuralError& e) {
        throw IoError(path + ": " + e.what());
    }
    return d;
}

}  // namespace shearop
