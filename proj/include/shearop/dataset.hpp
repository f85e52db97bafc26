#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "shearop/field.hpp"

namespace shearop {

/// Time-ordered frames u_0 .. u_T on one grid; pair t is (u_t, u_{t+1}).
struct Dataset {
    std::string name;
    Grid2D grid;
    std::vector<ScalarField> frames;
    nlohmann::json meta;  // generator header (id, domain, constants, seed, ...)

    std::size_t pair_count() const { return frames.empty() ? 0 : frames.size() - 1; }
    const ScalarField& input(std::size_t pair) const { return frames.at(pair); }
    const ScalarField& target(std::size_t pair) const { return frames.at(pair + 1); }
};

/// Dataset file "SNOD": JSON header then (T+1) nx ny doubles, frame-major.
void save_dataset(const Dataset& d, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace shearop
