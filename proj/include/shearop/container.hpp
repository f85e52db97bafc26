#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace shearop {

/// On-disk layout shared by checkpoints and datasets:
///   4-byte magic | u32 version | u64 header length | JSON header | f64 payload
/// All integers and floats little-endian. The header records the payload
/// length as "payload_count".
struct Container {
    std::uint32_t version = 0;
    nlohmann::json header;
    std::vector<double> payload;
};

void write_container(const std::string& path, const char (&magic)[5], std::uint32_t version,
                     nlohmann::json header, std::span<const double> payload);

/// Throws MissingInputError if absent, IoError on a malformed file.
Container read_container(const std::string& path, const char (&magic)[5]);

}  // namespace shearop
