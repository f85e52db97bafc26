#include "shearop/container.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "shearop/error.hpp"

namespace shearop {

namespace {

template <typename T>
T to_little(T v) {
    if constexpr (std::endian::native == std::endian::big) {
        unsigned char b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
        std::memcpy(&v, b, sizeof(T));
    }
    return v;
}

template <typename T>
void put(std::ostream& os, T v) {
    v = to_little(v);
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    return to_little(v);
}

}  // namespace

void write_container(const std::string& path, const char (&magic)[5], std::uint32_t version,
                     nlohmann::json header, std::span<const double> payload) {
    if (path.empty()) throw IoError("empty output path");
    header["payload_count"] = payload.size();
    const std::string text = header.dump();
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw IoError("cannot open " + path + " for writing");
        os.write(magic, 4);
        put<std::uint32_t>(os, version);
        put<std::uint64_t>(os, text.size());
        os.write(text.data(), static_cast<std::streamsize>(text.size()));
        if constexpr (std::endian::native == std::endian::little) {
            os.write(reinterpret_cast<const char*>(payload.data()),
                     static_cast<std::streamsize>(payload.size() * sizeof(double)));
        } else {
            for (double v : payload) put<double>(os, v);
        }
        if (!os) {
            std::filesystem::remove(tmp);
            throw IoError("write failed for " + path);
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move output into place at " + path);
}

Container read_container(const std::string& path, const char (&magic)[5]) {
    if (!std::filesystem::exists(path)) throw MissingInputError(path);
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path);
    char m[4];
    is.read(m, 4);
    if (!is || std::memcmp(m, magic, 4) != 0)
        throw IoError(path + ": bad magic, expected " + std::string(magic, 4));
    Container c;
    c.version = get<std::uint32_t>(is);
    const auto len = get<std::uint64_t>(is);
    if (!is || len > (std::uint64_t{1} << 30)) throw IoError(path + ": truncated header");
    std::string text(len, '\0');
    is.read(text.data(), static_cast<std::streamsize>(len));
    if (!is) throw IoError(path + ": truncated header");
    try {
        c.header = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path + ": malformed header: " + e.what());
    }
    const auto count = c.header.value("payload_count", std::uint64_t{0});
    c.payload.resize(count);
    if constexpr (std::endian::native == std::endian::little) {
        is.read(reinterpret_cast<char*>(c.payload.data()),
                static_cast<std::streamsize>(count * sizeof(double)));
    } else {
        for (auto& v : c.payload) v = get<double>(is);
    }
    if (!is) throw IoError(path + ": truncated payload");
    return c;
}

}  // namespace shearop
