#include "shearop/image.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>

#include <png.h>

#include "shearop/error.hpp"

namespace shearop {

namespace {

void write_png(const std::string& path, int width, int height, int color_type, int channels,
               std::span<const std::uint8_t> pixels, const PngText& text) {
    if (path.empty()) throw IoError("png: empty output path");
    if (width <= 0 || height <= 0 ||
        pixels.size() != static_cast<std::size_t>(width) * height * channels)
        throw IoError("png: pixel buffer does not match image size");

    const std::string tmp = path + ".tmp";
    std::FILE* fp = std::fopen(tmp.c_str(), "wb");
    if (!fp) throw IoError("png: cannot open " + path + " for writing");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        std::remove(tmp.c_str());
        throw IoError("png: libpng initialization failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        std::remove(tmp.c_str());
        throw IoError("png: write failed for " + path);
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, width, height, 8, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    std::vector<png_text> chunks(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        chunks[i] = {};
        chunks[i].compression = PNG_TEXT_COMPRESSION_NONE;
        chunks[i].key = const_cast<char*>(text[i].first.c_str());
        chunks[i].text = const_cast<char*>(text[i].second.c_str());
    }
    if (!chunks.empty()) png_set_text(png, info, chunks.data(), static_cast<int>(chunks.size()));
    png_write_info(png, info);
    const std::size_t stride = static_cast<std::size_t>(width) * channels;
    for (int y = 0; y < height; ++y)
        png_write_row(png, const_cast<png_bytep>(pixels.data() + y * stride));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    if (std::fclose(fp) != 0) {
        std::remove(tmp.c_str());
        throw IoError("png: close failed for " + path);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::remove(tmp.c_str());
        throw IoError("png: cannot move output into place at " + path);
    }
}

Rgb lerp(const Rgb& a, const Rgb& b, double t) {
    auto ch = [t](std::uint8_t x, std::uint8_t y) {
        return static_cast<std::uint8_t>(std::lround(x + (y - x) * t));
    };
    return {ch(a.r, b.r), ch(a.g, b.g), ch(a.b, b.b)};
}

template <std::size_t N>
Rgb piecewise(const std::array<Rgb, N>& stops, double t) {
    t = std::clamp(t, 0.0, 1.0) * (N - 1);
    const std::size_t i = std::min(static_cast<std::size_t>(t), N - 2);
    return lerp(stops[i], stops[i + 1], t - i);
}

}  // namespace

void write_png_gray(const std::string& path, int width, int height,
                    std::span<const std::uint8_t> pixels, const PngText& text) {
    write_png(path, width, height, PNG_COLOR_TYPE_GRAY, 1, pixels, text);
}

void write_png_rgb(const std::string& path, int width, int height,
                   std::span<const std::uint8_t> pixels, const PngText& text) {
    write_png(path, width, height, PNG_COLOR_TYPE_RGB, 3, pixels, text);
}

Rgb sequential_color(double t) {
    static constexpr std::array<Rgb, 5> stops{
        {{0, 0, 4}, {87, 16, 110}, {188, 55, 84}, {249, 142, 9}, {252, 255, 164}}};
    return piecewise(stops, t);
}

Rgb diverging_color(double t) {
    static constexpr std::array<Rgb, 3> stops{{{33, 102, 172}, {247, 247, 247}, {178, 24, 43}}};
    return piecewise(stops, 0.5 * (t + 1.0));
}

}  // namespace shearop
