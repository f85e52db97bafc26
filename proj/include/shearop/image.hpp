#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace shearop {

using PngText = std::vector<std::pair<std::string, std::string>>;

/// 8-bit grayscale PNG. Written to a temporary sibling and renamed, so a
/// failure never leaves a partial file behind. Throws IoError.
void write_png_gray(const std::string& path, int width, int height,
                    std::span<const std::uint8_t> pixels, const PngText& text = {});

/// 8-bit RGB PNG, pixels interleaved row-major.
void write_png_rgb(const std::string& path, int width, int height,
                   std::span<const std::uint8_t> pixels, const PngText& text = {});

struct Rgb {
    std::uint8_t r, g, b;
};

/// Sequential map (black -> purple -> orange -> pale yellow) for t in [0,1].
Rgb sequential_color(double t);
/// Diverging map (blue -> white -> red) for t in [-1,1].
Rgb diverging_color(double t);

}  // namespace shearop
