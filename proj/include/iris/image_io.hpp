#pragma once

#include <filesystem>

#include "iris/image.hpp"

namespace iris {

// Reads PGM (P2 ascii / P5 binary, maxval <= 255) or uncompressed 8-bit
// palettized BMP. Format is sniffed from the magic bytes, not the extension.
GrayImage load_gray(const std::filesystem::path& path);

// Binary P5 writer; values are rounded and clamped to [0,255].
void write_pgm(const std::filesystem::path& path, const GrayImage& img);
void write_pgm(const std::filesystem::path& path, const EdgeMap& edges);

// Draws the circle outline into img (overlay dumps use 255).
void draw_circle(GrayImage& img, double cx, double cy, double r, double value = 255.0);

}  // namespace iris
