#pragma once

#include "photogeo/grid.hpp"

#include <filesystem>
#include <string>

namespace photogeo {

// PFM: little-endian (scale -1.0), rows stored bottom-up. PNG: 8-bit sRGB, values
// clamped to [0, 1] and quantised on export. All writers go through a temporary
// file and rename into place.

void write_pfm(const std::filesystem::path& path, const ScalarMap& map);
void write_pfm(const std::filesystem::path& path, const Grid<Vec3>& map);
ScalarMap read_pfm_scalar(const std::filesystem::path& path);
Grid<Vec3> read_pfm_color(const std::filesystem::path& path);

void write_png(const std::filesystem::path& path, const Image& image);
void write_png(const std::filesystem::path& path, const Mask& mask);
Image read_png(const std::filesystem::path& path);
/// Any channel value >= 128 marks the pixel as inside.
Mask read_png_mask(const std::filesystem::path& path);

/// Writes `bytes` atomically.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);

} // namespace photogeo
