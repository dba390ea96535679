#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "lidardrive/projection/grid.hpp"

namespace lidardrive::projection {

using Rgb = std::array<std::uint8_t, 3>;
using Palette = std::array<Rgb, kNumClasses>;

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major RGB

  Rgb pixel(int row, int col) const;
};

/// Ten hues at two saturation levels; every entry has a distinct chromatic
/// direction so classes survive brightness scaling.
const Palette& default_palette();

/// Colors each occupied cell by its class, brightness scaled by log-depth;
/// vacant cells are black.
RgbImage render_grid(const ProjectedGrid& grid, const Palette& palette = default_palette());

/// Recovers the class map (-1 for background) from a rendered image by
/// nearest chromatic direction.
std::vector<int> classes_from_image(const RgbImage& image,
                                    const Palette& palette = default_palette());

void write_png(const std::filesystem::path& path, const RgbImage& image);
RgbImage read_png(const std::filesystem::path& path);

/// 8-bit PGM of one grid channel (values in [0, 1] scaled to 255).
void write_pgm(const std::filesystem::path& path, const ProjectedGrid& grid, int channel);

}  // namespace lidardrive::projection
