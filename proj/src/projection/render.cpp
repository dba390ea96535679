#include "lidardrive/projection/render.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>

namespace lidardrive::projection {

namespace {

constexpr double kMinBrightness = 0.35;

Rgb hsv_to_rgb(double hue_deg, double sat) {
  const double c = sat;
  const double hp = hue_deg / 60.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  if (hp < 1) { r = c; g = x; }
  else if (hp < 2) { r = x; g = c; }
  else if (hp < 3) { g = c; b = x; }
  else if (hp < 4) { g = x; b = c; }
  else if (hp < 5) { r = x; b = c; }
  else { r = c; b = x; }
  const double m = 1.0 - c;
  auto q = [](double v) { return static_cast<std::uint8_t>(std::lround(v * 255.0)); };
  return {q(r + m), q(g + m), q(b + m)};
}

struct FileCloser {
  void operator()(std::FILE* f) const { if (f) std::fclose(f); }
};

}  // namespace

Rgb RgbImage::pixel(int row, int col) const {
  const std::size_t o = (static_cast<std::size_t>(row) * width + col) * 3;
  return {pixels[o], pixels[o + 1], pixels[o + 2]};
}

const Palette& default_palette() {
  static const Palette palette = [] {
    Palette p{};
    for (int i = 0; i < kNumClasses; ++i) {
      const double hue = 36.0 * (i % 10) + (i >= 10 ? 18.0 : 0.0);
      p[static_cast<std::size_t>(i)] = hsv_to_rgb(hue, i >= 10 ? 0.5 : 1.0);
    }
    return p;
  }();
  return palette;
}

RgbImage render_grid(const ProjectedGrid& grid, const Palette& palette) {
  RgbImage img;
  img.width = grid.width();
  img.height = grid.height();
  img.pixels.assign(static_cast<std::size_t>(img.width) * img.height * 3, 0);
  for (const auto& c : grid.cells()) {
    const double k = kMinBrightness + (1.0 - kMinBrightness) * c.log_depth;
    const Rgb& base = palette[c.class_id];
    for (int ch = 0; ch < 3; ++ch) {
      img.pixels[c.index * 3 + ch] = static_cast<std::uint8_t>(std::lround(base[ch] * k));
    }
  }
  return img;
}

std::vector<int> classes_from_image(const RgbImage& image, const Palette& palette) {
  std::vector<int> out(static_cast<std::size_t>(image.width) * image.height, -1);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double r = image.pixels[i * 3], g = image.pixels[i * 3 + 1], b = image.pixels[i * 3 + 2];
    const double n = std::sqrt(r * r + g * g + b * b);
    if (n == 0.0) continue;
    double best = -2.0;
    for (int c = 0; c < kNumClasses; ++c) {
      const auto& p = palette[static_cast<std::size_t>(c)];
      const double pn = std::sqrt(double(p[0]) * p[0] + double(p[1]) * p[1] + double(p[2]) * p[2]);
      const double cosine = (r * p[0] + g * p[1] + b * p[2]) / (n * pn);
      if (cosine > best) {
        best = cosine;
        out[i] = c;
      }
    }
  }
  return out;
}

void write_png(const std::filesystem::path& path, const RgbImage& image) {
  std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw GridFileError("write_png: cannot open " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw GridFileError("write_png: libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw GridFileError("write_png: encode failed for " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width),
               static_cast<png_uint_32>(image.height), 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int r = 0; r < image.height; ++r) {
    auto* row = const_cast<png_bytep>(image.pixels.data() + static_cast<std::size_t>(r) * image.width * 3);
    png_write_row(png, row);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

RgbImage read_png(const std::filesystem::path& path) {
  std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw GridFileError("read_png: cannot open " + path.string());
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw GridFileError("read_png: libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw GridFileError("read_png: decode failed for " + path.string());
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  if (png_get_color_type(png, info) != PNG_COLOR_TYPE_RGB || png_get_bit_depth(png, info) != 8) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw GridFileError("read_png: only 8-bit RGB is supported");
  }
  RgbImage img;
  img.width = static_cast<int>(png_get_image_width(png, info));
  img.height = static_cast<int>(png_get_image_height(png, info));
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height * 3);
  for (int r = 0; r < img.height; ++r) {
    png_read_row(png, img.pixels.data() + static_cast<std::size_t>(r) * img.width * 3, nullptr);
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

void write_pgm(const std::filesystem::path& path, const ProjectedGrid& grid, int channel) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw GridFileError("write_pgm: cannot open " + path.string());
  os << "P5\n" << grid.width() << ' ' << grid.height() << "\n255\n";
  for (int r = 0; r < grid.height(); ++r) {
    for (int c = 0; c < grid.width(); ++c) {
      const double v = std::clamp(grid.at(channel, r, c), 0.0, 1.0);
      os.put(static_cast<char>(static_cast<std::uint8_t>(std::lround(v * 255.0))));
    }
  }
  if (!os) throw GridFileError("write_pgm: write failed for " + path.string());
}

}  // namespace lidardrive::projection
