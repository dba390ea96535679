#include "lidardrive/projection/grid.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

namespace lidardrive::projection {

namespace {

constexpr double kPi = 3.14159265358979323846;

constexpr std::array<const char*, kNumClasses> kClassNames = {
    "none",   "car",     "bicycle",  "motorcycle", "truck",      "other-vehicle", "person",
    "bicyclist", "motorcyclist", "road", "parking", "sidewalk", "ground", "building",
    "fence",  "vegetation", "trunk", "terrain",   "pole",       "traffic-sign"};

int floor_clamped(double v, int n) {
  const double f = std::floor(v);
  if (f < 0.0) return 0;
  if (f >= static_cast<double>(n)) return n - 1;
  return static_cast<int>(f);
}

/// Keeps, per cell, the in-order first point with the smallest range.
class CellAccumulator {
 public:
  CellAccumulator(int height, int width)
      : width_(width), best_(static_cast<std::size_t>(height) * width, -1) {}

  void offer(int row, int col, std::size_t point, double range) {
    const std::size_t idx = static_cast<std::size_t>(row) * width_ + col;
    if (best_[idx] < 0 || range < ranges_[best_[idx]]) {
      if (best_[idx] < 0) touched_.push_back(idx);
      best_[idx] = static_cast<long>(slot(point, range));
    }
  }

  std::vector<GridCell> finish(const LabeledPointCloud& cloud, double max_depth) {
    std::sort(touched_.begin(), touched_.end());
    std::vector<GridCell> cells;
    cells.reserve(touched_.size());
    for (std::size_t idx : touched_) {
      const std::size_t s = static_cast<std::size_t>(best_[idx]);
      const auto& p = cloud.points[points_[s]];
      cells.push_back({static_cast<std::uint32_t>(idx), p.class_id, log_depth(ranges_[s], max_depth)});
    }
    return cells;
  }

 private:
  std::size_t slot(std::size_t point, double range) {
    points_.push_back(point);
    ranges_.push_back(range);
    return points_.size() - 1;
  }

  int width_;
  std::vector<long> best_;
  std::vector<std::size_t> touched_;
  std::vector<std::size_t> points_;
  std::vector<double> ranges_;
};

void check_point(const LabeledPoint& p) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
    throw std::invalid_argument("projection: non-finite point");
  }
  if (p.class_id >= kNumClasses) {
    throw std::invalid_argument("projection: class id " + std::to_string(p.class_id) +
                                " out of range");
  }
}

template <typename T>
void put_le(std::ostream& os, T v) {
  static_assert(std::endian::native == std::endian::little, "little-endian host assumed");
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw GridFileError("grid dump: truncated file");
  return v;
}

}  // namespace

const char* class_name(int class_id) {
  if (class_id < 0 || class_id >= kNumClasses) return "invalid";
  return kClassNames[static_cast<std::size_t>(class_id)];
}

double LabeledPoint::range() const { return std::sqrt(x * x + y * y + z * z); }

GridConfig GridConfig::front() { return GridConfig{}; }

GridConfig GridConfig::bev() {
  GridConfig cfg;
  cfg.mode = GridMode::kBev;
  cfg.height = 128;
  cfg.width = 256;
  return cfg;
}

void GridConfig::validate() const {
  if (height <= 0 || width <= 0 || height > 65535 || width > 65535) {
    throw std::invalid_argument("GridConfig: bad raster size");
  }
  if (!(max_depth > 0.0)) throw std::invalid_argument("GridConfig: max_depth must be positive");
  if (mode == GridMode::kFront) {
    if (!(azimuth_max_deg > azimuth_min_deg) || !(elevation_max_deg > elevation_min_deg)) {
      throw std::invalid_argument("GridConfig: empty angular span");
    }
  } else if (!(forward_max > forward_min) || !(lateral_max > lateral_min)) {
    throw std::invalid_argument("GridConfig: empty BEV extent");
  }
}

ProjectedGrid::ProjectedGrid(GridMode mode, int height, int width)
    : mode_(mode), height_(height), width_(width) {}

ProjectedGrid::ProjectedGrid(GridMode mode, int height, int width, std::vector<GridCell> cells)
    : mode_(mode), height_(height), width_(width), cells_(std::move(cells)) {
  std::sort(cells_.begin(), cells_.end(),
            [](const GridCell& a, const GridCell& b) { return a.index < b.index; });
  const auto n = static_cast<std::uint32_t>(height) * static_cast<std::uint32_t>(width);
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    if (cells_[i].index >= n || (i > 0 && cells_[i].index == cells_[i - 1].index) ||
        cells_[i].class_id >= kNumClasses) {
      throw std::invalid_argument("ProjectedGrid: invalid or duplicate cell");
    }
  }
}

const GridCell* ProjectedGrid::find(int row, int col) const {
  if (row < 0 || row >= height_ || col < 0 || col >= width_) {
    throw std::out_of_range("ProjectedGrid: cell out of range");
  }
  const auto idx = static_cast<std::uint32_t>(row * width_ + col);
  auto it = std::lower_bound(cells_.begin(), cells_.end(), idx,
                             [](const GridCell& c, std::uint32_t i) { return c.index < i; });
  return (it != cells_.end() && it->index == idx) ? &*it : nullptr;
}

double ProjectedGrid::at(int channel, int row, int col) const {
  if (channel < 0 || channel >= kNumChannels) throw std::out_of_range("ProjectedGrid: channel");
  const GridCell* c = find(row, col);
  if (c == nullptr) return 0.0;
  if (channel == kDepthChannel) return c->log_depth;
  return channel == c->class_id ? 1.0 : 0.0;
}

int ProjectedGrid::class_at(int row, int col) const {
  const GridCell* c = find(row, col);
  return c == nullptr ? -1 : c->class_id;
}

std::vector<double> ProjectedGrid::dense() const {
  const std::size_t plane = static_cast<std::size_t>(height_) * width_;
  std::vector<double> out(plane * kNumChannels, 0.0);
  for (const auto& c : cells_) {
    out[c.class_id * plane + c.index] = 1.0;
    out[kDepthChannel * plane + c.index] = c.log_depth;
  }
  return out;
}

double log_depth(double range, double max_depth) {
  const double v = std::log(1.0 + range) / std::log(1.0 + max_depth);
  return std::clamp(v, 0.0, 1.0);
}

ProjectedGrid project_front(const LabeledPointCloud& cloud, const GridConfig& cfg) {
  if (cfg.mode != GridMode::kFront) throw std::invalid_argument("project_front: mode != front");
  cfg.validate();
  CellAccumulator acc(cfg.height, cfg.width);
  const double az_span = cfg.azimuth_max_deg - cfg.azimuth_min_deg;
  const double el_span = cfg.elevation_max_deg - cfg.elevation_min_deg;
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const auto& p = cloud.points[i];
    check_point(p);
    if (!(p.y > 0.0)) continue;
    const double azimuth = std::atan2(p.x, p.y) * 180.0 / kPi;
    if (azimuth < cfg.azimuth_min_deg || azimuth >= cfg.azimuth_max_deg) continue;
    const double elevation = std::atan2(p.z, std::hypot(p.x, p.y)) * 180.0 / kPi;
    const int col = floor_clamped((azimuth - cfg.azimuth_min_deg) / az_span * cfg.width, cfg.width);
    const int row =
        floor_clamped((cfg.elevation_max_deg - elevation) / el_span * cfg.height, cfg.height);
    acc.offer(row, col, i, p.range());
  }
  return ProjectedGrid(GridMode::kFront, cfg.height, cfg.width, acc.finish(cloud, cfg.max_depth));
}

ProjectedGrid project_bev(const LabeledPointCloud& cloud, const GridConfig& cfg) {
  if (cfg.mode != GridMode::kBev) throw std::invalid_argument("project_bev: mode != bev");
  cfg.validate();
  CellAccumulator acc(cfg.height, cfg.width);
  const double row_size = (cfg.forward_max - cfg.forward_min) / cfg.height;
  const double col_size = (cfg.lateral_max - cfg.lateral_min) / cfg.width;
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const auto& p = cloud.points[i];
    check_point(p);
    if (p.y < cfg.forward_min || p.y >= cfg.forward_max) continue;
    if (p.x < cfg.lateral_min || p.x >= cfg.lateral_max) continue;
    const double range = p.range();
    // A zero-range return carries no depth; the sensor cannot produce one.
    if (!(range > 0.0)) continue;
    const int row = floor_clamped((cfg.forward_max - p.y) / row_size, cfg.height);
    const int col = floor_clamped((p.x - cfg.lateral_min) / col_size, cfg.width);
    acc.offer(row, col, i, range);
  }
  return ProjectedGrid(GridMode::kBev, cfg.height, cfg.width, acc.finish(cloud, cfg.max_depth));
}

ProjectedGrid project(const LabeledPointCloud& cloud, const GridConfig& cfg) {
  return cfg.mode == GridMode::kFront ? project_front(cloud, cfg) : project_bev(cloud, cfg);
}

void write_grid_dump(const std::filesystem::path& path, const ProjectedGrid& grid) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw GridFileError("grid dump: cannot open " + path.string());
  os.write("DPG2", 4);
  put_le<std::uint8_t>(os, static_cast<std::uint8_t>(grid.mode()));
  for (int i = 0; i < 3; ++i) put_le<std::uint8_t>(os, 0);
  put_le<std::uint16_t>(os, static_cast<std::uint16_t>(grid.channels()));
  put_le<std::uint16_t>(os, static_cast<std::uint16_t>(grid.height()));
  put_le<std::uint16_t>(os, static_cast<std::uint16_t>(grid.width()));
  put_le<std::uint32_t>(os, 0);
  for (double v : grid.dense()) put_le<float>(os, static_cast<float>(v));
  if (!os) throw GridFileError("grid dump: write failed for " + path.string());
}

ProjectedGrid read_grid_dump(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw GridFileError("grid dump: cannot open " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "DPG2", 4) != 0) throw GridFileError("grid dump: bad magic");
  const auto mode = get_le<std::uint8_t>(is);
  for (int i = 0; i < 3; ++i) get_le<std::uint8_t>(is);
  const int c = get_le<std::uint16_t>(is);
  const int h = get_le<std::uint16_t>(is);
  const int w = get_le<std::uint16_t>(is);
  get_le<std::uint32_t>(is);
  if (c != kNumChannels || mode > 1) throw GridFileError("grid dump: unsupported layout");
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  std::vector<float> data(plane * c);
  is.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size() * 4));
  if (!is) throw GridFileError("grid dump: truncated data");
  std::vector<GridCell> cells;
  for (std::size_t idx = 0; idx < plane; ++idx) {
    int cls = -1;
    for (int ch = 0; ch < kNumClasses; ++ch) {
      if (data[ch * plane + idx] != 0.0f) {
        if (cls >= 0) throw GridFileError("grid dump: cell is not one-hot");
        cls = ch;
      }
    }
    const float depth = data[kDepthChannel * plane + idx];
    if (cls < 0) {
      if (depth != 0.0f) throw GridFileError("grid dump: depth on vacant cell");
      continue;
    }
    cells.push_back({static_cast<std::uint32_t>(idx), static_cast<std::uint8_t>(cls), depth});
  }
  return ProjectedGrid(static_cast<GridMode>(mode), h, w, std::move(cells));
}

}  // namespace lidardrive::projection
