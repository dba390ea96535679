#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

namespace lidardrive::projection {

inline constexpr int kNumClasses = 20;
inline constexpr int kNumChannels = kNumClasses + 1;
inline constexpr int kDepthChannel = kNumClasses;

/// Semantic classes, in channel order.
enum class SemanticClass : std::uint8_t {
  kNone = 0, kCar, kBicycle, kMotorcycle, kTruck, kOtherVehicle, kPerson, kBicyclist,
  kMotorcyclist, kRoad, kParking, kSidewalk, kGround, kBuilding, kFence, kVegetation,
  kTrunk, kTerrain, kPole, kTrafficSign,
};

const char* class_name(int class_id);

/// Sensor-frame point: +y forward, +x left, +z up (meters).
struct LabeledPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  std::uint8_t class_id = 0;

  double range() const;
};

struct LabeledPointCloud {
  std::vector<LabeledPoint> points;
  double timestamp = 0.0;
};

enum class GridMode : std::uint8_t { kFront = 0, kBev = 1 };

struct GridConfig {
  GridMode mode = GridMode::kFront;
  int height = 64;
  int width = 512;
  // Front view.
  double azimuth_min_deg = -90.0;
  double azimuth_max_deg = 90.0;
  double elevation_min_deg = -30.67;
  double elevation_max_deg = 10.67;
  // Bird's-eye view.
  double forward_min = 0.0;
  double forward_max = 16.0;
  double lateral_min = -16.0;
  double lateral_max = 16.0;
  // Log-depth normalization.
  double max_depth = 80.0;

  static GridConfig front();
  static GridConfig bev();
  /// Throws std::invalid_argument when dimensions or extents are unusable.
  void validate() const;
};

/// An occupied raster cell: its class and normalized log-depth.
struct GridCell {
  std::uint32_t index = 0;  // row * width + col
  std::uint8_t class_id = 0;
  double log_depth = 0.0;

  bool operator==(const GridCell&) const = default;
};

/// One-hot class layers plus a log-depth layer over an H x W raster.
///
/// Storage is the sorted list of occupied cells; every vacant cell is zero in
/// all 21 channels.
class ProjectedGrid {
 public:
  ProjectedGrid() = default;
  ProjectedGrid(GridMode mode, int height, int width);
  /// Cells must have distinct indices inside the raster; they are sorted here.
  ProjectedGrid(GridMode mode, int height, int width, std::vector<GridCell> cells);

  GridMode mode() const { return mode_; }
  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return kNumChannels; }

  double at(int channel, int row, int col) const;
  /// Class id of the cell, or -1 when vacant.
  int class_at(int row, int col) const;
  std::span<const GridCell> cells() const { return cells_; }

  /// Dense channel-major values, size 21*H*W.
  std::vector<double> dense() const;

  bool operator==(const ProjectedGrid&) const = default;

 private:
  const GridCell* find(int row, int col) const;

  GridMode mode_ = GridMode::kFront;
  int height_ = 0;
  int width_ = 0;
  std::vector<GridCell> cells_;
};

/// ln(1 + range) / ln(1 + max_depth), clipped to [0, 1].
double log_depth(double range, double max_depth);

ProjectedGrid project_front(const LabeledPointCloud& cloud, const GridConfig& cfg);
ProjectedGrid project_bev(const LabeledPointCloud& cloud, const GridConfig& cfg);
/// Dispatches on cfg.mode.
ProjectedGrid project(const LabeledPointCloud& cloud, const GridConfig& cfg);

class GridFileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Binary grid dump: 16-byte header ("DPG2", u8 mode, 3 reserved, u16 C,
/// u16 H, u16 W, u32 reserved) then C*H*W little-endian f32, channel-major.
void write_grid_dump(const std::filesystem::path& path, const ProjectedGrid& grid);
ProjectedGrid read_grid_dump(const std::filesystem::path& path);

}  // namespace lidardrive::projection
