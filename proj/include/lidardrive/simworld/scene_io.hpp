#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "lidardrive/simworld/world.hpp"

namespace lidardrive::simworld {

class SceneError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scene JSON:
///   {"name", "origin": {lat, lon}, "default_class",
///    "regions": [{"class", "polygon": [[x, y], ...]}],
///    "obstacles": [{"class", "polygon", "height", "density", "velocity", "period"}],
///    "routes": [[{lat, lon}, ...]], "route_paths": [[[x, y], ...]]}
/// Polygons are in world meters. Throws SceneError on schema violations.
World parse_scene(const std::string& json_text);
World load_scene(const std::filesystem::path& path);
std::string scene_to_json(const World& world);

}  // namespace lidardrive::simworld
