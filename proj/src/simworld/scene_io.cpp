#include "lidardrive/simworld/scene_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace lidardrive::simworld {

using nlohmann::json;

namespace {

Polygon parse_polygon(const json& j, const std::string& where) {
  Polygon p;
  for (const auto& v : j) {
    if (!v.is_array() || v.size() != 2) throw SceneError(where + ": vertices must be [x, y]");
    p.push_back({v[0].get<double>(), v[1].get<double>()});
    if (!std::isfinite(p.back().x) || !std::isfinite(p.back().y)) {
      throw SceneError(where + ": non-finite vertex");
    }
  }
  if (p.size() < 3) throw SceneError(where + ": polygon needs at least 3 vertices");
  if (std::abs(signed_area(p)) < 1e-9) throw SceneError(where + ": degenerate polygon");
  return p;
}

std::uint8_t parse_class(const json& j, const std::string& where) {
  const int c = j.get<int>();
  if (c < 0 || c >= 20) throw SceneError(where + ": class " + std::to_string(c) + " outside 0..19");
  return static_cast<std::uint8_t>(c);
}

geonav::GeoPoint parse_geo(const json& j) {
  return {j.at("lat").get<double>(), j.at("lon").get<double>()};
}

json polygon_json(const Polygon& p) {
  json a = json::array();
  for (const Vec2& v : p) a.push_back({v.x, v.y});
  return a;
}

}  // namespace

World parse_scene(const std::string& text) {
  World w;
  try {
    const json j = json::parse(text);
    w.name = j.value("name", std::string{});
    w.origin = parse_geo(j.at("origin"));
    if (j.contains("default_class")) w.default_class = parse_class(j.at("default_class"), "default_class");
    for (std::size_t i = 0; i < j.value("regions", json::array()).size(); ++i) {
      const auto& r = j.at("regions")[i];
      const std::string where = "regions[" + std::to_string(i) + "]";
      w.regions.push_back({parse_class(r.at("class"), where), parse_polygon(r.at("polygon"), where)});
    }
    for (std::size_t i = 0; i < j.value("obstacles", json::array()).size(); ++i) {
      const auto& o = j.at("obstacles")[i];
      const std::string where = "obstacles[" + std::to_string(i) + "]";
      Obstacle ob;
      ob.class_id = parse_class(o.at("class"), where);
      ob.polygon = parse_polygon(o.at("polygon"), where);
      if (!is_convex(ob.polygon)) throw SceneError(where + ": obstacle polygon must be convex");
      ob.height = o.at("height").get<double>();
      if (!(ob.height > 0.0)) throw SceneError(where + ": height must be positive");
      ob.density_level = o.value("density", 0);
      if (ob.density_level < 0 || ob.density_level > 2) throw SceneError(where + ": density must be 0..2");
      if (o.contains("velocity")) {
        const auto v = o.at("velocity").get<std::vector<double>>();
        if (v.size() != 2) throw SceneError(where + ": velocity must be [vx, vy]");
        ob.velocity = {v[0], v[1]};
      }
      ob.period = o.value("period", 0.0);
      if (ob.period < 0.0) throw SceneError(where + ": period must be >= 0");
      w.obstacles.push_back(std::move(ob));
    }
    for (const auto& r : j.at("routes")) {
      std::vector<geonav::GeoPoint> route;
      for (const auto& g : r) route.push_back(parse_geo(g));
      if (route.size() < 2) throw SceneError("routes: a route needs at least 2 points");
      w.routes.push_back(std::move(route));
    }
    if (j.contains("route_paths")) {
      for (const auto& p : j.at("route_paths")) {
        std::vector<Vec2> path;
        for (const auto& v : p) path.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
        w.route_paths.push_back(std::move(path));
      }
      if (w.route_paths.size() != w.routes.size()) {
        throw SceneError("route_paths must have one entry per route");
      }
    }
  } catch (const json::exception& e) {
    throw SceneError(std::string("scene: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw SceneError(std::string("scene: ") + e.what());
  }
  return w;
}

World load_scene(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw SceneError("cannot open scene " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  try {
    World w = parse_scene(ss.str());
    if (w.name.empty()) w.name = path.stem().string();
    return w;
  } catch (const SceneError& e) {
    throw SceneError(path.string() + ": " + e.what());
  }
}

std::string scene_to_json(const World& w) {
  json j;
  j["name"] = w.name;
  j["origin"] = {{"lat", w.origin.lat}, {"lon", w.origin.lon}};
  j["default_class"] = w.default_class;
  j["regions"] = json::array();
  for (const auto& r : w.regions) j["regions"].push_back({{"class", r.class_id}, {"polygon", polygon_json(r.polygon)}});
  j["obstacles"] = json::array();
  for (const auto& o : w.obstacles) {
    json jo{{"class", o.class_id}, {"polygon", polygon_json(o.polygon)}, {"height", o.height},
            {"density", o.density_level}};
    if (o.period > 0.0) {
      jo["velocity"] = {o.velocity.x, o.velocity.y};
      jo["period"] = o.period;
    }
    j["obstacles"].push_back(std::move(jo));
  }
  j["routes"] = json::array();
  for (const auto& r : w.routes) {
    json jr = json::array();
    for (const auto& g : r) jr.push_back({{"lat", g.lat}, {"lon", g.lon}});
    j["routes"].push_back(std::move(jr));
  }
  if (!w.route_paths.empty()) {
    j["route_paths"] = json::array();
    for (const auto& p : w.route_paths) {
      json jp = json::array();
      for (const Vec2& v : p) jp.push_back({v.x, v.y});
      j["route_paths"].push_back(std::move(jp));
    }
  }
  return j.dump(1);
}

}  // namespace lidardrive::simworld
