// JSON form of a surface:
//   { "polygons": [ { "id": str, "vertices": [[x,y],...] } ],
//     "gluings":  [ { "a": [id, edge], "b": [id, edge] } ],
//     "unmarked": [ [id, vertex], ... ] }          (optional)
#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "conesurf/surface.hpp"

namespace conesurf {

namespace detail {

inline std::pair<std::string, std::size_t> parse_ref(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_string() || !j[1].is_number_integer() || j[1].get<long long>() < 0)
    throw Error(ErrorCode::ParseError, where + " must be [polygon id, non-negative index]");
  return {j[0].get<std::string>(), j[1].get<std::size_t>()};
}

}  // namespace detail

inline SurfaceDescription parse_surface_description(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "surface document must be a JSON object");
  if (!j.contains("polygons") || !j["polygons"].is_array())
    throw Error(ErrorCode::ParseError, "missing array 'polygons'");
  if (!j.contains("gluings") || !j["gluings"].is_array()) throw Error(ErrorCode::ParseError, "missing array 'gluings'");

  SurfaceDescription d;
  for (std::size_t i = 0; i < j["polygons"].size(); ++i) {
    const auto& pj = j["polygons"][i];
    const std::string where = "polygons[" + std::to_string(i) + "]";
    if (!pj.is_object() || !pj.contains("id") || !pj["id"].is_string())
      throw Error(ErrorCode::ParseError, where + " needs a string 'id'");
    if (!pj.contains("vertices") || !pj["vertices"].is_array())
      throw Error(ErrorCode::ParseError, where + " needs an array 'vertices'");
    PolygonChart p;
    p.id = pj["id"].get<std::string>();
    for (std::size_t k = 0; k < pj["vertices"].size(); ++k) {
      const auto& v = pj["vertices"][k];
      if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw Error(ErrorCode::ParseError, "polygon '" + p.id + "' vertex " + std::to_string(k) + " must be [x, y]");
      p.vertices.push_back({v[0].get<double>(), v[1].get<double>()});
    }
    d.polygons.push_back(std::move(p));
  }
  for (std::size_t i = 0; i < j["gluings"].size(); ++i) {
    const auto& gj = j["gluings"][i];
    const std::string where = "gluings[" + std::to_string(i) + "]";
    if (!gj.is_object() || !gj.contains("a") || !gj.contains("b"))
      throw Error(ErrorCode::ParseError, where + " needs 'a' and 'b'");
    const auto [ac, ae] = detail::parse_ref(gj["a"], where + ".a");
    const auto [bc, be] = detail::parse_ref(gj["b"], where + ".b");
    d.gluings.push_back({ac, ae, bc, be});
  }
  if (j.contains("unmarked")) {
    if (!j["unmarked"].is_array()) throw Error(ErrorCode::ParseError, "'unmarked' must be an array");
    for (std::size_t i = 0; i < j["unmarked"].size(); ++i)
      d.unmarked.push_back(detail::parse_ref(j["unmarked"][i], "unmarked[" + std::to_string(i) + "]"));
  }
  return d;
}

inline nlohmann::json to_json(const SurfaceDescription& d) {
  nlohmann::json j;
  j["polygons"] = nlohmann::json::array();
  for (const auto& p : d.polygons) {
    nlohmann::json verts = nlohmann::json::array();
    for (const auto& v : p.vertices) verts.push_back({v.x, v.y});
    j["polygons"].push_back({{"id", p.id}, {"vertices", verts}});
  }
  j["gluings"] = nlohmann::json::array();
  for (const auto& g : d.gluings)
    j["gluings"].push_back({{"a", {g.a_chart, g.a_edge}}, {"b", {g.b_chart, g.b_edge}}});
  if (!d.unmarked.empty()) {
    j["unmarked"] = nlohmann::json::array();
    for (const auto& [id, v] : d.unmarked) j["unmarked"].push_back({id, v});
  }
  return j;
}

inline SurfaceDescription parse_surface_description(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  return parse_surface_description(j);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ConeSurface load_surface(const std::string& path, const BuildOptions& opts = {}) {
  return build_surface(parse_surface_description(read_text_file(path)), opts);
}

}  // namespace conesurf
