#include "hmvem/mesh_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace hmvem {

using nlohmann::json;

json mesh_to_json(const PolytopalMesh& mesh) {
  const RawMesh raw = mesh.raw();
  json j;
  j["dimension"] = raw.dimension;
  j["vertices"] = json::array();
  for (const auto& x : raw.vertices) j["vertices"].push_back(std::vector<double>(x.data(), x.data() + x.size()));
  j["entities"] = raw.entities;
  return j;
}

RawMesh raw_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("mesh: expected a JSON object");
  for (const char* key : {"dimension", "vertices", "entities"})
    if (!j.contains(key)) throw SchemaError(std::string("mesh: missing key '") + key + "'");
  RawMesh raw;
  if (!j["dimension"].is_number_integer()) throw SchemaError("dimension: expected an integer");
  raw.dimension = j["dimension"].get<int>();
  const json& verts = j["vertices"];
  if (!verts.is_array()) throw SchemaError("vertices: expected an array");
  for (std::size_t i = 0; i < verts.size(); ++i) {
    const std::string loc = "vertices[" + std::to_string(i) + "]";
    if (!verts[i].is_array()) throw SchemaError(loc + ": expected an array of coordinates");
    Eigen::VectorXd x(static_cast<Eigen::Index>(verts[i].size()));
    for (std::size_t c = 0; c < verts[i].size(); ++c) {
      if (!verts[i][c].is_number()) throw SchemaError(loc + "[" + std::to_string(c) + "]: expected a number");
      x[static_cast<Eigen::Index>(c)] = verts[i][c].get<double>();
      if (!std::isfinite(x[static_cast<Eigen::Index>(c)])) throw SchemaError(loc + ": non-finite coordinate");
    }
    raw.vertices.push_back(x);
  }
  const json& ents = j["entities"];
  if (!ents.is_array()) throw SchemaError("entities: expected an array");
  for (std::size_t r = 0; r < ents.size(); ++r) {
    const std::string loc = "entities[" + std::to_string(r) + "]";
    if (!ents[r].is_array()) throw SchemaError(loc + ": expected an array");
    raw.entities.emplace_back();
    for (std::size_t i = 0; i < ents[r].size(); ++i) {
      const std::string eloc = loc + "[" + std::to_string(i) + "]";
      if (!ents[r][i].is_array()) throw SchemaError(eloc + ": expected an array of ids");
      std::vector<int> ids;
      for (std::size_t b = 0; b < ents[r][i].size(); ++b) {
        if (!ents[r][i][b].is_number_integer())
          throw SchemaError(eloc + "[" + std::to_string(b) + "]: expected an integer id");
        ids.push_back(ents[r][i][b].get<int>());
      }
      raw.entities.back().push_back(ids);
    }
  }
  return raw;
}

PolytopalMesh mesh_from_json(const json& j) { return build_lattice(raw_from_json(j)); }

PolytopalMesh read_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open mesh file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) throw SchemaError(path + ": empty mesh file");
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& err) {
    throw SchemaError(path + ": invalid JSON: " + err.what());
  }
  return mesh_from_json(j);
}

void write_mesh(const PolytopalMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write mesh file '" + path + "'");
  out << mesh_to_json(mesh).dump() << '\n';
}

json diagnostics_to_json(const MeshDiagnostics& report) {
  auto finite = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
  json j;
  j["h"] = report.h;
  j["max_chunkiness"] = finite(report.max_chunkiness);
  j["eta"] = report.max_eta;
  j["faces_star_shaped"] = report.faces_star_shaped;
  j["flagged"] = report.flagged;
  j["all_pass"] = report.flagged.empty() && report.faces_star_shaped;
  j["elements"] = json::array();
  for (const auto& d : report.elements)
    j["elements"].push_back({{"id", d.element},
                             {"star_shaped", d.star_shaped},
                             {"diameter", d.diameter},
                             {"kernel_radius", d.kernel_radius},
                             {"chunkiness", finite(d.chunkiness)},
                             {"eta", d.eta},
                             {"flagged", d.flagged}});
  return j;
}

}  // namespace hmvem
