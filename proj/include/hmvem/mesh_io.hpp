// Mesh files:
//
//   {"dimension": n,
//    "vertices": [[x, ...], ...],
//    "entities": [codim 0 lists, ..., codim n-1 lists]}
//
// where every codim-r list holds the ids of its codim-(r+1) boundary entities
// (vertex ids for r = n-1).

#pragma once

#include <string>

#include "hmvem/mesh.hpp"
#include "json.hpp"

namespace hmvem {

nlohmann::json mesh_to_json(const PolytopalMesh& mesh);
RawMesh raw_from_json(const nlohmann::json& j);
PolytopalMesh mesh_from_json(const nlohmann::json& j);

PolytopalMesh read_mesh(const std::string& path);
void write_mesh(const PolytopalMesh& mesh, const std::string& path);

nlohmann::json diagnostics_to_json(const MeshDiagnostics& report);

}  // namespace hmvem
