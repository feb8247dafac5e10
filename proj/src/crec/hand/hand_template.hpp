#pragma once

#include <array>
#include <string>
#include <vector>

#include "crec/core/tensor.hpp"
#include "crec/geom/mesh.hpp"

namespace crec {

// Undirected graph over hand regions; adjacency is a dense 0/1 matrix with
// zero diagonal.
struct GraphSpec {
  int node_count = 0;
  Tensor adjacency;       // [n,n]
  Tensor node_positions;  // [n,3]
};

// Canonical 778-vertex hand mesh with an 18-part decomposition, the mesh
// graphs and the 778<->195 sampling operators. Immutable after construction.
struct HandTemplate {
  static constexpr int kVertices = 778;
  static constexpr int kParts = 18;
  static constexpr int kSubVertices = 195;

  Tensor vertices;              // [778,3] canonical pose, meters
  std::vector<std::array<int, 3>> faces;
  std::vector<int> part_labels;  // 778, values in [0,18)
  Tensor part_centers;           // [18,3]
  Tensor vertex_adjacency;       // [778,778] 0/1
  Tensor part_adjacency;         // [18,18] 0/1
  Tensor downsample_matrix;      // [195,778] row-stochastic
  Tensor upsample_matrix;        // [778,195] row-stochastic
  int joint_count = 0;

  std::vector<int> sub_indices;  // 195 vertex ids of the sub-mesh nodes
  Tensor sub_adjacency;          // [195,195] induced sub-mesh graph

  TriMesh mesh() const;
};

// Part ids of the builtin decomposition.
enum HandPart : int {
  kBackOfHand = 0,
  kPalmCenter = 1,
  kThenar = 2,
  kHypothenar = 3,
  // per-finger segments follow; fingertips are their own parts
};

// Deterministic procedural template (capsule-per-bone hand).
const HandTemplate& builtin_template();

// OBJ geometry plus a sidecar file with one part label per line.
HandTemplate load_template_file(const std::string& obj_path, const std::string& labels_path);
void export_template(const HandTemplate& t, const std::string& obj_path,
                     const std::string& labels_path);

GraphSpec build_part_graph(const HandTemplate& t);
GraphSpec build_vertex_graph(const HandTemplate& t);
GraphSpec build_submesh_graph(const HandTemplate& t);

// field: [778,k] -> [195,k]
Tensor downsample_field(const HandTemplate& t, const Tensor& field);
// field: [195,k] -> [778,k]
Tensor upsample_field(const HandTemplate& t, const Tensor& field);

}  // namespace crec
