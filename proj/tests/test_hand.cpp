#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <set>

#include "crec/hand/hand_rig.hpp"
#include "crec/hand/hand_template.hpp"

using namespace crec;

TEST_CASE("builtin template has the canonical sizes") {
  const HandTemplate& t = builtin_template();
  CHECK(t.vertices.rows() == 778);
  CHECK(static_cast<int>(t.part_labels.size()) == 778);
  CHECK(t.part_centers.rows() == 18);
  CHECK(static_cast<int>(t.sub_indices.size()) == 195);
  CHECK(t.downsample_matrix.rows() == 195);
  CHECK(t.upsample_matrix.rows() == 778);
}

TEST_CASE("every part label occurs at least once") {
  const HandTemplate& t = builtin_template();
  std::set<int> seen(t.part_labels.begin(), t.part_labels.end());
  CHECK(static_cast<int>(seen.size()) == HandTemplate::kParts);
  CHECK(*seen.begin() == 0);
  CHECK(*seen.rbegin() == HandTemplate::kParts - 1);
}

TEST_CASE("adjacency matrices are symmetric with zero diagonal") {
  const HandTemplate& t = builtin_template();
  for (const Tensor* a : {&t.vertex_adjacency, &t.part_adjacency, &t.sub_adjacency}) {
    const int n = a->rows();
    for (int i = 0; i < n; ++i) {
      CHECK(a->at(i, i) == 0.0);
      for (int j = i + 1; j < n; ++j) CHECK(a->at(i, j) == a->at(j, i));
    }
  }
}

TEST_CASE("part adjacency equals the brute-force face-edge relation") {
  const HandTemplate& t = builtin_template();
  Tensor oracle({18, 18});
  for (const auto& f : t.faces)
    for (int e = 0; e < 3; ++e) {
      const int a = t.part_labels[f[e]], b = t.part_labels[f[(e + 1) % 3]];
      if (a != b) {
        oracle.at(a, b) = 1.0;
        oracle.at(b, a) = 1.0;
      }
    }
  CHECK(t.part_adjacency.v == oracle.v);
}

TEST_CASE("vertex degrees match the brute-force edge enumeration") {
  const HandTemplate& t = builtin_template();
  std::set<std::pair<int, int>> edges;
  for (const auto& f : t.faces)
    for (int e = 0; e < 3; ++e) {
      const int u = f[e], v = f[(e + 1) % 3];
      edges.insert({std::min(u, v), std::max(u, v)});
    }
  std::vector<int> deg(778, 0);
  for (const auto& [u, v] : edges) {
    ++deg[u];
    ++deg[v];
  }
  for (int i = 0; i < 778; ++i) {
    double row = 0;
    for (int j = 0; j < 778; ++j) row += t.vertex_adjacency.at(i, j);
    CHECK(static_cast<int>(row) == deg[i]);
  }
}

TEST_CASE("every part-graph node has degree >= 1") {
  const GraphSpec g = build_part_graph(builtin_template());
  CHECK(g.node_count == 18);
  for (int i = 0; i < 18; ++i) {
    double deg = 0;
    for (int j = 0; j < 18; ++j) deg += g.adjacency.at(i, j);
    CHECK(deg >= 1.0);
  }
}

TEST_CASE("sampling matrices are row-stochastic") {
  const HandTemplate& t = builtin_template();
  for (const Tensor* m : {&t.downsample_matrix, &t.upsample_matrix}) {
    const int rows = m->rows(), cols = static_cast<int>(m->v.size()) / rows;
    for (int i = 0; i < rows; ++i) {
      double s = 0;
      for (int j = 0; j < cols; ++j) {
        CHECK(m->at(i, j) >= 0.0);
        s += m->at(i, j);
      }
      CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("part centers lie inside their part's bounding box") {
  const HandTemplate& t = builtin_template();
  for (int p = 0; p < 18; ++p) {
    std::array<double, 3> lo{1e9, 1e9, 1e9}, hi{-1e9, -1e9, -1e9};
    for (int i = 0; i < 778; ++i) {
      if (t.part_labels[i] != p) continue;
      for (int k = 0; k < 3; ++k) {
        lo[k] = std::min(lo[k], t.vertices.at(i, k));
        hi[k] = std::max(hi[k], t.vertices.at(i, k));
      }
    }
    for (int k = 0; k < 3; ++k) {
      CHECK(t.part_centers.at(p, k) >= lo[k] - 1e-9);
      CHECK(t.part_centers.at(p, k) <= hi[k] + 1e-9);
    }
  }
}

TEST_CASE("down/upsampling preserves constant fields and the [0,1] range") {
  const HandTemplate& t = builtin_template();
  const Tensor c = Tensor::full({778, 2}, 0.37);
  const Tensor down = downsample_field(t, c);
  for (double v : down.v) CHECK(v == doctest::Approx(0.37).epsilon(1e-9));
  const Tensor up = upsample_field(t, down);
  for (double v : up.v) CHECK(v == doctest::Approx(0.37).epsilon(1e-9));

  Rng rng(11);
  Tensor p({778, 1});
  for (double& v : p.v) v = rng.uniform();
  const Tensor pd = downsample_field(t, p);
  for (double v : pd.v) {
    CHECK(v >= -1e-12);
    CHECK(v <= 1.0 + 1e-12);
  }
  const Tensor pu = upsample_field(t, pd);
  for (double v : pu.v) {
    CHECK(v >= -1e-12);
    CHECK(v <= 1.0 + 1e-12);
  }

  const Tensor z = downsample_field(t, Tensor({778, 3}));
  for (double v : z.v) CHECK(v == 0.0);
  CHECK_THROWS_AS(downsample_field(t, Tensor({777, 1})), DimensionError);
}

TEST_CASE("template export/load round trip") {
  const HandTemplate& t = builtin_template();
  const std::string obj = "/tmp/crec_test_template.obj", lab = "/tmp/crec_test_template.labels";
  export_template(t, obj, lab);
  const HandTemplate r = load_template_file(obj, lab);
  CHECK(r.vertices.rows() == 778);
  CHECK(r.part_labels == t.part_labels);
  CHECK(r.faces == t.faces);
  for (size_t i = 0; i < t.vertices.v.size(); ++i)
    CHECK(r.vertices.v[i] == doctest::Approx(t.vertices.v[i]).epsilon(1e-6));
  std::filesystem::remove(obj);
  std::filesystem::remove(lab);
}

TEST_CASE("wrong vertex count in an external template is a dimension error") {
  const std::string obj = "/tmp/crec_bad_template.obj", lab = "/tmp/crec_bad_template.labels";
  {
    std::FILE* f = std::fopen(obj.c_str(), "w");
    std::fprintf(f, "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n");
    std::fclose(f);
    std::FILE* g = std::fopen(lab.c_str(), "w");
    std::fprintf(g, "0\n0\n0\n");
    std::fclose(g);
  }
  CHECK_THROWS_AS(load_template_file(obj, lab), DimensionError);
  std::filesystem::remove(obj);
  std::filesystem::remove(lab);
}

TEST_CASE("posed hand is deterministic and articulation moves fingertips") {
  const HandTemplate& t = builtin_template();
  const HandRig& rig = builtin_rig();
  HandPose pose;
  const Tensor a = pose_hand(t, rig, pose);
  const Tensor b = pose_hand(t, rig, pose);
  CHECK(a.v == b.v);

  HandPose curled = pose;
  curled.joint_axis_angle[finger_joint(1, 0)] = rig.curl_axis[finger_joint(1, 0)] * 0.8;
  const Tensor c = pose_hand(t, rig, curled);
  double moved = 0;
  for (size_t i = 0; i < a.v.size(); ++i) moved = std::max(moved, std::fabs(a.v[i] - c.v[i]));
  CHECK(moved > 0.005);
}
