#include "crec/geom/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace crec {

static double tri_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

double TriMesh::area() const {
  double s = 0;
  for (const auto& f : faces) s += tri_area(vertices[f[0]], vertices[f[1]], vertices[f[2]]);
  return s;
}

void TriMesh::bounds(Vec3& lo, Vec3& hi) const {
  lo = {1e30, 1e30, 1e30};
  hi = {-1e30, -1e30, -1e30};
  for (const auto& v : vertices) {
    lo = {std::min(lo.x, v.x), std::min(lo.y, v.y), std::min(lo.z, v.z)};
    hi = {std::max(hi.x, v.x), std::max(hi.y, v.y), std::max(hi.z, v.z)};
  }
}

std::vector<Vec3> sample_surface(const TriMesh& mesh, int n, Rng& rng) {
  if (mesh.faces.empty()) throw std::runtime_error("sample_surface: empty mesh");
  std::vector<double> cum(mesh.faces.size());
  double total = 0;
  for (size_t i = 0; i < mesh.faces.size(); ++i) {
    const auto& f = mesh.faces[i];
    total += tri_area(mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]);
    cum[i] = total;
  }
  std::vector<Vec3> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double r = rng.uniform() * total;
    const size_t fi = std::lower_bound(cum.begin(), cum.end(), r) - cum.begin();
    const auto& f = mesh.faces[std::min(fi, mesh.faces.size() - 1)];
    double u = rng.uniform(), v = rng.uniform();
    if (u + v > 1) {
      u = 1 - u;
      v = 1 - v;
    }
    out.push_back(mesh.vertices[f[0]] * (1 - u - v) + mesh.vertices[f[1]] * u +
                  mesh.vertices[f[2]] * v);
  }
  return out;
}

static double point_triangle_dist2(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  // Ericson, Real-Time Collision Detection, closest point on triangle
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) return (p - a).norm2();
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) return (p - b).norm2();
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) {
    const double v = d1 / (d1 - d3);
    return (p - (a + ab * v)).norm2();
  }
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) return (p - c).norm2();
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) {
    const double w = d2 / (d2 - d6);
    return (p - (a + ac * w)).norm2();
  }
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return (p - (b + (c - b) * w)).norm2();
  }
  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom, w = vc * denom;
  return (p - (a + ab * v + ac * w)).norm2();
}

double point_mesh_distance(const Vec3& p, const TriMesh& mesh) {
  double best = 1e300;
  for (const auto& f : mesh.faces)
    best = std::min(best,
                    point_triangle_dist2(p, mesh.vertices[f[0]], mesh.vertices[f[1]],
                                         mesh.vertices[f[2]]));
  return std::sqrt(best);
}

double winding_number(const Vec3& p, const TriMesh& mesh) {
  // sum of signed solid angles / 4pi (van Oosterom & Strackee)
  double w = 0;
  for (const auto& f : mesh.faces) {
    const Vec3 a = mesh.vertices[f[0]] - p, b = mesh.vertices[f[1]] - p,
               c = mesh.vertices[f[2]] - p;
    const double la = a.norm(), lb = b.norm(), lc = c.norm();
    const double num = a.dot(b.cross(c));
    const double den = la * lb * lc + a.dot(b) * lc + b.dot(c) * la + c.dot(a) * lb;
    w += 2.0 * std::atan2(num, den);
  }
  return w / (4.0 * M_PI);
}

bool is_watertight(const TriMesh& mesh) {
  std::map<std::pair<int, int>, int> edge_count;
  for (const auto& f : mesh.faces)
    for (int e = 0; e < 3; ++e) {
      int u = f[e], v = f[(e + 1) % 3];
      if (u > v) std::swap(u, v);
      ++edge_count[{u, v}];
    }
  for (const auto& [e, c] : edge_count)
    if (c != 2) return false;
  return !mesh.faces.empty();
}

void save_obj(const TriMesh& mesh, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("save_obj: cannot open " + path);
  f.precision(9);
  for (const auto& v : mesh.vertices) f << "v " << v.x << " " << v.y << " " << v.z << "\n";
  for (const auto& t : mesh.faces)
    f << "f " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
}

TriMesh load_obj(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("load_obj: cannot open " + path);
  TriMesh m;
  std::string line;
  while (std::getline(f, line)) {
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "v") {
      Vec3 v;
      if (!(ss >> v.x >> v.y >> v.z)) throw std::runtime_error("load_obj: malformed vertex line");
      m.vertices.push_back(v);
    } else if (tag == "f") {
      std::array<int, 3> tri{};
      for (int i = 0; i < 3; ++i) {
        std::string tok;
        if (!(ss >> tok)) throw std::runtime_error("load_obj: malformed face line");
        tri[i] = std::stoi(tok.substr(0, tok.find('/'))) - 1;
        if (tri[i] < 0) throw std::runtime_error("load_obj: face index out of range");
      }
      m.faces.push_back(tri);
    }
  }
  for (const auto& t : m.faces)
    for (int i : t)
      if (i >= static_cast<int>(m.vertices.size()))
        throw std::runtime_error("load_obj: face index out of range");
  return m;
}

void save_ply(const TriMesh& mesh, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("save_ply: cannot open " + path);
  f << "ply\nformat ascii 1.0\nelement vertex " << mesh.vertices.size()
    << "\nproperty float x\nproperty float y\nproperty float z\nelement face " << mesh.faces.size()
    << "\nproperty list uchar int vertex_indices\nend_header\n";
  f.precision(9);
  for (const auto& v : mesh.vertices) f << v.x << " " << v.y << " " << v.z << "\n";
  for (const auto& t : mesh.faces) f << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
}

}  // namespace crec
