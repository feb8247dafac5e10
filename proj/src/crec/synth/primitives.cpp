#include "crec/synth/primitives.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace crec {

void PrimitiveObject::validate() const {
  if (kind == Kind::Union) {
    if (children.size() != 2) throw std::runtime_error("primitive union: needs exactly 2 children");
    for (const auto& c : children) c.validate();
  } else {
    const int ndims = kind == Kind::Sphere ? 1 : (kind == Kind::Box ? 3 : 2);
    const double d[3] = {dims.x, dims.y, dims.z};
    for (int i = 0; i < ndims; ++i)
      if (d[i] <= 0) throw std::runtime_error("primitive: nonpositive dimension");
  }
  const Mat3& r = pose.rot;
  const Mat3 should_be_id = r * r.transposed();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double want = i == j ? 1.0 : 0.0;
      if (std::fabs(should_be_id.m[i * 3 + j] - want) > 1e-9)
        throw std::runtime_error("primitive: rotation not orthonormal");
    }
  if (std::fabs(r.det() - 1.0) > 1e-9) throw std::runtime_error("primitive: rotation det != +1");
}

double PrimitiveObject::bounding_radius() const {
  switch (kind) {
    case Kind::Sphere: return dims.x;
    case Kind::Box: return dims.norm();
    case Kind::Cylinder: return std::hypot(dims.x, dims.y);
    case Kind::Capsule: return dims.x + dims.y;
    case Kind::Union: {
      double r = 0;
      for (const auto& c : children) r = std::max(r, c.pose.t.norm() + c.bounding_radius());
      return r;
    }
  }
  return 0;
}

double object_sdf(const PrimitiveObject& obj, const Vec3& x) {
  if (obj.kind == PrimitiveObject::Kind::Union) {
    const Vec3 p = obj.pose.inverse().apply(x);
    double d = 1e300;
    for (const auto& c : obj.children) d = std::min(d, object_sdf(c, p));
    return d;
  }
  const Vec3 p = obj.pose.inverse().apply(x);
  switch (obj.kind) {
    case PrimitiveObject::Kind::Sphere:
      return p.norm() - obj.dims.x;
    case PrimitiveObject::Kind::Box: {
      const Vec3 q{std::fabs(p.x) - obj.dims.x, std::fabs(p.y) - obj.dims.y,
                   std::fabs(p.z) - obj.dims.z};
      const Vec3 qp{std::max(q.x, 0.0), std::max(q.y, 0.0), std::max(q.z, 0.0)};
      return qp.norm() + std::min(std::max({q.x, q.y, q.z}), 0.0);
    }
    case PrimitiveObject::Kind::Cylinder: {
      const double dr = std::hypot(p.x, p.z) - obj.dims.x;
      const double dh = std::fabs(p.y) - obj.dims.y;
      const double outside = std::hypot(std::max(dr, 0.0), std::max(dh, 0.0));
      return outside + std::min(std::max(dr, dh), 0.0);
    }
    case PrimitiveObject::Kind::Capsule: {
      const double cy = std::clamp(p.y, -obj.dims.y, obj.dims.y);
      return Vec3{p.x, p.y - cy, p.z}.norm() - obj.dims.x;
    }
    default:
      return 0;
  }
}

static void append_transformed(TriMesh& dst, const TriMesh& src, const RigidTransform& tf) {
  const int base = static_cast<int>(dst.vertices.size());
  for (const auto& v : src.vertices) dst.vertices.push_back(tf.apply(v));
  for (auto f : src.faces) dst.faces.push_back({f[0] + base, f[1] + base, f[2] + base});
}

static TriMesh uv_sphere(double r, int res) {
  TriMesh m;
  const int stacks = res, slices = 2 * res;
  m.vertices.push_back({0, r, 0});
  for (int s = 1; s < stacks; ++s) {
    const double phi = M_PI * s / stacks;
    for (int l = 0; l < slices; ++l) {
      const double th = 2 * M_PI * l / slices;
      m.vertices.push_back(
          {r * std::sin(phi) * std::cos(th), r * std::cos(phi), r * std::sin(phi) * std::sin(th)});
    }
  }
  m.vertices.push_back({0, -r, 0});
  const int last = static_cast<int>(m.vertices.size()) - 1;
  auto idx = [&](int s, int l) { return 1 + (s - 1) * slices + (l % slices); };
  for (int l = 0; l < slices; ++l) m.faces.push_back({0, idx(1, l + 1), idx(1, l)});
  for (int s = 1; s < stacks - 1; ++s)
    for (int l = 0; l < slices; ++l) {
      m.faces.push_back({idx(s, l), idx(s, l + 1), idx(s + 1, l + 1)});
      m.faces.push_back({idx(s, l), idx(s + 1, l + 1), idx(s + 1, l)});
    }
  for (int l = 0; l < slices; ++l) m.faces.push_back({last, idx(stacks - 1, l), idx(stacks - 1, l + 1)});
  return m;
}

static TriMesh box_mesh(const Vec3& h) {
  TriMesh m;
  for (int i = 0; i < 8; ++i)
    m.vertices.push_back({(i & 1) ? h.x : -h.x, (i & 2) ? h.y : -h.y, (i & 4) ? h.z : -h.z});
  const int f[12][3] = {{0, 2, 3}, {0, 3, 1}, {4, 5, 7}, {4, 7, 6}, {0, 1, 5}, {0, 5, 4},
                        {2, 6, 7}, {2, 7, 3}, {0, 4, 6}, {0, 6, 2}, {1, 3, 7}, {1, 7, 5}};
  for (const auto& t : f) m.faces.push_back({t[0], t[1], t[2]});
  return m;
}

static TriMesh cylinder_mesh(double r, double hh, int res) {
  TriMesh m;
  const int n = 2 * res;
  for (int sgn = 0; sgn < 2; ++sgn) {
    const double y = sgn ? -hh : hh;
    for (int l = 0; l < n; ++l) {
      const double th = 2 * M_PI * l / n;
      m.vertices.push_back({r * std::cos(th), y, r * std::sin(th)});
    }
  }
  const int top_c = static_cast<int>(m.vertices.size());
  m.vertices.push_back({0, hh, 0});
  const int bot_c = top_c + 1;
  m.vertices.push_back({0, -hh, 0});
  for (int l = 0; l < n; ++l) {
    const int a = l, b = (l + 1) % n, c = n + (l + 1) % n, d = n + l;
    m.faces.push_back({a, b, c});
    m.faces.push_back({a, c, d});
    m.faces.push_back({top_c, b, a});
    m.faces.push_back({bot_c, d, c});
  }
  return m;
}

static TriMesh capsule_mesh(double r, double hh, int res) {
  // uv sphere split at the equator with a cylindrical mid section
  TriMesh sp = uv_sphere(r, res);
  TriMesh m;
  for (auto v : sp.vertices) {
    v.y += v.y >= 0 ? hh : -hh;
    m.vertices.push_back(v);
  }
  m.faces = sp.faces;
  // the equator ring of uv_sphere has stacks even? ensure res even for an equator ring
  return m;
}

TriMesh tessellate(const PrimitiveObject& obj, int resolution) {
  TriMesh out;
  switch (obj.kind) {
    case PrimitiveObject::Kind::Sphere:
      append_transformed(out, uv_sphere(obj.dims.x, resolution), obj.pose);
      break;
    case PrimitiveObject::Kind::Box:
      append_transformed(out, box_mesh(obj.dims), obj.pose);
      break;
    case PrimitiveObject::Kind::Cylinder:
      append_transformed(out, cylinder_mesh(obj.dims.x, obj.dims.y, resolution), obj.pose);
      break;
    case PrimitiveObject::Kind::Capsule:
      append_transformed(out, capsule_mesh(obj.dims.x, obj.dims.y, resolution % 2 ? resolution + 1 : resolution),
                         obj.pose);
      break;
    case PrimitiveObject::Kind::Union:
      for (const auto& c : obj.children) {
        TriMesh cm = tessellate(c, resolution);
        append_transformed(out, cm, obj.pose);
      }
      break;
  }
  return out;
}

std::string kind_name(PrimitiveObject::Kind k) {
  switch (k) {
    case PrimitiveObject::Kind::Sphere: return "sphere";
    case PrimitiveObject::Kind::Box: return "box";
    case PrimitiveObject::Kind::Cylinder: return "cylinder";
    case PrimitiveObject::Kind::Capsule: return "capsule";
    case PrimitiveObject::Kind::Union: return "union";
  }
  return "?";
}

PrimitiveObject::Kind kind_from_name(const std::string& s) {
  if (s == "sphere") return PrimitiveObject::Kind::Sphere;
  if (s == "box") return PrimitiveObject::Kind::Box;
  if (s == "cylinder") return PrimitiveObject::Kind::Cylinder;
  if (s == "capsule") return PrimitiveObject::Kind::Capsule;
  if (s == "union") return PrimitiveObject::Kind::Union;
  throw std::runtime_error("unknown primitive kind: " + s);
}

}  // namespace crec
