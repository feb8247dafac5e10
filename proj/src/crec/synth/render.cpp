#include "crec/synth/render.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace crec {

namespace {

struct ZBuffer {
  std::vector<double> z;
  std::vector<int> owner;  // -1 empty, 0 hand, 1 object
  ZBuffer() : z(kImageSize * kImageSize, 1e30), owner(kImageSize * kImageSize, -1) {}
};

void raster_mesh(const TriMesh& mesh, const Camera& cam, int id, ZBuffer& zb, bool* any_in_front) {
  for (const auto& f : mesh.faces) {
    Vec3 c[3];
    bool behind = false;
    for (int i = 0; i < 3; ++i) {
      c[i] = cam.world_to_cam.apply(mesh.vertices[f[i]]);
      if (c[i].z <= cam.z_near * 0.5) behind = true;
    }
    if (behind) continue;
    *any_in_front = true;
    double px[3], py[3];
    for (int i = 0; i < 3; ++i) {
      px[i] = cam.fx * c[i].x / c[i].z + cam.cx;
      py[i] = cam.fy * c[i].y / c[i].z + cam.cy;
    }
    const int x0 = std::max(0, static_cast<int>(std::floor(std::min({px[0], px[1], px[2]}))));
    const int x1 = std::min(kImageSize - 1, static_cast<int>(std::ceil(std::max({px[0], px[1], px[2]}))));
    const int y0 = std::max(0, static_cast<int>(std::floor(std::min({py[0], py[1], py[2]}))));
    const int y1 = std::min(kImageSize - 1, static_cast<int>(std::ceil(std::max({py[0], py[1], py[2]}))));
    if (x0 > x1 || y0 > y1) continue;
    const double ax = px[1] - px[0], ay = py[1] - py[0];
    const double bx = px[2] - px[0], by = py[2] - py[0];
    const double det = ax * by - ay * bx;
    if (std::fabs(det) < 1e-12) continue;
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        const double ex = x + 0.5 - px[0], ey = y + 0.5 - py[0];
        const double u = (ex * by - ey * bx) / det;
        const double v = (ax * ey - ay * ex) / det;
        if (u < 0 || v < 0 || u + v > 1) continue;
        // perspective-correct depth via interpolated 1/z
        const double iz = (1 - u - v) / c[0].z + u / c[1].z + v / c[2].z;
        const double z = 1.0 / iz;
        const int pix = y * kImageSize + x;
        if (z < zb.z[pix]) {
          zb.z[pix] = z;
          zb.owner[pix] = id;
        }
      }
  }
}

}  // namespace

RenderedImage render_scene(const TriMesh& hand, const TriMesh& object, const Camera& cam) {
  ZBuffer zb;
  bool hand_vis = false, obj_vis = false;
  raster_mesh(hand, cam, 0, zb, &hand_vis);
  if (!object.faces.empty()) raster_mesh(object, cam, 1, zb, &obj_vis);
  if (!hand_vis && !object.faces.empty() && !obj_vis)
    throw RenderError("render: scene entirely behind the camera");

  RenderedImage img;
  const double iz_near = 1.0 / cam.z_near, iz_far = 1.0 / cam.z_far;
  for (int p = 0; p < kImageSize * kImageSize; ++p) {
    const int own = zb.owner[p];
    if (own < 0) continue;
    img.channels.v[own * kImageSize * kImageSize + p] = 1.0;
    const double iz = 1.0 / zb.z[p];
    img.channels.v[2 * kImageSize * kImageSize + p] =
        std::clamp((iz - iz_far) / (iz_near - iz_far), 0.0, 1.0);
  }
  return img;
}

}  // namespace crec
