#include "crec/field/contact_field.hpp"

#include <algorithm>
#include <cmath>

#include "crec/io/array_io.hpp"

namespace crec {

namespace {

int voxel_of(double x, int res) {
  const int i = static_cast<int>(std::floor((x + 1.0) * 0.5 * res));
  return std::clamp(i, 0, res - 1);
}

void index_cells(SparseGridData& g) {
  std::sort(g.coords.begin(), g.coords.end());
  g.cell_index.clear();
  for (int r = 0; r < static_cast<int>(g.coords.size()); ++r)
    g.cell_index[SparseGridData::key(g.coords[r][0], g.coords[r][1], g.coords[r][2])] = r;
}

}  // namespace

FieldParams::FieldParams(nn::ParamStore& ps, const FieldConfig& c, Rng& rng) : cfg(c) {
  if (cfg.feature_dim() != cfg.expected_feature_dim)
    throw DimensionError("field: level dims sum to " + std::to_string(cfg.feature_dim()) +
                         ", expected " + std::to_string(cfg.expected_feature_dim));
  lift = nn::Linear(ps, "field.lift", cfg.d_pe(), cfg.v0_dim, rng);
  int c_in = cfg.v0_dim;
  for (int i = 0; i < 4; ++i) {
    conv[i] = nn::Linear(ps, "field.conv" + std::to_string(i), 27 * c_in, cfg.dims[i], rng);
    down[i] = nn::Linear(ps, "field.down" + std::to_string(i), 8 * cfg.dims[i], cfg.dims[i], rng);
    c_in = cfg.dims[i];
  }
}

Tensor positional_encode(double c, int f_pe) {
  Tensor out({2 * f_pe + 1});
  out.at(0) = c;
  for (int k = 0; k < f_pe; ++k) {
    const double arg = std::pow(2.0, k) * M_PI * c;
    out.at(1 + 2 * k) = std::sin(arg);
    out.at(2 + 2 * k) = std::cos(arg);
  }
  return out;
}

StructuredContactCodes anchor_codes(const Tensor& c_vertex, const Tensor& vertices_normalized,
                                    int f_pe) {
  const int n = vertices_normalized.rows();
  require_shape(c_vertex, {n}, "anchor_codes contacts");
  require_shape(vertices_normalized, {n, 3}, "anchor_codes positions");
  for (double v : vertices_normalized.v)
    if (std::fabs(v) > 1.0 + 1e-12)
      throw NormalizationError("anchor_codes: vertex outside [-1,1]^3 (bad wrist frame)");
  StructuredContactCodes out;
  out.anchors = vertices_normalized;
  out.codes = Tensor({n, 2 * f_pe + 1});
  for (int i = 0; i < n; ++i) {
    const Tensor e = positional_encode(c_vertex.at(i), f_pe);
    for (int k = 0; k < e.size(); ++k) out.codes.at(i, k) = e.at(k);
  }
  return out;
}

SparseGridData voxelize_codes(nn::ParamStore& ps, const FieldParams& params,
                              const StructuredContactCodes& codes) {
  const FieldConfig& cfg = params.cfg;
  require_shape(codes.codes, {codes.anchors.rows(), cfg.d_pe()}, "voxelize codes");
  SparseGridData g;
  g.res = cfg.v0_res;
  g.channels = cfg.v0_dim;
  for (int i = 0; i < codes.anchors.rows(); ++i) {
    const std::array<int, 3> c{voxel_of(codes.anchors.at(i, 0), g.res),
                               voxel_of(codes.anchors.at(i, 1), g.res),
                               voxel_of(codes.anchors.at(i, 2), g.res)};
    if (g.cell_index.emplace(SparseGridData::key(c[0], c[1], c[2]), 0).second)
      g.coords.push_back(c);
  }
  index_cells(g);

  const int n = static_cast<int>(g.coords.size());
  Tensor avg({n, cfg.d_pe()});
  std::vector<int> counts(n, 0);
  for (int i = 0; i < codes.anchors.rows(); ++i) {
    const int r = g.row(voxel_of(codes.anchors.at(i, 0), g.res),
                        voxel_of(codes.anchors.at(i, 1), g.res),
                        voxel_of(codes.anchors.at(i, 2), g.res));
    ++counts[r];
    for (int k = 0; k < cfg.d_pe(); ++k) avg.at(r, k) += codes.codes.at(i, k);
  }
  for (int r = 0; r < n; ++r)
    for (int k = 0; k < cfg.d_pe(); ++k) avg.at(r, k) /= counts[r];

  g.codes = params.lift(ps, ad::constant(avg));
  return g;
}

ContactVolumePyramid diffuse(nn::ParamStore& ps, const FieldParams& params,
                             const SparseGridData& v0) {
  ContactVolumePyramid pyr;
  pyr.cfg = params.cfg;
  pyr.v0 = v0;

  const SparseGridData* in = &pyr.v0;
  for (int level = 0; level < 4; ++level) {
    // 1-voxel dilation of the input occupancy
    SparseGridData dil;
    dil.res = in->res;
    dil.channels = params.cfg.dims[level];
    for (const auto& c : in->coords)
      for (int di = -1; di <= 1; ++di)
        for (int dj = -1; dj <= 1; ++dj)
          for (int dk = -1; dk <= 1; ++dk) {
            const int i = c[0] + di, j = c[1] + dj, k = c[2] + dk;
            if (i < 0 || j < 0 || k < 0 || i >= dil.res || j >= dil.res || k >= dil.res) continue;
            if (dil.cell_index.emplace(SparseGridData::key(i, j, k), 0).second)
              dil.coords.push_back({i, j, k});
          }
    index_cells(dil);

    const int n_out = static_cast<int>(dil.coords.size());
    if (n_out == 0) {
      dil.codes = ad::constant(Tensor({0, dil.channels}));
      SparseGridData empty;
      empty.res = in->res / 2;
      empty.channels = dil.channels;
      empty.codes = ad::constant(Tensor({0, dil.channels}));
      pyr.levels[level] = empty;
      in = &pyr.levels[level];
      continue;
    }

    // sparse 3x3x3 conv: concat the 27 gathered neighbors, one matmul
    std::vector<ad::Var> taps;
    for (int di = -1; di <= 1; ++di)
      for (int dj = -1; dj <= 1; ++dj)
        for (int dk = -1; dk <= 1; ++dk) {
          std::vector<int> rows(n_out);
          for (int r = 0; r < n_out; ++r)
            rows[r] = in->row(dil.coords[r][0] + di, dil.coords[r][1] + dj, dil.coords[r][2] + dk);
          taps.push_back(ad::gather_rows(in->codes, std::move(rows)));
        }
    dil.codes = ad::relu(params.conv[level](ps, ad::concat_cols(taps)));

    // stride-2 downsample: parents of any occupied child
    SparseGridData out;
    out.res = dil.res / 2;
    out.channels = dil.channels;
    for (const auto& c : dil.coords) {
      const std::array<int, 3> p{c[0] / 2, c[1] / 2, c[2] / 2};
      if (out.cell_index.emplace(SparseGridData::key(p[0], p[1], p[2]), 0).second)
        out.coords.push_back(p);
    }
    index_cells(out);
    const int n2 = static_cast<int>(out.coords.size());
    std::vector<ad::Var> kids;
    for (int ti = 0; ti < 2; ++ti)
      for (int tj = 0; tj < 2; ++tj)
        for (int tk = 0; tk < 2; ++tk) {
          std::vector<int> rows(n2);
          for (int r = 0; r < n2; ++r)
            rows[r] = dil.row(2 * out.coords[r][0] + ti, 2 * out.coords[r][1] + tj,
                              2 * out.coords[r][2] + tk);
          kids.push_back(ad::gather_rows(dil.codes, std::move(rows)));
        }
    out.codes = params.down[level](ps, ad::concat_cols(kids));

    pyr.levels[level] = std::move(out);
    in = &pyr.levels[level];
  }
  return pyr;
}

ad::Var query_contact_feature(const ContactVolumePyramid& pyramid, const Tensor& points) {
  const int m = points.rows();
  require_shape(points, {m, 3}, "query points");

  std::vector<ad::Var> per_level;
  for (const SparseGridData& g : pyramid.levels) {
    const double h = 2.0 / g.res;
    if (g.coords.empty()) {
      per_level.push_back(ad::constant(Tensor({m, g.channels})));
      continue;
    }
    ad::Var acc = ad::constant(Tensor({m, g.channels}));
    // base cell + fractional offset per point
    std::vector<std::array<int, 3>> base(m);
    std::vector<std::array<double, 3>> frac(m);
    for (int p = 0; p < m; ++p)
      for (int a = 0; a < 3; ++a) {
        const double x = std::clamp(points.at(p, a), -1.0, 1.0);
        const double u = (x + 1.0) / h - 0.5;
        double fl = std::floor(u);
        base[p][a] = static_cast<int>(fl);
        frac[p][a] = u - fl;
      }
    for (int corner = 0; corner < 8; ++corner) {
      const int ci = corner & 1, cj = (corner >> 1) & 1, ck = (corner >> 2) & 1;
      std::vector<int> rows(m);
      Tensor w({m, g.channels});
      bool any = false;
      for (int p = 0; p < m; ++p) {
        const int i = base[p][0] + ci, j = base[p][1] + cj, k = base[p][2] + ck;
        const bool in_range = i >= 0 && j >= 0 && k >= 0 && i < g.res && j < g.res && k < g.res;
        rows[p] = in_range ? g.row(i, j, k) : -1;
        if (rows[p] < 0) continue;
        any = true;
        const double wp = (ci ? frac[p][0] : 1 - frac[p][0]) * (cj ? frac[p][1] : 1 - frac[p][1]) *
                          (ck ? frac[p][2] : 1 - frac[p][2]);
        for (int c = 0; c < g.channels; ++c) w.at(p, c) = wp;
      }
      if (!any) continue;
      acc = ad::add(acc, ad::mul(ad::gather_rows(g.codes, std::move(rows)), ad::constant(w)));
    }
    per_level.push_back(acc);
  }
  return ad::concat_cols(per_level);
}

void save_pyramid(const ContactVolumePyramid& pyramid, const std::string& path_prefix) {
  auto save_grid = [](const SparseGridData& g, const std::string& prefix) {
    Tensor coords({static_cast<int>(g.coords.size()), 3});
    for (int r = 0; r < coords.rows(); ++r)
      for (int a = 0; a < 3; ++a) coords.at(r, a) = g.coords[r][a];
    save_array(coords, prefix + ".coords.npy");
    Tensor meta({2}, {static_cast<double>(g.res), static_cast<double>(g.channels)});
    save_array(meta, prefix + ".meta.npy");
    save_array(g.codes->val, prefix + ".codes.npy");
  };
  save_grid(pyramid.v0, path_prefix + ".v0");
  for (int i = 0; i < 4; ++i) save_grid(pyramid.levels[i], path_prefix + ".l" + std::to_string(i));
}

ContactVolumePyramid load_pyramid(const FieldConfig& cfg, const std::string& path_prefix) {
  auto load_grid = [](const std::string& prefix) {
    SparseGridData g;
    const Tensor meta = load_array(prefix + ".meta.npy");
    g.res = static_cast<int>(meta.at(0));
    g.channels = static_cast<int>(meta.at(1));
    const Tensor coords = load_array(prefix + ".coords.npy");
    for (int r = 0; r < coords.rows(); ++r)
      g.coords.push_back({static_cast<int>(coords.at(r, 0)), static_cast<int>(coords.at(r, 1)),
                          static_cast<int>(coords.at(r, 2))});
    index_cells(g);
    g.codes = ad::constant(load_array(prefix + ".codes.npy"));
    return g;
  };
  ContactVolumePyramid pyr;
  pyr.cfg = cfg;
  pyr.v0 = load_grid(path_prefix + ".v0");
  for (int i = 0; i < 4; ++i) pyr.levels[i] = load_grid(path_prefix + ".l" + std::to_string(i));
  return pyr;
}

}  // namespace crec
