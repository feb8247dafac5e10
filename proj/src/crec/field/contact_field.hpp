#pragma once

#include <array>
#include <unordered_map>

#include "crec/core/nn.hpp"

namespace crec {

// Contact probabilities anchored to hand-surface points, diffused into a
// multi-resolution sparse voxel pyramid, and served as continuous trilinear
// feature queries over the normalized cube [-1,1]^3.

struct FieldConfig {
  int f_pe = 7;  // encoding frequencies; d_pe = 2*f_pe + 1
  int v0_res = 64;
  int v0_dim = 16;
  std::array<int, 4> dims{32, 64, 128, 128};
  int expected_feature_dim = 352;

  int d_pe() const { return 2 * f_pe + 1; }
  int feature_dim() const { return dims[0] + dims[1] + dims[2] + dims[3]; }
};

struct FieldParams {
  FieldConfig cfg;
  nn::Linear lift;                  // d_pe -> v0_dim, pointwise
  std::array<nn::Linear, 4> conv;   // 3x3x3 sparse conv, [27*c_in] -> dims[i]
  std::array<nn::Linear, 4> down;   // stride-2 2x2x2 conv, [8*dims[i]] -> dims[i]

  FieldParams() = default;
  FieldParams(nn::ParamStore& ps, const FieldConfig& cfg, Rng& rng);
};

// concat(c, sin(2^k pi c), cos(2^k pi c)), k = 0..f_pe-1
Tensor positional_encode(double c, int f_pe = 7);

struct StructuredContactCodes {
  Tensor anchors;  // [778,3] normalized wrist frame
  Tensor codes;    // [778, d_pe]
};

struct NormalizationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Per-vertex positional encoding at the vertex's normalized position.
// Throws NormalizationError when any vertex leaves [-1,1]^3.
StructuredContactCodes anchor_codes(const Tensor& c_vertex, const Tensor& vertices_normalized,
                                    int f_pe = 7);

// Occupied cells of one resolution level; absent cells are exact zeros.
struct SparseGridData {
  int res = 0;
  int channels = 0;
  std::vector<std::array<int, 3>> coords;
  std::unordered_map<std::int64_t, int> cell_index;
  ad::Var codes;  // [n_occupied, channels]

  static std::int64_t key(int i, int j, int k) {
    return (static_cast<std::int64_t>(i) << 40) | (static_cast<std::int64_t>(j) << 20) | k;
  }
  int row(int i, int j, int k) const {
    auto it = cell_index.find(key(i, j, k));
    return it == cell_index.end() ? -1 : it->second;
  }
};

struct ContactVolumePyramid {
  FieldConfig cfg;
  SparseGridData v0;                      // 64^3 x 16
  std::array<SparseGridData, 4> levels;   // 32^3x32, 16^3x64, 8^3x128, 4^3x128
};

// Averages anchors per containing voxel and lifts d_pe -> v0_dim.
SparseGridData voxelize_codes(nn::ParamStore& ps, const FieldParams& params,
                              const StructuredContactCodes& codes);

// Per level: sparse 3x3x3 conv over the 1-dilated occupancy + ReLU, then
// stride-2 downsampling. Unoccupied cells stay exactly zero.
ContactVolumePyramid diffuse(nn::ParamStore& ps, const FieldParams& params,
                             const SparseGridData& v0);

// Trilinear interpolation per level, concatenated: [m,3] -> [m, 352].
// Points clamp to [-1,1]^3; unoccupied corners contribute exact zeros.
ad::Var query_contact_feature(const ContactVolumePyramid& pyramid, const Tensor& points);

// Level cache (occupancy index list + code payload) for reuse across epochs.
void save_pyramid(const ContactVolumePyramid& pyramid, const std::string& path_prefix);
ContactVolumePyramid load_pyramid(const FieldConfig& cfg, const std::string& path_prefix);

}  // namespace crec
