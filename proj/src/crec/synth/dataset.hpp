#pragma once

#include <string>
#include <vector>

#include "crec/synth/scene.hpp"

namespace crec {

struct DatasetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A scene as stored on disk: the generated scene plus its rendered image and
// SDF training samples.
struct StoredScene {
  GraspScene scene;
  Tensor image;  // [3,224,224]
  std::vector<SdfSample> sdf;
};

struct ManifestEntry {
  std::string dir;  // relative to the dataset root
  std::uint64_t seed = 0;
  std::string split;  // "train" | "test"
};

struct Manifest {
  std::vector<ManifestEntry> entries;

  std::vector<ManifestEntry> split(const std::string& name) const;
};

// Layout per scene directory: image.npy (f32 [3,224,224]), scene.json,
// contacts.json, sdf.npy (f8 [N,4] = x,y,z,s in the normalized frame).
void write_scene(const std::string& dir, const GraspScene& scene, const RenderedImage& image,
                 const std::vector<SdfSample>& sdf);
StoredScene read_scene(const std::string& dir);

// Generates n_train + n_test scenes under root (scenes/000000, ...) and writes
// manifest.json. Test scenes use a disjoint seed block, so their randomly
// drawn object instances are unseen at train time. Returns the manifest.
Manifest generate_dataset(const std::string& root, int n_train, int n_test,
                          std::uint64_t base_seed, const GeneratorConfig& config = {},
                          int sdf_per_scene = 1024, double near_fraction = 0.95);

void save_manifest(const Manifest& m, const std::string& root);
Manifest load_manifest(const std::string& root);

}  // namespace crec
