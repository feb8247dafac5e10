#pragma once

#include <array>
#include <string>
#include <vector>

#include "crec/contact/contact_net.hpp"
#include "crec/field/contact_field.hpp"
#include "crec/recon/decoder.hpp"
#include "crec/recon/initial.hpp"
#include "crec/synth/scene.hpp"

namespace crec {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Which contact signal conditions the reconstruction stage.
enum class ContactSource { Vertex, PartPropagated, GroundTruth, None };

const char* contact_source_name(ContactSource s);
ContactSource contact_source_from_name(const std::string& s);

// Every knob of the pipeline, serializable as one JSON document so a run is
// reproducible from its checkpoint header alone.
struct ExperimentConfig {
  struct Data {
    std::string root = "data";
    int n_train = 200;
    int n_test = 50;
    std::uint64_t base_seed = 1;
    int sdf_per_scene = 1024;
    double near_fraction = 0.95;
    GeneratorConfig generator;
  } data;

  struct Contact {
    int feature_dim = 2048;
    int base_channels = 8;
    int part_hidden = 256;
    std::array<int, 3> vertex_hidden{1024, 256, 64};
    int heads = 4;
    bool multi_level = true;  // feed part probabilities into the vertex stage
    bool part_only = false;   // train/evaluate the part branch alone
    double threshold = 0.5;
    double lambda_p = 1.0;
    double lambda_v = 0.5;
    double lambda_vs = 0.5;
    double lr = 1e-4;
    int batch = 32;
    int epochs = 200;

    ContactNetConfig net_config() const;
  } contact;

  struct Field {
    int f_pe = 7;
    int v0_res = 64;
    int v0_dim = 16;
    std::array<int, 4> dims{32, 64, 128, 128};

    FieldConfig field_config() const;
  } field;

  struct Recon {
    int visual_dim = 256;  // f0 = visual_dim + 48 articulation entries
    int decoder_width = 512;
    ContactSource contact_source = ContactSource::Vertex;
    HandSource hand_source = HandSource::Predicted;
    double hand_noise_rad = 0.05;
    bool use_hoi = true;
    double clamp_dist = 0.0;
    double lr = 1e-4;
    int batch = 8;              // scenes per optimizer step
    int epochs = 200;
    int samples_per_scene = 256;  // SDF samples drawn per scene per step
    int grid_res = 48;            // marching-cubes resolution at evaluation
    int eval_scenes = 8;          // held-out subset scored each epoch
    int eval_samples = 2000;      // surface samples for chamfer/F-score

    InitialConfig initial_config() const;
  } recon;

  std::uint64_t seed = 0;
  std::string out_dir = "runs/default";

  DecoderConfig decoder_config() const;  // couples field dims and f0
};

// Paper-scale defaults (the struct initializers above).
ExperimentConfig default_config();
// Small preset sized for single-core smoke training runs.
ExperimentConfig desk_config();
ExperimentConfig preset_config(const std::string& name);  // "paper" | "desk"

std::string config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);
void save_config_file(const ExperimentConfig& cfg, const std::string& path);

// Each override is "dotted.key=value"; values parse as JSON (so arrays and
// strings work) with a bare-word fallback. Unknown keys throw ConfigError.
ExperimentConfig apply_overrides(const ExperimentConfig& cfg,
                                 const std::vector<std::string>& overrides);

// FNV-1a over the canonical JSON dump; stable across runs.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace crec
