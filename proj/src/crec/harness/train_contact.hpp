#pragma once

#include <iosfwd>

#include "crec/harness/config.hpp"
#include "crec/io/checkpoint.hpp"
#include "crec/metrics/metrics.hpp"
#include "crec/synth/dataset.hpp"

namespace crec {

struct TrainingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Contact estimator plus its parameter store, built deterministically from the
// experiment seed (or restored from a checkpoint).
struct ContactModel {
  ExperimentConfig cfg;
  nn::ParamStore ps;
  ContactEstimator net;

  explicit ContactModel(const ExperimentConfig& cfg);
};

ContactModel load_contact_model(const std::string& checkpoint_path);

// In-memory training view of one stored scene: labels preloaded, image lazily
// re-read from disk so large datasets do not have to fit in memory.
struct ContactSceneRef {
  std::string dir;
  std::vector<bool> gt_part, gt_sub, gt_vertex;
};

std::vector<ContactSceneRef> load_contact_split(const std::string& root, const std::string& split);
Tensor load_scene_image(const ContactSceneRef& ref);

// Mean contact frequency per region over the training scenes, mapped through
// contact_frequency_weights. Degenerate frequencies fall back to uniform.
FrequencyWeights frequency_weights_from_split(const std::vector<ContactSceneRef>& train,
                                              std::ostream& log);

struct ContactEvalResult {
  ContactMetrics part;
  ContactMetrics vertex;  // micro-averaged over scenes
};

ContactEvalResult evaluate_contact(const ContactModel& model,
                                   const std::vector<ContactSceneRef>& scenes);

// The best constant predictor baseline: all-contact or no-contact per level,
// whichever scores higher on the same scenes.
double best_constant_part_f1(const std::vector<ContactSceneRef>& scenes);

struct ContactEpochLog {
  int epoch = 0;
  double loss = 0;
  ContactEvalResult eval;
};

struct TrainContactResult {
  std::vector<ContactEpochLog> epochs;
  int best_epoch = -1;
  double best_f1 = 0;
  std::string best_checkpoint;
  std::string last_checkpoint;
};

// Optimizes the weighted multi-level BCE on the train split and tracks F1 on
// the test split (part F1 when part_only, vertex F1 otherwise). Keeps the
// best-F1 checkpoint under cfg.out_dir. Aborts with diagnostics on NaN loss.
TrainContactResult train_contact(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace crec
