#pragma once

#include <iosfwd>

#include "crec/harness/train_recon.hpp"

namespace crec {

// Full-pipeline output for one scene, written as OBJ (world meters) plus a
// JSON report carrying the empty-mesh flag and the config hash.
struct ReconstructReport {
  std::string mesh_path;
  std::string report_path;
  bool empty_mesh = false;
  double chamfer_mm = 0;  // against the stored ground truth object
};

ReconstructReport reconstruct_to_files(ReconModel& model, const ContactModel* contact,
                                       const StoredScene& scene, const std::string& out_prefix);

struct SceneEvalRecord {
  std::string scene_dir;
  bool ok = false;
  bool empty_mesh = false;
  std::string error;
  ContactMetrics contact_part, contact_vertex;
  ReconMetrics recon;
  std::string config_hash;
};

struct EvaluateSummary {
  std::vector<SceneEvalRecord> records;
  int n_failed = 0;
  bool has_contact = false;
  ContactMetrics mean_part, mean_vertex;  // micro-averaged over scenes
  ReconMetrics mean_recon;                // mean over successful scenes
};

// Means over successes plus a failure count. Throws ConfigError when records
// carry different config hashes (reports from different runs do not mix).
EvaluateSummary aggregate_records(std::vector<SceneEvalRecord> records, bool has_contact);

// Batch reconstruct + metrics over a dataset split. contact may be null; then
// contact metrics are skipped. max_scenes < 0 means the whole split.
EvaluateSummary evaluate_split(ReconModel& model, const ContactModel* contact,
                               const std::string& split, std::ostream& log, int max_scenes = -1);

// report.csv (one row per scene) and report.json (records + aggregate).
void write_eval_reports(const EvaluateSummary& summary, const std::string& out_dir);

// One arm of the ablation matrix: the config delta, its training run and its
// held-out evaluation.
struct AblationRow {
  std::string name;
  ExperimentConfig cfg;
  double best_chamfer_mm = 0;
  EvaluateSummary eval;
};

// Contact-source x L_hoi matrix trained under the base config's budget:
// unconditioned baseline, vertex without/with the hand-object term, and the
// part-propagated / ground-truth contact sources.
std::vector<AblationRow> run_ablation(const ExperimentConfig& base,
                                      const std::string& contact_checkpoint, std::ostream& log);

void write_ablation_table(const std::vector<AblationRow>& rows, const std::string& out_dir);

}  // namespace crec
