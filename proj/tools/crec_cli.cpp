#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "crec/harness/evaluate.hpp"
#include "crec/synth/dataset.hpp"

namespace fs = std::filesystem;
using namespace crec;

namespace {

struct CommonOpts {
  std::string preset = "paper";
  std::string config_file;
  std::vector<std::string> overrides;
  std::int64_t seed = -1;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--preset", o.preset, "Config preset: paper|desk")->capture_default_str();
  cmd->add_option("--config", o.config_file, "JSON config file (overrides the preset)");
  cmd->add_option("--set", o.overrides, "Config override, dotted.key=value (repeatable)");
  cmd->add_option("--seed", o.seed, "Global RNG seed (overrides the config)");
}

ExperimentConfig resolve_config(const CommonOpts& o) {
  ExperimentConfig cfg =
      o.config_file.empty() ? preset_config(o.preset) : load_config_file(o.config_file);
  cfg = apply_overrides(cfg, o.overrides);
  if (o.seed >= 0) cfg.seed = static_cast<std::uint64_t>(o.seed);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contact-guided hand-held object reconstruction pipeline"};
  app.require_subcommand(1);

  CommonOpts gen_o, tc_o, tr_o, ab_o;
  std::string tr_contact_ckpt, ab_contact_ckpt;

  CLI::App* gen = app.add_subcommand("gen-data", "Generate a synthetic grasp dataset");
  add_common(gen, gen_o);

  CLI::App* tc = app.add_subcommand("train-contact", "Train the contact estimator");
  add_common(tc, tc_o);

  CLI::App* tr = app.add_subcommand("train-recon", "Train the reconstruction stage");
  add_common(tr, tr_o);
  tr->add_option("--contact-checkpoint", tr_contact_ckpt,
                 "Trained contact checkpoint (required unless contact_source is "
                 "ground_truth or none)");

  std::string rc_ckpt, rc_scene, rc_out, rc_contact;
  CLI::App* rc = app.add_subcommand("reconstruct", "Reconstruct one scene to an OBJ mesh");
  rc->add_option("--checkpoint", rc_ckpt, "Reconstruction checkpoint")->required();
  rc->add_option("--scene", rc_scene, "Scene directory")->required();
  rc->add_option("--out", rc_out, "Output path prefix (.obj/.json appended)")->required();
  rc->add_option("--contact-checkpoint", rc_contact, "Contact checkpoint");

  std::string ev_ckpt, ev_contact, ev_split = "test", ev_out = "eval";
  int ev_max = -1;
  CLI::App* ev = app.add_subcommand("evaluate", "Evaluate a checkpoint over a dataset split");
  ev->add_option("--checkpoint", ev_ckpt, "Reconstruction checkpoint")->required();
  ev->add_option("--contact-checkpoint", ev_contact, "Contact checkpoint");
  ev->add_option("--split", ev_split, "Dataset split")->capture_default_str();
  ev->add_option("--out", ev_out, "Report output directory")->capture_default_str();
  ev->add_option("--max-scenes", ev_max, "Cap on evaluated scenes (-1 = all)");

  CLI::App* ab = app.add_subcommand("ablate", "Run the contact-source x L_hoi ablation matrix");
  add_common(ab, ab_o);
  ab->add_option("--contact-checkpoint", ab_contact_ckpt, "Contact checkpoint")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const ExperimentConfig cfg = resolve_config(gen_o);
      std::cout << "generating " << cfg.data.n_train << "+" << cfg.data.n_test << " scenes under "
                << cfg.data.root << "\n";
      generate_dataset(cfg.data.root, cfg.data.n_train, cfg.data.n_test, cfg.data.base_seed,
                       cfg.data.generator, cfg.data.sdf_per_scene, cfg.data.near_fraction);
      save_config_file(cfg, (fs::path(cfg.data.root) / "config.json").string());
      std::cout << "done\n";
    } else if (*tc) {
      train_contact(resolve_config(tc_o), std::cout);
    } else if (*tr) {
      train_recon(resolve_config(tr_o), tr_contact_ckpt, std::cout);
    } else if (*rc) {
      ReconModel model = load_recon_model(rc_ckpt);
      std::optional<ContactModel> contact;
      if (!rc_contact.empty()) contact.emplace(load_contact_model(rc_contact));
      const StoredScene scene = read_scene(rc_scene);
      const ReconstructReport rep =
          reconstruct_to_files(model, contact ? &*contact : nullptr, scene, rc_out);
      std::cout << "mesh: " << rep.mesh_path << " empty=" << rep.empty_mesh
                << " chamfer_mm=" << rep.chamfer_mm << "\n";
      return rep.empty_mesh ? 2 : 0;
    } else if (*ev) {
      ReconModel model = load_recon_model(ev_ckpt);
      std::optional<ContactModel> contact;
      if (!ev_contact.empty()) contact.emplace(load_contact_model(ev_contact));
      const EvaluateSummary s =
          evaluate_split(model, contact ? &*contact : nullptr, ev_split, std::cout, ev_max);
      write_eval_reports(s, ev_out);
      std::cout << "reports written to " << ev_out << "\n";
    } else if (*ab) {
      const ExperimentConfig cfg = resolve_config(ab_o);
      const std::vector<AblationRow> rows = run_ablation(cfg, ab_contact_ckpt, std::cout);
      write_ablation_table(rows, cfg.out_dir);
      std::cout << "ablation table written to " << cfg.out_dir << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
