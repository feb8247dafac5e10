#include "crec/harness/train_contact.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <ostream>

#include "json.hpp"

#include "crec/io/array_io.hpp"
#include "crec/synth/render.hpp"

namespace crec {

namespace fs = std::filesystem;
using nlohmann::json;

ContactModel::ContactModel(const ExperimentConfig& cfg_in) : cfg(cfg_in) {
  Rng rng(cfg.seed * 0x9e3779b97f4a7c15ULL + 1);
  net = ContactEstimator(ps, cfg.contact.net_config(), rng);
}

ContactModel load_contact_model(const std::string& checkpoint_path) {
  const CheckpointMeta meta = peek_checkpoint(checkpoint_path);
  ContactModel model(config_from_json(meta.config_json));
  load_checkpoint(checkpoint_path, model.ps);
  return model;
}

std::vector<ContactSceneRef> load_contact_split(const std::string& root, const std::string& split) {
  const Manifest manifest = load_manifest(root);
  const HandTemplate& tpl = builtin_template();
  std::vector<ContactSceneRef> out;
  for (const ManifestEntry& e : manifest.split(split)) {
    ContactSceneRef ref;
    ref.dir = (fs::path(root) / e.dir).string();
    std::ifstream in(fs::path(ref.dir) / "contacts.json");
    if (!in) throw DatasetError("missing contacts.json in " + ref.dir);
    const json cj = json::parse(in);
    ref.gt_vertex.assign(HandTemplate::kVertices, false);
    for (int i : cj.at("contact_vertices")) ref.gt_vertex.at(i) = true;
    ref.gt_part.clear();
    for (int b : cj.at("part_mask")) ref.gt_part.push_back(b != 0);
    if (ref.gt_part.size() != HandTemplate::kParts)
      throw DatasetError("bad part mask in " + ref.dir);
    ref.gt_sub = submesh_gt(ref.gt_vertex, tpl);
    out.push_back(std::move(ref));
  }
  return out;
}

Tensor load_scene_image(const ContactSceneRef& ref) {
  Tensor img = load_array((fs::path(ref.dir) / "image.npy").string());
  require_shape(img, {3, kImageSize, kImageSize}, "scene image");
  return img;
}

FrequencyWeights frequency_weights_from_split(const std::vector<ContactSceneRef>& train,
                                              std::ostream& log) {
  if (train.empty()) throw TrainingError("frequency weights: empty training split");
  Tensor fp({HandTemplate::kParts}), fs_({HandTemplate::kSubVertices}),
      fv({HandTemplate::kVertices});
  for (const ContactSceneRef& s : train) {
    for (int i = 0; i < HandTemplate::kParts; ++i) fp.at(i) += s.gt_part[i];
    for (int i = 0; i < HandTemplate::kSubVertices; ++i) fs_.at(i) += s.gt_sub[i];
    for (int i = 0; i < HandTemplate::kVertices; ++i) fv.at(i) += s.gt_vertex[i];
  }
  const double inv = 1.0 / static_cast<double>(train.size());
  for (double& x : fp.v) x *= inv;
  for (double& x : fs_.v) x *= inv;
  for (double& x : fv.v) x *= inv;
  try {
    return {contact_frequency_weights(fp), contact_frequency_weights(fs_),
            contact_frequency_weights(fv)};
  } catch (const DegenerateFrequencies& e) {
    log << "frequency weights degenerate (" << e.what() << "); using uniform\n";
    return FrequencyWeights::uniform();
  }
}

ContactEvalResult evaluate_contact(const ContactModel& model,
                                   const std::vector<ContactSceneRef>& scenes) {
  if (scenes.empty()) throw TrainingError("evaluate_contact: empty split");
  const double tau = model.cfg.contact.threshold;
  const bool part_only = model.cfg.contact.part_only;
  std::vector<bool> pred_part, gt_part, pred_vertex, gt_vertex;
  // ParamStore::use is non-const by design; evaluation does not step it
  nn::ParamStore& ps = const_cast<nn::ParamStore&>(model.ps);
  for (const ContactSceneRef& s : scenes) {
    const Tensor img = load_scene_image(s);
    if (part_only) {
      const ad::Var f = model.net.image_feature(ps, img);
      const Tensor cp = model.net.part_probs(ps, f)->val;
      const std::vector<bool> pp = threshold_contacts(cp, tau);
      pred_part.insert(pred_part.end(), pp.begin(), pp.end());
      gt_part.insert(gt_part.end(), s.gt_part.begin(), s.gt_part.end());
      continue;
    }
    const ContactState st = model.net.predict(ps, img, model.cfg.contact.multi_level);
    const std::vector<bool> pp = threshold_contacts(st.c_part, tau);
    const std::vector<bool> pv = threshold_contacts(st.c_vertex, tau);
    pred_part.insert(pred_part.end(), pp.begin(), pp.end());
    gt_part.insert(gt_part.end(), s.gt_part.begin(), s.gt_part.end());
    pred_vertex.insert(pred_vertex.end(), pv.begin(), pv.end());
    gt_vertex.insert(gt_vertex.end(), s.gt_vertex.begin(), s.gt_vertex.end());
  }
  ContactEvalResult out;
  out.part = contact_prf(pred_part, gt_part);
  if (!part_only) out.vertex = contact_prf(pred_vertex, gt_vertex);
  return out;
}

double best_constant_part_f1(const std::vector<ContactSceneRef>& scenes) {
  std::vector<bool> gt;
  for (const ContactSceneRef& s : scenes)
    gt.insert(gt.end(), s.gt_part.begin(), s.gt_part.end());
  const double f1_all = contact_prf(std::vector<bool>(gt.size(), true), gt).f1;
  const double f1_none = contact_prf(std::vector<bool>(gt.size(), false), gt).f1;
  return std::max(f1_all, f1_none);
}

TrainContactResult train_contact(const ExperimentConfig& cfg, std::ostream& log) {
  const std::vector<ContactSceneRef> train = load_contact_split(cfg.data.root, "train");
  const std::vector<ContactSceneRef> test = load_contact_split(cfg.data.root, "test");
  if (train.empty()) throw TrainingError("train_contact: empty training split");
  const FrequencyWeights weights = frequency_weights_from_split(train, log);

  ContactModel model(cfg);
  fs::create_directories(cfg.out_dir);
  TrainContactResult result;
  result.best_checkpoint = (fs::path(cfg.out_dir) / "contact_best.ckpt").string();
  result.last_checkpoint = (fs::path(cfg.out_dir) / "contact_last.ckpt").string();

  CheckpointMeta meta;
  meta.config_json = config_to_json(cfg);
  meta.rng_seed = cfg.seed;
  meta.best_metric_name = cfg.contact.part_only ? "part_f1" : "vertex_f1";

  log << "train_contact: " << train.size() << " train / " << test.size()
      << " test scenes, params=" << model.ps.total_size() << ", hash=" << config_hash(cfg) << "\n";

  if (cfg.contact.epochs <= 0) {
    save_checkpoint(result.last_checkpoint, model.ps, meta);
    save_checkpoint(result.best_checkpoint, model.ps, meta);
    log << "train_contact: 0 epochs requested, wrote initial checkpoint\n";
    return result;
  }

  Rng order_rng(cfg.seed * 0x9e3779b97f4a7c15ULL + 2);
  std::vector<int> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  const int batch = std::max(1, cfg.contact.batch);

  for (int epoch = 0; epoch < cfg.contact.epochs; ++epoch) {
    for (int i = static_cast<int>(order.size()) - 1; i > 0; --i)
      std::swap(order[i], order[order_rng.uniform_int(i + 1)]);

    double epoch_loss = 0;
    int in_batch = 0;
    model.ps.zero_grad();
    for (size_t step = 0; step < order.size(); ++step) {
      const ContactSceneRef& s = train[order[step]];
      const Tensor img = load_scene_image(s);
      const ad::Var f = model.net.image_feature(model.ps, img);
      ad::Var loss;
      if (cfg.contact.part_only) {
        const ad::Var c_part = model.net.part_probs(model.ps, f);
        loss = ad::scale(weighted_bce(c_part, s.gt_part, weights.w_part), cfg.contact.lambda_p);
      } else {
        const ad::Var c_part = model.net.part_probs(model.ps, f);
        const ad::Var part_in =
            cfg.contact.multi_level ? c_part
                                    : ad::constant(Tensor({HandTemplate::kParts, 1}));
        const auto [c_sub, c_vertex] = model.net.vertex_probs(model.ps, f, part_in);
        loss = contact_loss(c_part, c_sub, c_vertex, s.gt_part, s.gt_sub, s.gt_vertex, weights,
                            cfg.contact.lambda_p, cfg.contact.lambda_v, cfg.contact.lambda_vs)
                   .total;
      }
      const double lv = loss->val.at(0);
      if (!std::isfinite(lv)) {
        log << "train_contact: non-finite loss at epoch " << epoch << " scene " << s.dir
            << "; params finite=" << model.ps.all_finite() << "\n";
        throw TrainingError("train_contact: loss diverged (non-finite) at epoch " +
                            std::to_string(epoch));
      }
      epoch_loss += lv;
      ad::backward(ad::scale(loss, 1.0 / batch));
      if (++in_batch == batch || step + 1 == order.size()) {
        model.ps.adam_step(cfg.contact.lr);
        model.ps.zero_grad();
        in_batch = 0;
      }
    }
    epoch_loss /= static_cast<double>(train.size());

    ContactEpochLog el;
    el.epoch = epoch;
    el.loss = epoch_loss;
    el.eval = evaluate_contact(model, test.empty() ? train : test);
    const double f1 = cfg.contact.part_only ? el.eval.part.f1 : el.eval.vertex.f1;
    result.epochs.push_back(el);
    log << "epoch " << epoch << " loss=" << epoch_loss << " part P/R/F1=" << el.eval.part.precision
        << "/" << el.eval.part.recall << "/" << el.eval.part.f1;
    if (!cfg.contact.part_only)
      log << " vertex P/R/F1=" << el.eval.vertex.precision << "/" << el.eval.vertex.recall << "/"
          << el.eval.vertex.f1;
    log << "\n";

    meta.epoch = epoch;
    if (f1 >= result.best_f1 || result.best_epoch < 0) {
      result.best_f1 = f1;
      result.best_epoch = epoch;
      meta.best_metric = f1;
      save_checkpoint(result.best_checkpoint, model.ps, meta);
    }
    save_checkpoint(result.last_checkpoint, model.ps, meta);
  }
  log << "train_contact: best " << meta.best_metric_name << "=" << result.best_f1 << " at epoch "
      << result.best_epoch << "\n";
  return result;
}

}  // namespace crec
