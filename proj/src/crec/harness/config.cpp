#include "crec/harness/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace crec {

using nlohmann::json;

const char* contact_source_name(ContactSource s) {
  switch (s) {
    case ContactSource::Vertex: return "vertex";
    case ContactSource::PartPropagated: return "part_propagated";
    case ContactSource::GroundTruth: return "ground_truth";
    case ContactSource::None: return "none";
  }
  throw ConfigError("contact_source_name: bad enum value");
}

ContactSource contact_source_from_name(const std::string& s) {
  if (s == "vertex") return ContactSource::Vertex;
  if (s == "part_propagated") return ContactSource::PartPropagated;
  if (s == "ground_truth") return ContactSource::GroundTruth;
  if (s == "none") return ContactSource::None;
  throw ConfigError("unknown contact source '" + s + "'");
}

ContactNetConfig ExperimentConfig::Contact::net_config() const {
  ContactNetConfig c;
  c.backbone.feature_dim = feature_dim;
  c.backbone.base_channels = base_channels;
  c.part_hidden = part_hidden;
  c.vertex_hidden = vertex_hidden;
  c.heads = heads;
  return c;
}

FieldConfig ExperimentConfig::Field::field_config() const {
  FieldConfig c;
  c.f_pe = f_pe;
  c.v0_res = v0_res;
  c.v0_dim = v0_dim;
  c.dims = dims;
  c.expected_feature_dim = dims[0] + dims[1] + dims[2] + dims[3];
  return c;
}

InitialConfig ExperimentConfig::Recon::initial_config() const {
  InitialConfig c;
  c.visual.feature_dim = visual_dim;
  return c;
}

DecoderConfig ExperimentConfig::decoder_config() const {
  DecoderConfig c;
  c.fc_dim = field.field_config().feature_dim();
  c.f0_dim = recon.initial_config().f0_dim();
  c.width = recon.decoder_width;
  return c;
}

ExperimentConfig default_config() { return {}; }

ExperimentConfig desk_config() {
  ExperimentConfig c;
  c.data.n_train = 64;
  c.data.n_test = 16;
  c.data.sdf_per_scene = 512;
  c.contact.feature_dim = 64;
  c.contact.part_hidden = 128;
  c.contact.vertex_hidden = {128, 64, 32};
  c.contact.batch = 16;
  c.contact.epochs = 10;
  c.field.v0_res = 32;
  c.field.v0_dim = 8;
  c.field.dims = {8, 16, 32, 32};
  c.recon.visual_dim = 64;
  c.recon.decoder_width = 128;
  c.recon.batch = 4;
  c.recon.epochs = 10;
  c.recon.samples_per_scene = 128;
  c.recon.grid_res = 32;
  c.recon.eval_scenes = 4;
  c.recon.eval_samples = 1000;
  c.out_dir = "runs/desk";
  return c;
}

ExperimentConfig preset_config(const std::string& name) {
  if (name == "paper") return default_config();
  if (name == "desk") return desk_config();
  throw ConfigError("unknown preset '" + name + "' (expected paper|desk)");
}

namespace {

json to_json_obj(const ExperimentConfig& c) {
  return {
      {"data",
       {{"root", c.data.root},
        {"n_train", c.data.n_train},
        {"n_test", c.data.n_test},
        {"base_seed", c.data.base_seed},
        {"sdf_per_scene", c.data.sdf_per_scene},
        {"near_fraction", c.data.near_fraction},
        {"kind_weights", c.data.generator.kind_weights},
        {"style_weights", c.data.generator.style_weights},
        {"contact_delta", c.data.generator.contact_delta},
        {"near_sigma", c.data.generator.near_sigma},
        {"min_contact_vertices", c.data.generator.min_contact_vertices},
        {"max_close_attempts", c.data.generator.max_close_attempts}}},
      {"contact",
       {{"feature_dim", c.contact.feature_dim},
        {"base_channels", c.contact.base_channels},
        {"part_hidden", c.contact.part_hidden},
        {"vertex_hidden", c.contact.vertex_hidden},
        {"heads", c.contact.heads},
        {"multi_level", c.contact.multi_level},
        {"part_only", c.contact.part_only},
        {"threshold", c.contact.threshold},
        {"lambda_p", c.contact.lambda_p},
        {"lambda_v", c.contact.lambda_v},
        {"lambda_vs", c.contact.lambda_vs},
        {"lr", c.contact.lr},
        {"batch", c.contact.batch},
        {"epochs", c.contact.epochs}}},
      {"field",
       {{"f_pe", c.field.f_pe},
        {"v0_res", c.field.v0_res},
        {"v0_dim", c.field.v0_dim},
        {"dims", c.field.dims}}},
      {"recon",
       {{"visual_dim", c.recon.visual_dim},
        {"decoder_width", c.recon.decoder_width},
        {"contact_source", contact_source_name(c.recon.contact_source)},
        {"hand_source", hand_source_name(c.recon.hand_source)},
        {"hand_noise_rad", c.recon.hand_noise_rad},
        {"use_hoi", c.recon.use_hoi},
        {"clamp_dist", c.recon.clamp_dist},
        {"lr", c.recon.lr},
        {"batch", c.recon.batch},
        {"epochs", c.recon.epochs},
        {"samples_per_scene", c.recon.samples_per_scene},
        {"grid_res", c.recon.grid_res},
        {"eval_scenes", c.recon.eval_scenes},
        {"eval_samples", c.recon.eval_samples}}},
      {"seed", c.seed},
      {"out_dir", c.out_dir}};
}

template <typename T>
void get(const json& j, const char* key, T& out, const std::string& scope) {
  auto it = j.find(key);
  if (it == j.end()) return;  // absent keys keep their defaults
  try {
    out = it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config: bad value for " + scope + "." + key + ": " + e.what());
  }
}

ExperimentConfig from_json_obj(const json& j) {
  ExperimentConfig c;
  if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    if (key != "data" && key != "contact" && key != "field" && key != "recon" && key != "seed" &&
        key != "out_dir")
      throw ConfigError("config: unknown section '" + key + "'");
  }
  if (j.contains("data")) {
    const json& d = j.at("data");
    get(d, "root", c.data.root, "data");
    get(d, "n_train", c.data.n_train, "data");
    get(d, "n_test", c.data.n_test, "data");
    get(d, "base_seed", c.data.base_seed, "data");
    get(d, "sdf_per_scene", c.data.sdf_per_scene, "data");
    get(d, "near_fraction", c.data.near_fraction, "data");
    get(d, "kind_weights", c.data.generator.kind_weights, "data");
    get(d, "style_weights", c.data.generator.style_weights, "data");
    get(d, "contact_delta", c.data.generator.contact_delta, "data");
    get(d, "near_sigma", c.data.generator.near_sigma, "data");
    get(d, "min_contact_vertices", c.data.generator.min_contact_vertices, "data");
    get(d, "max_close_attempts", c.data.generator.max_close_attempts, "data");
  }
  if (j.contains("contact")) {
    const json& d = j.at("contact");
    get(d, "feature_dim", c.contact.feature_dim, "contact");
    get(d, "base_channels", c.contact.base_channels, "contact");
    get(d, "part_hidden", c.contact.part_hidden, "contact");
    get(d, "vertex_hidden", c.contact.vertex_hidden, "contact");
    get(d, "heads", c.contact.heads, "contact");
    get(d, "multi_level", c.contact.multi_level, "contact");
    get(d, "part_only", c.contact.part_only, "contact");
    get(d, "threshold", c.contact.threshold, "contact");
    get(d, "lambda_p", c.contact.lambda_p, "contact");
    get(d, "lambda_v", c.contact.lambda_v, "contact");
    get(d, "lambda_vs", c.contact.lambda_vs, "contact");
    get(d, "lr", c.contact.lr, "contact");
    get(d, "batch", c.contact.batch, "contact");
    get(d, "epochs", c.contact.epochs, "contact");
  }
  if (j.contains("field")) {
    const json& d = j.at("field");
    get(d, "f_pe", c.field.f_pe, "field");
    get(d, "v0_res", c.field.v0_res, "field");
    get(d, "v0_dim", c.field.v0_dim, "field");
    get(d, "dims", c.field.dims, "field");
  }
  if (j.contains("recon")) {
    const json& d = j.at("recon");
    get(d, "visual_dim", c.recon.visual_dim, "recon");
    get(d, "decoder_width", c.recon.decoder_width, "recon");
    std::string cs = contact_source_name(c.recon.contact_source);
    std::string hs = hand_source_name(c.recon.hand_source);
    get(d, "contact_source", cs, "recon");
    get(d, "hand_source", hs, "recon");
    c.recon.contact_source = contact_source_from_name(cs);
    c.recon.hand_source = hand_source_from_name(hs);
    get(d, "hand_noise_rad", c.recon.hand_noise_rad, "recon");
    get(d, "use_hoi", c.recon.use_hoi, "recon");
    get(d, "clamp_dist", c.recon.clamp_dist, "recon");
    get(d, "lr", c.recon.lr, "recon");
    get(d, "batch", c.recon.batch, "recon");
    get(d, "epochs", c.recon.epochs, "recon");
    get(d, "samples_per_scene", c.recon.samples_per_scene, "recon");
    get(d, "grid_res", c.recon.grid_res, "recon");
    get(d, "eval_scenes", c.recon.eval_scenes, "recon");
    get(d, "eval_samples", c.recon.eval_samples, "recon");
  }
  get(j, "seed", c.seed, "");
  get(j, "out_dir", c.out_dir, "");
  return c;
}

}  // namespace

std::string config_to_json(const ExperimentConfig& cfg) { return to_json_obj(cfg).dump(2); }

ExperimentConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: parse error: ") + e.what());
  }
  return from_json_obj(j);
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

void save_config_file(const ExperimentConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("config: cannot write " + path);
  out << config_to_json(cfg) << "\n";
}

ExperimentConfig apply_overrides(const ExperimentConfig& cfg,
                                 const std::vector<std::string>& overrides) {
  json j = to_json_obj(cfg);
  for (const std::string& ov : overrides) {
    const size_t eq = ov.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError("override '" + ov + "' is not key=value");
    std::string key = ov.substr(0, eq);
    const std::string raw = ov.substr(eq + 1);
    std::string ptr = "/" + key;
    for (char& ch : ptr)
      if (ch == '.') ch = '/';
    const json::json_pointer p(ptr);
    if (!j.contains(p)) throw ConfigError("override: unknown key '" + key + "'");
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;  // bare words are strings
    // keep the existing type so "epochs=abc" fails loudly downstream
    j[p] = value;
  }
  return from_json_obj(j);
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string s = to_json_obj(cfg).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace crec
