#include "crec/io/checkpoint.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"

namespace crec {

using nlohmann::json;

namespace {
constexpr char kMagic[9] = "CRECKPT1";

json meta_to_json(const CheckpointMeta& m) {
  // non-finite metrics (e.g. no successful evaluation yet) round-trip as null
  return {{"config", json::parse(m.config_json)},
          {"epoch", m.epoch},
          {"rng_seed", m.rng_seed},
          {"best_metric_name", m.best_metric_name},
          {"best_metric", std::isfinite(m.best_metric) ? json(m.best_metric) : json()}};
}

CheckpointMeta meta_from_json(const json& j) {
  CheckpointMeta m;
  m.config_json = j.at("config").dump();
  m.epoch = j.at("epoch");
  m.rng_seed = j.at("rng_seed");
  m.best_metric_name = j.at("best_metric_name");
  const json& bm = j.at("best_metric");
  m.best_metric = bm.is_null() ? std::nan("") : bm.get<double>();
  return m;
}

json read_header(std::ifstream& in, const std::string& path) {
  char magic[8];
  in.read(magic, 8);
  if (!in || std::string(magic, 8) != kMagic)
    throw CheckpointError("checkpoint: bad magic in " + path);
  std::uint64_t hlen = 0;
  in.read(reinterpret_cast<char*>(&hlen), 8);
  std::string header(hlen, '\0');
  in.read(header.data(), static_cast<std::streamsize>(hlen));
  if (!in) throw CheckpointError("checkpoint: truncated header in " + path);
  try {
    return json::parse(header);
  } catch (const json::exception& e) {
    throw CheckpointError("checkpoint: bad header JSON in " + path + ": " + e.what());
  }
}

}  // namespace

void save_checkpoint(const std::string& path, const nn::ParamStore& params,
                     const CheckpointMeta& meta) {
  json tensors = json::array();
  std::uint64_t offset = 0;
  for (int id = 0; id < params.count(); ++id) {
    const Tensor& t = params.value(id);
    tensors.push_back({{"name", params.name(id)}, {"shape", t.shape}, {"offset", offset}});
    offset += t.v.size();
  }
  json header = meta_to_json(meta);
  header["tensors"] = tensors;
  header["payload_doubles"] = offset;
  const std::string hs = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("checkpoint: cannot write " + path);
  out.write(kMagic, 8);
  const std::uint64_t hlen = hs.size();
  out.write(reinterpret_cast<const char*>(&hlen), 8);
  out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  for (int id = 0; id < params.count(); ++id) {
    const Tensor& t = params.value(id);
    out.write(reinterpret_cast<const char*>(t.v.data()),
              static_cast<std::streamsize>(t.v.size() * sizeof(double)));
  }
  if (!out) throw CheckpointError("checkpoint: write failed: " + path);
}

CheckpointMeta load_checkpoint(const std::string& path, nn::ParamStore& params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("checkpoint: cannot open " + path);
  const json header = read_header(in, path);
  const json& tensors = header.at("tensors");
  if (static_cast<int>(tensors.size()) != params.count())
    throw CheckpointError("checkpoint: " + path + " holds " + std::to_string(tensors.size()) +
                          " tensors, model has " + std::to_string(params.count()));
  for (int id = 0; id < params.count(); ++id) {
    const json& tj = tensors[id];
    Tensor& t = params.value(id);
    if (tj.at("name") != params.name(id))
      throw CheckpointError("checkpoint: tensor " + std::to_string(id) + " is '" +
                            std::string(tj.at("name")) + "', model expects '" + params.name(id) +
                            "'");
    if (tj.at("shape").get<std::vector<int>>() != t.shape)
      throw CheckpointError("checkpoint: shape mismatch for " + params.name(id));
    in.read(reinterpret_cast<char*>(t.v.data()),
            static_cast<std::streamsize>(t.v.size() * sizeof(double)));
  }
  if (!in) throw CheckpointError("checkpoint: truncated payload in " + path);
  return meta_from_json(header);
}

CheckpointMeta peek_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("checkpoint: cannot open " + path);
  return meta_from_json(read_header(in, path));
}

}  // namespace crec
