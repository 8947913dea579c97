#include "texting/model.hpp"

#include <cstdio>
#include <fstream>

#include "json.hpp"

namespace texting {

using nlohmann::json;

namespace {

json hyper_to_json(const HyperParams& h) {
  return json{{"steps", h.steps},
              {"input_dim", h.input_dim},
              {"hidden", h.hidden},
              {"window", h.window},
              {"pmi_window", h.pmi_window},
              {"dropout_rate", h.dropout_rate},
              {"learning_rate", h.learning_rate},
              {"seed", h.seed},
              {"batch_size", h.batch_size},
              {"max_epochs", h.max_epochs},
              {"patience", h.patience},
              {"val_ratio", h.val_ratio},
              {"grad_clip", h.grad_clip},
              {"adjacency_norm", adj_norm_name(h.adjacency_norm)},
              {"self_loops", h.self_loops},
              {"use_projection", h.use_projection}};
}

HyperParams hyper_from_json(const json& j) {
  HyperParams h;
  h.steps = j.at("steps").get<int>();
  h.input_dim = j.at("input_dim").get<int>();
  h.hidden = j.at("hidden").get<int>();
  h.window = j.at("window").get<int>();
  h.pmi_window = j.value("pmi_window", h.pmi_window);
  h.dropout_rate = j.at("dropout_rate").get<double>();
  h.learning_rate = j.at("learning_rate").get<double>();
  h.seed = j.at("seed").get<uint64_t>();
  h.batch_size = j.value("batch_size", h.batch_size);
  h.max_epochs = j.value("max_epochs", h.max_epochs);
  h.patience = j.value("patience", h.patience);
  h.val_ratio = j.value("val_ratio", h.val_ratio);
  h.grad_clip = j.value("grad_clip", h.grad_clip);
  h.adjacency_norm = parse_adj_norm(j.value("adjacency_norm", "row"));
  h.self_loops = j.value("self_loops", true);
  h.use_projection = j.value("use_projection", true);
  return h;
}

}  // namespace

json hyper_params_to_json(const HyperParams& h) { return hyper_to_json(h); }
HyperParams hyper_params_from_json(const json& j) { return hyper_from_json(j); }

void save_checkpoint(const std::string& prefix, const ParamSet<float>& params,
                     const HyperParams& hyper) {
  json manifest;
  manifest["format"] = "texting-checkpoint-v1";
  manifest["hyper"] = hyper_to_json(hyper);
  manifest["classes"] = params.classes;
  manifest["input_dim"] = params.input_dim;
  manifest["hidden"] = params.hidden;
  manifest["use_projection"] = params.use_projection;

  std::ofstream blob(prefix + ".bin", std::ios::binary);
  if (!blob) fail("io_error", "cannot write '" + prefix + ".bin'");

  json tensors = json::array();
  size_t offset = 0;
  for (const auto& [name, mat] : params.tensors()) {
    const size_t count = size_t(mat->rows()) * size_t(mat->cols());
    tensors.push_back(json{{"name", name},
                           {"rows", mat->rows()},
                           {"cols", mat->cols()},
                           {"offset", offset},
                           {"count", count}});
    blob.write(reinterpret_cast<const char*>(mat->data()),
               std::streamsize(count * sizeof(float)));
    offset += count * sizeof(float);
  }
  manifest["tensors"] = tensors;
  if (!blob) fail("io_error", "failed writing '" + prefix + ".bin'");
  blob.close();

  std::ofstream mf(prefix + ".json");
  if (!mf) fail("io_error", "cannot write '" + prefix + ".json'");
  mf << manifest.dump(2) << "\n";
}

Checkpoint load_checkpoint(const std::string& prefix) {
  std::ifstream mf(prefix + ".json");
  if (!mf) fail("missing_file", "cannot open '" + prefix + ".json'");
  json manifest;
  try {
    mf >> manifest;
  } catch (const json::exception& e) {
    fail("bad_checkpoint", std::string("manifest parse error: ") + e.what());
  }
  if (manifest.value("format", "") != "texting-checkpoint-v1")
    fail("bad_checkpoint", "unrecognized checkpoint format");

  Checkpoint ck;
  ck.hyper = hyper_from_json(manifest.at("hyper"));
  ck.params = ParamSet<float>::create(
      manifest.at("input_dim").get<int>(), manifest.at("hidden").get<int>(),
      manifest.at("classes").get<int>(), manifest.at("use_projection").get<bool>());

  std::ifstream blob(prefix + ".bin", std::ios::binary);
  if (!blob) fail("missing_file", "cannot open '" + prefix + ".bin'");

  auto tensor_list = ck.params.tensors();
  for (const json& t : manifest.at("tensors")) {
    const std::string name = t.at("name").get<std::string>();
    DenseMat<float>* mat = nullptr;
    for (auto& [n, m] : tensor_list)
      if (name == n) mat = m;
    if (!mat) fail("bad_checkpoint", "unknown tensor '" + name + "'");
    if (mat->rows() != t.at("rows").get<long>() ||
        mat->cols() != t.at("cols").get<long>())
      fail("bad_checkpoint", "shape mismatch for tensor '" + name + "'");
    blob.seekg(std::streamoff(t.at("offset").get<size_t>()));
    blob.read(reinterpret_cast<char*>(mat->data()),
              std::streamsize(size_t(mat->rows()) * size_t(mat->cols()) *
                              sizeof(float)));
    if (!blob) fail("bad_checkpoint", "blob truncated at tensor '" + name + "'");
  }
  return ck;
}

}  // namespace texting
