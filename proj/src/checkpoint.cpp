#include <fstream>
#include <sstream>

#include "json.hpp"
#include "miarec/error.hpp"
#include "miarec/recommender.hpp"

namespace miarec {

using ojson = nlohmann::ordered_json;

namespace {

ojson matrix_json(const Dense& m) {
  ojson rows = ojson::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
  }
  return ojson{{"shape", {m.rows(), m.cols()}}, {"data", std::move(rows)}};
}

Dense matrix_from(const ojson& j, const std::string& what) {
  if (!j.is_object() || !j.contains("shape") || !j.contains("data")) {
    throw FormatError(0, "checkpoint matrix " + what + " lacks shape/data");
  }
  const auto rows = j.at("shape").at(0).get<std::size_t>();
  const auto cols = j.at("shape").at(1).get<std::size_t>();
  const auto& data = j.at("data");
  if (data.size() != rows) throw FormatError(0, "checkpoint matrix " + what + ": row count");
  std::vector<double> values;
  values.reserve(rows * cols);
  for (const auto& row : data) {
    if (row.size() != cols) throw FormatError(0, "checkpoint matrix " + what + ": ragged row");
    for (const auto& v : row) values.push_back(v.get<double>());
  }
  return Dense(rows, cols, std::move(values));
}

ojson config_json(const TrainConfig& t, const NetworkConfig& n) {
  ojson relations = ojson::array();
  for (auto r : n.relations) relations.push_back(to_string(r));
  return ojson{
      {"batch_size", t.batch_size},
      {"learning_rate", t.learning_rate},
      {"reg_weight", t.reg_weight},
      {"epochs", t.epochs},
      {"seed", t.seed},
      {"split_seed", t.split_seed},
      {"use_content", t.use_content},
      {"encoder",
       {{"layers", t.encoder.layers},
        {"sample_sizes", t.encoder.sample_sizes},
        {"dim", t.encoder.dim},
        {"attention_dim", t.encoder.attention_dim},
        {"influence_mode", to_string(t.encoder.influence_mode)},
        {"use_interdependent", t.encoder.use_interdependent}}},
      {"content",
       {{"dim", t.content.dim},
        {"epochs", t.content.epochs},
        {"negatives", t.content.negatives},
        {"learning_rate", t.content.learning_rate},
        {"min_count", t.content.min_count},
        {"seed", t.content.seed}}},
      {"network",
       {{"relations", relations},
        {"min_shared_topic", n.min_shared_topic},
        {"distance_source", to_string(n.distance_source)},
        {"gravitational_constant", n.gravitational_constant}}},
  };
}

void config_from(const ojson& j, TrainConfig& t, NetworkConfig& n) {
  t.batch_size = j.at("batch_size").get<std::size_t>();
  t.learning_rate = j.at("learning_rate").get<double>();
  t.reg_weight = j.at("reg_weight").get<double>();
  t.epochs = j.at("epochs").get<std::size_t>();
  t.seed = j.at("seed").get<std::uint64_t>();
  t.split_seed = j.at("split_seed").get<std::uint64_t>();
  t.use_content = j.at("use_content").get<bool>();
  const auto& e = j.at("encoder");
  t.encoder.layers = e.at("layers").get<std::size_t>();
  t.encoder.sample_sizes = e.at("sample_sizes").get<std::vector<std::size_t>>();
  t.encoder.dim = e.at("dim").get<std::size_t>();
  t.encoder.attention_dim = e.at("attention_dim").get<std::size_t>();
  t.encoder.influence_mode = parse_influence_mode(e.at("influence_mode").get<std::string>());
  t.encoder.use_interdependent = e.at("use_interdependent").get<bool>();
  const auto& c = j.at("content");
  t.content.dim = c.at("dim").get<std::size_t>();
  t.content.epochs = c.at("epochs").get<std::size_t>();
  t.content.negatives = c.at("negatives").get<std::size_t>();
  t.content.learning_rate = c.at("learning_rate").get<double>();
  t.content.min_count = c.at("min_count").get<std::size_t>();
  t.content.seed = c.at("seed").get<std::uint64_t>();
  const auto& net = j.at("network");
  n.relations.clear();
  for (const auto& r : net.at("relations")) n.relations.push_back(parse_relation_kind(r.get<std::string>()));
  n.min_shared_topic = net.at("min_shared_topic").get<std::size_t>();
  n.distance_source = parse_distance_source(net.at("distance_source").get<std::string>());
  n.gravitational_constant = net.at("gravitational_constant").get<double>();
}

}  // namespace

std::string checkpoint_to_string(const ModelCheckpoint& c) {
  ojson doc;
  doc["version"] = ModelCheckpoint::kVersion;
  doc["config"] = config_json(c.train, c.network);
  doc["epochs_trained"] = c.epochs_trained;
  doc["epoch_loss"] = c.epoch_loss;
  doc["scholar_ids"] = c.scholar_ids;
  doc["paper_ids"] = c.paper_ids;
  ojson positives = ojson::object();
  for (const auto& [sid, papers] : c.train_positives) positives[sid] = papers;
  doc["train_positives"] = std::move(positives);
  ojson params = ojson::object();
  for_each_model_tensor(c.params, [&](const std::string& name, ParamGroup, const Dense& m) {
    params[name] = matrix_json(m);
  });
  doc["params"] = std::move(params);
  doc["doc_vectors"] = c.train.use_content ? matrix_json(c.doc_vectors.matrix()) : ojson(nullptr);
  doc["scholar_embeddings"] = matrix_json(c.scholar_embeddings);
  return doc.dump(1) + "\n";
}

ModelCheckpoint checkpoint_from_string(const std::string& text) {
  ojson doc;
  try {
    doc = ojson::parse(text);
  } catch (const ojson::parse_error& e) {
    throw FormatError(0, std::string("checkpoint is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("version", "") != ModelCheckpoint::kVersion) {
    throw FormatError(0, std::string("checkpoint version is not ") + ModelCheckpoint::kVersion);
  }
  try {
    ModelCheckpoint c;
    config_from(doc.at("config"), c.train, c.network);
    c.epochs_trained = doc.at("epochs_trained").get<std::size_t>();
    c.epoch_loss = doc.at("epoch_loss").get<std::vector<double>>();
    c.scholar_ids = doc.at("scholar_ids").get<std::vector<std::string>>();
    c.paper_ids = doc.at("paper_ids").get<std::vector<std::string>>();
    for (const auto& [sid, papers] : doc.at("train_positives").items()) {
      c.train_positives[sid] = papers.get<std::vector<std::string>>();
    }
    if (c.train.use_content) {
      c.doc_vectors = DocVectors(c.paper_ids, matrix_from(doc.at("doc_vectors"), "doc_vectors"));
    }
    const std::size_t dim_v = c.train.use_content ? c.doc_vectors.dim() : c.train.content.dim;
    c.params = init_model_params(c.train, c.scholar_ids.size(), c.network.relations.size(),
                                 c.paper_ids.size(), dim_v);
    const auto& params = doc.at("params");
    std::size_t seen = 0;
    for_each_model_tensor(c.params, [&](const std::string& name, ParamGroup, Dense& m) {
      if (!params.contains(name)) throw FormatError(0, "checkpoint lacks parameter " + name);
      Dense loaded = matrix_from(params.at(name), name);
      if (!loaded.same_shape(m)) throw FormatError(0, "checkpoint parameter " + name + " has wrong shape");
      m = std::move(loaded);
      ++seen;
    });
    if (seen != params.size()) throw FormatError(0, "checkpoint has unexpected parameters");
    c.scholar_embeddings = matrix_from(doc.at("scholar_embeddings"), "scholar_embeddings");
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(0, std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const ModelCheckpoint& checkpoint, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write checkpoint: " + path);
  out << checkpoint_to_string(checkpoint);
}

ModelCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_string(ss.str());
}

}  // namespace miarec
