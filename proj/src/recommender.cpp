#include "miarec/recommender.hpp"

#include <algorithm>
#include <cmath>

#include "miarec/error.hpp"
#include "miarec/numkernel.hpp"

namespace miarec {

namespace {
constexpr std::uint64_t kInitStream = 0x1417;
constexpr std::uint64_t kBatchStream = 0xba7c;
}  // namespace

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(reg_weight >= 0.0)) throw ConfigError("reg_weight must be non-negative");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  encoder.validate();
  if (content.dim < 1) throw ConfigError("content dim must be >= 1");
}

std::unique_ptr<PreparedNetwork> prepare_network(const CorpusStore& corpus,
                                                 const NetworkConfig& config) {
  auto prepared = std::make_unique<PreparedNetwork>();
  prepared->network = build_network(corpus, config.relations, config.min_shared_topic);
  prepared->network.validate();
  std::optional<RelationGraph> collaboration;
  if (config.distance_source == DistanceSource::Collaboration) {
    collaboration = extract_relation(corpus, RelationKind::Collaboration, 1);
  }
  for (const auto& g : prepared->network.graphs) {
    prepared->tables.push_back(build_table(g, corpus.citation_masses(),
                                           config.gravitational_constant, config.distance_source,
                                           collaboration ? &*collaboration : nullptr));
  }
  prepared->contexts = make_contexts(prepared->network, prepared->tables);
  return prepared;
}

TrainingPairs make_training_pairs(const SplitSpec& split, const CorpusStore& corpus) {
  TrainingPairs data;
  data.paper_count = corpus.paper_count();
  data.positives.resize(corpus.scholar_count());
  for (std::size_t s = 0; s < corpus.scholar_count(); ++s) {
    auto it = split.train_positives.find(corpus.scholar_ids()[s]);
    if (it == split.train_positives.end()) continue;
    for (const auto& pid : it->second) {
      auto p = corpus.paper_index(pid);
      if (!p) throw LookupError("split references unknown paper " + pid);
      data.positives[s].insert(*p);
    }
    for (std::size_t p : data.positives[s]) data.pairs.push_back({s, p});
  }
  return data;
}

std::vector<Triple> sample_triples(const TrainingPairs& data, std::size_t batch_size, Rng& rng) {
  if (data.pairs.empty()) throw EmptySplitError("no train-positive scholar-paper pairs");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  std::vector<Triple> out;
  out.reserve(batch_size);
  for (std::size_t b = 0; b < batch_size; ++b) {
    const auto [s, p] = data.pairs[uniform_index(rng, data.pairs.size())];
    const auto& pos = data.positives[s];
    if (pos.size() >= data.paper_count) {
      throw InsufficientCandidatesError("scholar has no non-positive papers to sample");
    }
    std::size_t k = uniform_index(rng, data.paper_count);
    while (pos.contains(k)) k = uniform_index(rng, data.paper_count);
    out.push_back({s, p, k});
  }
  return out;
}

ad::Var align(ad::Var scholar_embeddings, ad::Var weight, ad::Var bias) {
  return ad::relu(ad::add_row(ad::matmul_bt(scholar_embeddings, weight), bias));
}

Dense align(const Dense& scholar_embeddings, const AlignmentParams& params) {
  ad::Tape tape;
  return align(tape.constant(scholar_embeddings), tape.constant(params.weight),
               tape.constant(params.bias))
      .value();
}

double score(std::span<const double> aligned_scholar, std::span<const double> paper) {
  return dot(aligned_scholar, paper);
}

double bpr_batch_loss(std::span<const double> pos_scores, std::span<const double> neg_scores,
                      const std::vector<const Dense*>& theta, double lambda) {
  if (pos_scores.size() != neg_scores.size()) throw DimensionError("score lists differ in length");
  double loss = 0.0;
  for (std::size_t i = 0; i < pos_scores.size(); ++i) {
    loss -= log_sigmoid(pos_scores[i] - neg_scores[i]);
  }
  double norm = 0.0;
  for (const Dense* t : theta) norm += l2_norm_sq(*t);
  return loss + lambda * norm;
}

BatchLoss bpr_batch_loss(ad::Var aligned, ad::Var papers, const std::vector<Triple>& triples,
                         const std::vector<ad::Var>& theta, double lambda) {
  std::vector<std::size_t> who, pos, neg;
  for (const auto& t : triples) {
    who.push_back(t.scholar);
    pos.push_back(t.positive);
    neg.push_back(t.negative);
  }
  ad::Var u = ad::gather_rows(aligned, who);
  ad::Var sp = ad::row_dot(u, ad::gather_rows(papers, pos));
  ad::Var sn = ad::row_dot(u, ad::gather_rows(papers, neg));
  ad::Var data = ad::neg_log_sigmoid_sum(ad::sub(sp, sn));
  if (theta.empty() || lambda == 0.0) return {data, data};
  ad::Var reg = ad::sum_squares(theta.front());
  for (std::size_t i = 1; i < theta.size(); ++i) reg = ad::add(reg, ad::sum_squares(theta[i]));
  return {ad::add(data, ad::scale(reg, lambda)), data};
}

ModelParams init_model_params(const TrainConfig& config, std::size_t n_scholars, std::size_t k,
                              std::size_t n_papers, std::size_t dim_v) {
  Rng rng = make_stream(config.seed, {kInitStream});
  ModelParams p;
  p.encoder = init_encoder_params(config.encoder, n_scholars, k, rng);
  p.alignment.weight = xavier_init(dim_v, config.encoder.dim, rng);
  p.alignment.bias = Dense(1, dim_v);
  if (!config.use_content) p.paper_embeddings = xavier_init(n_papers, dim_v, rng);
  return p;
}

namespace {

struct BoundModel {
  EncoderVars encoder;
  ad::Var align_weight, align_bias;
  std::optional<ad::Var> papers;
  std::vector<ad::Var> all;  // for_each_model_tensor order
};

BoundModel bind_model(ad::Tape& tape, const ModelParams& params) {
  BoundModel m;
  m.encoder = bind_encoder(tape, params.encoder, &m.all);
  m.align_weight = tape.parameter(params.alignment.weight);
  m.align_bias = tape.parameter(params.alignment.bias);
  m.all.push_back(m.align_weight);
  m.all.push_back(m.align_bias);
  if (!params.paper_embeddings.empty()) {
    m.papers = tape.parameter(params.paper_embeddings);
    m.all.push_back(*m.papers);
  }
  return m;
}

}  // namespace

BatchResult batch_gradient(const ModelParams& params, const std::vector<GraphContext>& contexts,
                           const NetworkSample& sample, const EncoderConfig& encoder,
                           const Dense* doc_vectors, const std::vector<Triple>& triples,
                           double lambda) {
  ad::Tape tape;
  BoundModel m = bind_model(tape, params);
  EncodedVars enc = encode(contexts, sample, m.encoder, encoder);
  ad::Var aligned = align(enc.fused.fused, m.align_weight, m.align_bias);
  ad::Var papers;
  if (m.papers) {
    papers = *m.papers;
  } else {
    if (doc_vectors == nullptr) throw ConfigError("content vectors required when use_content");
    papers = tape.constant(*doc_vectors);
  }
  BatchLoss loss = bpr_batch_loss(aligned, papers, triples, m.all, lambda);
  tape.backward(loss.total);

  BatchResult out;
  out.loss = loss.total.value()[0];
  out.data_loss = loss.data.value()[0];
  for (ad::Var v : m.all) {
    const Dense& g = v.grad();
    out.grads.push_back(g.empty() ? Dense(v.rows(), v.cols()) : g);
  }
  return out;
}

Dense infer_scholar_embeddings(const ModelParams& params, const std::vector<GraphContext>& contexts,
                               const NetworkSample& sample, const EncoderConfig& encoder) {
  const ScholarEmbeddings e = encode_values(contexts, sample, params.encoder, encoder);
  return align(e.fused, params.alignment);
}

ModelCheckpoint train(const CorpusStore& corpus, const PreparedNetwork& prepared,
                      const SplitSpec& split, const TrainConfig& config,
                      const NetworkConfig& network_config, const DocVectors* doc_vectors,
                      const EpochCallback& on_epoch) {
  config.validate();
  const TrainingPairs data = make_training_pairs(split, corpus);
  if (data.pairs.empty()) throw EmptySplitError("split has no train-positive pairs");

  ModelCheckpoint ckpt;
  ckpt.train = config;
  ckpt.network = network_config;
  ckpt.scholar_ids = corpus.scholar_ids();
  for (const auto& p : corpus.papers()) ckpt.paper_ids.push_back(p.paper_id);
  for (const auto& [sid, papers] : split.train_positives) {
    ckpt.train_positives[sid] = std::vector<std::string>(papers.begin(), papers.end());
  }

  std::size_t dim_v = config.content.dim;
  if (config.use_content) {
    if (doc_vectors == nullptr) throw ConfigError("use_content requires paper vectors");
    ckpt.doc_vectors = doc_vectors->paper_ids() == ckpt.paper_ids
                           ? *doc_vectors
                           : doc_vectors->aligned_to(corpus);
    dim_v = ckpt.doc_vectors.dim();
  }
  ckpt.params = init_model_params(config, corpus.scholar_count(), prepared.contexts.size(),
                                  corpus.paper_count(), dim_v);

  std::vector<Dense*> tensors;
  for_each_model_tensor(ckpt.params,
                        [&](const std::string&, ParamGroup, Dense& m) { tensors.push_back(&m); });
  std::vector<AdamState> adam;
  for (Dense* t : tensors) adam.push_back(AdamState::for_shape(*t));

  const Dense* docs = config.use_content ? &ckpt.doc_vectors.matrix() : nullptr;
  const std::size_t batches = (data.pairs.size() + config.batch_size - 1) / config.batch_size;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const NetworkSample sample = sample_network(prepared.contexts, config.encoder, config.seed, epoch);
    double total = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
      Rng rng = make_stream(config.seed, {kBatchStream, epoch, b});
      const auto triples = sample_triples(data, config.batch_size, rng);
      BatchResult r = batch_gradient(ckpt.params, prepared.contexts, sample, config.encoder, docs,
                                     triples, config.reg_weight);
      if (!std::isfinite(r.loss)) throw DivergenceError(epoch);
      for (std::size_t t = 0; t < tensors.size(); ++t) {
        adam_step(*tensors[t], r.grads[t], adam[t], config.learning_rate);
      }
      total += r.loss;
    }
    const double epoch_loss = total / static_cast<double>(batches);
    if (!std::isfinite(epoch_loss)) throw DivergenceError(epoch);
    ckpt.epoch_loss.push_back(epoch_loss);
    ckpt.epochs_trained = epoch;
    if (on_epoch) on_epoch(epoch, epoch_loss);
  }

  const NetworkSample inference =
      sample_network(prepared.contexts, config.encoder, config.seed, kInferenceEpoch);
  ckpt.scholar_embeddings =
      infer_scholar_embeddings(ckpt.params, prepared.contexts, inference, config.encoder);
  return ckpt;
}

const Dense& ModelCheckpoint::paper_matrix() const {
  return train.use_content ? doc_vectors.matrix() : params.paper_embeddings;
}

std::size_t ModelCheckpoint::scholar_index(const std::string& scholar_id) const {
  auto it = std::find(scholar_ids.begin(), scholar_ids.end(), scholar_id);
  if (it == scholar_ids.end()) throw LookupError("unknown scholar: " + scholar_id);
  return static_cast<std::size_t>(it - scholar_ids.begin());
}

std::size_t ModelCheckpoint::paper_index(const std::string& paper_id) const {
  auto it = std::find(paper_ids.begin(), paper_ids.end(), paper_id);
  if (it == paper_ids.end()) throw LookupError("unknown paper: " + paper_id);
  return static_cast<std::size_t>(it - paper_ids.begin());
}

double ModelCheckpoint::score(const std::string& scholar_id, const std::string& paper_id) const {
  return miarec::score(scholar_embeddings.row(scholar_index(scholar_id)),
                       paper_matrix().row(paper_index(paper_id)));
}

bool operator==(const ModelCheckpoint& a, const ModelCheckpoint& b) {
  return checkpoint_to_string(a) == checkpoint_to_string(b);
}

void sort_ranked(std::vector<Ranked>& ranked) {
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& x, const Ranked& y) {
    if (x.score != y.score) return x.score > y.score;
    return x.paper_id < y.paper_id;
  });
}

std::vector<Ranked> recommend_topk(const ModelCheckpoint& checkpoint, const std::string& scholar_id,
                                   const std::vector<std::string>* candidates, std::size_t k) {
  if (k < 1) throw ConfigError("k must be >= 1");
  const std::size_t s = checkpoint.scholar_index(scholar_id);
  const auto u = checkpoint.scholar_embeddings.row(s);
  const Dense& papers = checkpoint.paper_matrix();

  std::vector<Ranked> ranked;
  if (candidates) {
    for (const auto& pid : *candidates) {
      ranked.push_back({pid, score(u, papers.row(checkpoint.paper_index(pid)))});
    }
  } else {
    std::set<std::string> exclude;
    if (auto it = checkpoint.train_positives.find(scholar_id); it != checkpoint.train_positives.end()) {
      exclude.insert(it->second.begin(), it->second.end());
    }
    for (std::size_t p = 0; p < checkpoint.paper_ids.size(); ++p) {
      if (exclude.contains(checkpoint.paper_ids[p])) continue;
      ranked.push_back({checkpoint.paper_ids[p], score(u, papers.row(p))});
    }
  }
  sort_ranked(ranked);
  if (ranked.size() > k) ranked.resize(k);
  return ranked;
}

}  // namespace miarec
