#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "miarec/autodiff.hpp"
#include "miarec/content.hpp"
#include "miarec/corpus.hpp"
#include "miarec/encoder.hpp"
#include "miarec/hetnet.hpp"
#include "miarec/influence.hpp"

namespace miarec {

struct AlignmentParams {
  Dense weight;  // dim_v x d
  Dense bias;    // 1 x dim_v
};

/// Everything the optimizer updates. paper_embeddings is only populated when
/// content vectors are disabled.
struct ModelParams {
  EncoderParams encoder;
  AlignmentParams alignment;
  Dense paper_embeddings;
};

template <typename Params, typename F>
void for_each_model_tensor(Params& p, F&& f) {
  for_each_tensor(p.encoder, f);
  f(std::string("alignment.weight"), ParamGroup::Alignment, p.alignment.weight);
  f(std::string("alignment.bias"), ParamGroup::Alignment, p.alignment.bias);
  if (!p.paper_embeddings.empty()) {
    f(std::string("paper_embeddings"), ParamGroup::PaperEmbeddings, p.paper_embeddings);
  }
}

/// How the relation graphs and influence tables are derived from a corpus.
struct NetworkConfig {
  std::vector<RelationKind> relations{RelationKind::Collaboration, RelationKind::CoTopic,
                                      RelationKind::CoVenue};
  std::size_t min_shared_topic = 3;
  DistanceSource distance_source = DistanceSource::CoOccurrence;
  double gravitational_constant = 1.0;
};

struct TrainConfig {
  std::size_t batch_size = 1024;
  double learning_rate = 0.001;
  double reg_weight = 0.0005;
  std::size_t epochs = 100;
  std::uint64_t seed = 1;
  std::uint64_t split_seed = 7;
  EncoderConfig encoder;
  ContentConfig content;
  bool use_content = true;

  void validate() const;
};

/// Relation graphs plus the precomputed per-graph inputs of the encoder.
struct PreparedNetwork {
  HeterogeneousNetwork network;
  std::vector<InfluenceTable> tables;
  std::vector<GraphContext> contexts;

  PreparedNetwork() = default;
  PreparedNetwork(const PreparedNetwork&) = delete;
  PreparedNetwork& operator=(const PreparedNetwork&) = delete;
};

/// Builds graphs and influence tables. Contexts point into the returned
/// object, which is therefore heap-allocated and non-copyable.
std::unique_ptr<PreparedNetwork> prepare_network(const CorpusStore& corpus,
                                                 const NetworkConfig& config);

struct Triple {
  std::size_t scholar;
  std::size_t positive;
  std::size_t negative;

  friend bool operator==(const Triple&, const Triple&) = default;
};

/// Train-positive pairs in corpus index space.
struct TrainingPairs {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (scholar, paper)
  std::vector<std::set<std::size_t>> positives;            // per scholar
  std::size_t paper_count = 0;
};

TrainingPairs make_training_pairs(const SplitSpec& split, const CorpusStore& corpus);

/// (i, j) uniform over train-positive pairs; k uniform over papers outside
/// i's train positives. Throws EmptySplitError with no pairs.
std::vector<Triple> sample_triples(const TrainingPairs& data, std::size_t batch_size, Rng& rng);

/// U^a = ReLU(U W^T + b).
ad::Var align(ad::Var scholar_embeddings, ad::Var weight, ad::Var bias);
Dense align(const Dense& scholar_embeddings, const AlignmentParams& params);

/// Inner product of an aligned scholar vector and a paper vector.
double score(std::span<const double> aligned_scholar, std::span<const double> paper);

/// -sum log sigmoid(pos - neg) + lambda * sum ||theta||^2.
double bpr_batch_loss(std::span<const double> pos_scores, std::span<const double> neg_scores,
                      const std::vector<const Dense*>& theta, double lambda);

struct BatchLoss {
  ad::Var total;
  ad::Var data;
};

BatchLoss bpr_batch_loss(ad::Var aligned, ad::Var papers, const std::vector<Triple>& triples,
                         const std::vector<ad::Var>& theta, double lambda);

struct ModelCheckpoint {
  static constexpr const char* kVersion = "miarec-ckpt-1";

  TrainConfig train;
  NetworkConfig network;
  std::vector<std::string> scholar_ids;
  std::vector<std::string> paper_ids;
  ModelParams params;
  DocVectors doc_vectors;     // frozen content vectors (use_content)
  Dense scholar_embeddings;   // aligned U^a from the inference sample
  std::map<std::string, std::vector<std::string>> train_positives;
  std::size_t epochs_trained = 0;
  std::vector<double> epoch_loss;

  /// Paper vectors scored against: content vectors or learned embeddings.
  const Dense& paper_matrix() const;
  std::size_t scholar_index(const std::string& scholar_id) const;
  std::size_t paper_index(const std::string& paper_id) const;
  double score(const std::string& scholar_id, const std::string& paper_id) const;

  friend bool operator==(const ModelCheckpoint& a, const ModelCheckpoint& b);
};

/// Epoch tag reserved for the sample used when computing inference embeddings.
inline constexpr std::uint64_t kInferenceEpoch = 0xFFFF'FFFFull;

/// Fresh parameters for the given shapes, drawn from the seed's init stream.
ModelParams init_model_params(const TrainConfig& config, std::size_t n_scholars, std::size_t k,
                              std::size_t n_papers, std::size_t dim_v);

/// BPR loss of one batch plus gradients for every tensor in for_each_model_tensor order.
struct BatchResult {
  double loss = 0.0;
  double data_loss = 0.0;
  std::vector<Dense> grads;
};

BatchResult batch_gradient(const ModelParams& params, const std::vector<GraphContext>& contexts,
                           const NetworkSample& sample, const EncoderConfig& encoder,
                           const Dense* doc_vectors, const std::vector<Triple>& triples,
                           double lambda);

/// Aligned scholar embeddings for a fixed sample.
Dense infer_scholar_embeddings(const ModelParams& params, const std::vector<GraphContext>& contexts,
                               const NetworkSample& sample, const EncoderConfig& encoder);

using EpochCallback = std::function<void(std::size_t epoch, double loss)>;

/// End-to-end BPR training. `doc_vectors` must be aligned to the corpus and
/// is required when config.use_content. Throws DivergenceError on a non-finite
/// epoch loss.
ModelCheckpoint train(const CorpusStore& corpus, const PreparedNetwork& prepared,
                      const SplitSpec& split, const TrainConfig& config,
                      const NetworkConfig& network_config, const DocVectors* doc_vectors,
                      const EpochCallback& on_epoch = nullptr);

struct Ranked {
  std::string paper_id;
  double score;
};

/// Candidates by descending score, ties by ascending paper id, at most k.
/// With no candidates given, all papers minus the scholar's train positives.
std::vector<Ranked> recommend_topk(const ModelCheckpoint& checkpoint, const std::string& scholar_id,
                                   const std::vector<std::string>* candidates, std::size_t k);

/// Sorting rule shared by every ranking in the project.
void sort_ranked(std::vector<Ranked>& ranked);

std::string checkpoint_to_string(const ModelCheckpoint& checkpoint);
ModelCheckpoint checkpoint_from_string(const std::string& text);
void save_checkpoint(const ModelCheckpoint& checkpoint, const std::string& path);
ModelCheckpoint load_checkpoint(const std::string& path);

}  // namespace miarec
