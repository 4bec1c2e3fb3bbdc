#include "miarec/pipeline.hpp"

#include "miarec/error.hpp"

namespace miarec {

DocVectors content_vectors(const CorpusStore& corpus, const RunConfig& config) {
  if (!config.vectors_path().empty()) return load_vectors(config.vectors_path(), corpus);
  return train_pvdbow(corpus, config.train_config().content).vectors;
}

ModelCheckpoint train_on_corpus(const CorpusStore& corpus, const RunConfig& config,
                                const EpochCallback& on_epoch) {
  const TrainConfig train_cfg = config.train_config();
  const NetworkConfig net_cfg = config.network_config();
  const SplitSpec split = leave_one_out_split(corpus, train_cfg.split_seed);
  const auto prepared = prepare_network(corpus, net_cfg);
  std::optional<DocVectors> docs;
  if (train_cfg.use_content) docs = content_vectors(corpus, config);
  return train(corpus, *prepared, split, train_cfg, net_cfg, docs ? &*docs : nullptr, on_epoch);
}

MetricsReport evaluate_on_corpus(const ModelCheckpoint& checkpoint, const CorpusStore& corpus,
                                 const RunConfig& config) {
  const SplitSpec split = leave_one_out_split(corpus, config.train_config().split_seed);
  return evaluate(checkpoint, split);
}

IngestSummary summarize(const CorpusStore& corpus, const NetworkConfig& network) {
  IngestSummary s;
  s.papers = corpus.paper_count();
  s.scholars = corpus.scholar_count();
  for (RelationKind kind : network.relations) {
    const std::size_t threshold =
        kind == RelationKind::CoTopic ? network.min_shared_topic : default_min_shared(kind);
    s.edges.emplace_back(to_string(kind), extract_relation(corpus, kind, threshold).edge_count());
  }
  return s;
}

std::string format_summary(const IngestSummary& summary) {
  std::string out = "papers = " + std::to_string(summary.papers) + "\n";
  out += "scholars = " + std::to_string(summary.scholars) + "\n";
  for (const auto& [kind, n] : summary.edges) out += "edges." + kind + " = " + std::to_string(n) + "\n";
  return out;
}

}  // namespace miarec
