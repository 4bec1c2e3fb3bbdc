#pragma once

#include <memory>
#include <string>

#include "miarec/config.hpp"
#include "miarec/content.hpp"
#include "miarec/corpus.hpp"
#include "miarec/eval.hpp"
#include "miarec/recommender.hpp"

namespace miarec {

/// Paper vectors for a run: loaded from `vectors` when set, else PV-DBOW.
DocVectors content_vectors(const CorpusStore& corpus, const RunConfig& config);

/// Split, graphs, content and BPR training for an in-memory corpus.
ModelCheckpoint train_on_corpus(const CorpusStore& corpus, const RunConfig& config,
                                const EpochCallback& on_epoch = nullptr);

/// Split for the configured seed and the checkpoint's metrics on it.
MetricsReport evaluate_on_corpus(const ModelCheckpoint& checkpoint, const CorpusStore& corpus,
                                 const RunConfig& config);

struct IngestSummary {
  std::size_t papers = 0;
  std::size_t scholars = 0;
  std::vector<std::pair<std::string, std::size_t>> edges;  // per relation kind
};

IngestSummary summarize(const CorpusStore& corpus, const NetworkConfig& network);
std::string format_summary(const IngestSummary& summary);

}  // namespace miarec
