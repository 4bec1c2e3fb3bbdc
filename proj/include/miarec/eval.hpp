#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "miarec/corpus.hpp"
#include "miarec/recommender.hpp"

namespace miarec {

/// rel_i for a ranked list: 1 when the i-th item is relevant.
using GainList = std::vector<int>;

struct PrecisionRecall {
  double precision;
  double recall;
};

/// P@k over min(k, list length) items; R@k over the relevant set size.
PrecisionRecall precision_recall_at_k(const std::vector<std::string>& ranked,
                                      const std::set<std::string>& relevant, std::size_t k);

double dcg_at_k(const GainList& gains, std::size_t k);
/// DCG@k over the DCG of min(total_relevant, k) leading ones.
double ndcg_at_k(const GainList& gains, std::size_t total_relevant, std::size_t k);

GainList gains_of(const std::vector<std::string>& ranked, const std::set<std::string>& relevant);

struct MetricsReport {
  std::vector<std::size_t> ks;
  std::map<std::size_t, double> precision;
  std::map<std::size_t, double> recall;
  std::map<std::size_t, double> ndcg;
  std::size_t n_scholars = 0;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

/// Ranks `candidates` for a scholar; returns ids best first, at most k.
using Ranker = std::function<std::vector<std::string>(
    const std::string& scholar, const std::vector<std::string>& candidates, std::size_t k)>;

inline const std::vector<std::size_t> kDefaultKs{5, 10, 20};

/// Ranks test positives plus negatives for every split scholar and macro-averages.
MetricsReport evaluate(const Ranker& ranker, const SplitSpec& split,
                       const std::vector<std::size_t>& ks = kDefaultKs);
MetricsReport evaluate(const ModelCheckpoint& checkpoint, const SplitSpec& split,
                       const std::vector<std::size_t>& ks = kDefaultKs);

/// "key = value" lines: precision@k, recall@k, ndcg@k, n_scholars, then the
/// echoed configuration entries.
std::string format_report(const MetricsReport& report,
                          const std::vector<std::pair<std::string, std::string>>& config_echo);

}  // namespace miarec
