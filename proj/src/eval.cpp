#include "miarec/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>

#include "miarec/error.hpp"

namespace miarec {

PrecisionRecall precision_recall_at_k(const std::vector<std::string>& ranked,
                                      const std::set<std::string>& relevant, std::size_t k) {
  if (k < 1) throw ConfigError("k must be >= 1");
  if (relevant.empty()) throw UndefinedMetricError("precision/recall need a relevant item");
  const std::size_t n = std::min(k, ranked.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) hits += relevant.contains(ranked[i]) ? 1 : 0;
  const double p = n == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(n);
  return {p, static_cast<double>(hits) / static_cast<double>(relevant.size())};
}

double dcg_at_k(const GainList& gains, std::size_t k) {
  double dcg = 0.0;
  const std::size_t n = std::min(k, gains.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (gains[i]) dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  }
  return dcg;
}

double ndcg_at_k(const GainList& gains, std::size_t total_relevant, std::size_t k) {
  if (k < 1) throw ConfigError("k must be >= 1");
  if (total_relevant == 0) throw UndefinedMetricError("nDCG needs a relevant item");
  const GainList ideal(std::min(total_relevant, k), 1);
  return dcg_at_k(gains, k) / dcg_at_k(ideal, k);
}

GainList gains_of(const std::vector<std::string>& ranked, const std::set<std::string>& relevant) {
  GainList g;
  g.reserve(ranked.size());
  for (const auto& id : ranked) g.push_back(relevant.contains(id) ? 1 : 0);
  return g;
}

MetricsReport evaluate(const Ranker& ranker, const SplitSpec& split,
                       const std::vector<std::size_t>& ks) {
  if (split.test_positives.empty()) throw EmptySplitError("split has no evaluable scholars");
  if (ks.empty()) throw ConfigError("no cut-offs given");
  const std::size_t kmax = *std::max_element(ks.begin(), ks.end());

  std::vector<std::string> scholars;
  for (const auto& [sid, pos] : split.test_positives)
    if (!pos.empty()) scholars.push_back(sid);
  if (scholars.empty()) throw EmptySplitError("no scholar has test positives");

  struct PerScholar {
    std::vector<double> p, r, n;
  };
  std::vector<PerScholar> rows(scholars.size());
  std::vector<std::optional<std::string>> errors(scholars.size());

#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t si = 0; si < static_cast<std::int64_t>(scholars.size()); ++si) {
    const auto idx = static_cast<std::size_t>(si);
    try {
      const auto& sid = scholars[idx];
      const auto& positives = split.test_positives.at(sid);
      std::vector<std::string> candidates(positives.begin(), positives.end());
      if (auto it = split.test_negatives.find(sid); it != split.test_negatives.end()) {
        candidates.insert(candidates.end(), it->second.begin(), it->second.end());
      }
      const auto ranked = ranker(sid, candidates, kmax);
      const GainList gains = gains_of(ranked, positives);
      for (std::size_t k : ks) {
        const auto pr = precision_recall_at_k(ranked, positives, k);
        rows[idx].p.push_back(pr.precision);
        rows[idx].r.push_back(pr.recall);
        rows[idx].n.push_back(ndcg_at_k(gains, positives.size(), k));
      }
    } catch (const std::exception& e) {
      errors[idx] = e.what();
    }
  }
  for (std::size_t i = 0; i < scholars.size(); ++i) {
    if (errors[i]) throw LookupError("evaluating " + scholars[i] + ": " + *errors[i]);
  }

  MetricsReport report;
  report.ks = ks;
  report.n_scholars = scholars.size();
  const double inv = 1.0 / static_cast<double>(scholars.size());
  for (std::size_t c = 0; c < ks.size(); ++c) {
    double p = 0.0, r = 0.0, n = 0.0;
    for (const auto& row : rows) {
      p += row.p[c];
      r += row.r[c];
      n += row.n[c];
    }
    report.precision[ks[c]] = p * inv;
    report.recall[ks[c]] = r * inv;
    report.ndcg[ks[c]] = n * inv;
  }
  return report;
}

MetricsReport evaluate(const ModelCheckpoint& checkpoint, const SplitSpec& split,
                       const std::vector<std::size_t>& ks) {
  return evaluate(
      [&checkpoint](const std::string& scholar, const std::vector<std::string>& candidates,
                    std::size_t k) {
        std::vector<std::string> ids;
        for (const auto& r : recommend_topk(checkpoint, scholar, &candidates, k)) {
          ids.push_back(r.paper_id);
        }
        return ids;
      },
      split, ks);
}

std::string format_report(const MetricsReport& report,
                          const std::vector<std::pair<std::string, std::string>>& config_echo) {
  std::string out;
  char buf[96];
  auto line = [&](const char* name, std::size_t k, double v) {
    std::snprintf(buf, sizeof buf, "%s@%zu = %.17g\n", name, k, v);
    out += buf;
  };
  for (std::size_t k : report.ks) line("precision", k, report.precision.at(k));
  for (std::size_t k : report.ks) line("recall", k, report.recall.at(k));
  for (std::size_t k : report.ks) line("ndcg", k, report.ndcg.at(k));
  out += "n_scholars = " + std::to_string(report.n_scholars) + "\n";
  for (const auto& [key, value] : config_echo) out += "config." + key + " = " + value + "\n";
  return out;
}

}  // namespace miarec
