#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "miarec/encoder.hpp"
#include "miarec/recommender.hpp"

namespace miarec {

/// Six scholars, four papers, three relation graphs (one with an isolated
/// node) and a fixed batch of triples. Sampling is drawn once and frozen.
struct GradcheckFixture {
  std::unique_ptr<HeterogeneousNetwork> network;
  std::vector<InfluenceTable> tables;
  std::vector<GraphContext> contexts;
  Dense doc_vectors;
  std::vector<Triple> triples;
  std::vector<std::uint64_t> masses;
};

GradcheckFixture make_gradcheck_fixture(double gravitational_constant = 1.0);

struct GradcheckOptions {
  double eps = 1e-5;
  double tolerance = 1e-4;
  double reg_weight = 0.0005;
  double gravitational_constant = 1.0;
  /// Test hook: perturb the analytic gradient of this group.
  std::optional<ParamGroup> corrupt;
};

struct GradcheckRow {
  ParamGroup group;
  std::size_t n_params = 0;
  double max_rel_error = 0.0;
  bool passed = false;
};

struct GradcheckReport {
  std::vector<GradcheckRow> rows;
  bool all_passed() const;
};

/// Runs the fixture in gravity, uniform and attention modes (the last with
/// learned paper embeddings) and compares every parameter's analytic BPR
/// gradient against central differences.
GradcheckReport run_gradcheck(const GradcheckOptions& options);

std::string format_gradcheck(const GradcheckReport& report, double tolerance);

}  // namespace miarec
