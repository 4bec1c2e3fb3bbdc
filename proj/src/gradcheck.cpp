#include "miarec/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "miarec/numkernel.hpp"

namespace miarec {

namespace {

constexpr std::size_t kScholars = 6;
constexpr std::size_t kPapers = 4;

RelationGraph fixture_graph(RelationKind kind, const std::shared_ptr<const NodeUniverse>& ids,
                            std::vector<std::pair<std::pair<std::size_t, std::size_t>, std::size_t>> e) {
  return RelationGraph(kind, ids, e);
}

}  // namespace

GradcheckFixture make_gradcheck_fixture(double gravitational_constant) {
  GradcheckFixture f;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < kScholars; ++i) names.push_back("s" + std::to_string(i));
  auto ids = std::make_shared<const NodeUniverse>(names);

  f.network = std::make_unique<HeterogeneousNetwork>();
  f.network->graphs.push_back(fixture_graph(
      RelationKind::Collaboration, ids,
      {{{0, 1}, 2}, {{1, 2}, 1}, {{2, 3}, 1}, {{3, 4}, 3}, {{4, 5}, 1}, {{0, 5}, 1}, {{1, 3}, 1}}));
  f.network->graphs.push_back(fixture_graph(
      RelationKind::CoTopic, ids, {{{0, 2}, 3}, {{0, 3}, 4}, {{2, 4}, 3}, {{1, 5}, 5}, {{3, 5}, 3}}));
  // Scholar 3 is isolated in the venue graph.
  f.network->graphs.push_back(fixture_graph(
      RelationKind::CoVenue, ids, {{{0, 1}, 1}, {{0, 2}, 1}, {{1, 2}, 1}, {{4, 5}, 2}, {{2, 5}, 1}}));

  // Small masses keep the softmax away from saturation at G = 1.
  f.masses = {3, 0, 2, 1, 1, 2};
  const double g = gravitational_constant / 16.0;
  for (const auto& graph : f.network->graphs) f.tables.push_back(build_table(graph, f.masses, g));
  f.contexts = make_contexts(*f.network, f.tables);

  Rng rng = make_stream(2024, {1});
  f.doc_vectors = xavier_init(kPapers, 3, rng);
  for (std::size_t i = 0; i < f.doc_vectors.size(); ++i) f.doc_vectors[i] *= 2.0;
  f.triples = {{0, 0, 1}, {1, 2, 3}, {2, 1, 0}, {3, 3, 2}, {4, 0, 2}, {5, 2, 1}, {0, 3, 1}};
  return f;
}

bool GradcheckReport::all_passed() const {
  return std::all_of(rows.begin(), rows.end(), [](const GradcheckRow& r) { return r.passed; });
}

GradcheckReport run_gradcheck(const GradcheckOptions& options) {
  const GradcheckFixture f = make_gradcheck_fixture(options.gravitational_constant);
  struct Pass {
    InfluenceMode mode;
    bool use_content;
  };
  const Pass passes[] = {{InfluenceMode::Gravity, true},
                         {InfluenceMode::Uniform, true},
                         {InfluenceMode::Attention, false}};

  std::map<ParamGroup, GradcheckRow> rows;
  for (const Pass& pass : passes) {
    TrainConfig cfg;
    cfg.seed = 11;
    cfg.use_content = pass.use_content;
    cfg.encoder.layers = 2;
    cfg.encoder.sample_sizes = {2, 2};
    cfg.encoder.dim = 4;
    cfg.encoder.attention_dim = 3;
    cfg.encoder.influence_mode = pass.mode;
    cfg.content.dim = f.doc_vectors.cols();
    ModelParams params = init_model_params(cfg, kScholars, f.contexts.size(), kPapers,
                                           f.doc_vectors.cols());
    // Positive alignment bias keeps the output ReLU active on the fixture.
    params.alignment.bias.fill(0.3);
    const NetworkSample sample = sample_network(f.contexts, cfg.encoder, 5, 1);
    const Dense* docs = pass.use_content ? &f.doc_vectors : nullptr;

    BatchResult analytic =
        batch_gradient(params, f.contexts, sample, cfg.encoder, docs, f.triples, options.reg_weight);

    std::vector<Dense*> tensors;
    std::vector<ParamGroup> groups;
    for_each_model_tensor(params, [&](const std::string&, ParamGroup g, Dense& m) {
      tensors.push_back(&m);
      groups.push_back(g);
    });
    auto loss = [&] {
      return batch_gradient(params, f.contexts, sample, cfg.encoder, docs, f.triples,
                            options.reg_weight)
          .loss;
    };
    const auto numeric = finite_difference_gradient(loss, tensors, options.eps);

    for (std::size_t t = 0; t < tensors.size(); ++t) {
      Dense a = analytic.grads[t];
      if (options.corrupt && *options.corrupt == groups[t] && !a.empty()) {
        a[0] += 1e-2 * (1.0 + std::abs(a[0]));
      }
      auto& row = rows[groups[t]];
      row.group = groups[t];
      row.n_params += a.size();
      row.max_rel_error = std::max(row.max_rel_error, max_relative_error(a, numeric[t]));
    }
  }

  GradcheckReport report;
  for (auto& [group, row] : rows) {
    row.passed = row.max_rel_error <= options.tolerance;
    report.rows.push_back(row);
  }
  return report;
}

std::string format_gradcheck(const GradcheckReport& report, double tolerance) {
  std::string out;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-18s %8s %14s  %s\n", "group", "params", "max_rel_err", "status");
  out += buf;
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%-18s %8zu %14.3e  %s\n", to_string(r.group).c_str(),
                  r.n_params, r.max_rel_error, r.passed ? "PASS" : "FAIL");
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "tolerance %.1e: %s\n", tolerance,
                report.all_passed() ? "all groups pass" : "FAILED");
  out += buf;
  return out;
}

}  // namespace miarec
