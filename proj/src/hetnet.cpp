#include "miarec/hetnet.hpp"

#include <algorithm>
#include <cctype>
#include <iterator>
#include <map>

#include "miarec/error.hpp"

namespace miarec {

std::string to_string(RelationKind kind) {
  switch (kind) {
    case RelationKind::Collaboration: return "collaboration";
    case RelationKind::CoTopic: return "co_topic";
    case RelationKind::CoVenue: return "co_venue";
    case RelationKind::CoOrg: return "co_org";
  }
  return "unknown";
}

RelationKind parse_relation_kind(const std::string& name) {
  if (name == "collaboration") return RelationKind::Collaboration;
  if (name == "co_topic") return RelationKind::CoTopic;
  if (name == "co_venue") return RelationKind::CoVenue;
  if (name == "co_org") return RelationKind::CoOrg;
  throw ConfigError("unknown relation kind: " + name);
}

NodeUniverse::NodeUniverse(std::vector<std::string> scholar_ids) : ids(std::move(scholar_ids)) {
  for (std::size_t i = 0; i < ids.size(); ++i) index.emplace(ids[i], i);
}

RelationGraph::RelationGraph(
    RelationKind kind, std::shared_ptr<const NodeUniverse> universe,
    const std::vector<std::pair<std::pair<std::size_t, std::size_t>, std::size_t>>& weighted_edges)
    : kind_(kind), universe_(std::move(universe)), adjacency_(universe_->ids.size()) {
  for (const auto& [pair, w] : weighted_edges) {
    const auto [a, b] = pair;
    if (a == b || w == 0) continue;
    adjacency_.at(a).push_back({b, w});
    adjacency_.at(b).push_back({a, w});
    ++edge_count_;
  }
  for (auto& row : adjacency_) {
    std::sort(row.begin(), row.end(),
              [](const Neighbor& x, const Neighbor& y) { return x.node < y.node; });
  }
}

std::optional<std::size_t> RelationGraph::weight(std::size_t a, std::size_t b) const {
  const auto& row = adjacency_.at(a);
  auto it = std::lower_bound(row.begin(), row.end(), b,
                             [](const Neighbor& n, std::size_t v) { return n.node < v; });
  if (it == row.end() || it->node != b) return std::nullopt;
  return it->weight;
}

std::size_t RelationGraph::node_index(const std::string& scholar_id) const {
  auto it = universe_->index.find(scholar_id);
  if (it == universe_->index.end()) throw LookupError("unknown scholar: " + scholar_id);
  return it->second;
}

std::vector<std::pair<std::pair<std::size_t, std::size_t>, std::size_t>> RelationGraph::edges()
    const {
  std::vector<std::pair<std::pair<std::size_t, std::size_t>, std::size_t>> out;
  for (std::size_t a = 0; a < adjacency_.size(); ++a)
    for (const auto& n : adjacency_[a])
      if (a < n.node) out.push_back({{a, n.node}, n.weight});
  return out;
}

void HeterogeneousNetwork::validate() const {
  if (graphs.size() < 2) {
    throw InconsistencyError("a heterogeneous network needs at least two relation graphs");
  }
  for (const auto& g : graphs) {
    if (g.node_ids() != graphs.front().node_ids()) {
      throw InconsistencyError("relation graphs disagree on the scholar universe");
    }
  }
}

std::size_t default_min_shared(RelationKind kind) {
  return kind == RelationKind::CoTopic ? 3 : 1;
}

std::string normalize_label(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  std::string out = s.substr(first, last - first + 1);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

namespace {

using EdgeCounts = std::map<std::pair<std::size_t, std::size_t>, std::size_t>;

/// Per-scholar label sets -> pair counts of shared labels via an inverted index.
EdgeCounts shared_label_counts(const std::vector<std::set<std::string>>& labels) {
  std::map<std::string, std::vector<std::size_t>> holders;
  for (std::size_t s = 0; s < labels.size(); ++s)
    for (const auto& l : labels[s]) holders[l].push_back(s);
  EdgeCounts counts;
  for (const auto& [label, who] : holders)
    for (std::size_t x = 0; x < who.size(); ++x)
      for (std::size_t y = x + 1; y < who.size(); ++y) ++counts[{who[x], who[y]}];
  return counts;
}

}  // namespace

RelationGraph extract_relation(const CorpusStore& corpus, RelationKind kind,
                               std::size_t min_shared) {
  if (min_shared < 1) throw ConfigError("min_shared must be >= 1");
  auto ids = std::make_shared<const NodeUniverse>(corpus.scholar_ids());
  const std::size_t n = corpus.scholar_count();
  EdgeCounts counts;

  if (kind == RelationKind::Collaboration) {
    for (const auto& paper : corpus.papers()) {
      std::set<std::size_t> authors;
      for (const auto& a : paper.authors) authors.insert(*corpus.scholar_index(a.id));
      for (auto x = authors.begin(); x != authors.end(); ++x)
        for (auto y = std::next(x); y != authors.end(); ++y) ++counts[{*x, *y}];
    }
  } else {
    std::vector<std::set<std::string>> labels(n);
    for (const auto& paper : corpus.papers()) {
      for (const auto& a : paper.authors) {
        auto& set = labels[*corpus.scholar_index(a.id)];
        switch (kind) {
          case RelationKind::CoTopic:
            for (const auto& k : paper.keywords) {
              auto l = normalize_label(k);
              if (!l.empty()) set.insert(std::move(l));
            }
            break;
          case RelationKind::CoVenue:
            if (auto l = normalize_label(paper.venue); !l.empty()) set.insert(std::move(l));
            break;
          case RelationKind::CoOrg:
            if (a.org) {
              if (auto l = normalize_label(*a.org); !l.empty()) set.insert(std::move(l));
            }
            break;
          case RelationKind::Collaboration: break;
        }
      }
    }
    counts = shared_label_counts(labels);
  }

  std::vector<std::pair<std::pair<std::size_t, std::size_t>, std::size_t>> edges;
  for (const auto& [pair, c] : counts)
    if (c >= min_shared) edges.push_back({pair, c});
  return RelationGraph(kind, std::move(ids), edges);
}

HeterogeneousNetwork build_network(const CorpusStore& corpus, const std::vector<RelationKind>& kinds,
                                   std::size_t min_shared_topic) {
  HeterogeneousNetwork net;
  for (RelationKind kind : kinds) {
    const std::size_t threshold =
        kind == RelationKind::CoTopic ? min_shared_topic : default_min_shared(kind);
    net.graphs.push_back(extract_relation(corpus, kind, threshold));
  }
  return net;
}

std::vector<std::size_t> neighbor_indices(const RelationGraph& graph, std::size_t node) {
  if (node >= graph.node_count()) throw LookupError("node index out of range");
  std::vector<std::size_t> out;
  for (const auto& n : graph.adjacent(node)) out.push_back(n.node);
  return out;
}

std::set<std::string> neighbors(const RelationGraph& graph, const std::string& scholar_id) {
  std::set<std::string> out;
  for (std::size_t j : neighbor_indices(graph, graph.node_index(scholar_id))) {
    out.insert(graph.node_ids()[j]);
  }
  return out;
}

std::vector<std::size_t> sample_neighbors(const RelationGraph& graph, std::size_t node,
                                          std::size_t s, Rng& rng) {
  if (s < 1) throw ConfigError("sample size must be >= 1");
  auto all = neighbor_indices(graph, node);
  if (all.size() <= s) return all;
  std::vector<std::size_t> out;
  std::sample(all.begin(), all.end(), std::back_inserter(out), s, rng);
  return out;
}

std::vector<std::string> sample_neighbors(const RelationGraph& graph, const std::string& scholar_id,
                                          std::size_t s, Rng& rng) {
  std::vector<std::string> out;
  for (std::size_t j : sample_neighbors(graph, graph.node_index(scholar_id), s, rng)) {
    out.push_back(graph.node_ids()[j]);
  }
  return out;
}

std::string dump_graph(const RelationGraph& graph) {
  std::vector<std::string> lines;
  const auto& ids = graph.node_ids();
  for (const auto& [pair, w] : graph.edges()) {
    std::string a = ids[pair.first], b = ids[pair.second];
    if (b < a) std::swap(a, b);
    lines.push_back(to_string(graph.kind()) + " " + a + " " + b + " " + std::to_string(w));
  }
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

}  // namespace miarec
