#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "miarec/corpus.hpp"
#include "miarec/rng.hpp"

namespace miarec {

enum class RelationKind { Collaboration, CoTopic, CoVenue, CoOrg };

std::string to_string(RelationKind kind);
/// Accepts "collaboration", "co_topic", "co_venue", "co_org".
RelationKind parse_relation_kind(const std::string& name);

/// Scholar ids shared by every relation graph of a network.
struct NodeUniverse {
  std::vector<std::string> ids;
  std::unordered_map<std::string, std::size_t> index;

  explicit NodeUniverse(std::vector<std::string> scholar_ids);
};

struct Neighbor {
  std::size_t node;
  std::size_t weight;  // co-occurrence count, >= 1
};

/// Undirected weighted scholar graph for one relation kind. Nodes are the
/// corpus scholar indices; adjacency rows are sorted by neighbor index.
class RelationGraph {
 public:
  RelationGraph(RelationKind kind, std::shared_ptr<const NodeUniverse> universe,
                const std::vector<std::pair<std::pair<std::size_t, std::size_t>, std::size_t>>&
                    weighted_edges);

  RelationKind kind() const noexcept { return kind_; }
  std::size_t node_count() const noexcept { return adjacency_.size(); }
  std::size_t edge_count() const noexcept { return edge_count_; }
  const std::vector<std::string>& node_ids() const noexcept { return universe_->ids; }
  const std::shared_ptr<const NodeUniverse>& universe() const noexcept { return universe_; }

  const std::vector<Neighbor>& adjacent(std::size_t node) const { return adjacency_.at(node); }
  std::size_t degree(std::size_t node) const { return adjacency_.at(node).size(); }
  /// Co-occurrence weight of edge (a, b), or nullopt if absent.
  std::optional<std::size_t> weight(std::size_t a, std::size_t b) const;
  /// Index of a scholar id; throws LookupError when unknown.
  std::size_t node_index(const std::string& scholar_id) const;

  /// Canonical (a < b) edge list with weights, sorted.
  std::vector<std::pair<std::pair<std::size_t, std::size_t>, std::size_t>> edges() const;

 private:
  RelationKind kind_;
  std::shared_ptr<const NodeUniverse> universe_;
  std::vector<std::vector<Neighbor>> adjacency_;
  std::size_t edge_count_ = 0;
};

/// Relation graphs sharing one scholar universe.
struct HeterogeneousNetwork {
  std::vector<RelationGraph> graphs;

  std::size_t k() const noexcept { return graphs.size(); }
  std::size_t node_count() const { return graphs.empty() ? 0 : graphs.front().node_count(); }
  /// Throws InconsistencyError if fewer than two graphs or node sets differ.
  void validate() const;
};

/// Default threshold: 3 shared keywords for CoTopic, 1 otherwise.
std::size_t default_min_shared(RelationKind kind);

RelationGraph extract_relation(const CorpusStore& corpus, RelationKind kind,
                               std::size_t min_shared);
HeterogeneousNetwork build_network(const CorpusStore& corpus, const std::vector<RelationKind>& kinds,
                                   std::size_t min_shared_topic = 3);

/// Case-folded, whitespace-trimmed form used for keyword/venue/org matching.
std::string normalize_label(const std::string& s);

std::set<std::string> neighbors(const RelationGraph& graph, const std::string& scholar_id);
std::vector<std::size_t> neighbor_indices(const RelationGraph& graph, std::size_t node);

/// All neighbors if degree <= s, otherwise a uniform sample without
/// replacement of size s (returned in ascending index order).
std::vector<std::size_t> sample_neighbors(const RelationGraph& graph, std::size_t node,
                                          std::size_t s, Rng& rng);
std::vector<std::string> sample_neighbors(const RelationGraph& graph, const std::string& scholar_id,
                                          std::size_t s, Rng& rng);

/// "<kind> <a> <b> <co_occurrence>" per edge, lines sorted lexicographically.
std::string dump_graph(const RelationGraph& graph);

}  // namespace miarec
