#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "miarec/autodiff.hpp"
#include "miarec/dense.hpp"
#include "miarec/hetnet.hpp"
#include "miarec/influence.hpp"
#include "miarec/kernels.hpp"
#include "miarec/rng.hpp"

namespace miarec {

/// How neighbor coefficients M_ij are obtained during aggregation.
enum class InfluenceMode {
  Gravity,    // softmax of gravity influence factors
  Uniform,    // M_ij = 1 (symmetric normalisation only)
  Attention,  // learned single-head edge attention
};

std::string to_string(InfluenceMode mode);
InfluenceMode parse_influence_mode(const std::string& name);

inline constexpr double kEdgeAttentionSlope = 0.2;

struct EncoderConfig {
  std::size_t layers = 2;
  std::vector<std::size_t> sample_sizes{10, 10};
  std::size_t dim = 64;
  std::size_t attention_dim = 64;
  InfluenceMode influence_mode = InfluenceMode::Gravity;
  bool use_interdependent = true;

  void validate() const;
  /// Channels fused by attention: k independent plus the interdependent one.
  std::size_t channel_count(std::size_t k) const { return k + (use_interdependent ? 1 : 0); }
};

/// Trainable state of one channel. Edge attention matrices are only present in
/// attention mode.
struct ChannelParams {
  Dense features;               // n x d initial node embeddings
  std::vector<Dense> weights;   // per layer, d x 2d
  std::vector<Dense> edge_proj; // per layer, d x d
  std::vector<Dense> edge_vec;  // per layer, 1 x 2d
};

struct AttentionParams {
  Dense weight;  // d_att x d
  Dense bias;    // 1 x d_att
  Dense query;   // 1 x d_att
};

struct EncoderParams {
  std::vector<ChannelParams> independent;  // one per relation graph
  ChannelParams shared;                    // interdependent channel (empty if disabled)
  AttentionParams attention;
};

EncoderParams init_encoder_params(const EncoderConfig& config, std::size_t n_nodes, std::size_t k,
                                  Rng& rng);

/// Parameter groups used for reporting gradient checks.
enum class ParamGroup {
  ChannelWeights,
  SharedWeights,
  Attention,
  Alignment,
  NodeFeatures,
  EdgeAttention,
  PaperEmbeddings,
};
std::string to_string(ParamGroup group);

/// Visits every trainable matrix in a fixed order.
template <typename Params, typename F>
void for_each_tensor(Params& p, F&& f) {
  auto channel = [&](auto& c, const std::string& prefix, ParamGroup weights_group) {
    f(prefix + ".features", ParamGroup::NodeFeatures, c.features);
    for (std::size_t l = 0; l < c.weights.size(); ++l)
      f(prefix + ".weight" + std::to_string(l), weights_group, c.weights[l]);
    for (std::size_t l = 0; l < c.edge_proj.size(); ++l)
      f(prefix + ".edge_proj" + std::to_string(l), ParamGroup::EdgeAttention, c.edge_proj[l]);
    for (std::size_t l = 0; l < c.edge_vec.size(); ++l)
      f(prefix + ".edge_vec" + std::to_string(l), ParamGroup::EdgeAttention, c.edge_vec[l]);
  };
  for (std::size_t r = 0; r < p.independent.size(); ++r)
    channel(p.independent[r], "channel" + std::to_string(r), ParamGroup::ChannelWeights);
  if (!p.shared.weights.empty()) channel(p.shared, "shared", ParamGroup::SharedWeights);
  f(std::string("attention.weight"), ParamGroup::Attention, p.attention.weight);
  f(std::string("attention.bias"), ParamGroup::Attention, p.attention.bias);
  f(std::string("attention.query"), ParamGroup::Attention, p.attention.query);
}

/// Static per-graph inputs: full adjacency plus precomputed gravity coefficients.
struct GraphContext {
  const RelationGraph* graph = nullptr;
  std::shared_ptr<const kernels::SparseRows> full;
  std::vector<double> gravity;  // M_ij aligned with full's entries
  std::vector<double> degree;   // |AN_i|
};

std::vector<GraphContext> make_contexts(const HeterogeneousNetwork& network,
                                        const std::vector<InfluenceTable>& tables);

/// One layer's sampled neighborhoods. base[k] = 1 / (|SN_i| sqrt|AN_i| sqrt|AN_j|);
/// full_entry[k] locates the same edge in the full adjacency.
struct SampledLayer {
  std::shared_ptr<const kernels::SparseRows> adj;
  std::vector<std::size_t> full_entry;
  Dense base;  // nnz x 1
};

struct NetworkSample {
  // [graph][layer]
  std::vector<std::vector<SampledLayer>> independent;
  std::vector<std::vector<SampledLayer>> shared;
};

/// Builds a layer from explicit per-node sample lists.
SampledLayer make_sampled_layer(const GraphContext& ctx,
                                const std::vector<std::vector<std::size_t>>& samples);

/// Draws SN_i for every (channel, graph, layer, node) from its own stream of
/// (seed, epoch), so the result is independent of evaluation order.
NetworkSample sample_network(const std::vector<GraphContext>& contexts,
                             const EncoderConfig& config, std::uint64_t seed, std::uint64_t epoch);

/// Tape bindings mirroring ChannelParams / EncoderParams.
struct ChannelVars {
  ad::Var features;
  std::vector<ad::Var> weights, edge_proj, edge_vec;
};

struct EncoderVars {
  std::vector<ChannelVars> independent;
  std::optional<ChannelVars> shared;
  ad::Var att_weight, att_bias, att_query;
};

/// Registers every encoder matrix as a tape parameter. `order` receives the
/// vars in for_each_tensor order when non-null.
EncoderVars bind_encoder(ad::Tape& tape, const EncoderParams& params,
                         std::vector<ad::Var>* order = nullptr);

/// Eq.-1 aggregation for every node of a sampled layer, before the activation
/// is applied: returns ReLU(sum_k coef_k u_{j_k}) with coef from the mode.
ad::Var aggregate_layer(const GraphContext& ctx, const SampledLayer& layer, ad::Var prev,
                        InfluenceMode mode, const ChannelVars* channel, std::size_t l);

/// u^(l) = ReLU(W^(l) concat(u^(l-1), AGG^(l))).
ad::Var layer_forward(const GraphContext& ctx, const SampledLayer& layer, ad::Var prev,
                      ad::Var weight, InfluenceMode mode, const ChannelVars* channel,
                      std::size_t l);

ad::Var channel_forward(const GraphContext& ctx, const std::vector<SampledLayer>& layers,
                        const ChannelVars& channel, InfluenceMode mode);

/// Mean over graphs of the shared-weight channel outputs; returns U' and fills
/// `per_graph` with U'^r when non-null.
ad::Var interdependent_forward(const std::vector<GraphContext>& contexts,
                               const std::vector<std::vector<SampledLayer>>& layers,
                               const ChannelVars& shared, InfluenceMode mode,
                               std::vector<ad::Var>* per_graph = nullptr);

struct FusedVars {
  ad::Var fused;  // U
  ad::Var alpha;  // n x C channel weights
};

FusedVars attention_fuse(const std::vector<ad::Var>& channels, ad::Var att_weight,
                         ad::Var att_bias, ad::Var att_query);

struct EncodedVars {
  std::vector<ad::Var> independent;   // U^r
  std::vector<ad::Var> shared_per_graph;  // U'^r
  std::optional<ad::Var> shared;      // U'
  FusedVars fused;
};

EncodedVars encode(const std::vector<GraphContext>& contexts, const NetworkSample& sample,
                   const EncoderVars& vars, const EncoderConfig& config);

/// Plain-value snapshot of an encoding.
struct ScholarEmbeddings {
  std::vector<Dense> independent;
  std::vector<Dense> shared_per_graph;
  Dense shared;
  Dense fused;
  Dense alpha;  // columns: channels 1..k then interdependent
};

ScholarEmbeddings encode_values(const std::vector<GraphContext>& contexts,
                                const NetworkSample& sample, const EncoderParams& params,
                                const EncoderConfig& config);

/// Single-node Eq.-1 aggregation from explicit inputs; the reference form used
/// by tests and diagnostics. `table` null means uniform (M = 1).
std::vector<double> aggregate_node(const RelationGraph& graph, const InfluenceTable* table,
                                   std::size_t node, const Dense& prev,
                                   std::span<const std::size_t> sampled);

/// Samples SN_i with `rng` then aggregates.
std::vector<double> aggregate(const RelationGraph& graph, const InfluenceTable* table,
                              std::size_t node, const Dense& prev, std::size_t sample_size,
                              Rng& rng);

}  // namespace miarec
