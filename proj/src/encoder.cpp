#include "miarec/encoder.hpp"

#include <algorithm>
#include <cmath>

#include "miarec/error.hpp"
#include "miarec/numkernel.hpp"

namespace miarec {

std::string to_string(InfluenceMode mode) {
  switch (mode) {
    case InfluenceMode::Gravity: return "gravity";
    case InfluenceMode::Uniform: return "uniform";
    case InfluenceMode::Attention: return "attention";
  }
  return "unknown";
}

InfluenceMode parse_influence_mode(const std::string& name) {
  if (name == "gravity") return InfluenceMode::Gravity;
  if (name == "uniform") return InfluenceMode::Uniform;
  if (name == "attention") return InfluenceMode::Attention;
  throw ConfigError("unknown influence_mode: " + name);
}

std::string to_string(ParamGroup group) {
  switch (group) {
    case ParamGroup::ChannelWeights: return "channel_weights";
    case ParamGroup::SharedWeights: return "shared_weights";
    case ParamGroup::Attention: return "attention";
    case ParamGroup::Alignment: return "alignment";
    case ParamGroup::NodeFeatures: return "node_features";
    case ParamGroup::EdgeAttention: return "edge_attention";
    case ParamGroup::PaperEmbeddings: return "paper_embeddings";
  }
  return "unknown";
}

void EncoderConfig::validate() const {
  if (layers < 1) throw ConfigError("layers must be >= 1");
  if (sample_sizes.size() != layers) {
    throw ConfigError("sample_sizes must list one size per layer (" + std::to_string(layers) + ")");
  }
  for (std::size_t s : sample_sizes)
    if (s < 1) throw ConfigError("sample sizes must be >= 1");
  if (dim < 1) throw ConfigError("dim must be >= 1");
  if (attention_dim < 1) throw ConfigError("attention_dim must be >= 1");
}

namespace {

ChannelParams init_channel(const EncoderConfig& config, std::size_t n, Rng& rng) {
  ChannelParams c;
  const std::size_t d = config.dim;
  c.features = xavier_init(n, d, rng);
  for (std::size_t l = 0; l < config.layers; ++l) {
    c.weights.push_back(xavier_init(d, 2 * d, rng));
    if (config.influence_mode == InfluenceMode::Attention) {
      c.edge_proj.push_back(xavier_init(d, d, rng));
      c.edge_vec.push_back(xavier_init(1, 2 * d, rng));
    }
  }
  return c;
}

ChannelVars bind_channel(ad::Tape& tape, const ChannelParams& c, std::vector<ad::Var>* order) {
  auto param = [&](const Dense& m) {
    ad::Var v = tape.parameter(m);
    if (order) order->push_back(v);
    return v;
  };
  ChannelVars v;
  v.features = param(c.features);
  for (const auto& w : c.weights) v.weights.push_back(param(w));
  for (const auto& p : c.edge_proj) v.edge_proj.push_back(param(p));
  for (const auto& a : c.edge_vec) v.edge_vec.push_back(param(a));
  return v;
}

}  // namespace

EncoderParams init_encoder_params(const EncoderConfig& config, std::size_t n_nodes, std::size_t k,
                                  Rng& rng) {
  config.validate();
  EncoderParams p;
  for (std::size_t r = 0; r < k; ++r) p.independent.push_back(init_channel(config, n_nodes, rng));
  if (config.use_interdependent) p.shared = init_channel(config, n_nodes, rng);
  p.attention.weight = xavier_init(config.attention_dim, config.dim, rng);
  p.attention.bias = Dense(1, config.attention_dim);
  p.attention.query = xavier_init(1, config.attention_dim, rng);
  return p;
}

EncoderVars bind_encoder(ad::Tape& tape, const EncoderParams& params, std::vector<ad::Var>* order) {
  EncoderVars v;
  for (const auto& c : params.independent) v.independent.push_back(bind_channel(tape, c, order));
  if (!params.shared.weights.empty()) v.shared = bind_channel(tape, params.shared, order);
  auto param = [&](const Dense& m) {
    ad::Var var = tape.parameter(m);
    if (order) order->push_back(var);
    return var;
  };
  v.att_weight = param(params.attention.weight);
  v.att_bias = param(params.attention.bias);
  v.att_query = param(params.attention.query);
  return v;
}

std::vector<GraphContext> make_contexts(const HeterogeneousNetwork& network,
                                        const std::vector<InfluenceTable>& tables) {
  if (tables.size() != network.graphs.size()) {
    throw InconsistencyError("one influence table per relation graph is required");
  }
  std::vector<GraphContext> out;
  for (std::size_t r = 0; r < network.graphs.size(); ++r) {
    const RelationGraph& g = network.graphs[r];
    if (g.node_count() != network.graphs.front().node_count()) {
      throw InconsistencyError("relation graphs disagree on node count");
    }
    GraphContext ctx;
    ctx.graph = &g;
    std::vector<std::vector<std::size_t>> rows(g.node_count());
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      rows[i] = neighbor_indices(g, i);
      ctx.degree.push_back(static_cast<double>(rows[i].size()));
      const auto& m = tables[r].m.at(i);
      if (m.size() != rows[i].size()) throw InconsistencyError("influence table does not match graph");
      ctx.gravity.insert(ctx.gravity.end(), m.begin(), m.end());
    }
    ctx.full = std::make_shared<const kernels::SparseRows>(
        kernels::SparseRows::from_lists(g.node_count(), rows));
    out.push_back(std::move(ctx));
  }
  return out;
}

SampledLayer make_sampled_layer(const GraphContext& ctx,
                                const std::vector<std::vector<std::size_t>>& samples) {
  const auto& full = *ctx.full;
  SampledLayer layer;
  layer.adj = std::make_shared<const kernels::SparseRows>(
      kernels::SparseRows::from_lists(full.n_cols, samples));
  layer.base = Dense(layer.adj->nnz(), 1);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double sn = static_cast<double>(samples[i].size());
    for (std::size_t k = layer.adj->row_begin(i); k < layer.adj->row_end(i); ++k) {
      const std::size_t j = layer.adj->targets[k];
      const auto begin = full.targets.begin() + static_cast<std::ptrdiff_t>(full.row_begin(i));
      const auto end = full.targets.begin() + static_cast<std::ptrdiff_t>(full.row_end(i));
      const auto it = std::lower_bound(begin, end, j);
      if (it == end || *it != j) throw InconsistencyError("sampled node is not a neighbor");
      layer.full_entry.push_back(static_cast<std::size_t>(it - full.targets.begin()));
      layer.base[k] = 1.0 / (sn * std::sqrt(ctx.degree[i]) * std::sqrt(ctx.degree[j]));
    }
  }
  return layer;
}

NetworkSample sample_network(const std::vector<GraphContext>& contexts,
                             const EncoderConfig& config, std::uint64_t seed, std::uint64_t epoch) {
  config.validate();
  auto draw = [&](std::uint64_t channel_kind, std::size_t r) {
    const GraphContext& ctx = contexts[r];
    std::vector<SampledLayer> layers;
    for (std::size_t l = 0; l < config.layers; ++l) {
      std::vector<std::vector<std::size_t>> samples(ctx.graph->node_count());
      for (std::size_t i = 0; i < samples.size(); ++i) {
        if (ctx.graph->degree(i) == 0) continue;
        Rng rng = make_stream(seed, {epoch, channel_kind, r, l, i});
        samples[i] = sample_neighbors(*ctx.graph, i, config.sample_sizes[l], rng);
      }
      layers.push_back(make_sampled_layer(ctx, samples));
    }
    return layers;
  };
  NetworkSample out;
  for (std::size_t r = 0; r < contexts.size(); ++r) {
    out.independent.push_back(draw(0, r));
    if (config.use_interdependent) out.shared.push_back(draw(1, r));
  }
  return out;
}

ad::Var aggregate_layer(const GraphContext& ctx, const SampledLayer& layer, ad::Var prev,
                        InfluenceMode mode, const ChannelVars* channel, std::size_t l) {
  ad::Tape& tape = *prev.tape;
  ad::Var coef;
  switch (mode) {
    case InfluenceMode::Uniform:
      coef = tape.constant(layer.base);
      break;
    case InfluenceMode::Gravity: {
      Dense c(layer.base);
      for (std::size_t k = 0; k < c.size(); ++k) c[k] *= ctx.gravity[layer.full_entry[k]];
      coef = tape.constant(std::move(c));
      break;
    }
    case InfluenceMode::Attention: {
      if (channel == nullptr || l >= channel->edge_proj.size()) {
        throw ConfigError("attention mode needs edge attention parameters");
      }
      ad::Var z = ad::matmul_bt(prev, channel->edge_proj[l]);
      ad::Var e = ad::leaky_relu(ad::edge_scores(ctx.full, z, channel->edge_vec[l]),
                                 kEdgeAttentionSlope);
      ad::Var m = ad::segment_softmax(ctx.full, e);
      coef = ad::mul_const(ad::gather_rows(m, layer.full_entry), layer.base);
      break;
    }
  }
  return ad::relu(ad::spmm(layer.adj, coef, prev));
}

ad::Var layer_forward(const GraphContext& ctx, const SampledLayer& layer, ad::Var prev,
                      ad::Var weight, InfluenceMode mode, const ChannelVars* channel,
                      std::size_t l) {
  const std::size_t d = prev.cols();
  if (weight.cols() != 2 * d) {
    throw DimensionError("layer weight has " + std::to_string(weight.cols()) +
                         " columns, expected " + std::to_string(2 * d));
  }
  ad::Var agg = aggregate_layer(ctx, layer, prev, mode, channel, l);
  return ad::relu(ad::matmul_bt(ad::concat_cols({prev, agg}), weight));
}

ad::Var channel_forward(const GraphContext& ctx, const std::vector<SampledLayer>& layers,
                        const ChannelVars& channel, InfluenceMode mode) {
  if (layers.size() != channel.weights.size()) {
    throw DimensionError("sampled layer count does not match channel depth");
  }
  ad::Var h = channel.features;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    h = layer_forward(ctx, layers[l], h, channel.weights[l], mode, &channel, l);
  }
  return h;
}

ad::Var interdependent_forward(const std::vector<GraphContext>& contexts,
                               const std::vector<std::vector<SampledLayer>>& layers,
                               const ChannelVars& shared, InfluenceMode mode,
                               std::vector<ad::Var>* per_graph) {
  if (contexts.empty()) throw InconsistencyError("interdependent channel needs at least one graph");
  if (layers.size() != contexts.size()) throw InconsistencyError("one sample per graph required");
  const auto& universe = contexts.front().graph->node_ids();
  std::vector<ad::Var> outs;
  for (std::size_t r = 0; r < contexts.size(); ++r) {
    if (contexts[r].graph->node_ids() != universe) {
      throw InconsistencyError("relation graphs disagree on the scholar universe");
    }
    outs.push_back(channel_forward(contexts[r], layers[r], shared, mode));
  }
  if (per_graph) *per_graph = outs;
  return ad::mean(outs);
}

FusedVars attention_fuse(const std::vector<ad::Var>& channels, ad::Var att_weight,
                         ad::Var att_bias, ad::Var att_query) {
  if (channels.empty()) throw DimensionError("attention fusion of no channels");
  for (ad::Var c : channels) {
    if (!c.value().same_shape(channels.front().value())) {
      throw DimensionError("channel embeddings differ in shape");
    }
  }
  std::vector<ad::Var> scores;
  for (ad::Var c : channels) {
    ad::Var hidden = ad::tanh(ad::add_row(ad::matmul_bt(c, att_weight), att_bias));
    scores.push_back(ad::matmul_bt(hidden, att_query));
  }
  ad::Var alpha = ad::row_softmax(ad::concat_cols(scores));
  ad::Var fused = ad::row_scale(channels[0], ad::column(alpha, 0));
  for (std::size_t c = 1; c < channels.size(); ++c) {
    fused = ad::add(fused, ad::row_scale(channels[c], ad::column(alpha, c)));
  }
  return {fused, alpha};
}

EncodedVars encode(const std::vector<GraphContext>& contexts, const NetworkSample& sample,
                   const EncoderVars& vars, const EncoderConfig& config) {
  if (vars.independent.size() != contexts.size()) {
    throw DimensionError("one independent channel per relation graph is required");
  }
  EncodedVars out;
  for (std::size_t r = 0; r < contexts.size(); ++r) {
    out.independent.push_back(channel_forward(contexts[r], sample.independent.at(r),
                                              vars.independent[r], config.influence_mode));
  }
  std::vector<ad::Var> channels = out.independent;
  if (config.use_interdependent) {
    if (!vars.shared) throw ConfigError("interdependent channel enabled but has no parameters");
    out.shared = interdependent_forward(contexts, sample.shared, *vars.shared,
                                        config.influence_mode, &out.shared_per_graph);
    channels.push_back(*out.shared);
  }
  out.fused = attention_fuse(channels, vars.att_weight, vars.att_bias, vars.att_query);
  return out;
}

ScholarEmbeddings encode_values(const std::vector<GraphContext>& contexts,
                                const NetworkSample& sample, const EncoderParams& params,
                                const EncoderConfig& config) {
  ad::Tape tape;
  EncoderVars vars = bind_encoder(tape, params);
  EncodedVars enc = encode(contexts, sample, vars, config);
  ScholarEmbeddings out;
  for (ad::Var v : enc.independent) out.independent.push_back(v.value());
  for (ad::Var v : enc.shared_per_graph) out.shared_per_graph.push_back(v.value());
  if (enc.shared) out.shared = enc.shared->value();
  out.fused = enc.fused.fused.value();
  out.alpha = enc.fused.alpha.value();
  return out;
}

std::vector<double> aggregate_node(const RelationGraph& graph, const InfluenceTable* table,
                                   std::size_t node, const Dense& prev,
                                   std::span<const std::size_t> sampled) {
  if (prev.rows() != graph.node_count()) throw DimensionError("embedding rows != node count");
  std::vector<double> out(prev.cols(), 0.0);
  if (sampled.empty()) return out;
  const double an_i = static_cast<double>(graph.degree(node));
  for (std::size_t j : sampled) {
    const double m = table ? table->coefficient(graph, node, j) : 1.0;
    const double c = m / (std::sqrt(an_i) * std::sqrt(static_cast<double>(graph.degree(j))));
    for (std::size_t x = 0; x < out.size(); ++x) out[x] += c * prev(j, x);
  }
  const double inv = 1.0 / static_cast<double>(sampled.size());
  for (double& v : out) v = std::max(0.0, v * inv);
  return out;
}

std::vector<double> aggregate(const RelationGraph& graph, const InfluenceTable* table,
                              std::size_t node, const Dense& prev, std::size_t sample_size,
                              Rng& rng) {
  if (graph.degree(node) == 0) return std::vector<double>(prev.cols(), 0.0);
  const auto sampled = sample_neighbors(graph, node, sample_size, rng);
  return aggregate_node(graph, table, node, prev, sampled);
}

}  // namespace miarec
