#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "miarec/encoder.hpp"
#include "miarec/error.hpp"
#include "miarec/gradcheck.hpp"
#include "miarec/numkernel.hpp"

using namespace miarec;

namespace {

using Edges = std::vector<std::pair<std::pair<std::size_t, std::size_t>, std::size_t>>;

std::shared_ptr<const NodeUniverse> universe(std::size_t n) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back("n" + std::to_string(i));
  return std::make_shared<const NodeUniverse>(ids);
}

struct Fixture {
  HeterogeneousNetwork net;
  std::vector<InfluenceTable> tables;
  std::vector<GraphContext> contexts;
};

std::unique_ptr<Fixture> fixture(std::size_t n, const std::vector<Edges>& graphs,
                                 const std::vector<std::uint64_t>& mass) {
  auto f = std::make_unique<Fixture>();
  auto ids = universe(n);
  for (const auto& e : graphs) f->net.graphs.emplace_back(RelationKind::Collaboration, ids, e);
  for (const auto& g : f->net.graphs) f->tables.push_back(build_table(g, mass, 1.0));
  f->contexts = make_contexts(f->net, f->tables);
  return f;
}

Edges random_edges(std::size_t n, double p, Rng& rng) {
  Edges e;
  std::bernoulli_distribution coin(p);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      if (coin(rng)) e.push_back({{a, b}, 1 + uniform_index(rng, 3)});
  return e;
}

// Symmetric-normalised sample-and-aggregate written against the raw
// adjacency lists, without the encoder's sparse structures.
Dense reference_uniform(const RelationGraph& g, const Dense& prev,
                        const std::vector<std::vector<std::size_t>>& samples) {
  Dense out(prev.rows(), prev.cols());
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    if (samples[i].empty()) continue;
    for (std::size_t c = 0; c < prev.cols(); ++c) {
      double acc = 0.0;
      for (std::size_t j : samples[i])
        acc += prev(j, c) / std::sqrt(double(g.adjacent(i).size()) * double(g.adjacent(j).size()));
      out(i, c) = std::max(0.0, acc / double(samples[i].size()));
    }
  }
  return out;
}

std::vector<std::vector<std::size_t>> draw_samples(const RelationGraph& g, std::size_t s, Rng& rng) {
  std::vector<std::vector<std::size_t>> out(g.node_count());
  for (std::size_t i = 0; i < g.node_count(); ++i)
    if (g.degree(i) > 0) out[i] = sample_neighbors(g, i, s, rng);
  return out;
}

Dense aggregated(const GraphContext& ctx, const SampledLayer& layer, const Dense& prev,
                 InfluenceMode mode) {
  ad::Tape tape;
  return aggregate_layer(ctx, layer, tape.constant(prev), mode, nullptr, 0).value();
}

EncoderConfig small_config(InfluenceMode mode, bool interdependent = true) {
  EncoderConfig c;
  c.layers = 2;
  c.sample_sizes = {3, 2};
  c.dim = 4;
  c.attention_dim = 3;
  c.influence_mode = mode;
  c.use_interdependent = interdependent;
  return c;
}

}  // namespace

TEST_CASE("aggregate by hand") {
  auto f = fixture(2, {{{{0, 1}, 1}}}, {1, 1});
  const Dense prev{{0.0, 0.0}, {2.0, -2.0}};
  const std::vector<std::size_t> one{1};
  CHECK(aggregate_node(f->net.graphs[0], nullptr, 0, prev, one) == std::vector<double>{2.0, 0.0});
  CHECK(aggregate_node(f->net.graphs[0], &f->tables[0], 0, prev, one) == std::vector<double>{2.0, 0.0});
  CHECK(aggregate_node(f->net.graphs[0], nullptr, 0, Dense(2, 2), one) == std::vector<double>{0.0, 0.0});
}

TEST_CASE("uniform mode on a regular graph gives relu(u / deg)") {
  // 6-cycle: every node has degree 2.
  Edges ring;
  for (std::size_t i = 0; i < 6; ++i) ring.push_back({{std::min(i, (i + 1) % 6), std::max(i, (i + 1) % 6)}, 1});
  auto f = fixture(6, {ring}, std::vector<std::uint64_t>(6, 1));
  Dense prev(6, 3);
  for (std::size_t i = 0; i < 6; ++i) {
    prev(i, 0) = 1.5;
    prev(i, 1) = -0.5;
    prev(i, 2) = 4.0;
  }
  Rng rng = make_stream(1);
  for (std::size_t i = 0; i < 6; ++i) {
    const auto out = aggregate(f->net.graphs[0], nullptr, i, prev, 10, rng);
    CHECK(out[0] == doctest::Approx(0.75));
    CHECK(out[1] == 0.0);
    CHECK(out[2] == doctest::Approx(2.0));
  }
}

TEST_CASE("isolated nodes aggregate to zero") {
  auto f = fixture(3, {{{{0, 1}, 1}}}, {1, 1, 1});
  Rng rng = make_stream(2);
  const Dense prev{{1.0}, {2.0}, {3.0}};
  CHECK(aggregate(f->net.graphs[0], &f->tables[0], 2, prev, 5, rng) == std::vector<double>{0.0});
}

TEST_CASE("uniform aggregation equals the reference kernel on random graphs") {
  Rng rng = make_stream(100);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3 + uniform_index(rng, 18);
    auto f = fixture(n, {random_edges(n, 0.3, rng)}, std::vector<std::uint64_t>(n, 1));
    const RelationGraph& g = f->net.graphs[0];
    const Dense prev = xavier_init(n, 5, rng);
    const auto samples = draw_samples(g, 1 + uniform_index(rng, 4), rng);
    const Dense got = aggregated(f->contexts[0], make_sampled_layer(f->contexts[0], samples), prev,
                                 InfluenceMode::Uniform);
    CHECK(max_abs_diff(got, reference_uniform(g, prev, samples)) <= 1e-12);
  }
}

TEST_CASE("layer aggregation agrees with the single-node form in gravity mode") {
  Rng rng = make_stream(101);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 4 + uniform_index(rng, 10);
    std::vector<std::uint64_t> mass(n);
    for (auto& m : mass) m = uniform_index(rng, 3);
    auto f = fixture(n, {random_edges(n, 0.4, rng)}, mass);
    const Dense prev = xavier_init(n, 3, rng);
    const auto samples = draw_samples(f->net.graphs[0], 2, rng);
    const Dense got = aggregated(f->contexts[0], make_sampled_layer(f->contexts[0], samples), prev,
                                 InfluenceMode::Gravity);
    for (std::size_t i = 0; i < n; ++i) {
      const auto expect = aggregate_node(f->net.graphs[0], &f->tables[0], i, prev, samples[i]);
      for (std::size_t c = 0; c < 3; ++c) CHECK(got(i, c) == doctest::Approx(expect[c]).epsilon(1e-12));
    }
  }
}

TEST_CASE("layer_forward with special weights") {
  auto f = fixture(4, {{{{0, 1}, 1}, {{1, 2}, 2}, {{2, 3}, 1}}}, {1, 2, 3, 4});
  Rng rng = make_stream(3);
  const Dense prev = xavier_init(4, 3, rng);
  const SampledLayer layer = make_sampled_layer(f->contexts[0], draw_samples(f->net.graphs[0], 2, rng));

  ad::Tape tape;
  ad::Var h = tape.constant(prev);
  const Dense zero_out =
      layer_forward(f->contexts[0], layer, h, tape.constant(Dense(3, 6)), InfluenceMode::Gravity, nullptr, 0).value();
  CHECK(zero_out == Dense(4, 3));

  const Dense self_only = concat_cols(Dense::identity(3), Dense(3, 3));
  const Dense out =
      layer_forward(f->contexts[0], layer, h, tape.constant(self_only), InfluenceMode::Gravity, nullptr, 0).value();
  CHECK(max_abs_diff(out, relu(prev)) == 0.0);

  CHECK_THROWS_AS(layer_forward(f->contexts[0], layer, h, tape.constant(Dense(3, 5)),
                                InfluenceMode::Gravity, nullptr, 0),
                  DimensionError);
}

TEST_CASE("single-layer channel equals one layer_forward") {
  const GradcheckFixture gf = make_gradcheck_fixture();
  EncoderConfig cfg = small_config(InfluenceMode::Gravity);
  cfg.layers = 1;
  cfg.sample_sizes = {2};
  Rng rng = make_stream(4);
  const EncoderParams p = init_encoder_params(cfg, 6, 3, rng);
  const NetworkSample s = sample_network(gf.contexts, cfg, 1, 0);
  ad::Tape tape;
  const EncoderVars v = bind_encoder(tape, p);
  const Dense a = channel_forward(gf.contexts[1], s.independent[1], v.independent[1], cfg.influence_mode).value();
  const Dense b = layer_forward(gf.contexts[1], s.independent[1][0], v.independent[1].features,
                                v.independent[1].weights[0], cfg.influence_mode, nullptr, 0)
                      .value();
  CHECK(a == b);
}

TEST_CASE("channel_forward is equivariant under node relabelling") {
  Rng rng = make_stream(5);
  const std::size_t n = 10;
  const Edges edges = random_edges(n, 0.35, rng);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Edges permuted;
  for (const auto& [e, w] : edges)
    permuted.push_back({{std::min(perm[e.first], perm[e.second]), std::max(perm[e.first], perm[e.second])}, w});
  std::vector<std::uint64_t> mass(n), pmass(n);
  for (std::size_t i = 0; i < n; ++i) pmass[perm[i]] = mass[i] = uniform_index(rng, 4);

  auto a = fixture(n, {edges}, mass);
  auto b = fixture(n, {permuted}, pmass);
  for (InfluenceMode mode : {InfluenceMode::Gravity, InfluenceMode::Uniform, InfluenceMode::Attention}) {
    EncoderConfig cfg = small_config(mode);
    Rng init = make_stream(6);
    const EncoderParams p = init_encoder_params(cfg, n, 1, init);
    EncoderParams q = p;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < cfg.dim; ++c) q.independent[0].features(perm[i], c) = p.independent[0].features(i, c);

    std::vector<SampledLayer> la, lb;
    for (std::size_t l = 0; l < cfg.layers; ++l) {
      const auto sa = draw_samples(a->net.graphs[0], cfg.sample_sizes[l], rng);
      std::vector<std::vector<std::size_t>> sb(n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j : sa[i]) sb[perm[i]].push_back(perm[j]);
      la.push_back(make_sampled_layer(a->contexts[0], sa));
      lb.push_back(make_sampled_layer(b->contexts[0], sb));
    }
    ad::Tape tape;
    const Dense ua = channel_forward(a->contexts[0], la, bind_encoder(tape, p).independent[0], mode).value();
    const Dense ub = channel_forward(b->contexts[0], lb, bind_encoder(tape, q).independent[0], mode).value();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < cfg.dim; ++c) CHECK(ua(i, c) == doctest::Approx(ub(perm[i], c)).epsilon(1e-12));
  }
}

TEST_CASE("sampling is reproducible and redrawn per epoch") {
  const GradcheckFixture gf = make_gradcheck_fixture();
  const EncoderConfig cfg = small_config(InfluenceMode::Gravity);
  Rng rng = make_stream(7);
  const EncoderParams p = init_encoder_params(cfg, 6, 3, rng);
  const auto e1 = encode_values(gf.contexts, sample_network(gf.contexts, cfg, 3, 1), p, cfg);
  const auto e1b = encode_values(gf.contexts, sample_network(gf.contexts, cfg, 3, 1), p, cfg);
  CHECK(e1.fused == e1b.fused);
  bool differs = false;
  for (std::uint64_t epoch = 2; epoch < 8 && !differs; ++epoch)
    differs = !(encode_values(gf.contexts, sample_network(gf.contexts, cfg, 3, epoch), p, cfg).fused == e1.fused);
  CHECK(differs);
}

TEST_CASE("interdependent channel averages the shared-weight outputs") {
  const Edges e = {{{0, 1}, 1}, {{1, 2}, 3}, {{2, 3}, 1}, {{0, 3}, 2}, {{3, 4}, 1}};
  auto f = fixture(5, {e, e, e}, {1, 0, 2, 3, 1});
  const EncoderConfig cfg = small_config(InfluenceMode::Gravity);
  Rng rng = make_stream(8);
  const EncoderParams p = init_encoder_params(cfg, 5, 3, rng);
  std::vector<std::vector<SampledLayer>> same(3);
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    const auto s = draw_samples(f->net.graphs[0], cfg.sample_sizes[l], rng);
    for (std::size_t r = 0; r < 3; ++r) same[r].push_back(make_sampled_layer(f->contexts[r], s));
  }
  ad::Tape tape;
  const EncoderVars v = bind_encoder(tape, p);
  std::vector<ad::Var> per;
  const Dense mean3 = interdependent_forward(f->contexts, same, *v.shared, cfg.influence_mode, &per).value();
  CHECK(max_abs_diff(mean3, per[0].value()) <= 1e-15);
  const std::vector<GraphContext> one(f->contexts.begin(), f->contexts.begin() + 1);
  const std::vector<std::vector<SampledLayer>> one_s(same.begin(), same.begin() + 1);
  CHECK(interdependent_forward(one, one_s, *v.shared, cfg.influence_mode).value() == per[0].value());
}

TEST_CASE("shared weight gradient is the sum of per-graph contributions") {
  const GradcheckFixture gf = make_gradcheck_fixture();
  const EncoderConfig cfg = small_config(InfluenceMode::Gravity);
  Rng rng = make_stream(9);
  const EncoderParams p = init_encoder_params(cfg, 6, 3, rng);
  const NetworkSample s = sample_network(gf.contexts, cfg, 2, 1);

  auto grad_of = [&](std::vector<std::size_t> graphs) {
    ad::Tape tape;
    const EncoderVars v = bind_encoder(tape, p);
    std::vector<ad::Var> outs;
    for (std::size_t r : graphs) outs.push_back(channel_forward(gf.contexts[r], s.shared[r], *v.shared, cfg.influence_mode));
    // Loss = sum over graphs of ||U'^r||^2 / 3, i.e. the mean-channel weighting.
    ad::Var loss = ad::scale(ad::sum_squares(outs[0]), 1.0 / 3.0);
    for (std::size_t i = 1; i < outs.size(); ++i) loss = ad::add(loss, ad::scale(ad::sum_squares(outs[i]), 1.0 / 3.0));
    tape.backward(loss);
    return v.shared->weights[0].grad();
  };
  const Dense total = grad_of({0, 1, 2});
  const Dense parts = add(add(grad_of({0}), grad_of({1})), grad_of({2}));
  CHECK(max_abs_diff(total, parts) <= 1e-12);

  // And the total agrees with central differences.
  EncoderParams probe = p;
  auto loss = [&] {
    ad::Tape tape;
    const EncoderVars v = bind_encoder(tape, probe);
    double sum = 0.0;
    for (std::size_t r = 0; r < 3; ++r)
      sum += l2_norm_sq(channel_forward(gf.contexts[r], s.shared[r], *v.shared, cfg.influence_mode).value()) / 3.0;
    return sum;
  };
  const auto numeric = finite_difference_gradient(loss, {&probe.shared.weights[0]}, 1e-6);
  CHECK(max_relative_error(total, numeric[0]) <= 1e-5);
}

TEST_CASE("attention fusion") {
  Rng rng = make_stream(10);
  const Dense u1 = xavier_init(5, 4, rng), u2 = xavier_init(5, 4, rng), u3 = xavier_init(5, 4, rng),
              u4 = xavier_init(5, 4, rng);
  ad::Tape tape;
  auto c = [&](const Dense& d) { return tape.constant(d); };
  const Dense w = xavier_init(3, 4, rng), b = xavier_init(1, 3, rng), q = xavier_init(1, 3, rng);

  const FusedVars zero_q = attention_fuse({c(u1), c(u2), c(u3), c(u4)}, c(w), c(b), c(Dense(1, 3)));
  for (double a : zero_q.alpha.value().values()) CHECK(a == doctest::Approx(0.25).epsilon(1e-15));

  const FusedVars same = attention_fuse({c(u1), c(u1), c(u1)}, c(w), c(b), c(q));
  CHECK(max_abs_diff(same.fused.value(), u1) <= 1e-15);

  const FusedVars any = attention_fuse({c(u1), c(u2), c(u3)}, c(w), c(b), c(q));
  for (std::size_t i = 0; i < 5; ++i) {
    double sum = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(any.alpha.value()(i, k) >= 0.0);
      sum += any.alpha.value()(i, k);
    }
    CHECK(std::abs(sum - 1.0) <= 1e-9);
    // Recompute row i by hand.
    std::vector<double> omega;
    for (const Dense* u : {&u1, &u2, &u3}) {
      double o = 0.0;
      for (std::size_t h = 0; h < 3; ++h) {
        double z = b[h];
        for (std::size_t x = 0; x < 4; ++x) z += w(h, x) * (*u)(i, x);
        o += q[h] * std::tanh(z);
      }
      omega.push_back(o);
    }
    const auto alpha = softmax_vec(std::span<const double>(omega));
    for (std::size_t x = 0; x < 4; ++x) {
      const double expect = alpha[0] * u1(i, x) + alpha[1] * u2(i, x) + alpha[2] * u3(i, x);
      CHECK(any.fused.value()(i, x) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(attention_fuse({c(u1), c(Dense(4, 4))}, c(w), c(b), c(q)), DimensionError);
}

TEST_CASE("encode: modes and ablations change the embedding") {
  const GradcheckFixture gf = make_gradcheck_fixture();
  Rng rng = make_stream(11);
  const EncoderConfig gravity = small_config(InfluenceMode::Gravity);
  const EncoderParams p = init_encoder_params(gravity, 6, 3, rng);
  const NetworkSample s = sample_network(gf.contexts, gravity, 4, 1);
  const auto eg = encode_values(gf.contexts, s, p, gravity);
  const auto eu = encode_values(gf.contexts, s, p, small_config(InfluenceMode::Uniform));
  CHECK(max_abs_diff(eg.fused, eu.fused) > 1e-6);
  CHECK(eg.alpha.cols() == 4);

  const EncoderConfig no_ic = small_config(InfluenceMode::Gravity, false);
  const auto en = encode_values(gf.contexts, s, p, no_ic);
  CHECK(en.alpha.cols() == 3);
  CHECK(max_abs_diff(eg.fused, en.fused) > 1e-6);
  for (const auto* e : {&eg, &eu, &en})
    for (std::size_t i = 0; i < 6; ++i) {
      double sum = 0.0;
      for (std::size_t k = 0; k < e->alpha.cols(); ++k) sum += e->alpha(i, k);
      CHECK(std::abs(sum - 1.0) <= 1e-9);
    }
}

TEST_CASE("rows with equal influence factors ignore mass scaling") {
  // Node 0's neighbors all have the same mass and distance; node 1's do not.
  const Edges e = {{{0, 2}, 1}, {{0, 3}, 1}, {{1, 2}, 1}, {{1, 4}, 1}};
  const std::vector<std::uint64_t> m1{1, 1, 2, 2, 1}, m3{3, 3, 6, 6, 3};
  auto a = fixture(5, {e}, m1);
  auto b = fixture(5, {e}, m3);
  CHECK(a->tables[0].m[0] == b->tables[0].m[0]);
  CHECK(a->tables[0].m[1] != b->tables[0].m[1]);
}

TEST_CASE("config validation") {
  EncoderConfig c;
  c.sample_sizes = {10};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.layers = 0;
  c.sample_sizes = {};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  for (auto m : {InfluenceMode::Gravity, InfluenceMode::Uniform, InfluenceMode::Attention})
    CHECK(parse_influence_mode(to_string(m)) == m);
}
