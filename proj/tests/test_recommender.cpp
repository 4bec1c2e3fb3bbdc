#include <cmath>
#include <cstdio>
#include <map>

#include "doctest.h"
#include "miarec/error.hpp"
#include "miarec/numkernel.hpp"
#include "miarec/recommender.hpp"

using namespace miarec;

namespace {

struct Run {
  CorpusStore corpus;
  SplitSpec split;
  std::unique_ptr<PreparedNetwork> prepared;
  DocVectors docs;
  TrainConfig config;
  NetworkConfig network;
};

std::unique_ptr<Run> small_run() {
  auto r = std::make_unique<Run>();
  r->corpus = generate_synthetic({2, 8, 4, 0.9, 3});
  r->split = leave_one_out_split(r->corpus, 7);
  r->prepared = prepare_network(r->corpus, r->network);
  r->config.epochs = 6;
  r->config.batch_size = 64;
  r->config.learning_rate = 0.01;
  r->config.encoder.dim = 8;
  r->config.encoder.attention_dim = 4;
  r->config.encoder.sample_sizes = {4, 4};
  r->config.content.dim = 8;
  r->config.content.epochs = 5;
  r->docs = train_pvdbow(r->corpus, r->config.content).vectors;
  return r;
}

ModelCheckpoint fit(const Run& r, const TrainConfig& cfg) {
  return train(r.corpus, *r.prepared, r.split, cfg, r.network, cfg.use_content ? &r.docs : nullptr);
}

// Checkpoint with hand-chosen embeddings for ranking tests.
ModelCheckpoint manual_checkpoint(const Dense& scholars, const Dense& papers) {
  ModelCheckpoint c;
  for (std::size_t i = 0; i < scholars.rows(); ++i) c.scholar_ids.push_back("s" + std::to_string(i));
  for (std::size_t i = 0; i < papers.rows(); ++i) c.paper_ids.push_back("p" + std::to_string(i));
  c.scholar_embeddings = scholars;
  c.doc_vectors = DocVectors(c.paper_ids, papers);
  c.train.use_content = true;
  return c;
}

}  // namespace

TEST_CASE("align") {
  const AlignmentParams zero{Dense(3, 2), Dense(1, 3)};
  CHECK(align(Dense{{1.0, -2.0}}, zero) == Dense(1, 3));
  const AlignmentParams id{Dense::identity(2), Dense(1, 2)};
  CHECK(align(Dense{{0.5, 3.0}, {0.0, 1.0}}, id) == Dense{{0.5, 3.0}, {0.0, 1.0}});
  CHECK(align(Dense{{1.0, 1.0}}, zero).cols() == 3);
  CHECK_THROWS_AS(align(Dense(1, 3), id), DimensionError);
}

TEST_CASE("score") {
  CHECK(score(std::vector<double>{1.0, 0.0}, std::vector<double>{0.5, 2.0}) == 0.5);
  CHECK(score(std::vector<double>{1.0, 0.0}, std::vector<double>{0.0, 3.0}) == 0.0);
  const std::vector<double> u{0.3, -1.2}, v{2.0, 0.7};
  CHECK(score(std::vector<double>{0.6, -2.4}, v) == doctest::Approx(2.0 * score(u, v)));
  CHECK_THROWS_AS(score(std::vector<double>{1.0}, v), DimensionError);
}

TEST_CASE("bpr loss values") {
  CHECK(bpr_batch_loss(std::vector<double>{0.4}, std::vector<double>{0.4}, {}, 0.0) ==
        doctest::Approx(std::log(2.0)));
  const Dense theta{{1.0, 2.0}};
  CHECK(bpr_batch_loss(std::vector<double>{1e6}, std::vector<double>{0.0}, {&theta}, 0.5) ==
        doctest::Approx(2.5));

  // Doubling W^align doubles every (non-negative) aligned score and so
  // changes the data term when scores differ.
  const Dense u{{0.2, 0.9}, {1.1, 0.4}};
  const Dense v{{0.3, 0.1}, {0.9, -0.2}, {0.0, 0.6}};
  auto data_loss = [&](double scale_w) {
    const AlignmentParams a{scale(Dense{{1.0, 0.2}, {0.1, 1.0}}, scale_w), Dense(1, 2)};
    const Dense ua = align(u, a);
    const std::vector<Triple> t{{0, 0, 1}, {1, 1, 2}, {0, 2, 0}};
    std::vector<double> pos, neg;
    for (const auto& x : t) {
      pos.push_back(score(ua.row(x.scholar), v.row(x.positive)));
      neg.push_back(score(ua.row(x.scholar), v.row(x.negative)));
    }
    return bpr_batch_loss(pos, neg, {}, 0.0);
  };
  CHECK(data_loss(2.0) != doctest::Approx(data_loss(1.0)));
}

TEST_CASE("bpr tape loss agrees with the value form") {
  Rng rng = make_stream(4);
  const Dense ua = relu(xavier_init(3, 4, rng)), v = xavier_init(5, 4, rng), w = xavier_init(2, 2, rng);
  const std::vector<Triple> t{{0, 1, 2}, {2, 4, 0}, {1, 3, 3}};
  ad::Tape tape;
  const BatchLoss l = bpr_batch_loss(tape.constant(ua), tape.constant(v), t, {tape.constant(w)}, 0.3);
  std::vector<double> pos, neg;
  for (const auto& x : t) {
    pos.push_back(score(ua.row(x.scholar), v.row(x.positive)));
    neg.push_back(score(ua.row(x.scholar), v.row(x.negative)));
  }
  CHECK(l.total.value()[0] == doctest::Approx(bpr_batch_loss(pos, neg, {&w}, 0.3)).epsilon(1e-13));
}

TEST_CASE("triple sampling") {
  TrainingPairs data;
  data.paper_count = 6;
  data.positives = {{0, 1}, {2}};
  data.pairs = {{0, 0}, {0, 1}, {1, 2}};
  Rng a = make_stream(1), b = make_stream(1);
  const auto t = sample_triples(data, 500, a);
  CHECK(t == sample_triples(data, 500, b));
  for (const auto& x : t) {
    CHECK_FALSE(data.positives[x.scholar].contains(x.negative));
    CHECK(data.positives[x.scholar].contains(x.positive));
  }

  TrainingPairs two;
  two.paper_count = 4;
  two.positives = {{0}, {1}};
  two.pairs = {{0, 0}, {1, 1}};
  Rng rng = make_stream(2);
  std::size_t first = 0;
  for (const auto& x : sample_triples(two, 100000, rng)) first += x.scholar == 0;
  CHECK(std::abs(first / 100000.0 - 0.5) <= 0.02);

  CHECK_THROWS_AS(sample_triples(TrainingPairs{}, 4, rng), EmptySplitError);
}

TEST_CASE("training: loss falls and runs are reproducible") {
  const auto r = small_run();
  const ModelCheckpoint a = fit(*r, r->config);
  const ModelCheckpoint b = fit(*r, r->config);
  CHECK(checkpoint_to_string(a) == checkpoint_to_string(b));
  REQUIRE(a.epoch_loss.size() == 6);
  CHECK(a.epoch_loss.back() < a.epoch_loss.front());
  CHECK(a.scholar_embeddings.rows() == r->corpus.scholar_count());
  CHECK(a.scholar_embeddings.cols() == r->docs.dim());
}

TEST_CASE("training without content learns paper embeddings") {
  const auto r = small_run();
  TrainConfig cfg = r->config;
  cfg.use_content = false;
  const ModelCheckpoint c = fit(*r, cfg);
  CHECK(c.params.paper_embeddings.rows() == r->corpus.paper_count());
  CHECK(c.doc_vectors.size() == 0);
  CHECK(&c.paper_matrix() == &c.params.paper_embeddings);
}

TEST_CASE("regularisation shrinks the parameters") {
  const auto r = small_run();
  auto norm = [](ModelCheckpoint& c) {
    double s = 0.0;
    for_each_model_tensor(c.params, [&](const std::string&, ParamGroup, Dense& m) { s += l2_norm_sq(m); });
    return s;
  };
  TrainConfig cfg = r->config;
  cfg.epochs = 20;
  cfg.reg_weight = 0.0;
  ModelCheckpoint free = fit(*r, cfg);
  cfg.reg_weight = 0.05;
  ModelCheckpoint shrunk = fit(*r, cfg);
  CHECK(norm(shrunk) < norm(free));
}

TEST_CASE("a diverging run reports its epoch") {
  const auto r = small_run();
  TrainConfig cfg = r->config;
  cfg.learning_rate = 1e200;
  try {
    fit(*r, cfg);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.epoch() >= 1);
  }
}

TEST_CASE("top-k ranking rules") {
  const Dense scholars{{1.0, 0.0}, {0.0, 1.0}};
  const Dense papers{{0.5, 0.0}, {0.9, 0.0}, {0.5, 1.0}, {0.2, 0.0}};
  const ModelCheckpoint c = manual_checkpoint(scholars, papers);

  const auto all = recommend_topk(c, "s0", nullptr, 10);
  REQUIRE(all.size() == 4);
  CHECK(all[0].paper_id == "p1");
  CHECK(all[1].paper_id == "p0");  // ties with p2, smaller id first
  CHECK(all[2].paper_id == "p2");
  for (std::size_t i = 1; i < all.size(); ++i) CHECK(all[i - 1].score >= all[i].score);

  const std::vector<std::string> cands{"p3", "p2"};
  const auto top1 = recommend_topk(c, "s1", &cands, 1);
  REQUIRE(top1.size() == 1);
  CHECK(top1[0].paper_id == "p2");
  CHECK_THROWS_AS(recommend_topk(c, "nobody", nullptr, 3), LookupError);
}

TEST_CASE("adding a constant to every score keeps the order") {
  Rng rng = make_stream(5);
  const Dense s = xavier_init(3, 4, rng), p = xavier_init(12, 4, rng);
  // An extra all-ones paper column and a scholar weight c add c to each score.
  const ModelCheckpoint base = manual_checkpoint(concat_cols(s, Dense(3, 1)), concat_cols(p, Dense(12, 1, 1.0)));
  const ModelCheckpoint shifted = manual_checkpoint(concat_cols(s, Dense(3, 1, 7.5)), concat_cols(p, Dense(12, 1, 1.0)));
  for (const std::string sid : {"s0", "s1", "s2"}) {
    const auto a = recommend_topk(base, sid, nullptr, 12), b = recommend_topk(shifted, sid, nullptr, 12);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].paper_id == b[i].paper_id);
  }
}

TEST_CASE("default candidates exclude train positives") {
  ModelCheckpoint c = manual_checkpoint(Dense{{1.0}}, Dense{{3.0}, {2.0}, {1.0}});
  c.train_positives["s0"] = {"p0"};
  const auto r = recommend_topk(c, "s0", nullptr, 5);
  REQUIRE(r.size() == 2);
  CHECK(r[0].paper_id == "p1");
}

TEST_CASE("checkpoint round trip") {
  const auto r = small_run();
  for (bool content : {true, false}) {
    TrainConfig cfg = r->config;
    cfg.use_content = content;
    cfg.epochs = 2;
    cfg.encoder.influence_mode = content ? InfluenceMode::Gravity : InfluenceMode::Attention;
    const ModelCheckpoint c = fit(*r, cfg);
    const std::string path = "test_recommender_ckpt.json";
    save_checkpoint(c, path);
    const ModelCheckpoint back = load_checkpoint(path);
    std::remove(path.c_str());
    CHECK(back == c);
    CHECK(checkpoint_to_string(back) == checkpoint_to_string(c));
    for (const auto& sid : {r->corpus.scholar_ids()[0], r->corpus.scholar_ids()[5]}) {
      const auto a = recommend_topk(c, sid, nullptr, 10), b = recommend_topk(back, sid, nullptr, 10);
      REQUIRE(a.size() == b.size());
      for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].paper_id == b[i].paper_id);
        CHECK(a[i].score == b[i].score);
      }
    }
  }
  CHECK_THROWS_AS(checkpoint_from_string("{\"version\": \"other\"}"), FormatError);
  CHECK_THROWS_AS(checkpoint_from_string("not json"), FormatError);
}
