#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "miarec/error.hpp"
#include "miarec/influence.hpp"

using namespace miarec;

namespace {

RelationGraph graph_of(std::size_t n,
                       const std::vector<std::pair<std::pair<std::size_t, std::size_t>, std::size_t>>& e,
                       RelationKind kind = RelationKind::Collaboration) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back("s" + std::to_string(i));
  return RelationGraph(kind, std::make_shared<const NodeUniverse>(ids), e);
}

}  // namespace

TEST_CASE("distance and influence factor by hand") {
  const RelationGraph g = graph_of(3, {{{0, 1}, 2}, {{1, 2}, 1}});
  CHECK(academic_distance(g, 0, 1) == 0.5);
  CHECK(academic_distance(g, 1, 0) == 0.5);
  CHECK(academic_distance(g, 2, 1) == 1.0);
  CHECK_THROWS_AS(academic_distance(g, 0, 2), LookupError);

  CHECK(influence_factor(100, 0.5, 1.0) == 400.0);
  CHECK(influence_factor(0, 0.5, 1.0) == 0.0);
  CHECK_THROWS_AS(influence_factor(1, 0.0, 1.0), DomainError);
  CHECK(gravity_force(3, 100, 0.5, 2.0) / 3 == doctest::Approx(influence_factor(100, 0.5, 2.0)));
}

TEST_CASE("softmax coefficients on small stars") {
  // Node 0 has neighbors 1 and 2 at distance 1, masses chosen so g = (1, 0).
  const RelationGraph g = graph_of(3, {{{0, 1}, 1}, {{0, 2}, 1}});
  const std::vector<std::uint64_t> mass{0, 1, 0};
  const InfluenceTable t = build_table(g, mass, 1.0);
  CHECK(t.coefficient(g, 0, 1) == doctest::Approx(std::exp(1.0) / (std::exp(1.0) + 1.0)));
  CHECK(t.coefficient(g, 0, 2) == doctest::Approx(1.0 / (std::exp(1.0) + 1.0)));
  CHECK(t.coefficient(g, 1, 0) == 1.0);

  const InfluenceTable equal = build_table(g, std::vector<std::uint64_t>{0, 4, 4}, 1.0);
  CHECK(equal.coefficient(g, 0, 1) == 0.5);
  CHECK(equal.coefficient(g, 0, 2) == 0.5);
}

TEST_CASE("rows are stochastic and asymmetry follows mass ratios") {
  const CorpusStore c = generate_synthetic({3, 10, 4, 0.8, 5});
  const HeterogeneousNetwork net = build_network(c, {RelationKind::Collaboration, RelationKind::CoTopic,
                                                     RelationKind::CoVenue});
  for (const auto& g : net.graphs) {
    const InfluenceTable t = build_table(g, c.citation_masses(), 1.0);
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      if (g.degree(i) == 0) continue;
      // exp underflows once a neighbor trails the row maximum by more than ~745.
      const double gmax = *std::max_element(t.g[i].begin(), t.g[i].end());
      double sum = 0.0;
      for (std::size_t k = 0; k < t.m[i].size(); ++k) {
        CHECK(t.m[i][k] >= 0.0);
        if (gmax - t.g[i][k] < 700.0) CHECK(t.m[i][k] > 0.0);
        sum += t.m[i][k];
      }
      CHECK(std::abs(sum - 1.0) <= 1e-9);
      for (const auto& nb : g.adjacent(i)) {
        const double mi = c.citation_mass(i), mj = c.citation_mass(nb.node);
        if (mi > 0 && mj > 0)
          CHECK(std::abs(t.factor(g, i, nb.node) / t.factor(g, nb.node, i) - mj / mi) <= 1e-9);
      }
    }
  }
}

TEST_CASE("shift invariance and large factors") {
  // Adding the same mass offset to each neighbor of node 0 at unit distance
  // shifts every g in row 0 by the same constant.
  const RelationGraph g = graph_of(4, {{{0, 1}, 1}, {{0, 2}, 1}, {{0, 3}, 1}});
  const InfluenceTable base = build_table(g, std::vector<std::uint64_t>{0, 1, 3, 2}, 1.0);
  const InfluenceTable shifted = build_table(g, std::vector<std::uint64_t>{0, 1001, 1003, 1002}, 1.0);
  for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs(base.m[0][k] - shifted.m[0][k]) <= 1e-12);

  const InfluenceTable huge = build_table(g, std::vector<std::uint64_t>{0, 1000000, 999999, 2}, 1.0);
  double sum = 0.0;
  for (double m : huge.m[0]) {
    CHECK(std::isfinite(m));
    sum += m;
  }
  CHECK(sum == doctest::Approx(1.0));
}

TEST_CASE("collaboration distance source") {
  const RelationGraph collab = graph_of(3, {{{0, 1}, 2}});
  const RelationGraph venue = graph_of(3, {{{0, 1}, 5}, {{0, 2}, 1}}, RelationKind::CoVenue);
  const std::vector<std::uint64_t> mass{1, 3, 2};
  const InfluenceTable t = build_table(venue, mass, 1.0, DistanceSource::Collaboration, &collab);
  CHECK(t.factor(venue, 0, 1) == 3.0 * 4.0);
  CHECK(t.factor(venue, 0, 2) == 0.0);
  const InfluenceTable own = build_table(venue, mass, 1.0);
  CHECK(own.factor(venue, 0, 1) == doctest::Approx(3.0 * 25.0).epsilon(1e-14));
}

TEST_CASE("gravitational constant acts as a temperature") {
  const RelationGraph g = graph_of(3, {{{0, 1}, 1}, {{0, 2}, 1}});
  const std::vector<std::uint64_t> mass{0, 2, 1};
  const double low = build_table(g, mass, 0.1).coefficient(g, 0, 1);
  const double high = build_table(g, mass, 3.0).coefficient(g, 0, 1);
  CHECK(low < high);
  const std::vector<std::uint64_t> even{0, 2, 2};
  CHECK(build_table(g, even, 0.1).m == build_table(g, even, 3.0).m);
}

TEST_CASE("table dump") {
  const RelationGraph g = graph_of(2, {{{0, 1}, 1}});
  const std::string d = dump_table(g, build_table(g, std::vector<std::uint64_t>{1, 2}, 1.0));
  CHECK(d.find("collaboration s0 s1 2") == 0);
  CHECK(d.find("collaboration s1 s0 1") != std::string::npos);
}
