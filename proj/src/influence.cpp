#include "miarec/influence.hpp"

#include <cstdint>
#include <cstdio>

#include "miarec/dense.hpp"
#include "miarec/error.hpp"

namespace miarec {

std::string to_string(DistanceSource s) {
  return s == DistanceSource::Collaboration ? "collaboration" : "co_occurrence";
}

DistanceSource parse_distance_source(const std::string& name) {
  if (name == "co_occurrence") return DistanceSource::CoOccurrence;
  if (name == "collaboration") return DistanceSource::Collaboration;
  throw ConfigError("unknown distance_source: " + name);
}

double academic_distance(const RelationGraph& graph, std::size_t i, std::size_t j) {
  const auto w = graph.weight(i, j);
  if (!w) {
    throw LookupError("no " + to_string(graph.kind()) + " edge between " + graph.node_ids().at(i) +
                      " and " + graph.node_ids().at(j));
  }
  return 1.0 / static_cast<double>(*w);
}

double influence_factor(double mass_j, double distance, double gravitational_constant) {
  if (!(distance > 0.0)) throw DomainError("academic distance must be positive");
  return gravitational_constant * mass_j / (distance * distance);
}

double gravity_force(double mass_i, double mass_j, double distance, double gravitational_constant) {
  if (!(distance > 0.0)) throw DomainError("academic distance must be positive");
  return gravitational_constant * mass_i * mass_j / (distance * distance);
}

namespace {

std::size_t slot(const RelationGraph& graph, std::size_t i, std::size_t j) {
  const auto& row = graph.adjacent(i);
  for (std::size_t k = 0; k < row.size(); ++k)
    if (row[k].node == j) return k;
  throw LookupError("no edge between " + graph.node_ids().at(i) + " and " + graph.node_ids().at(j));
}

}  // namespace

double InfluenceTable::factor(const RelationGraph& graph, std::size_t i, std::size_t j) const {
  return g.at(i)[slot(graph, i, j)];
}

double InfluenceTable::coefficient(const RelationGraph& graph, std::size_t i, std::size_t j) const {
  return m.at(i)[slot(graph, i, j)];
}

InfluenceTable build_table(const RelationGraph& graph, std::span<const std::uint64_t> citation_mass,
                           double gravitational_constant, DistanceSource source,
                           const RelationGraph* collaboration) {
  if (citation_mass.size() != graph.node_count()) {
    throw DimensionError("citation mass count does not match graph nodes");
  }
  if (!(gravitational_constant > 0.0)) throw DomainError("gravitational constant must be positive");
  if (source == DistanceSource::Collaboration && collaboration == nullptr) {
    throw ConfigError("collaboration distance needs the collaboration graph");
  }

  InfluenceTable table;
  table.kind = graph.kind();
  table.gravitational_constant = gravitational_constant;
  const std::size_t n = graph.node_count();
  table.g.resize(n);
  table.m.resize(n);

#pragma omp parallel for schedule(dynamic, 32)
  for (std::int64_t si = 0; si < static_cast<std::int64_t>(n); ++si) {
    const auto i = static_cast<std::size_t>(si);
    const auto& row = graph.adjacent(i);
    auto& g = table.g[i];
    g.resize(row.size());
    for (std::size_t k = 0; k < row.size(); ++k) {
      const std::size_t j = row[k].node;
      const double mass_j = static_cast<double>(citation_mass[j]);
      if (source == DistanceSource::CoOccurrence) {
        g[k] = influence_factor(mass_j, 1.0 / static_cast<double>(row[k].weight),
                                gravitational_constant);
      } else {
        const auto collab = collaboration->weight(i, j);
        g[k] = collab ? influence_factor(mass_j, 1.0 / static_cast<double>(*collab),
                                         gravitational_constant)
                      : 0.0;
      }
    }
    table.m[i] = softmax_vec(std::span<const double>(g));
  }
  return table;
}

std::string dump_table(const RelationGraph& graph, const InfluenceTable& table) {
  std::string out;
  char buf[64];
  const auto& ids = graph.node_ids();
  for (std::size_t i = 0; i < graph.node_count(); ++i) {
    const auto& row = graph.adjacent(i);
    for (std::size_t k = 0; k < row.size(); ++k) {
      out += to_string(graph.kind()) + " " + ids[i] + " " + ids[row[k].node];
      std::snprintf(buf, sizeof buf, " %.17g %.17g\n", table.g[i][k], table.m[i][k]);
      out += buf;
    }
  }
  return out;
}

}  // namespace miarec
