#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "miarec/hetnet.hpp"

namespace miarec {

/// Which interaction count defines academic distance on an edge.
enum class DistanceSource {
  CoOccurrence,   // the edge's own relation weight
  Collaboration,  // co-authored paper count only; non-collaborators get g = 0
};

std::string to_string(DistanceSource s);
DistanceSource parse_distance_source(const std::string& name);

/// r_ij = 1 / interaction count. Throws LookupError for a missing edge.
double academic_distance(const RelationGraph& graph, std::size_t i, std::size_t j);

/// g_ij = G * m_j / r_ij^2. Throws DomainError for r_ij <= 0.
double influence_factor(double mass_j, double distance, double gravitational_constant);

/// F_ij = G * m_i * m_j / r_ij^2.
double gravity_force(double mass_i, double mass_j, double distance, double gravitational_constant);

/// Directed influence factors and normalised coefficients for one graph. Row i
/// is aligned with graph.adjacent(i): entry k belongs to neighbor adjacent(i)[k].
struct InfluenceTable {
  RelationKind kind{};
  double gravitational_constant = 1.0;
  std::vector<std::vector<double>> g;
  std::vector<std::vector<double>> m;

  double factor(const RelationGraph& graph, std::size_t i, std::size_t j) const;
  double coefficient(const RelationGraph& graph, std::size_t i, std::size_t j) const;
};

/// Softmax of g over each full neighbor set. `collaboration` supplies the
/// distance graph when source is Collaboration and may be null otherwise.
InfluenceTable build_table(const RelationGraph& graph, std::span<const std::uint64_t> citation_mass,
                           double gravitational_constant,
                           DistanceSource source = DistanceSource::CoOccurrence,
                           const RelationGraph* collaboration = nullptr);

/// "<kind> <i> <j> <g_ij> <M_ij>" per directed edge, in node then neighbor order.
std::string dump_table(const RelationGraph& graph, const InfluenceTable& table);

}  // namespace miarec
