#include "cavsched/conflict_graph.hpp"

#include "cavsched/errors.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

namespace cavsched {

void RemainingDistanceTable::set(int later, int earlier, double remaining)
{
  values_[{later, earlier}] = remaining;
}

std::optional<double> RemainingDistanceTable::get(int later, int earlier) const
{
  auto it = values_.find({later, earlier});
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

RemainingDistanceTable predicted_remaining_distances(
  const std::vector<VehicleRecord>& vehicles, const IntersectionConfig& cfg)
{
  RemainingDistanceTable table;
  for (std::size_t j = 0; j < vehicles.size(); ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      const double elapsed = vehicles[j].entry_time - vehicles[i].entry_time;
      table.set(vehicles[j].id, vehicles[i].id,
                cfg.control_zone_length - cfg.platoon_speed * elapsed);
    }
  }
  return table;
}

double reachability_threshold(const IntersectionConfig& cfg)
{
  if (!(cfg.platoon_speed > 0) || !(cfg.v_max > 0) || !(cfg.a_max > 0))
    throw ConfigError("reachability needs positive platoon_speed, v_max and a_max");
  const double min_travel = cfg.control_zone_length / cfg.v_max + cfg.v_max / (2.0 * cfg.a_max);
  return cfg.platoon_speed * min_travel;
}

bool reachability_conflict(double preceding_remaining, const IntersectionConfig& cfg)
{
  if (!(cfg.platoon_speed > 0) || !(cfg.v_max > 0) || !(cfg.a_max > 0))
    throw ConfigError("reachability needs positive platoon_speed, v_max and a_max");
  if (!(preceding_remaining >= 0.0))
    throw ContractViolation("preceding distance must be >= 0");
  const double preceding_time = preceding_remaining / cfg.platoon_speed;
  const double entering_time = cfg.control_zone_length / cfg.v_max + cfg.v_max / (2.0 * cfg.a_max);
  return preceding_time < entering_time;
}

std::vector<ConflictSets> build_conflict_sets(const std::vector<VehicleRecord>& vehicles,
                                              const RemainingDistanceTable& context,
                                              const IntersectionConfig& cfg)
{
  for (std::size_t k = 0; k < vehicles.size(); ++k) {
    if (vehicles[k].id <= 0) throw ContractViolation("vehicle ids must be positive");
    if (k > 0 && vehicles[k].id <= vehicles[k - 1].id)
      throw ContractViolation("vehicles must be sorted by strictly increasing id");
    if (k > 0 && vehicles[k].entry_time < vehicles[k - 1].entry_time)
      throw ContractViolation("vehicle ids must follow entry-time order");
    (void)cfg.movement(vehicles[k].movement);
  }

  std::vector<ConflictSets> out;
  out.reserve(vehicles.size());
  for (std::size_t j = 0; j < vehicles.size(); ++j) {
    const VehicleRecord& later = vehicles[j];
    ConflictSets sets;
    sets.owner = later.id;
    for (std::size_t i = 0; i < j; ++i) {
      const VehicleRecord& earlier = vehicles[i];
      if (earlier.movement == later.movement) {
        sets.diverging.insert(earlier.id);
        continue;
      }
      switch (classify_conflict(earlier.movement, later.movement, cfg)) {
        case ConflictClass::Diverging: sets.diverging.insert(earlier.id); break;
        case ConflictClass::Converging: sets.converging.insert(earlier.id); break;
        case ConflictClass::Crossing: sets.crossing.insert(earlier.id); break;
        case ConflictClass::None: {
          auto remaining = context.get(later.id, earlier.id);
          if (remaining && reachability_conflict(std::max(0.0, *remaining), cfg))
            sets.reachability.insert(earlier.id);
          break;
        }
      }
    }
    if (sets.diverging.empty()) sets.diverging.insert(kLeader);
    out.push_back(std::move(sets));
  }
  return out;
}

std::string_view to_string(EdgeKind kind)
{
  switch (kind) {
    case EdgeKind::Diverging: return "diverging";
    case EdgeKind::Reachability: return "reachability";
    case EdgeKind::Crossing: return "crossing";
    case EdgeKind::Converging: return "converging";
  }
  return "?";
}

bool ConflictDirectedGraph::connected(int a, int b) const
{
  const std::pair<int, int> key{std::min(a, b), std::max(a, b)};
  return unidirectional.count(key) > 0 || bidirectional.count(key) > 0;
}

std::vector<int> ConflictDirectedGraph::unidirectional_parents(int j) const
{
  std::vector<int> out;
  for (const auto& [edge, kind] : unidirectional)
    if (edge.second == j) out.push_back(edge.first);
  return out;
}

std::vector<int> ConflictDirectedGraph::bidirectional_parents(int j) const
{
  std::vector<int> out;
  for (const auto& [edge, kind] : bidirectional)
    if (edge.second == j) out.push_back(edge.first);
  return out;
}

ConflictDirectedGraph build_cdg(const std::vector<ConflictSets>& sets)
{
  ConflictDirectedGraph g;
  std::set<int> owners;
  for (const auto& s : sets) {
    if (s.owner <= 0) throw ContractViolation("conflict-set owner must be a positive id");
    if (!owners.insert(s.owner).second) throw ContractViolation("duplicate conflict-set owner");
  }
  g.vehicles.assign(owners.begin(), owners.end());

  auto check = [&](int member, int owner, bool leader_ok) {
    if (member == kLeader && leader_ok) return;
    if (member >= owner)
      throw ContractViolation("conflict-set member " + std::to_string(member) +
                              " is not earlier than its owner " + std::to_string(owner));
    if (!owners.count(member))
      throw ContractViolation("conflict-set member " + std::to_string(member) + " is unknown");
  };

  for (const auto& s : sets) {
    const int j = s.owner;
    for (int i : s.diverging) {
      check(i, j, true);
      g.unidirectional[{i, j}] = EdgeKind::Diverging;
    }
    for (int i : s.reachability) {
      check(i, j, false);
      g.unidirectional[{i, j}] = EdgeKind::Reachability;
    }
    for (int i : s.crossing) {
      check(i, j, false);
      g.bidirectional[{i, j}] = EdgeKind::Crossing;
    }
    for (int i : s.converging) {
      check(i, j, false);
      g.bidirectional[{i, j}] = EdgeKind::Converging;
    }
  }
  for (const auto& [edge, kind] : g.unidirectional)
    if (g.bidirectional.count(edge))
      throw ContractViolation("pair (" + std::to_string(edge.first) + "," +
                              std::to_string(edge.second) + ") appears in two conflict sets");
  return g;
}

ConflictDirectedGraph induced_cdg(const ConflictDirectedGraph& cdg, const std::vector<int>& keep)
{
  std::set<int> kept(keep.begin(), keep.end());
  ConflictDirectedGraph g;
  g.vehicles.assign(kept.begin(), kept.end());
  auto inside = [&](int v) { return v == kLeader || kept.count(v) > 0; };
  for (const auto& [edge, kind] : cdg.unidirectional)
    if (inside(edge.first) && kept.count(edge.second)) g.unidirectional[edge] = kind;
  for (const auto& [edge, kind] : cdg.bidirectional)
    if (kept.count(edge.first) && kept.count(edge.second)) g.bidirectional[edge] = kind;
  return g;
}

bool CoexistenceGraph::adjacent(int a, int b) const
{
  return edges.count({std::min(a, b), std::max(a, b)}) > 0;
}

CoexistenceGraph build_cug(const ConflictDirectedGraph& cdg)
{
  CoexistenceGraph g;
  g.vehicles = cdg.vehicles;
  for (std::size_t a = 0; a < g.vehicles.size(); ++a)
    for (std::size_t b = a + 1; b < g.vehicles.size(); ++b)
      if (!cdg.connected(g.vehicles[a], g.vehicles[b]))
        g.edges.insert({g.vehicles[a], g.vehicles[b]});
  return g;
}

std::string cdg_to_json(const ConflictDirectedGraph& cdg)
{
  nlohmann::json doc;
  doc["nodes"] = nlohmann::json::array({kLeader});
  for (int v : cdg.vehicles) doc["nodes"].push_back(v);
  doc["unidirectional"] = nlohmann::json::array();
  for (const auto& [e, kind] : cdg.unidirectional)
    doc["unidirectional"].push_back({e.first, e.second, std::string(to_string(kind))});
  doc["bidirectional"] = nlohmann::json::array();
  for (const auto& [e, kind] : cdg.bidirectional)
    doc["bidirectional"].push_back({e.first, e.second, std::string(to_string(kind))});
  return doc.dump(2) + "\n";
}

std::string cug_to_json(const CoexistenceGraph& cug)
{
  nlohmann::json doc;
  doc["nodes"] = cug.vehicles;
  doc["edges"] = nlohmann::json::array();
  for (const auto& [a, b] : cug.edges) doc["edges"].push_back({a, b});
  return doc.dump(2) + "\n";
}

} // namespace cavsched
