#pragma once

#include "cavsched/scenario.hpp"
#include "cavsched/vehicle_state.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace cavsched {

/// Node id of the virtual leading vehicle.
inline constexpr int kLeader = 0;

struct VehicleRecord
{
  int id = 0;          // arrival index, 1-based
  int movement = 0;    // Movement id
  double entry_time = 0.0;
  VehicleState entry_state;
};

struct ConflictSets
{
  int owner = 0;
  std::set<int> crossing;     // C
  std::set<int> diverging;    // D, may hold kLeader
  std::set<int> converging;   // V
  std::set<int> reachability; // R

  bool operator==(const ConflictSets&) const = default;
};

/// Remaining distance of an earlier vehicle at the instant a later vehicle
/// enters the control zone. Entries that were never set mean the earlier
/// vehicle is not in the zone at that instant.
class RemainingDistanceTable
{
public:
  void set(int later, int earlier, double remaining);
  std::optional<double> get(int later, int earlier) const;

private:
  std::map<std::pair<int, int>, double> values_;
};

/// Batch-mode context: every earlier vehicle is assumed to advance at the
/// virtual-platoon speed from its own entry, i.e.
/// p_i(t_j) = L_ctrl - v_0 (t_j - t_i).
RemainingDistanceTable predicted_remaining_distances(
  const std::vector<VehicleRecord>& vehicles, const IntersectionConfig& cfg);

/// True iff a vehicle entering now cannot reach the stopping line before a
/// preceding vehicle that is `preceding_remaining` metres away and moving
/// at the platoon speed.
bool reachability_conflict(double preceding_remaining, const IntersectionConfig& cfg);

/// Distance below which reachability_conflict holds (v_0 * time bound).
double reachability_threshold(const IntersectionConfig& cfg);

/// Per-vehicle conflict sets against earlier vehicles. D_j holds every earlier
/// vehicle on the same approach lane, or {0} when there is none.
std::vector<ConflictSets> build_conflict_sets(const std::vector<VehicleRecord>& vehicles,
                                              const RemainingDistanceTable& context,
                                              const IntersectionConfig& cfg);

enum class EdgeKind : std::uint8_t
{
  Diverging,
  Reachability,
  Crossing,
  Converging
};

std::string_view to_string(EdgeKind kind);

struct ConflictDirectedGraph
{
  std::vector<int> vehicles; // ascending, node 0 implicit
  /// (from, to), from < to; from may be kLeader.
  std::map<std::pair<int, int>, EdgeKind> unidirectional;
  /// (earlier, later).
  std::map<std::pair<int, int>, EdgeKind> bidirectional;

  /// Any edge between a and b, in either direction or sense.
  bool connected(int a, int b) const;
  std::vector<int> unidirectional_parents(int j) const;
  std::vector<int> bidirectional_parents(int j) const;
  int max_id() const { return vehicles.empty() ? 0 : vehicles.back(); }
};

ConflictDirectedGraph build_cdg(const std::vector<ConflictSets>& sets);

/// Restriction of a CDG to a subset of its vehicles (edges from node 0 kept
/// for retained vehicles).
ConflictDirectedGraph induced_cdg(const ConflictDirectedGraph& cdg,
                                  const std::vector<int>& keep);

struct CoexistenceGraph
{
  std::vector<int> vehicles; // ascending
  std::set<std::pair<int, int>> edges; // (smaller, larger)

  bool adjacent(int a, int b) const;
};

CoexistenceGraph build_cug(const ConflictDirectedGraph& cdg);

std::string cdg_to_json(const ConflictDirectedGraph& cdg);
std::string cug_to_json(const CoexistenceGraph& cug);

} // namespace cavsched
