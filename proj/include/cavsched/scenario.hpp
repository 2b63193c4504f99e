#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cavsched {

enum class Leg : std::uint8_t
{
  North = 0,
  South = 1,
  East = 2,
  West = 3
};

std::string_view to_string(Leg leg);
std::optional<Leg> parse_leg(std::string_view name);

/// A lane-to-lane route through the intersection. Lane indices are 0-based,
/// innermost lane first.
struct Movement
{
  int id = 0;
  Leg approach_leg = Leg::North;
  int approach_lane = 0;
  Leg exit_leg = Leg::South;
  int exit_lane = 0;

  bool operator==(const Movement&) const = default;
};

enum class ConflictClass : std::uint8_t
{
  Crossing,
  Diverging,
  Converging,
  None
};

std::string_view to_string(ConflictClass c);

/// Static intersection layout and the kinematic parameters shared by the
/// scheduler and the platoon controller.
struct IntersectionConfig
{
  std::vector<Leg> legs;
  std::vector<Movement> movements;
  /// Unordered movement-id pairs, stored as (smaller, larger).
  std::set<std::pair<int, int>> crossing_pairs;

  double control_zone_length = 900.0; // m
  double v_max = 25.0;                // m/s
  double a_max = 5.0;                 // m/s^2
  double a_min = -6.0;                // m/s^2
  double platoon_speed = 10.0;        // m/s, virtual leader speed v_0
  double desired_gap = 30.0;          // m per depth difference
  double dt = 0.1;                    // s
  double initial_speed = 2.0;         // m/s at zone entry

  bool operator==(const IntersectionConfig&) const = default;

  /// Throws ConfigError when the id is unknown.
  const Movement& movement(int id) const;
  bool has_movement(int id) const;
  bool is_crossing(int a, int b) const;
};

/// Pairwise route-conflict class. Symmetric in its arguments.
/// Throws ConfigError for unknown ids, ContractViolation when a.id == b.id.
ConflictClass classify_conflict(const Movement& a, const Movement& b,
                                const IntersectionConfig& cfg);
ConflictClass classify_conflict(int a_id, int b_id, const IntersectionConfig& cfg);

/// Four-leg layout with 14 approach lanes (4 on the east-west arterial, 3 on
/// the north-south road), one movement per approach lane, and 8 departure
/// lanes. Yields 24 crossing and 6 converging movement pairs.
IntersectionConfig default_intersection();

struct ConflictCounts
{
  int crossing = 0;
  int converging = 0;
  int diverging_lanes = 0; // approach lanes, i.e. same-lane groups
};

ConflictCounts count_conflicts(const IntersectionConfig& cfg);

/// Largest set of movements that are pairwise conflict-free (exhaustive).
int max_coexisting_movements(const IntersectionConfig& cfg);

/// Checks every invariant; throws ValidationError naming the offending field.
void validate(const IntersectionConfig& cfg);

/// Parses a JSON scenario document and validates it. Throws ParseError for
/// malformed documents or missing fields and ValidationError otherwise.
IntersectionConfig load_scenario(std::string_view document);
IntersectionConfig load_scenario_file(const std::string& path);

std::string dump_scenario(const IntersectionConfig& cfg);

} // namespace cavsched
