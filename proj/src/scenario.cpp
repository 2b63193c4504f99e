#include "cavsched/scenario.hpp"

#include "cavsched/errors.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

namespace cavsched {

using nlohmann::json;

std::string_view to_string(Leg leg)
{
  switch (leg) {
    case Leg::North: return "North";
    case Leg::South: return "South";
    case Leg::East: return "East";
    case Leg::West: return "West";
  }
  return "?";
}

std::optional<Leg> parse_leg(std::string_view name)
{
  if (name == "North" || name == "N") return Leg::North;
  if (name == "South" || name == "S") return Leg::South;
  if (name == "East" || name == "E") return Leg::East;
  if (name == "West" || name == "W") return Leg::West;
  return std::nullopt;
}

std::string_view to_string(ConflictClass c)
{
  switch (c) {
    case ConflictClass::Crossing: return "crossing";
    case ConflictClass::Diverging: return "diverging";
    case ConflictClass::Converging: return "converging";
    case ConflictClass::None: return "none";
  }
  return "?";
}

const Movement& IntersectionConfig::movement(int id) const
{
  auto it = std::find_if(movements.begin(), movements.end(),
                         [id](const Movement& m) { return m.id == id; });
  if (it == movements.end())
    throw ConfigError("unknown movement id " + std::to_string(id));
  return *it;
}

bool IntersectionConfig::has_movement(int id) const
{
  return std::any_of(movements.begin(), movements.end(),
                     [id](const Movement& m) { return m.id == id; });
}

bool IntersectionConfig::is_crossing(int a, int b) const
{
  return crossing_pairs.count({std::min(a, b), std::max(a, b)}) > 0;
}

namespace {

bool same_approach_lane(const Movement& a, const Movement& b)
{
  return a.approach_leg == b.approach_leg && a.approach_lane == b.approach_lane;
}

bool same_exit_lane(const Movement& a, const Movement& b)
{
  return a.exit_leg == b.exit_leg && a.exit_lane == b.exit_lane;
}

} // namespace

ConflictClass classify_conflict(const Movement& a, const Movement& b,
                                const IntersectionConfig& cfg)
{
  return classify_conflict(a.id, b.id, cfg);
}

ConflictClass classify_conflict(int a_id, int b_id, const IntersectionConfig& cfg)
{
  const Movement& a = cfg.movement(a_id);
  const Movement& b = cfg.movement(b_id);
  if (a_id == b_id)
    throw ContractViolation("classify_conflict needs two distinct movements");

  if (same_approach_lane(a, b)) return ConflictClass::Diverging;
  if (same_exit_lane(a, b)) return ConflictClass::Converging;
  if (cfg.is_crossing(a_id, b_id)) return ConflictClass::Crossing;
  return ConflictClass::None;
}

IntersectionConfig default_intersection()
{
  IntersectionConfig cfg;
  cfg.legs = {Leg::North, Leg::South, Leg::East, Leg::West};

  // Departure lanes: two per leg. East-west through lanes keep their lane
  // index; turning flows share the matching departure lane.
  //            id  approach        lane  exit          lane
  cfg.movements = {
    {1,  Leg::North, 0, Leg::East,  0}, // left
    {2,  Leg::North, 1, Leg::South, 1}, // through
    {3,  Leg::North, 2, Leg::West,  1}, // right
    {4,  Leg::East,  0, Leg::South, 0}, // left
    {5,  Leg::East,  1, Leg::West,  0}, // through, inner
    {6,  Leg::East,  2, Leg::West,  1}, // through, outer
    {7,  Leg::East,  3, Leg::North, 1}, // right
    {8,  Leg::South, 0, Leg::West,  0}, // left
    {9,  Leg::South, 1, Leg::North, 1}, // through
    {10, Leg::South, 2, Leg::East,  1}, // right
    {11, Leg::West,  0, Leg::North, 0}, // left
    {12, Leg::West,  1, Leg::East,  0}, // through, inner
    {13, Leg::West,  2, Leg::East,  1}, // through, outer
    {14, Leg::West,  3, Leg::South, 1}, // right
  };

  auto add = [&cfg](int a, std::initializer_list<int> others) {
    for (int b : others) cfg.crossing_pairs.insert({std::min(a, b), std::max(a, b)});
  };
  // through vs. through
  add(2, {5, 6, 12, 13});
  add(9, {5, 6, 12, 13});
  // left vs. through (opposing and the perpendicular flow it cuts across)
  add(1, {9, 5, 6});
  add(8, {2, 12, 13});
  add(4, {12, 13, 9});
  add(11, {5, 6, 2});
  // perpendicular lefts; opposing lefts pass each other
  add(1, {4, 11});
  add(8, {4, 11});

  return cfg;
}

ConflictCounts count_conflicts(const IntersectionConfig& cfg)
{
  ConflictCounts counts;
  const auto& ms = cfg.movements;
  for (std::size_t i = 0; i < ms.size(); ++i) {
    for (std::size_t j = i + 1; j < ms.size(); ++j) {
      switch (classify_conflict(ms[i].id, ms[j].id, cfg)) {
        case ConflictClass::Crossing: ++counts.crossing; break;
        case ConflictClass::Converging: ++counts.converging; break;
        default: break;
      }
    }
  }
  std::set<std::pair<Leg, int>> lanes;
  for (const auto& m : ms) lanes.insert({m.approach_leg, m.approach_lane});
  counts.diverging_lanes = static_cast<int>(lanes.size());
  return counts;
}

namespace {

void grow_clique(const std::vector<std::vector<bool>>& compatible,
                 std::vector<int>& current, std::size_t next, int& best)
{
  best = std::max(best, static_cast<int>(current.size()));
  const std::size_t n = compatible.size();
  if (current.size() + (n - next) <= static_cast<std::size_t>(best)) return;
  for (std::size_t k = next; k < n; ++k) {
    bool ok = std::all_of(current.begin(), current.end(),
                          [&](int m) { return compatible[m][k]; });
    if (!ok) continue;
    current.push_back(static_cast<int>(k));
    grow_clique(compatible, current, k + 1, best);
    current.pop_back();
  }
}

} // namespace

int max_coexisting_movements(const IntersectionConfig& cfg)
{
  const auto& ms = cfg.movements;
  const std::size_t n = ms.size();
  std::vector<std::vector<bool>> compatible(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      compatible[i][j] = i != j &&
        classify_conflict(ms[i].id, ms[j].id, cfg) == ConflictClass::None;

  std::vector<int> current;
  int best = 0;
  grow_clique(compatible, current, 0, best);
  return best;
}

void validate(const IntersectionConfig& cfg)
{
  auto fail = [](const std::string& field, const std::string& what) {
    throw ValidationError(field + ": " + what);
  };

  if (cfg.movements.empty()) fail("movements", "at least one movement is required");

  std::set<int> ids;
  std::set<std::pair<Leg, int>> entry_lanes;
  for (const auto& m : cfg.movements) {
    const std::string where = "movements[id=" + std::to_string(m.id) + "]";
    if (m.id <= 0) fail(where + ".id", "must be positive");
    if (!ids.insert(m.id).second) fail(where + ".id", "duplicate movement id");
    if (m.approach_lane < 0) fail(where + ".approach_lane", "must be >= 0");
    if (m.exit_lane < 0) fail(where + ".exit_lane", "must be >= 0");
    if (m.approach_leg == m.exit_leg) fail(where + ".exit_leg", "U-turns are not supported");
    if (std::find(cfg.legs.begin(), cfg.legs.end(), m.approach_leg) == cfg.legs.end())
      fail(where + ".approach_leg", "leg not listed in legs");
    if (std::find(cfg.legs.begin(), cfg.legs.end(), m.exit_leg) == cfg.legs.end())
      fail(where + ".exit_leg", "leg not listed in legs");
    if (!entry_lanes.insert({m.approach_leg, m.approach_lane}).second)
      fail(where + ".approach_lane", "approach lane already used by another movement");
  }

  for (const auto& [a, b] : cfg.crossing_pairs) {
    const std::string where =
      "crossing_pairs[" + std::to_string(a) + "," + std::to_string(b) + "]";
    if (a == b) fail(where, "a movement cannot cross itself");
    if (!ids.count(a) || !ids.count(b)) fail(where, "unknown movement id");
    if (a > b) fail(where, "pair not normalised");
    const Movement& ma = cfg.movement(a);
    const Movement& mb = cfg.movement(b);
    if (same_approach_lane(ma, mb)) fail(where, "pair shares an approach lane (diverging, not crossing)");
    if (same_exit_lane(ma, mb)) fail(where, "pair shares an exit lane (converging, not crossing)");
  }

  if (!(cfg.control_zone_length > 0)) fail("parameters.control_zone_length", "must be > 0");
  if (!(cfg.v_max > 0)) fail("parameters.v_max", "must be > 0");
  if (!(cfg.a_max > 0)) fail("parameters.a_max", "must be > 0");
  if (!(cfg.a_min < 0)) fail("parameters.a_min", "must be < 0");
  if (!(cfg.platoon_speed > 0)) fail("parameters.platoon_speed", "must be > 0");
  if (cfg.platoon_speed > cfg.v_max) fail("parameters.platoon_speed", "must not exceed v_max");
  if (!(cfg.desired_gap > 0)) fail("parameters.desired_gap", "must be > 0");
  if (!(cfg.dt > 0)) fail("parameters.dt", "must be > 0");
  if (cfg.initial_speed < 0 || cfg.initial_speed > cfg.v_max)
    fail("parameters.initial_speed", "must lie in [0, v_max]");
}

namespace {

const json& require(const json& obj, const char* key, const std::string& path)
{
  if (!obj.is_object() || !obj.contains(key))
    throw ParseError("missing required field '" + path + key + "'");
  return obj.at(key);
}

double require_number(const json& obj, const char* key, const std::string& path)
{
  const json& v = require(obj, key, path);
  if (!v.is_number()) throw ParseError("field '" + path + key + "' must be a number");
  return v.get<double>();
}

int require_int(const json& obj, const char* key, const std::string& path)
{
  const json& v = require(obj, key, path);
  if (!v.is_number_integer()) throw ParseError("field '" + path + key + "' must be an integer");
  return v.get<int>();
}

Leg require_leg(const json& obj, const char* key, const std::string& path)
{
  const json& v = require(obj, key, path);
  if (!v.is_string()) throw ParseError("field '" + path + key + "' must be a leg name");
  auto leg = parse_leg(v.get<std::string>());
  if (!leg) throw ParseError("field '" + path + key + "': unknown leg '" + v.get<std::string>() + "'");
  return *leg;
}

} // namespace

IntersectionConfig load_scenario(std::string_view document)
{
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed scenario document: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("scenario document must be an object");

  IntersectionConfig cfg;

  const json& legs = require(doc, "legs", "");
  if (!legs.is_array()) throw ParseError("field 'legs' must be a list");
  for (const auto& l : legs) {
    if (!l.is_string()) throw ParseError("field 'legs' must contain leg names");
    auto leg = parse_leg(l.get<std::string>());
    if (!leg) throw ParseError("field 'legs': unknown leg '" + l.get<std::string>() + "'");
    cfg.legs.push_back(*leg);
  }

  const json& movements = require(doc, "movements", "");
  if (!movements.is_array()) throw ParseError("field 'movements' must be a list");
  for (std::size_t k = 0; k < movements.size(); ++k) {
    const json& m = movements[k];
    const std::string path = "movements[" + std::to_string(k) + "].";
    Movement mv;
    mv.id = require_int(m, "id", path);
    mv.approach_leg = require_leg(m, "approach_leg", path);
    mv.approach_lane = require_int(m, "approach_lane", path);
    mv.exit_leg = require_leg(m, "exit_leg", path);
    mv.exit_lane = require_int(m, "exit_lane", path);
    cfg.movements.push_back(mv);
  }

  const json& pairs = require(doc, "crossing_pairs", "");
  if (!pairs.is_array()) throw ParseError("field 'crossing_pairs' must be a list");
  for (const auto& p : pairs) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() || !p[1].is_number_integer())
      throw ParseError("field 'crossing_pairs' entries must be [id, id]");
    const int a = p[0].get<int>();
    const int b = p[1].get<int>();
    cfg.crossing_pairs.insert({std::min(a, b), std::max(a, b)});
  }

  const json& params = require(doc, "parameters", "");
  const std::string pp = "parameters.";
  cfg.control_zone_length = require_number(params, "control_zone_length", pp);
  cfg.v_max = require_number(params, "v_max", pp);
  cfg.a_max = require_number(params, "a_max", pp);
  cfg.a_min = require_number(params, "a_min", pp);
  cfg.platoon_speed = require_number(params, "platoon_speed", pp);
  cfg.desired_gap = require_number(params, "desired_gap", pp);
  cfg.dt = require_number(params, "dt", pp);
  cfg.initial_speed = require_number(params, "initial_speed", pp);

  validate(cfg);
  return cfg;
}

IntersectionConfig load_scenario_file(const std::string& path)
{
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_scenario(buf.str());
}

std::string dump_scenario(const IntersectionConfig& cfg)
{
  json doc;
  doc["legs"] = json::array();
  for (Leg l : cfg.legs) doc["legs"].push_back(std::string(to_string(l)));
  doc["movements"] = json::array();
  for (const auto& m : cfg.movements) {
    doc["movements"].push_back({
      {"id", m.id},
      {"approach_leg", std::string(to_string(m.approach_leg))},
      {"approach_lane", m.approach_lane},
      {"exit_leg", std::string(to_string(m.exit_leg))},
      {"exit_lane", m.exit_lane},
    });
  }
  doc["crossing_pairs"] = json::array();
  for (const auto& [a, b] : cfg.crossing_pairs) doc["crossing_pairs"].push_back({a, b});
  doc["parameters"] = {
    {"control_zone_length", cfg.control_zone_length},
    {"v_max", cfg.v_max},
    {"a_max", cfg.a_max},
    {"a_min", cfg.a_min},
    {"platoon_speed", cfg.platoon_speed},
    {"desired_gap", cfg.desired_gap},
    {"dt", cfg.dt},
    {"initial_speed", cfg.initial_speed},
  };
  return doc.dump(2) + "\n";
}

} // namespace cavsched
