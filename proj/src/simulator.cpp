#include "cavsched/simulator.hpp"

#include "cavsched/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace cavsched {

std::string_view to_string(Mode m)
{
  return m == Mode::Batch ? "batch" : "online";
}

std::optional<Mode> parse_mode(std::string_view name)
{
  if (name == "batch") return Mode::Batch;
  if (name == "online") return Mode::Online;
  return std::nullopt;
}

void validate(const SimConfig& cfg)
{
  validate(cfg.scenario);
  validate(cfg.gains);
  if (cfg.n_vehicles < 1) throw ConfigError("n_vehicles must be at least 1");
  if (!(cfg.lambda > 0) || !std::isfinite(cfg.lambda)) throw ConfigError("lambda must be positive");
  if (!(cfg.horizon > 0)) throw ConfigError("horizon must be positive");
  if (cfg.leader_start && !std::isfinite(*cfg.leader_start)) throw ConfigError("leader_start must be finite");
}

double default_leader_start(const IntersectionConfig& scenario)
{
  return reachability_threshold(scenario) - scenario.desired_gap;
}

double leader_start_of(const SimConfig& cfg)
{
  return cfg.leader_start ? *cfg.leader_start : default_leader_start(cfg.scenario);
}

std::vector<Arrival> sample_arrivals(const SimConfig& cfg)
{
  validate(cfg);
  const auto& scenario = cfg.scenario;
  std::mt19937_64 rng(cfg.seed);
  std::exponential_distribution<double> gap(1.0 / cfg.lambda);

  struct Entry
  {
    long step;
    std::size_t lane;
  };
  std::vector<Entry> entries;
  for (std::size_t lane = 0; lane < scenario.movements.size(); ++lane) {
    double t = 0.0;
    long previous = 0;
    for (int k = 0; k < cfg.n_vehicles; ++k) {
      t += gap(rng);
      const long step = std::max(static_cast<long>(std::ceil(t / scenario.dt - 1e-9)), previous + 1);
      entries.push_back({step, lane});
      previous = step;
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.step != b.step ? a.step < b.step : a.lane < b.lane;
  });
  entries.resize(static_cast<std::size_t>(cfg.n_vehicles));

  std::vector<Arrival> out;
  for (std::size_t k = 0; k < entries.size(); ++k)
    out.push_back({static_cast<int>(k) + 1, scenario.movements[entries[k].lane].id,
                   static_cast<double>(entries[k].step) * scenario.dt});
  return out;
}

std::string lane_label(const Movement& m)
{
  return std::string(1, to_string(m.approach_leg).front()) + std::to_string(m.approach_lane);
}

int movement_for_lane(std::string_view label, const IntersectionConfig& scenario)
{
  for (const auto& m : scenario.movements)
    if (lane_label(m) == label) return m.id;
  throw ValidationError("unknown lane '" + std::string(label) + "'");
}

namespace {

std::string trim(std::string s)
{
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

} // namespace

std::vector<Arrival> parse_arrivals(std::string_view text, const IntersectionConfig& scenario)
{
  std::vector<Arrival> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (cells.size() != 3)
      throw ParseError("arrival line " + std::to_string(line_no) + ": expected id,lane,t_in");
    if (out.empty() && cells[0] == "id") continue;
    Arrival a;
    try {
      std::size_t used = 0;
      a.id = std::stoi(cells[0], &used);
      if (used != cells[0].size()) throw std::invalid_argument("id");
      a.t_in = std::stod(cells[2], &used);
      if (used != cells[2].size()) throw std::invalid_argument("t_in");
    } catch (const std::logic_error&) {
      throw ParseError("arrival line " + std::to_string(line_no) + ": bad number");
    }
    a.movement = movement_for_lane(cells[1], scenario);
    out.push_back(a);
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (out[k].id != static_cast<int>(k) + 1)
      throw ValidationError("arrival ids must be 1, 2, ... in file order");
    if (!(out[k].t_in >= 0.0)) throw ValidationError("arrival times must be >= 0");
    if (k > 0 && out[k].t_in < out[k - 1].t_in)
      throw ValidationError("arrival times must be non-decreasing in id order");
  }
  return out;
}

std::vector<Arrival> load_arrivals_file(const std::string& path, const IntersectionConfig& scenario)
{
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open arrival file '" + path + "'");
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_arrivals(buf.str(), scenario);
}

std::string format_arrivals(const std::vector<Arrival>& arrivals, const IntersectionConfig& scenario)
{
  std::string out = "id,lane,t_in\n";
  char buf[64];
  for (const auto& a : arrivals) {
    std::snprintf(buf, sizeof buf, "%d,%s,%.1f\n", a.id, lane_label(scenario.movement(a.movement)).c_str(),
                  a.t_in);
    out += buf;
  }
  return out;
}

std::vector<VehicleRecord> to_vehicle_records(const std::vector<Arrival>& arrivals,
                                              const IntersectionConfig& scenario)
{
  std::vector<VehicleRecord> out;
  for (const auto& a : arrivals)
    out.push_back({a.id, a.movement, a.t_in, {scenario.control_zone_length, scenario.initial_speed}});
  return out;
}

ConflictDirectedGraph batch_cdg(const std::vector<Arrival>& arrivals, const IntersectionConfig& scenario)
{
  const auto records = to_vehicle_records(arrivals, scenario);
  return build_cdg(build_conflict_sets(records, predicted_remaining_distances(records, scenario), scenario));
}

double evacuation_time(const std::vector<CompletionRecord>& records)
{
  if (records.empty()) throw ContractViolation("evacuation time of an empty run");
  double t = records.front().t_out;
  for (const auto& r : records) t = std::max(t, r.t_out);
  return t;
}

double attd(const std::vector<CompletionRecord>& records, const IntersectionConfig& scenario)
{
  if (records.empty()) throw ContractViolation("travel delay of an empty run");
  const double free_flow = scenario.control_zone_length / scenario.v_max;
  double sum = 0.0;
  for (const auto& r : records) sum += r.t_out - r.t_in - free_flow;
  return sum / static_cast<double>(records.size());
}

double discharge_interval(const std::vector<CompletionRecord>& records)
{
  std::map<int, std::pair<double, int>> by_depth;
  for (const auto& r : records) {
    by_depth[r.depth].first += r.t_out;
    by_depth[r.depth].second += 1;
  }
  if (by_depth.size() < 2) return 0.0;
  const auto& [d0, first] = *by_depth.begin();
  const auto& [d1, last] = *by_depth.rbegin();
  const double span = last.first / last.second - first.first / first.second;
  return span / static_cast<double>(by_depth.size() - 1);
}

namespace {

class Simulation
{
public:
  Simulation(const SimConfig& cfg, const std::vector<Arrival>& arrivals)
    : cfg_(cfg), sc_(cfg.scenario), arrivals_(arrivals), leader_start_(leader_start_of(cfg))
  {
    tree_ = SpanningTree::with_capacity(static_cast<int>(arrivals.size()));
  }

  RunResult run()
  {
    if (cfg_.mode == Mode::Batch) {
      tree_ = schedule(batch_cdg(arrivals_, sc_), cfg_.algorithm, cfg_.brute_force_cap);
    }
    std::size_t next = 0;
    for (long step = 0;; ++step) {
      const double t = step * sc_.dt;
      if (t > cfg_.horizon)
        throw SimulationTimeout("simulation exceeded the horizon of " + std::to_string(cfg_.horizon) + " s",
                                trace_to_csv(result_.trace));
      while (next < arrivals_.size() && std::lround(arrivals_[next].t_in / sc_.dt) <= step) {
        admit(arrivals_[next], t);
        ++next;
      }
      if (next == arrivals_.size() && active_.empty()) break;
      advance(step, t);
    }
    finish();
    return std::move(result_);
  }

private:
  int depth_floor(double t) const
  {
    const double lead = leader_state(leader_start_, t, sc_).remaining_distance;
    const double needed = (reachability_threshold(sc_) - lead) / sc_.desired_gap;
    return std::max(1, static_cast<int>(std::ceil(needed - 1e-9)));
  }

  void admit(const Arrival& a, double t)
  {
    states_[a.id] = {sc_.control_zone_length, sc_.initial_speed};
    entry_[a.id] = a.t_in;
    if (cfg_.mode == Mode::Online) schedule_online(a, t);
    active_.push_back(a.id);
    topology_dirty_ = true;
  }

  void schedule_online(const Arrival& a, double t)
  {
    std::vector<VehicleRecord> records;
    RemainingDistanceTable context;
    for (int id : active_) {
      const Arrival& earlier = arrivals_[id - 1];
      records.push_back({id, earlier.movement, earlier.t_in, states_[id]});
      context.set(a.id, id, states_[id].remaining_distance);
    }
    records.push_back({a.id, a.movement, a.t_in, {sc_.control_zone_length, sc_.initial_speed}});
    const ConflictSets sets = build_conflict_sets(records, context, sc_).back();

    cdg_.vehicles.push_back(a.id);
    for (int i : sets.diverging) cdg_.unidirectional[{i, a.id}] = EdgeKind::Diverging;
    for (int i : sets.reachability) cdg_.unidirectional[{i, a.id}] = EdgeKind::Reachability;
    for (int i : sets.crossing) cdg_.bidirectional[{i, a.id}] = EdgeKind::Crossing;
    for (int i : sets.converging) cdg_.bidirectional[{i, a.id}] = EdgeKind::Converging;

    const int floor = depth_floor(t);
    if (cfg_.algorithm == Algorithm::Dfst || cfg_.algorithm == Algorithm::Idfst) {
      SpanningTree working = SpanningTree::with_capacity(a.id);
      working.depth[0] = floor - 1;
      for (int id : active_) {
        working.depth[id] = tree_.depth[id];
        working.parent[id] = tree_.parent[id];
      }
      std::vector<int> fixed(sets.diverging.begin(), sets.diverging.end());
      fixed.insert(fixed.end(), sets.reachability.begin(), sets.reachability.end());
      fixed.push_back(kLeader);
      std::vector<int> exchangeable(sets.crossing.begin(), sets.crossing.end());
      exchangeable.insert(exchangeable.end(), sets.converging.begin(), sets.converging.end());
      const Placement p = cfg_.algorithm == Algorithm::Dfst ? dfst_placement(working, fixed, exchangeable)
                                                            : find_opt_placement(working, fixed, exchangeable);
      tree_.place(a.id, p.parent, p.depth);
      return;
    }

    // Clique-cover variants rebuild the order of every vehicle that is still
    // far enough from the line, behind all vehicles that are not.
    std::vector<int> unlocked{a.id};
    int base = floor;
    std::map<int, int> locked_at_depth;
    for (int id : active_) {
      if (reachability_conflict(std::max(0.0, states_[id].remaining_distance), sc_)) {
        base = std::max(base, tree_.depth[id] + 1);
        auto [it, fresh] = locked_at_depth.emplace(tree_.depth[id], id);
        if (!fresh) it->second = std::min(it->second, id);
      } else {
        unlocked.push_back(id);
      }
    }
    std::sort(unlocked.begin(), unlocked.end());
    const ConflictDirectedGraph sub = induced_cdg(cdg_, unlocked);
    const CoexistenceGraph cug = build_cug(sub);
    const CliqueCover cover = cfg_.algorithm == Algorithm::MccGreedy
                                ? mcc_greedy(cug)
                                : mcc_bruteforce(cug, cfg_.brute_force_cap);
    const LayerPlan plan = arrange_cover(cover, sub);

    auto above = locked_at_depth.find(base - 1);
    int parent = above != locked_at_depth.end() ? above->second : kLeader;
    for (std::size_t l = 0; l < plan.layers.size(); ++l) {
      for (int id : plan.layers[l]) tree_.place(id, parent, base + static_cast<int>(l));
      parent = plan.layers[l].front();
    }
  }

  void refresh_topology()
  {
    live_ = SpanningTree::with_capacity(static_cast<int>(arrivals_.size()));
    for (int id : active_) live_.depth[id] = tree_.depth[id];
    for (int id : active_) {
      const int p = tree_.parent[id];
      live_.parent[id] = (p != kLeader && live_.contains(p) && live_.depth[p] < live_.depth[id]) ? p : kLeader;
    }
    topology_ = build_plf_topology(live_);
    topology_dirty_ = false;
  }

  void advance(long step, double t)
  {
    if (active_.empty()) return;
    if (topology_dirty_) refresh_topology();
    states_[kLeader] = leader_state(leader_start_, t, sc_);

    std::vector<double> inputs;
    inputs.reserve(active_.size());
    for (int id : active_)
      inputs.push_back(clamp_acceleration(control_input(id, states_, topology_, live_, cfg_.gains, sc_), sc_));

    std::vector<int> still;
    for (std::size_t k = 0; k < active_.size(); ++k) {
      const int id = active_[k];
      const VehicleState before = states_[id];
      if (cfg_.record_trace)
        result_.trace.push_back({step, id, before.remaining_distance, before.velocity, inputs[k], tree_.depth[id]});
      const VehicleState after = step_dynamics(before, inputs[k], sc_.dt, sc_);
      states_[id] = after;
      if (after.remaining_distance <= 0.0) {
        const double frac = before.remaining_distance / (before.remaining_distance - after.remaining_distance);
        result_.metrics.records.push_back({id, entry_[id], t + frac * sc_.dt, tree_.depth[id]});
        states_.erase(id);
        topology_dirty_ = true;
      } else {
        still.push_back(id);
      }
    }
    active_ = std::move(still);
  }

  void finish()
  {
    auto& m = result_.metrics;
    std::sort(m.records.begin(), m.records.end(),
              [](const CompletionRecord& a, const CompletionRecord& b) { return a.id < b.id; });
    m.t_evc = evacuation_time(m.records);
    m.t_attd = attd(m.records, sc_);
    std::set<int> depths;
    for (const auto& r : m.records) depths.insert(r.depth);
    m.d_all = static_cast<int>(depths.size());
    result_.arrivals = arrivals_;
    result_.tree = tree_;
  }

  const SimConfig& cfg_;
  const IntersectionConfig& sc_;
  std::vector<Arrival> arrivals_;
  double leader_start_;

  SpanningTree tree_;
  SpanningTree live_;
  CommTopology topology_;
  bool topology_dirty_ = true;
  ConflictDirectedGraph cdg_;
  std::map<int, VehicleState> states_;
  std::map<int, double> entry_;
  std::vector<int> active_;
  RunResult result_;
};

} // namespace

RunResult run_with_arrivals(const SimConfig& cfg, const std::vector<Arrival>& arrivals)
{
  validate(cfg);
  if (arrivals.empty()) throw ContractViolation("no arrivals to simulate");
  for (std::size_t k = 0; k < arrivals.size(); ++k) {
    if (arrivals[k].id != static_cast<int>(k) + 1) throw ContractViolation("arrival ids must be 1..n in order");
    if (k > 0 && arrivals[k].t_in < arrivals[k - 1].t_in)
      throw ContractViolation("arrivals must be sorted by entry time");
    (void)cfg.scenario.movement(arrivals[k].movement);
  }
  Simulation sim(cfg, arrivals);
  return sim.run();
}

RunResult run(const SimConfig& cfg)
{
  return run_with_arrivals(cfg, sample_arrivals(cfg));
}

std::string trace_to_csv(const std::vector<TraceRow>& trace)
{
  std::string out = "step,vehicle,p,v,u,depth\n";
  char buf[160];
  for (const auto& r : trace) {
    std::snprintf(buf, sizeof buf, "%ld,%d,%.6f,%.6f,%.6f,%d\n", r.step, r.vehicle, r.p, r.v, r.u, r.depth);
    out += buf;
  }
  return out;
}

} // namespace cavsched
