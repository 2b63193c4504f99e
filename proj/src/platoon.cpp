#include "cavsched/platoon.hpp"

#include "cavsched/errors.hpp"

#include <algorithm>
#include <cmath>

namespace cavsched {

void validate(const ControllerGains& gains)
{
  if (!(gains.k_p > 0) || !(gains.k_v > 0))
    throw ConfigError("controller gains k_p and k_v must be positive");
}

int CommTopology::index_of(int id) const
{
  auto it = std::lower_bound(nodes.begin(), nodes.end(), id);
  if (it == nodes.end() || *it != id)
    throw ContractViolation("vehicle " + std::to_string(id) + " is not in the topology");
  return static_cast<int>(it - nodes.begin());
}

bool CommTopology::pinned(int id) const
{
  const int k = index_of(id);
  return pinning(k, k) != 0.0;
}

CommTopology build_plf_topology(const SpanningTree& tree)
{
  if (tree.depth.size() != tree.parent.size() || tree.depth.empty() || tree.depth[0] != 0)
    throw ContractViolation("malformed spanning tree");
  CommTopology topo;
  topo.nodes = tree.vehicles();
  const auto n = static_cast<Eigen::Index>(topo.nodes.size());
  topo.adjacency = Eigen::MatrixXd::Zero(n, n);
  topo.pinning = Eigen::MatrixXd::Identity(n, n);

  for (int id : topo.nodes) {
    const int p = tree.parent[id];
    if (!tree.contains(p))
      throw ContractViolation("vehicle " + std::to_string(id) + " has no parent in the tree");
    if (tree.depth[p] >= tree.depth[id])
      throw ContractViolation("vehicle " + std::to_string(id) + " is not deeper than its parent");
    topo.neighbors[id];
    if (p == kLeader) continue;
    const int a = topo.index_of(id);
    const int b = topo.index_of(p);
    topo.adjacency(a, b) = topo.adjacency(b, a) = 1.0;
    topo.neighbors[id].push_back(p);
    topo.neighbors[p].push_back(id);
  }
  for (auto& [id, list] : topo.neighbors) std::sort(list.begin(), list.end());

  const Eigen::VectorXd degree = topo.adjacency.rowwise().sum();
  topo.laplacian = Eigen::MatrixXd(degree.asDiagonal()) - topo.adjacency;
  return topo;
}

VehicleState leader_state(double leader_start, double t, const IntersectionConfig& cfg)
{
  return {leader_start - cfg.platoon_speed * t, cfg.platoon_speed};
}

namespace {

const VehicleState& state_of(const std::map<int, VehicleState>& states, int id)
{
  auto it = states.find(id);
  if (it == states.end())
    throw ContractViolation("missing state for vehicle " + std::to_string(id));
  return it->second;
}

} // namespace

double control_input(int id, const std::map<int, VehicleState>& states, const CommTopology& topology,
                     const SpanningTree& tree, const ControllerGains& gains,
                     const IntersectionConfig& cfg)
{
  const VehicleState& self = state_of(states, id);
  const double d_i = tree.depth.at(id);
  double spacing = 0.0;
  double speed = 0.0;
  auto accumulate = [&](const VehicleState& other, double d_j) {
    spacing += other.remaining_distance - self.remaining_distance - cfg.desired_gap * (d_j - d_i);
    speed += self.velocity - other.velocity;
  };
  auto it = topology.neighbors.find(id);
  if (it == topology.neighbors.end())
    throw ContractViolation("vehicle " + std::to_string(id) + " is not in the topology");
  for (int j : it->second) accumulate(state_of(states, j), tree.depth.at(j));
  if (topology.pinned(id)) accumulate(state_of(states, kLeader), 0.0);
  return -gains.k_p * spacing - gains.k_v * speed;
}

Eigen::VectorXd control_inputs_stacked(const std::map<int, VehicleState>& states,
                                       const CommTopology& topology, const SpanningTree& tree,
                                       const ControllerGains& gains, const IntersectionConfig& cfg)
{
  const auto n = static_cast<Eigen::Index>(topology.nodes.size());
  const VehicleState& lead = state_of(states, kLeader);
  // Tracking errors with position stored as -p, so both components grow in
  // the direction of travel.
  Eigen::VectorXd pos(n), vel(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const int id = topology.nodes[k];
    const VehicleState& s = state_of(states, id);
    pos(k) = -(s.remaining_distance - lead.remaining_distance - cfg.desired_gap * tree.depth.at(id));
    vel(k) = s.velocity - lead.velocity;
  }
  return -(topology.laplacian + topology.pinning) * (gains.k_p * pos + gains.k_v * vel);
}

double clamp_acceleration(double u, const IntersectionConfig& cfg)
{
  return std::clamp(u, cfg.a_min, cfg.a_max);
}

VehicleState step_dynamics(const VehicleState& state, double u, double dt, const IntersectionConfig& cfg)
{
  if (!(dt > 0)) throw ContractViolation("time step must be positive");
  const double a = clamp_acceleration(u, cfg);
  VehicleState next;
  next.velocity = std::clamp(state.velocity + a * dt, 0.0, cfg.v_max);
  next.remaining_distance = state.remaining_distance - state.velocity * dt;
  return next;
}

ClosedLoopResult simulate_fixed_tree(const SpanningTree& tree,
                                     const std::map<int, VehicleState>& initial,
                                     double leader_start, const ControllerGains& gains,
                                     const IntersectionConfig& cfg, double horizon, double tolerance)
{
  validate(gains);
  ClosedLoopResult result;
  std::map<int, VehicleState> states = initial;
  for (int id : tree.vehicles())
    if (!states.count(id)) throw ContractViolation("missing initial state for " + std::to_string(id));

  const long steps = std::lround(horizon / cfg.dt);
  std::vector<int> active = tree.vehicles();
  bool any_crossed = false;

  for (long step = 0; step <= steps && !active.empty(); ++step) {
    const double t = step * cfg.dt;
    states[kLeader] = leader_state(leader_start, t, cfg);

    // Crossed vehicles drop out; their children fall back to the leader.
    SpanningTree live = SpanningTree::with_capacity(static_cast<int>(tree.depth.size()) - 1);
    for (int id : active) live.depth[id] = tree.depth[id];
    for (int id : active) {
      const int p = tree.parent[id];
      live.parent[id] = live.contains(p) ? p : kLeader;
    }
    const CommTopology topo = build_plf_topology(live);

    double spacing_err = 0.0, speed_err = 0.0;
    for (int id : active) {
      const int p = live.parent[id];
      const VehicleState& ref = states[p];
      const double dp = live.depth[id] - (p == kLeader ? 0 : live.depth[p]);
      spacing_err = std::max(spacing_err, std::fabs(states[id].remaining_distance -
                                                    ref.remaining_distance - cfg.desired_gap * dp));
      speed_err = std::max(speed_err, std::fabs(states[id].velocity - cfg.platoon_speed));
    }
    result.max_spacing_error = spacing_err;
    result.max_speed_error = speed_err;
    if (!any_crossed && result.converged_at < 0 && spacing_err < tolerance && speed_err < tolerance)
      result.converged_at = t;

    std::map<int, double> inputs;
    for (int id : active) inputs[id] = control_input(id, states, topo, live, gains, cfg);

    std::vector<int> still;
    for (int id : active) {
      const VehicleState before = states[id];
      const double a = clamp_acceleration(inputs[id], cfg);
      const VehicleState after = step_dynamics(before, a, cfg.dt, cfg);
      if (after.velocity < 0.0 || after.velocity > cfg.v_max || a < cfg.a_min || a > cfg.a_max)
        result.bounds_respected = false;
      states[id] = after;
      if (after.remaining_distance <= 0.0) {
        const double frac = before.remaining_distance / (before.remaining_distance - after.remaining_distance);
        result.crossing_time[id] = t + frac * cfg.dt;
        any_crossed = true;
      } else {
        still.push_back(id);
      }
    }
    active = std::move(still);
  }
  return result;
}

} // namespace cavsched
