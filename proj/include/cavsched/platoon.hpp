#pragma once

#include "cavsched/scenario.hpp"
#include "cavsched/scheduler.hpp"
#include "cavsched/vehicle_state.hpp"

#include <Eigen/Dense>

#include <map>
#include <vector>

namespace cavsched {

struct ControllerGains
{
  double k_p = 0.1; // 1/s^2
  double k_v = 0.3; // 1/s
};

void validate(const ControllerGains& gains);

/// Predecessor-leader-following links. Matrix rows follow `nodes`.
struct CommTopology
{
  std::vector<int> nodes;           // vehicle ids, ascending
  Eigen::MatrixXd adjacency;        // A, symmetric 0/1
  Eigen::MatrixXd pinning;          // Q, diagonal
  Eigen::MatrixXd laplacian;        // L = D - A
  std::map<int, std::vector<int>> neighbors; // vehicle neighbours, leader excluded

  int index_of(int id) const;
  bool pinned(int id) const;
};

/// Every vehicle listens to the leader; parent and child are linked both ways
/// unless the parent is the leader itself.
CommTopology build_plf_topology(const SpanningTree& tree);

/// Leader state at time t: constant speed, remaining distance p_0(0) - v_0 t.
VehicleState leader_state(double leader_start, double t, const IntersectionConfig& cfg);

/// Distributed feedback law. `states` must contain the leader (id 0) and every
/// neighbour of `id`; the leader sits at depth 0. The result is not clamped.
double control_input(int id, const std::map<int, VehicleState>& states, const CommTopology& topology,
                     const SpanningTree& tree, const ControllerGains& gains,
                     const IntersectionConfig& cfg);

/// Same law in stacked form, -(L + Q)(k_p x_p + k_v x_v) over tracking errors.
/// Entries follow topology.nodes.
Eigen::VectorXd control_inputs_stacked(const std::map<int, VehicleState>& states,
                                       const CommTopology& topology, const SpanningTree& tree,
                                       const ControllerGains& gains, const IntersectionConfig& cfg);

double clamp_acceleration(double u, const IntersectionConfig& cfg);

/// One forward-Euler step with acceleration and speed saturation.
VehicleState step_dynamics(const VehicleState& state, double u, double dt,
                           const IntersectionConfig& cfg);

struct ClosedLoopResult
{
  /// First time at which every spacing and speed error was below tolerance,
  /// negative if that never happened before the first crossing.
  double converged_at = -1.0;
  std::map<int, double> crossing_time;
  bool bounds_respected = true;
  double max_spacing_error = 0.0; // at the end of the run
  double max_speed_error = 0.0;
};

/// Closed-loop run of a fixed tree until every vehicle crosses or the horizon
/// expires. Crossed vehicles leave the topology and hold their speed.
ClosedLoopResult simulate_fixed_tree(const SpanningTree& tree,
                                     const std::map<int, VehicleState>& initial,
                                     double leader_start, const ControllerGains& gains,
                                     const IntersectionConfig& cfg, double horizon,
                                     double tolerance = 0.1);

} // namespace cavsched
