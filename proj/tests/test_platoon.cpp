#include "cavsched/errors.hpp"
#include "cavsched/platoon.hpp"
#include "support.hpp"

#include <doctest.h>

#include <random>

using namespace cavsched;

TEST_CASE("PLF topology of the worked-example tree")
{
  const auto tree = idfst_schedule(support::example1_cdg());
  const auto topo = build_plf_topology(tree);
  CHECK(topo.nodes == std::vector<int>{1, 2, 3, 4, 5, 6, 7});
  CHECK(topo.neighbors.at(7) == std::vector<int>{2});
  CHECK(topo.neighbors.at(2) == std::vector<int>{7});
  CHECK(topo.neighbors.at(4) == std::vector<int>{3, 5});
  CHECK(topo.neighbors.at(1) == std::vector<int>{3});

  CHECK(topo.adjacency.isApprox(topo.adjacency.transpose()));
  CHECK(topo.adjacency.diagonal().isZero());
  CHECK(topo.pinning.isDiagonal());
  CHECK(topo.pinning.trace() == doctest::Approx(7.0));
  CHECK((topo.laplacian * Eigen::VectorXd::Ones(7)).isZero());
  for (int a = 0; a < 7; ++a)
    for (int b = 0; b < 7; ++b)
      if (a != b) CHECK(topo.laplacian(a, b) == -topo.adjacency(a, b));
}

TEST_CASE("PLF topology of trivial trees")
{
  const auto single = layers_to_tree({{1}});
  const auto t1 = build_plf_topology(single);
  CHECK(t1.adjacency.rows() == 1);
  CHECK(t1.adjacency(0, 0) == 0.0);
  CHECK(t1.pinning(0, 0) == 1.0);
  CHECK(t1.laplacian(0, 0) == 0.0);

  const auto chain = layers_to_tree({{1}, {2}});
  const auto t2 = build_plf_topology(chain);
  CHECK(t2.adjacency(0, 1) == 1.0);
  CHECK(t2.adjacency(1, 0) == 1.0);
  CHECK(t2.pinning(0, 0) == 1.0);
  CHECK(t2.pinning(1, 1) == 1.0);
}

TEST_CASE("malformed trees are rejected")
{
  SpanningTree t = SpanningTree::with_capacity(3);
  t.depth[1] = 1;
  t.parent[1] = 2; // parent not in the tree
  CHECK_THROWS_AS(build_plf_topology(t), ContractViolation);

  SpanningTree flat = layers_to_tree({{1}, {2}});
  flat.depth[2] = 1; // child no deeper than parent
  CHECK_THROWS_AS(build_plf_topology(flat), ContractViolation);
}

TEST_CASE("control law values")
{
  const auto cfg = default_intersection();
  const ControllerGains gains;
  const auto tree = layers_to_tree({{1}});
  const auto topo = build_plf_topology(tree);

  std::map<int, VehicleState> states{{0, {100.0, 10.0}}, {1, {130.0, 10.0}}};
  CHECK(control_input(1, states, topo, tree, gains, cfg) == doctest::Approx(0.0));

  // Leader one metre further ahead than the desired gap.
  states[0].remaining_distance = 101.0;
  CHECK(control_input(1, states, topo, tree, gains, cfg) == doctest::Approx(-0.1));

  states[0].remaining_distance = 100.0;
  states[1].velocity = 11.0;
  CHECK(control_input(1, states, topo, tree, gains, cfg) == doctest::Approx(-0.3));

  states.erase(0);
  CHECK_THROWS_AS(control_input(1, states, topo, tree, gains, cfg), ContractViolation);
}

TEST_CASE("equilibrium gives zero input everywhere")
{
  const auto cfg = default_intersection();
  const auto tree = idfst_schedule(support::example1_cdg());
  const auto topo = build_plf_topology(tree);
  std::map<int, VehicleState> states{{0, {200.0, 10.0}}};
  for (int v : tree.vehicles()) states[v] = {200.0 + 30.0 * tree.depth[v], 10.0};
  for (int v : tree.vehicles()) CHECK(control_input(v, states, topo, tree, {}, cfg) == doctest::Approx(0.0));
}

TEST_CASE("neighbour form and stacked form agree")
{
  const auto cfg = default_intersection();
  const auto tree = idfst_schedule(support::example1_cdg());
  const auto topo = build_plf_topology(tree);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> jitter(-20.0, 20.0), dv(-3.0, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::map<int, VehicleState> states{{0, {300.0, 10.0}}};
    for (int v : tree.vehicles()) states[v] = {300.0 + 30.0 * tree.depth[v] + jitter(rng), 10.0 + dv(rng)};
    const Eigen::VectorXd stacked = control_inputs_stacked(states, topo, tree, {}, cfg);
    for (std::size_t k = 0; k < topo.nodes.size(); ++k)
      CHECK(stacked(static_cast<Eigen::Index>(k)) ==
            doctest::Approx(control_input(topo.nodes[k], states, topo, tree, {}, cfg)));
  }
}

TEST_CASE("integrator steps and saturation")
{
  const auto cfg = default_intersection();
  auto s = step_dynamics({500.0, 10.0}, 2.0, 0.1, cfg);
  CHECK(s.velocity == doctest::Approx(10.2));
  CHECK(s.remaining_distance == doctest::Approx(499.0));

  CHECK(step_dynamics({500.0, 25.0}, 5.0, 0.1, cfg).velocity == doctest::Approx(25.0));
  CHECK(step_dynamics({500.0, 0.0}, -6.0, 0.1, cfg).velocity == doctest::Approx(0.0));
  // Acceleration is clamped before integrating.
  CHECK(step_dynamics({500.0, 10.0}, 50.0, 0.1, cfg).velocity == doctest::Approx(10.5));
  CHECK(step_dynamics({500.0, 10.0}, -50.0, 0.1, cfg).velocity == doctest::Approx(9.4));
  // Passing the line is allowed.
  CHECK(step_dynamics({0.5, 10.0}, 0.0, 0.1, cfg).remaining_distance == doctest::Approx(-0.5));
  CHECK_THROWS_AS(step_dynamics({1.0, 1.0}, 0.0, 0.0, cfg), ContractViolation);
}

TEST_CASE("fixed tree converges from a perturbed start")
{
  const auto cfg = default_intersection();
  const auto tree = idfst_schedule(support::example1_cdg());
  const double leader_start = 1300.0;
  std::map<int, VehicleState> initial;
  for (int v : tree.vehicles())
    initial[v] = {leader_start + 30.0 * tree.depth[v] + (v % 2 ? 15.0 : -12.0), 10.0 + (v % 3) - 1.0};
  const auto r = simulate_fixed_tree(tree, initial, leader_start, {}, cfg, 400.0);
  CHECK(r.bounds_respected);
  CHECK(r.converged_at >= 0.0);
  CHECK(r.converged_at <= 120.0);
  CHECK(r.crossing_time.size() == 7);
  CHECK(std::fabs(r.crossing_time.at(1) - r.crossing_time.at(2)) < 1.0);
  CHECK(r.crossing_time.at(3) > r.crossing_time.at(1));
}

TEST_CASE("gain validation")
{
  CHECK_THROWS_AS(validate(ControllerGains{0.0, 0.3}), ConfigError);
  CHECK_THROWS_AS(validate(ControllerGains{0.1, -1.0}), ConfigError);
}
