#include "cavsched/errors.hpp"
#include "cavsched/scheduler.hpp"
#include "support.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

using namespace cavsched;

namespace {

std::vector<int> parents_of(const SpanningTree& t)
{
  std::vector<int> out;
  for (int v : t.vehicles()) out.push_back(t.parent[v]);
  return out;
}

std::vector<int> depths_of(const SpanningTree& t)
{
  std::vector<int> out;
  for (int v : t.vehicles()) out.push_back(t.depth[v]);
  return out;
}

} // namespace

TEST_CASE("improved DFST on the worked example")
{
  const auto tree = idfst_schedule(support::example1_cdg());
  CHECK(parents_of(tree) == std::vector<int>{0, 0, 1, 3, 4, 5, 2});
  CHECK(depths_of(tree) == std::vector<int>{1, 1, 2, 3, 4, 5, 2});
  CHECK(tree.d_all() == 5);
  CHECK(verify_feasible(tree, support::example1_cdg()).feasible);
}

TEST_CASE("baseline DFST on the worked example")
{
  const auto tree = dfst_schedule(support::example1_cdg());
  CHECK(tree.depth[7] == 6);
  CHECK(tree.d_all() == 6);
  CHECK(verify_feasible(tree, support::example1_cdg()).feasible);
}

TEST_CASE("target depth rule")
{
  CHECK(improved_target_depth(0, {}) == 1);
  CHECK(improved_target_depth(1, {4, 5}) == 2); // room ahead of all exchangeable parents
  CHECK(improved_target_depth(0, {1}) == 2);    // cannot go ahead, goes behind
  CHECK(improved_target_depth(0, {1, 3}) == 4);
  CHECK(improved_target_depth(4, {1, 3}) == 5);
}

TEST_CASE("parent selection on partial trees of the worked example")
{
  const auto cdg = support::example1_cdg();
  const auto full = idfst_schedule(cdg);

  SpanningTree before7 = full;
  before7.depth[7] = before7.parent[7] = -1;
  CHECK(find_opt_parent(before7, {0, 1, 2}, {5, 6}) == 2);

  SpanningTree before4 = SpanningTree::with_capacity(7);
  for (int v : {1, 2, 3}) before4.place(v, full.parent[v], full.depth[v]);
  CHECK(find_opt_parent(before4, {0}, {1, 2, 3}) == 3);

  SpanningTree empty = SpanningTree::with_capacity(7);
  CHECK(find_opt_parent(empty, {0}, {}) == 0);

  CHECK_THROWS_AS(find_opt_parent(empty, {0, 4}, {}), ContractViolation);
}

TEST_CASE("exact cover of the worked example")
{
  const auto cdg = support::example1_cdg();
  const auto cug = build_cug(cdg);
  const auto covers = enumerate_minimum_covers(cug);
  CHECK(covers == support::example1_minimum_covers());

  const auto best = mcc_bruteforce(cug);
  CHECK(best.theta() == 4);
  CHECK(best == CliqueCover{{{1, 3, 5}, {4, 7}, {2}, {6}}});
  CHECK(layer_objective(best.subsets) == 3 + 4 + 3 + 4);

  const auto tree = cover_to_tree(best, cdg);
  CHECK(tree.d_all() == 4);
  CHECK(verify_feasible(tree, cdg).feasible);
}

TEST_CASE("greedy cover of the worked example")
{
  const auto cdg = support::example1_cdg();
  const auto greedy = mcc_greedy(build_cug(cdg));
  CHECK(support::is_partition_into_cliques(greedy, cdg));
  CHECK(greedy.theta() == 4);
  CHECK(greedy.canonical() == CliqueCover{{{1, 2}, {3, 5}, {4, 7}, {6}}});
}

TEST_CASE("same-lane exchange repairs an infeasible cover")
{
  const auto cdg = support::example1_cdg();
  const CliqueCover second{{{1, 3, 6}, {4, 7}, {2}, {5}}};

  // As listed, vehicle 6 would pass before vehicle 5 on the same lane, and
  // vehicle 7 before vehicle 2, which it cannot reach in time to overtake.
  const auto naive = layers_to_tree(second.subsets);
  const auto report = verify_feasible(naive, cdg);
  CHECK_FALSE(report.feasible);
  REQUIRE(report.violations.size() == 2);
  for (const auto& v : report.violations) CHECK(v.kind == Violation::Kind::OrderInversion);
  CHECK(report.violations[0].first == 2);
  CHECK(report.violations[0].second == 7);
  CHECK(report.violations[1].first == 5);
  CHECK(report.violations[1].second == 6);

  const auto plan = arrange_cover(second, cdg);
  CHECK(plan.swaps == std::vector<std::pair<int, int>>{{5, 6}});
  CHECK(plan.layers == std::vector<std::vector<int>>{{1, 3, 5}, {2}, {4, 7}, {6}});
  const auto tree = layers_to_tree(plan.layers);
  CHECK(tree.d_all() == 4);
  CHECK(verify_feasible(tree, cdg).feasible);
}

TEST_CASE("feasibility check flags same-layer conflicts")
{
  const auto cdg = support::example1_cdg();
  const auto tree = layers_to_tree({{1, 2, 3}, {4, 5, 7}, {6}});
  const auto report = verify_feasible(tree, cdg);
  CHECK_FALSE(report.feasible);
  int same_layer = 0;
  for (const auto& v : report.violations)
    if (v.kind == Violation::Kind::SameDepthConflict) ++same_layer;
  CHECK(same_layer == 3); // (2,3), (4,5), (5,7)
  CHECK(report.violations.size() == 3);
}

TEST_CASE("cover checks reject non-partitions")
{
  const auto cdg = support::example1_cdg();
  CHECK_THROWS_AS(arrange_cover(CliqueCover{{{1, 2}, {3}}}, cdg), ContractViolation);
  CHECK_THROWS_AS(arrange_cover(CliqueCover{{{1, 2, 3}, {4}, {5}, {6}, {7}}}, cdg), ContractViolation);
  CHECK_THROWS_AS(verify_feasible(layers_to_tree({{1}}), cdg), ContractViolation);
}

TEST_CASE("exact solver size cap")
{
  const auto cdg = support::random_cdg(13, 3.0, 5);
  CHECK_THROWS_AS(mcc_bruteforce(build_cug(cdg)), SizeLimitError);
  CHECK_NOTHROW(mcc_bruteforce(build_cug(cdg), 13));
}

TEST_CASE("schedulers agree with reference solvers on random instances")
{
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const int n = 4 + static_cast<int>(seed % 5);
    const double lambda = 1.0 + static_cast<double>(seed % 4);
    const auto cdg = support::random_cdg(n, lambda, seed);
    CAPTURE(seed);
    const auto cug = build_cug(cdg);
    const auto exact = mcc_bruteforce(cug);
    const auto greedy = mcc_greedy(cug);
    CHECK(support::is_partition_into_cliques(exact, cdg));
    CHECK(support::is_partition_into_cliques(greedy, cdg));
    CHECK(exact.theta() == support::chromatic_number(cdg));
    CHECK(exact.theta() <= greedy.theta());
    for (Algorithm a : {Algorithm::Dfst, Algorithm::Idfst, Algorithm::MccGreedy, Algorithm::MccBrute}) {
      const auto tree = schedule(cdg, a);
      CHECK(verify_feasible(tree, cdg).feasible);
      CHECK(tree.d_all() >= exact.theta());
    }
    CHECK(schedule(cdg, Algorithm::Idfst).d_all() <= schedule(cdg, Algorithm::Dfst).d_all());
  }
}

TEST_CASE("JSON output")
{
  const auto tree = idfst_schedule(support::example1_cdg());
  const auto doc = nlohmann::json::parse(tree_to_json(tree));
  CHECK(doc["d_all"] == 5);
  CHECK(doc["nodes"][6]["parent"] == 2);
  const auto cover = nlohmann::json::parse(cover_to_json(CliqueCover{{{1, 2}, {3}}}));
  CHECK(cover["theta"] == 2);
}

TEST_CASE("algorithm names")
{
  for (Algorithm a : {Algorithm::Dfst, Algorithm::Idfst, Algorithm::MccGreedy, Algorithm::MccBrute})
    CHECK(parse_algorithm(to_string(a)) == a);
  CHECK_FALSE(parse_algorithm("mcc").has_value());
}
