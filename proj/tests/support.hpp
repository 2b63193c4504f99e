#pragma once

// Shared fixtures and slow-but-obvious reference solvers used by the unit
// tests and the acceptance runner.

#include "cavsched/conflict_graph.hpp"
#include "cavsched/scheduler.hpp"
#include "cavsched/simulator.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <string>
#include <vector>

namespace support {

using namespace cavsched;

inline std::string data_path(const std::string& name)
{
  return std::string(CAVSCHED_DATA_DIR) + "/" + name;
}

// Conflict sets of the seven-vehicle worked example, typed in by hand.
inline std::vector<ConflictSets> example1_sets()
{
  std::vector<ConflictSets> s(7);
  for (int i = 0; i < 7; ++i) s[i].owner = i + 1;
  s[2].crossing = {2};
  s[3].crossing = {2, 3};
  s[4].crossing = {2, 4};
  s[5].crossing = {2, 4};
  for (int i : {0, 1, 2, 3, 4, 6}) s[i].diverging = {0};
  s[5].diverging = {5};
  s[3].converging = {1};
  s[6].converging = {5, 6};
  s[6].reachability = {1, 2};
  return s;
}

inline ConflictDirectedGraph example1_cdg()
{
  return build_cdg(example1_sets());
}

// The six minimum covers listed for the worked example, canonicalised.
inline std::vector<CliqueCover> example1_minimum_covers()
{
  std::vector<CliqueCover> out{
    {{{1, 3, 5}, {4, 7}, {2}, {6}}}, {{{1, 3, 6}, {4, 7}, {2}, {5}}}, {{{1, 2}, {3, 5}, {4, 7}, {6}}},
    {{{1, 2}, {3, 6}, {4, 7}, {5}}}, {{{1, 5}, {3, 6}, {4, 7}, {2}}}, {{{1, 6}, {3, 5}, {4, 7}, {2}}}};
  for (auto& c : out) c = c.canonical();
  std::sort(out.begin(), out.end(), [](const CliqueCover& a, const CliqueCover& b) { return a.subsets < b.subsets; });
  return out;
}

inline std::vector<Arrival> sampled_arrivals(int n, double lambda, std::uint64_t seed)
{
  SimConfig cfg;
  cfg.n_vehicles = n;
  cfg.lambda = lambda;
  cfg.seed = seed;
  return sample_arrivals(cfg);
}

// Random instance drawn from the default intersection.
inline ConflictDirectedGraph random_cdg(int n, double lambda, std::uint64_t seed)
{
  return batch_cdg(sampled_arrivals(n, lambda, seed), default_intersection());
}

// Smallest number of colours for the conflict graph (pairs connected in the
// CDG may not share a colour), by trying k = 1, 2, ... colours in turn.
inline int chromatic_number(const ConflictDirectedGraph& cdg)
{
  const auto& vs = cdg.vehicles;
  const int n = static_cast<int>(vs.size());
  if (n == 0) return 0;
  std::vector<int> colour(n, -1);
  for (int k = 1; k <= n; ++k) {
    std::function<bool(int)> fill = [&](int i) {
      if (i == n) return true;
      for (int c = 0; c < k; ++c) {
        bool ok = true;
        for (int j = 0; j < i && ok; ++j)
          if (colour[j] == c && cdg.connected(vs[i], vs[j])) ok = false;
        if (!ok) continue;
        colour[i] = c;
        if (fill(i + 1)) return true;
      }
      colour[i] = -1;
      return false;
    };
    if (fill(0)) return k;
  }
  return n;
}

// Smallest number of layers over all depth assignments that satisfy both the
// same-layer exclusion and the fixed-order edges. Exhaustive.
inline int min_feasible_layers(const ConflictDirectedGraph& cdg)
{
  const auto& vs = cdg.vehicles;
  const int n = static_cast<int>(vs.size());
  if (n == 0) return 0;
  std::vector<int> depth(n, 0);
  for (int k = 1; k <= n; ++k) {
    std::function<bool(int)> fill = [&](int i) {
      // Gaps are harmless: an assignment with a gap implies a smaller k works.
      if (i == n) return true;
      for (int d = 1; d <= k; ++d) {
        bool ok = true;
        for (int j = 0; j < i && ok; ++j) {
          if (depth[j] == d && cdg.connected(vs[i], vs[j])) ok = false;
          auto it = cdg.unidirectional.find({vs[j], vs[i]});
          if (it != cdg.unidirectional.end() && depth[j] >= d) ok = false;
        }
        if (!ok) continue;
        depth[i] = d;
        if (fill(i + 1)) return true;
      }
      return false;
    };
    if (fill(0)) return k;
  }
  return n;
}

inline bool is_partition_into_cliques(const CliqueCover& c, const ConflictDirectedGraph& cdg)
{
  std::multiset<int> seen;
  for (const auto& s : c.subsets) {
    for (std::size_t a = 0; a < s.size(); ++a) {
      seen.insert(s[a]);
      for (std::size_t b = a + 1; b < s.size(); ++b)
        if (cdg.connected(s[a], s[b])) return false;
    }
  }
  return std::vector<int>(seen.begin(), seen.end()) == cdg.vehicles;
}

} // namespace support
