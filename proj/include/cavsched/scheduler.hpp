#pragma once

#include "cavsched/conflict_graph.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cavsched {

/// Passing order as a tree rooted at the virtual leader. Vectors are indexed
/// by vehicle id; -1 marks ids that are not part of the tree.
struct SpanningTree
{
  std::vector<int> parent{-1};
  std::vector<int> depth{0};

  static SpanningTree with_capacity(int max_id);

  bool contains(int id) const;
  void place(int id, int parent_id, int node_depth);
  /// Vehicle ids in the tree, ascending (leader excluded).
  std::vector<int> vehicles() const;
  int d_all() const;
  /// Non-empty depth groups, shallowest first, members ascending.
  std::vector<std::vector<int>> layers() const;
};

struct Placement
{
  int parent = kLeader;
  int depth = 1;
};

/// Depth rule of the improved DFST: the new vehicle goes strictly behind all
/// of its fixed-order parents, and either ahead of all its exchangeable-order
/// parents or behind all of them.
int improved_target_depth(int max_unidirectional_depth, const std::vector<int>& bidirectional_depths);

/// Picks the parent and depth for a vehicle given its unidirectional and
/// bidirectional conflict parents, all of which must already be in the tree.
/// The parent is a node one layer above the target: a unidirectional parent
/// when one sits there (latest arrival first), otherwise the lowest id.
Placement find_opt_placement(const SpanningTree& tree, const std::vector<int>& unidirectional,
                             const std::vector<int>& bidirectional);
int find_opt_parent(const SpanningTree& tree, const std::vector<int>& unidirectional,
                    const std::vector<int>& bidirectional);

/// Baseline: all conflict parents form one set, the vehicle goes one layer
/// below the deepest of them.
Placement dfst_placement(const SpanningTree& tree, const std::vector<int>& unidirectional,
                         const std::vector<int>& bidirectional);

SpanningTree dfst_schedule(const ConflictDirectedGraph& cdg);
SpanningTree idfst_schedule(const ConflictDirectedGraph& cdg);

struct CliqueCover
{
  std::vector<std::vector<int>> subsets;

  int theta() const { return static_cast<int>(subsets.size()); }
  int max_clique_size() const;
  /// Members ascending; subsets by size descending, then lexicographically.
  CliqueCover canonical() const;
  bool operator==(const CliqueCover&) const = default;
};

/// Sum over layers of (1-based layer index) * (layer size).
long long layer_objective(const std::vector<std::vector<int>>& ordered_subsets);

/// Greedy colouring of the conflict complement in breadth-first order.
CliqueCover mcc_greedy(const CoexistenceGraph& cug);

inline constexpr int kDefaultBruteForceCap = 12;

/// Exact minimum clique cover. Among minimum covers, returns the one with the
/// smallest layer objective once sorted by size, then the lexicographically
/// largest size sequence, then the lexicographically smallest canonical form.
/// Throws SizeLimitError above `cap` vehicles.
CliqueCover mcc_bruteforce(const CoexistenceGraph& cug, int cap = kDefaultBruteForceCap);

/// Every minimum clique cover, canonicalised and sorted.
std::vector<CliqueCover> enumerate_minimum_covers(const CoexistenceGraph& cug,
                                                  int cap = kDefaultBruteForceCap);

struct LayerPlan
{
  std::vector<std::vector<int>> layers;
  std::vector<std::pair<int, int>> swaps; // same-lane exchanges, in order
};

/// Orders the cover's cliques into layers (largest first), exchanges
/// same-lane vehicles until every lane passes in arrival order, and moves any
/// vehicle still violating a fixed-order edge to the next compatible layer.
LayerPlan arrange_cover(const CliqueCover& cover, const ConflictDirectedGraph& cdg);
SpanningTree layers_to_tree(const std::vector<std::vector<int>>& layers);
SpanningTree cover_to_tree(const CliqueCover& cover, const ConflictDirectedGraph& cdg);

struct Violation
{
  enum class Kind
  {
    SameDepthConflict,
    OrderInversion
  };
  Kind kind;
  int first;
  int second;
};

struct FeasibilityReport
{
  bool feasible = true;
  std::vector<Violation> violations;
};

FeasibilityReport verify_feasible(const SpanningTree& tree, const ConflictDirectedGraph& cdg);

enum class Algorithm
{
  Dfst,
  Idfst,
  MccGreedy,
  MccBrute
};

std::string_view to_string(Algorithm a);
std::optional<Algorithm> parse_algorithm(std::string_view name);

SpanningTree schedule(const ConflictDirectedGraph& cdg, Algorithm algorithm,
                      int brute_force_cap = kDefaultBruteForceCap);

std::string tree_to_json(const SpanningTree& tree);
std::string cover_to_json(const CliqueCover& cover);

} // namespace cavsched
