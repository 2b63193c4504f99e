#include "cavsched/scheduler.hpp"

#include "cavsched/errors.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

namespace cavsched {

SpanningTree SpanningTree::with_capacity(int max_id)
{
  SpanningTree t;
  t.parent.assign(static_cast<std::size_t>(max_id) + 1, -1);
  t.depth.assign(static_cast<std::size_t>(max_id) + 1, -1);
  t.depth[0] = 0;
  return t;
}

bool SpanningTree::contains(int id) const
{
  return id >= 0 && id < static_cast<int>(depth.size()) && depth[id] >= 0;
}

void SpanningTree::place(int id, int parent_id, int node_depth)
{
  if (id <= 0) throw ContractViolation("only vehicles can be placed in the tree");
  if (!contains(parent_id))
    throw ContractViolation("parent " + std::to_string(parent_id) + " is not in the tree");
  if (static_cast<int>(depth.size()) <= id) {
    depth.resize(id + 1, -1);
    parent.resize(id + 1, -1);
  }
  parent[id] = parent_id;
  depth[id] = node_depth;
}

std::vector<int> SpanningTree::vehicles() const
{
  std::vector<int> out;
  for (int id = 1; id < static_cast<int>(depth.size()); ++id)
    if (depth[id] >= 0) out.push_back(id);
  return out;
}

int SpanningTree::d_all() const
{
  std::set<int> distinct;
  for (int id : vehicles()) distinct.insert(depth[id]);
  return static_cast<int>(distinct.size());
}

std::vector<std::vector<int>> SpanningTree::layers() const
{
  std::map<int, std::vector<int>> by_depth;
  for (int id : vehicles()) by_depth[depth[id]].push_back(id);
  std::vector<std::vector<int>> out;
  for (auto& [d, ids] : by_depth) out.push_back(std::move(ids));
  return out;
}

namespace {

int depth_of(const SpanningTree& tree, int id)
{
  if (!tree.contains(id))
    throw ContractViolation("conflict parent " + std::to_string(id) + " is not in the tree");
  return tree.depth[id];
}

int lowest_node_at(const SpanningTree& tree, int d)
{
  for (int id = 0; id < static_cast<int>(tree.depth.size()); ++id)
    if (tree.depth[id] == d) return id;
  throw ContractViolation("no tree node at depth " + std::to_string(d));
}

} // namespace

int improved_target_depth(int max_unidirectional_depth, const std::vector<int>& bidirectional_depths)
{
  if (bidirectional_depths.empty()) return max_unidirectional_depth + 1;
  const auto [lo, hi] = std::minmax_element(bidirectional_depths.begin(), bidirectional_depths.end());
  if (max_unidirectional_depth + 1 < *lo) return max_unidirectional_depth + 1;
  return std::max(max_unidirectional_depth, *hi) + 1;
}

Placement find_opt_placement(const SpanningTree& tree, const std::vector<int>& unidirectional,
                             const std::vector<int>& bidirectional)
{
  int max_u = tree.depth[0];
  for (int i : unidirectional) max_u = std::max(max_u, depth_of(tree, i));
  std::vector<int> b_depths;
  for (int i : bidirectional) b_depths.push_back(depth_of(tree, i));

  Placement p;
  p.depth = improved_target_depth(max_u, b_depths);
  int best = -1;
  for (int i : unidirectional)
    if (tree.depth[i] == p.depth - 1) best = std::max(best, i);
  p.parent = best >= 0 ? best : lowest_node_at(tree, p.depth - 1);
  return p;
}

int find_opt_parent(const SpanningTree& tree, const std::vector<int>& unidirectional,
                    const std::vector<int>& bidirectional)
{
  return find_opt_placement(tree, unidirectional, bidirectional).parent;
}

Placement dfst_placement(const SpanningTree& tree, const std::vector<int>& unidirectional,
                         const std::vector<int>& bidirectional)
{
  std::vector<int> all = unidirectional;
  all.insert(all.end(), bidirectional.begin(), bidirectional.end());
  int deepest = tree.depth[0];
  for (int i : all) deepest = std::max(deepest, depth_of(tree, i));
  Placement p;
  p.depth = deepest + 1;
  int chosen = std::numeric_limits<int>::max();
  for (int i : all)
    if (tree.depth[i] == deepest) chosen = std::min(chosen, i);
  p.parent = chosen != std::numeric_limits<int>::max() ? chosen : lowest_node_at(tree, deepest);
  return p;
}

namespace {

template <typename Rule>
SpanningTree grow_tree(const ConflictDirectedGraph& cdg, Rule rule)
{
  SpanningTree tree = SpanningTree::with_capacity(cdg.max_id());
  for (int j : cdg.vehicles) {
    const Placement p = rule(tree, cdg.unidirectional_parents(j), cdg.bidirectional_parents(j));
    tree.place(j, p.parent, p.depth);
  }
  return tree;
}

} // namespace

SpanningTree dfst_schedule(const ConflictDirectedGraph& cdg)
{
  return grow_tree(cdg, dfst_placement);
}

SpanningTree idfst_schedule(const ConflictDirectedGraph& cdg)
{
  return grow_tree(cdg, find_opt_placement);
}

int CliqueCover::max_clique_size() const
{
  std::size_t best = 0;
  for (const auto& s : subsets) best = std::max(best, s.size());
  return static_cast<int>(best);
}

namespace {

bool size_desc_then_lex(const std::vector<int>& a, const std::vector<int>& b)
{
  if (a.size() != b.size()) return a.size() > b.size();
  return a < b;
}

} // namespace

CliqueCover CliqueCover::canonical() const
{
  CliqueCover c = *this;
  for (auto& s : c.subsets) std::sort(s.begin(), s.end());
  std::sort(c.subsets.begin(), c.subsets.end(), size_desc_then_lex);
  return c;
}

long long layer_objective(const std::vector<std::vector<int>>& ordered_subsets)
{
  long long total = 0;
  for (std::size_t l = 0; l < ordered_subsets.size(); ++l)
    total += static_cast<long long>(l + 1) * static_cast<long long>(ordered_subsets[l].size());
  return total;
}

CliqueCover mcc_greedy(const CoexistenceGraph& cug)
{
  const auto& vs = cug.vehicles;
  const std::size_t n = vs.size();
  // Conflict neighbours: pairs that cannot share a layer.
  std::vector<std::vector<std::size_t>> conflict(n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (a != b && !cug.adjacent(vs[a], vs[b])) conflict[a].push_back(b);

  std::vector<std::size_t> order;
  std::vector<bool> seen(n, false);
  for (std::size_t start = 0; start < n; ++start) {
    if (seen[start]) continue;
    std::deque<std::size_t> queue{start};
    seen[start] = true;
    while (!queue.empty()) {
      const std::size_t u = queue.front();
      queue.pop_front();
      order.push_back(u);
      for (std::size_t w : conflict[u])
        if (!seen[w]) {
          seen[w] = true;
          queue.push_back(w);
        }
    }
  }

  std::vector<int> colour(n, -1);
  int colours = 0;
  for (std::size_t u : order) {
    std::set<int> used;
    for (std::size_t w : conflict[u])
      if (colour[w] >= 0) used.insert(colour[w]);
    int c = 0;
    while (used.count(c)) ++c;
    colour[u] = c;
    colours = std::max(colours, c + 1);
  }

  CliqueCover cover;
  cover.subsets.resize(colours);
  for (std::size_t u = 0; u < n; ++u) cover.subsets[colour[u]].push_back(vs[u]);
  for (auto& s : cover.subsets) std::sort(s.begin(), s.end());
  return cover;
}

namespace {

using Mask = std::uint32_t;

struct PartitionSearch
{
  std::vector<Mask> adjacency; // coexistence neighbours
  std::vector<Mask> blocks;
  int limit = 0;               // maximum number of blocks allowed
  bool collect = false;
  int best = std::numeric_limits<int>::max();
  std::vector<std::vector<Mask>> found;

  void run(std::size_t k)
  {
    const std::size_t n = adjacency.size();
    if (k == n) {
      const int used = static_cast<int>(blocks.size());
      if (collect) {
        found.push_back(blocks);
      } else if (used < best) {
        best = used;
        limit = used - 1;
      }
      return;
    }
    const Mask bit = Mask{1} << k;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      if ((blocks[b] & ~adjacency[k]) != 0) continue;
      blocks[b] |= bit;
      run(k + 1);
      blocks[b] &= ~bit;
    }
    if (static_cast<int>(blocks.size()) + 1 <= limit) {
      blocks.push_back(bit);
      run(k + 1);
      blocks.pop_back();
    }
  }
};

PartitionSearch prepare(const CoexistenceGraph& cug, int cap)
{
  const int n = static_cast<int>(cug.vehicles.size());
  if (n > cap)
    throw SizeLimitError("exact clique cover limited to " + std::to_string(cap) + " vehicles, got " +
                         std::to_string(n));
  if (n > 31) throw SizeLimitError("exact clique cover supports at most 31 vehicles");
  PartitionSearch s;
  s.adjacency.assign(n, 0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (a != b && cug.adjacent(cug.vehicles[a], cug.vehicles[b])) s.adjacency[a] |= Mask{1} << b;
  return s;
}

CliqueCover to_cover(const std::vector<Mask>& blocks, const std::vector<int>& vehicles)
{
  CliqueCover c;
  for (Mask m : blocks) {
    std::vector<int> s;
    for (std::size_t k = 0; k < vehicles.size(); ++k)
      if (m & (Mask{1} << k)) s.push_back(vehicles[k]);
    c.subsets.push_back(std::move(s));
  }
  return c.canonical();
}

std::vector<CliqueCover> all_minimum(const CoexistenceGraph& cug, int cap)
{
  if (cug.vehicles.empty()) return {CliqueCover{}};
  PartitionSearch s = prepare(cug, cap);
  s.limit = static_cast<int>(cug.vehicles.size());
  s.run(0);
  const int theta = s.best;
  s.blocks.clear();
  s.collect = true;
  s.limit = theta;
  s.run(0);

  std::vector<CliqueCover> out;
  for (const auto& blocks : s.found)
    if (static_cast<int>(blocks.size()) == theta) out.push_back(to_cover(blocks, cug.vehicles));
  std::sort(out.begin(), out.end(), [](const CliqueCover& a, const CliqueCover& b) {
    return a.subsets < b.subsets;
  });
  return out;
}

std::vector<std::size_t> sizes_of(const CliqueCover& c)
{
  std::vector<std::size_t> out;
  for (const auto& s : c.subsets) out.push_back(s.size());
  return out;
}

} // namespace

std::vector<CliqueCover> enumerate_minimum_covers(const CoexistenceGraph& cug, int cap)
{
  return all_minimum(cug, cap);
}

CliqueCover mcc_bruteforce(const CoexistenceGraph& cug, int cap)
{
  const auto covers = all_minimum(cug, cap);
  const CliqueCover* best = &covers.front();
  for (const auto& c : covers) {
    const long long oc = layer_objective(c.subsets);
    const long long ob = layer_objective(best->subsets);
    if (oc != ob) {
      if (oc < ob) best = &c;
      continue;
    }
    const auto sc = sizes_of(c);
    const auto sb = sizes_of(*best);
    if (sc != sb) {
      if (sc > sb) best = &c;
      continue;
    }
    if (c.subsets < best->subsets) best = &c;
  }
  return *best;
}

namespace {

void check_cover(const CliqueCover& cover, const ConflictDirectedGraph& cdg)
{
  std::set<int> seen;
  for (const auto& s : cover.subsets) {
    if (s.empty()) throw ContractViolation("clique cover contains an empty subset");
    for (std::size_t a = 0; a < s.size(); ++a) {
      if (!seen.insert(s[a]).second)
        throw ContractViolation("vehicle " + std::to_string(s[a]) + " appears in two subsets");
      for (std::size_t b = a + 1; b < s.size(); ++b)
        if (cdg.connected(s[a], s[b]))
          throw ContractViolation("subset holds conflicting vehicles " + std::to_string(s[a]) +
                                  " and " + std::to_string(s[b]));
    }
  }
  if (std::vector<int>(seen.begin(), seen.end()) != cdg.vehicles)
    throw ContractViolation("clique cover does not partition the vehicle set");
}

// Groups of vehicles tied together by same-lane edges.
std::vector<std::vector<int>> lane_groups(const ConflictDirectedGraph& cdg)
{
  std::map<int, int> root;
  for (int v : cdg.vehicles) root[v] = v;
  auto find = [&](int v) {
    while (root[v] != v) v = root[v] = root[root[v]];
    return v;
  };
  for (const auto& [edge, kind] : cdg.unidirectional)
    if (kind == EdgeKind::Diverging && edge.first != kLeader) root[find(edge.first)] = find(edge.second);
  std::map<int, std::vector<int>> groups;
  for (int v : cdg.vehicles) groups[find(v)].push_back(v);
  std::vector<std::vector<int>> out;
  for (auto& [r, g] : groups)
    if (g.size() > 1) out.push_back(std::move(g));
  return out;
}

bool order_respected(const std::map<int, int>& layer_of, const ConflictDirectedGraph& cdg)
{
  for (const auto& [edge, kind] : cdg.unidirectional)
    if (edge.first != kLeader && layer_of.at(edge.first) >= layer_of.at(edge.second)) return false;
  return true;
}

std::map<int, int> index_layers(const std::vector<std::vector<int>>& layers)
{
  std::map<int, int> layer_of;
  for (std::size_t l = 0; l < layers.size(); ++l)
    for (int v : layers[l]) layer_of[v] = static_cast<int>(l);
  return layer_of;
}

std::vector<std::vector<int>> from_index(const std::map<int, int>& layer_of)
{
  int count = 0;
  for (const auto& [v, l] : layer_of) count = std::max(count, l + 1);
  std::vector<std::vector<int>> layers(count);
  for (const auto& [v, l] : layer_of) layers[l].push_back(v);
  layers.erase(std::remove_if(layers.begin(), layers.end(), [](const auto& l) { return l.empty(); }),
               layers.end());
  return layers;
}

// Reorders whole layers so that fixed-order edges point forward, keeping the
// current order where possible. Returns false if the layer graph has a cycle.
bool reorder_layers(std::vector<std::vector<int>>& layers, const ConflictDirectedGraph& cdg)
{
  const auto layer_of = index_layers(layers);
  const std::size_t m = layers.size();
  std::vector<std::set<std::size_t>> succ(m);
  std::vector<int> indegree(m, 0);
  for (const auto& [edge, kind] : cdg.unidirectional) {
    if (edge.first == kLeader) continue;
    const auto a = static_cast<std::size_t>(layer_of.at(edge.first));
    const auto b = static_cast<std::size_t>(layer_of.at(edge.second));
    if (a != b && succ[a].insert(b).second) ++indegree[b];
  }
  std::set<std::size_t> ready;
  for (std::size_t l = 0; l < m; ++l)
    if (indegree[l] == 0) ready.insert(l);
  std::vector<std::vector<int>> out;
  while (!ready.empty()) {
    const std::size_t l = *ready.begin();
    ready.erase(ready.begin());
    out.push_back(layers[l]);
    for (std::size_t s : succ[l])
      if (--indegree[s] == 0) ready.insert(s);
  }
  if (out.size() != m) return false;
  layers = std::move(out);
  return true;
}

void legalize(std::vector<std::vector<int>>& layers, const ConflictDirectedGraph& cdg)
{
  auto layer_of = index_layers(layers);
  for (int v : cdg.vehicles) {
    int floor = 0;
    for (int p : cdg.unidirectional_parents(v))
      if (p != kLeader) floor = std::max(floor, layer_of.at(p) + 1);
    if (layer_of.at(v) >= floor) continue;
    int target = floor;
    for (;; ++target) {
      bool clash = false;
      for (const auto& [w, l] : layer_of)
        if (l == target && w != v && cdg.connected(v, w)) {
          clash = true;
          break;
        }
      if (!clash) break;
    }
    layer_of[v] = target;
  }
  layers = from_index(layer_of);
}

} // namespace

LayerPlan arrange_cover(const CliqueCover& cover, const ConflictDirectedGraph& cdg)
{
  check_cover(cover, cdg);
  LayerPlan plan;
  plan.layers = cover.canonical().subsets;

  auto layer_of = index_layers(plan.layers);
  for (const auto& group : lane_groups(cdg)) {
    std::vector<int> seq = group;
    std::sort(seq.begin(), seq.end(), [&](int a, int b) { return layer_of[a] < layer_of[b]; });
    for (std::size_t pass = 0; pass < seq.size(); ++pass)
      for (std::size_t k = 0; k + 1 < seq.size(); ++k)
        if (seq[k] > seq[k + 1]) {
          std::swap(layer_of[seq[k]], layer_of[seq[k + 1]]);
          plan.swaps.emplace_back(std::min(seq[k], seq[k + 1]), std::max(seq[k], seq[k + 1]));
          std::swap(seq[k], seq[k + 1]);
        }
  }
  plan.layers = from_index(layer_of);

  if (!order_respected(layer_of, cdg)) {
    auto reordered = plan.layers;
    if (reorder_layers(reordered, cdg)) plan.layers = std::move(reordered);
    legalize(plan.layers, cdg);
  }
  for (auto& l : plan.layers) std::sort(l.begin(), l.end());
  return plan;
}

SpanningTree layers_to_tree(const std::vector<std::vector<int>>& layers)
{
  int max_id = 0;
  for (const auto& l : layers)
    for (int v : l) max_id = std::max(max_id, v);
  SpanningTree tree = SpanningTree::with_capacity(max_id);
  int previous = kLeader;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].empty()) throw ContractViolation("empty layer");
    for (int v : layers[l]) tree.place(v, previous, static_cast<int>(l) + 1);
    previous = *std::min_element(layers[l].begin(), layers[l].end());
  }
  return tree;
}

SpanningTree cover_to_tree(const CliqueCover& cover, const ConflictDirectedGraph& cdg)
{
  return layers_to_tree(arrange_cover(cover, cdg).layers);
}

FeasibilityReport verify_feasible(const SpanningTree& tree, const ConflictDirectedGraph& cdg)
{
  for (int v : cdg.vehicles)
    if (!tree.contains(v))
      throw ContractViolation("tree does not contain vehicle " + std::to_string(v));
  FeasibilityReport report;
  auto same_depth = [&](const std::pair<int, int>& e) {
    if (e.first != kLeader && tree.depth[e.first] == tree.depth[e.second])
      report.violations.push_back({Violation::Kind::SameDepthConflict, e.first, e.second});
  };
  for (const auto& [e, kind] : cdg.unidirectional) same_depth(e);
  for (const auto& [e, kind] : cdg.bidirectional) same_depth(e);
  for (const auto& [e, kind] : cdg.unidirectional)
    if (e.first != kLeader && tree.depth[e.first] > tree.depth[e.second])
      report.violations.push_back({Violation::Kind::OrderInversion, e.first, e.second});
  report.feasible = report.violations.empty();
  return report;
}

std::string_view to_string(Algorithm a)
{
  switch (a) {
    case Algorithm::Dfst: return "dfst";
    case Algorithm::Idfst: return "idfst";
    case Algorithm::MccGreedy: return "mcc-greedy";
    case Algorithm::MccBrute: return "mcc-brute";
  }
  return "?";
}

std::optional<Algorithm> parse_algorithm(std::string_view name)
{
  for (Algorithm a : {Algorithm::Dfst, Algorithm::Idfst, Algorithm::MccGreedy, Algorithm::MccBrute})
    if (to_string(a) == name) return a;
  return std::nullopt;
}

SpanningTree schedule(const ConflictDirectedGraph& cdg, Algorithm algorithm, int brute_force_cap)
{
  switch (algorithm) {
    case Algorithm::Dfst: return dfst_schedule(cdg);
    case Algorithm::Idfst: return idfst_schedule(cdg);
    case Algorithm::MccGreedy: return cover_to_tree(mcc_greedy(build_cug(cdg)), cdg);
    case Algorithm::MccBrute:
      return cover_to_tree(mcc_bruteforce(build_cug(cdg), brute_force_cap), cdg);
  }
  throw ContractViolation("unknown algorithm");
}

std::string tree_to_json(const SpanningTree& tree)
{
  nlohmann::json doc;
  doc["d_all"] = tree.d_all();
  doc["layers"] = tree.layers();
  doc["nodes"] = nlohmann::json::array();
  for (int v : tree.vehicles())
    doc["nodes"].push_back({{"id", v}, {"parent", tree.parent[v]}, {"depth", tree.depth[v]}});
  return doc.dump(2) + "\n";
}

std::string cover_to_json(const CliqueCover& cover)
{
  nlohmann::json doc;
  doc["theta"] = cover.theta();
  doc["subsets"] = cover.subsets;
  return doc.dump(2) + "\n";
}

} // namespace cavsched
