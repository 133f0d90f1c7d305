#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <unordered_map>
#include <vector>

#include "tempofleet/product.hpp"

namespace tempofleet::planner {

using product::ProductSpace;
using product::ProductState;

struct PlannerParams {
  std::size_t n_max = 10000;
  std::uint64_t seed = 1;
  double bias = 0.3;               // probability of expanding the newest node
  std::size_t max_suffix_roots = 16;
  std::size_t suffix_n_max = 0;    // 0: same as n_max
  unsigned jobs = 1;
  bool check_invariants = false;   // recompute tree costs every 1000 iterations
};

/// Forest over product states grown from one or more roots.
class SearchTree {
 public:
  struct Node {
    ProductState state;
    int parent = -1;
    int ts_edge = -1;  // edge from the parent's TS state
    double edge_cost = 0.0;
    double cost = 0.0;
    std::vector<int> children;
  };

  int add_root(const ProductState& p, std::int64_t key);
  /// Adds or rewires; returns the node id when the tree changed, else -1.
  int offer(int parent, const ProductState& p, std::int64_t key, double edge_cost, int ts_edge);
  int find(std::int64_t key) const;

  std::size_t size() const { return nodes_.size(); }
  const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  std::size_t rewires() const { return rewires_; }

  /// Path from a root to `id` as (source state, TS edge) pairs.
  std::vector<std::pair<ProductState, int>> path_to(int id) const;
  /// True iff every cost equals the sum of edge costs along parent links.
  bool costs_consistent(double tol = 1e-9) const;

 private:
  std::vector<Node> nodes_;
  std::unordered_map<std::int64_t, int> index_;
  std::size_t rewires_ = 0;
};

struct PrefixResult {
  SearchTree tree;
  std::vector<int> accepting;  // node ids, discovery order
};

PrefixResult grow_prefix_tree(ProductSpace& space, const PlannerParams& params);

struct Cycle {
  std::vector<std::pair<ProductState, int>> path;  // starts at the root
  double cost = 0.0;
};

/// Grows a tree from an accepting `root` and returns the cheapest detected
/// cycle back to it.
std::optional<Cycle> grow_suffix_tree(ProductSpace& space, const ProductState& root, const PlannerParams& params,
                                      std::uint64_t seed);

std::optional<product::Plan> plan_sampling(ts::TransitionSystem& tsys, const ltl::Nba& nba,
                                           const PlannerParams& params);
std::optional<product::Plan> plan_sampling(const world::Scenario& s, const ltl::Nba& nba, const PlannerParams& params);

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace tempofleet::planner
