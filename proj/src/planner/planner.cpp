#include <algorithm>
#include <deque>
#include <limits>
#include <thread>

#include "tempofleet/planner.hpp"

namespace tempofleet::planner {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

int SearchTree::add_root(const ProductState& p, std::int64_t key) {
  if (auto it = index_.find(key); it != index_.end()) return it->second;
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({p, -1, -1, 0.0, 0.0, {}});
  index_.emplace(key, id);
  return id;
}

int SearchTree::find(std::int64_t key) const {
  auto it = index_.find(key);
  return it == index_.end() ? -1 : it->second;
}

int SearchTree::offer(int parent, const ProductState& p, std::int64_t key, double edge_cost, int ts_edge) {
  const double c = nodes_[static_cast<std::size_t>(parent)].cost + edge_cost;
  auto it = index_.find(key);
  if (it == index_.end()) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({p, parent, ts_edge, edge_cost, c, {}});
    nodes_[static_cast<std::size_t>(parent)].children.push_back(id);
    index_.emplace(key, id);
    return id;
  }
  const int id = it->second;
  Node& n = nodes_[static_cast<std::size_t>(id)];
  // Strictly cheaper routes only; with nonnegative costs this cannot close a loop.
  if (n.parent < 0 || !(c < n.cost - 1e-12)) return -1;
  auto& old_kids = nodes_[static_cast<std::size_t>(n.parent)].children;
  old_kids.erase(std::find(old_kids.begin(), old_kids.end(), id));
  n.parent = parent;
  n.ts_edge = ts_edge;
  n.edge_cost = edge_cost;
  nodes_[static_cast<std::size_t>(parent)].children.push_back(id);
  const double delta = c - n.cost;
  std::deque<int> queue{id};
  while (!queue.empty()) {
    Node& m = nodes_[static_cast<std::size_t>(queue.front())];
    queue.pop_front();
    m.cost += delta;
    for (int k : m.children) queue.push_back(k);
  }
  ++rewires_;
  return id;
}

std::vector<std::pair<ProductState, int>> SearchTree::path_to(int id) const {
  std::vector<std::pair<ProductState, int>> path;
  while (nodes_[static_cast<std::size_t>(id)].parent >= 0) {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    path.emplace_back(nodes_[static_cast<std::size_t>(n.parent)].state, n.ts_edge);
    id = n.parent;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

bool SearchTree::costs_consistent(double tol) const {
  for (const auto& n : nodes_) {
    if (n.parent < 0) {
      if (n.cost != 0.0) return false;
      continue;
    }
    const double expect = nodes_[static_cast<std::size_t>(n.parent)].cost + n.edge_cost;
    if (std::abs(expect - n.cost) > tol * (1.0 + std::abs(expect))) return false;
  }
  return true;
}

namespace {

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Strongly connected components of the automaton by pairwise reachability;
// -1 for states on no cycle. A product cycle projects onto a cycle inside
// one component, so accepting product states elsewhere cannot root a suffix.
std::vector<int> nba_cycle_components(const ltl::Nba& nba) {
  const std::size_t n = nba.num_states();
  std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
  for (std::size_t q = 0; q < n; ++q) {
    std::vector<int> stack;
    for (const auto& e : nba.edges(static_cast<int>(q))) stack.push_back(e.target);
    while (!stack.empty()) {
      const auto v = static_cast<std::size_t>(stack.back());
      stack.pop_back();
      if (reach[q][v]) continue;
      reach[q][v] = 1;
      for (const auto& e : nba.edges(static_cast<int>(v))) stack.push_back(e.target);
    }
  }
  std::vector<int> comp(n, -1);
  for (std::size_t q = 0; q < n; ++q) {
    if (!reach[q][q] || comp[q] >= 0) continue;
    for (std::size_t r = q; r < n; ++r)
      if (reach[q][r] && reach[r][q]) comp[r] = static_cast<int>(q);
  }
  return comp;
}

// Tree nodes on a cycle of the product graph restricted to explored states
// (Tarjan). Only an ordering hint: a cycle may need unexplored states.
std::vector<char> explored_cycles(const SearchTree& tree, ProductSpace& space, const std::vector<int>& nba_comp) {
  const std::size_t n = tree.size();
  std::vector<std::vector<int>> adj(n);
  std::vector<char> self(n, 0);
  std::vector<product::ProductEdge> buf;
  for (std::size_t v = 0; v < n; ++v) {
    const int cv = nba_comp[static_cast<std::size_t>(tree.node(static_cast<int>(v)).state.nba)];
    if (cv < 0) continue;
    space.successors(tree.node(static_cast<int>(v)).state, buf);
    for (const auto& e : buf) {
      if (nba_comp[static_cast<std::size_t>(e.target.nba)] != cv) continue;
      const int w = tree.find(space.key(e.target));
      if (w < 0) continue;
      if (static_cast<std::size_t>(w) == v) self[v] = 1;
      else adj[v].push_back(w);
    }
  }
  std::vector<int> index(n, -1), low(n, 0), comp_stack;
  std::vector<char> on(n, 0), out = self;
  int counter = 0;
  std::vector<std::pair<int, std::size_t>> call;
  for (std::size_t s = 0; s < n; ++s) {
    if (index[s] >= 0) continue;
    call.emplace_back(static_cast<int>(s), 0);
    while (!call.empty()) {
      auto& [v, k] = call.back();
      const auto uv = static_cast<std::size_t>(v);
      if (k == 0) {
        index[uv] = low[uv] = counter++;
        comp_stack.push_back(v);
        on[uv] = 1;
      }
      if (k < adj[uv].size()) {
        const int w = adj[uv][k++];
        const auto uw = static_cast<std::size_t>(w);
        if (index[uw] < 0) call.emplace_back(w, 0);
        else if (on[uw]) low[uv] = std::min(low[uv], index[uw]);
        continue;
      }
      if (low[uv] == index[uv]) {
        std::vector<int> comp;
        int w;
        do {
          w = comp_stack.back();
          comp_stack.pop_back();
          on[static_cast<std::size_t>(w)] = 0;
          comp.push_back(w);
        } while (w != v);
        if (comp.size() > 1)
          for (int c : comp) out[static_cast<std::size_t>(c)] = 1;
      }
      const int done = v;
      call.pop_back();
      if (!call.empty()) {
        const auto up = static_cast<std::size_t>(call.back().first);
        low[up] = std::min(low[up], low[static_cast<std::size_t>(done)]);
      }
    }
  }
  return out;
}

// Shared growth loop. `on_edge(from_node, edge)` sees every enumerated
// successor before it is offered to the tree.
template <class OnEdge, class OnAdd>
void grow(SearchTree& tree, ProductSpace& space, std::size_t iterations, double bias, std::mt19937_64& rng,
          bool check, OnEdge&& on_edge, OnAdd&& on_add) {
  std::vector<product::ProductEdge> buf;
  int newest = static_cast<int>(tree.size()) - 1;
  for (std::size_t it = 0; it < iterations; ++it) {
    int v;
    if (unit(rng) < bias)
      v = newest;
    else
      v = static_cast<int>(rng() % tree.size());
    const ProductState from = tree.node(v).state;
    space.successors(from, buf);
    for (const auto& e : buf) {
      if (!on_edge(v, e)) continue;
      const std::size_t before = tree.size();
      const int id = tree.offer(v, e.target, space.key(e.target), e.cost, e.ts_edge);
      if (id >= 0 && tree.size() > before) {
        newest = id;
        on_add(id);
      }
    }
    if (check && (it + 1) % 1000 == 0 && !tree.costs_consistent())
      throw std::logic_error("search tree costs drifted from their parent links");
  }
}

}  // namespace

PrefixResult grow_prefix_tree(ProductSpace& space, const PlannerParams& params) {
  if (params.n_max < 1) throw std::invalid_argument("n_max must be at least 1");
  if (!(params.bias >= 0.0 && params.bias <= 1.0)) throw std::invalid_argument("bias must lie in [0, 1]");
  PrefixResult out;
  for (const auto& p : space.initial()) {
    const int id = out.tree.add_root(p, space.key(p));
    if (space.accepting(p) && std::find(out.accepting.begin(), out.accepting.end(), id) == out.accepting.end())
      out.accepting.push_back(id);
  }
  if (out.tree.size() == 0) return out;
  std::mt19937_64 rng(params.seed);
  grow(
      out.tree, space, params.n_max, params.bias, rng, params.check_invariants,
      [](int, const product::ProductEdge&) { return true; },
      [&](int id) {
        if (space.accepting(out.tree.node(id).state)) out.accepting.push_back(id);
      });
  return out;
}

std::optional<Cycle> grow_suffix_tree(ProductSpace& space, const ProductState& root, const PlannerParams& params,
                                      std::uint64_t seed) {
  SearchTree tree;
  const auto root_key = space.key(root);
  tree.add_root(root, root_key);
  std::mt19937_64 rng(seed);
  double best = std::numeric_limits<double>::infinity();
  int best_from = -1, best_edge = -1;
  double best_edge_cost = 0.0;
  const std::size_t iters = params.suffix_n_max ? params.suffix_n_max : params.n_max;
  grow(
      tree, space, iters, params.bias, rng, params.check_invariants,
      [&](int v, const product::ProductEdge& e) {
        if (space.key(e.target) != root_key) return true;
        const double c = tree.node(v).cost + e.cost;
        if (c < best - 1e-12) {
          best = c;
          best_from = v;
          best_edge = e.ts_edge;
          best_edge_cost = e.cost;
        }
        return false;
      },
      [](int) {});
  if (best_from < 0) return std::nullopt;
  // Costs may have improved by rewiring after detection.
  Cycle c;
  c.path = tree.path_to(best_from);
  c.path.emplace_back(tree.node(best_from).state, best_edge);
  c.cost = tree.node(best_from).cost + best_edge_cost;
  return c;
}

std::optional<product::Plan> plan_sampling(ts::TransitionSystem& tsys, const ltl::Nba& nba,
                                           const PlannerParams& params) {
  if (!tsys.valid(tsys.state(tsys.initial()))) throw std::invalid_argument("initial TS state is not valid");
  ProductSpace space(tsys, nba);
  PrefixResult pre = grow_prefix_tree(space, params);
  if (pre.accepting.empty()) return std::nullopt;

  const auto nba_comp = nba_cycle_components(nba);
  std::vector<int> roots;
  for (int id : pre.accepting)
    if (nba_comp[static_cast<std::size_t>(pre.tree.node(id).state.nba)] >= 0) roots.push_back(id);
  std::vector<char> looped;
  if (roots.size() > params.max_suffix_roots) looped = explored_cycles(pre.tree, space, nba_comp);
  else looped.assign(pre.tree.size(), 1);
  // Roots already seen on a cycle first, each group cheapest prefix first.
  std::sort(roots.begin(), roots.end(), [&](int a, int b) {
    const bool la = looped[static_cast<std::size_t>(a)], lb = looped[static_cast<std::size_t>(b)];
    if (la != lb) return la;
    const double ca = pre.tree.node(a).cost, cb = pre.tree.node(b).cost;
    if (ca != cb) return ca < cb;
    return space.key(pre.tree.node(a).state) < space.key(pre.tree.node(b).state);
  });

  struct Found {
    std::optional<Cycle> cycle;
    product::Plan plan;
  };
  auto seed_for = [&](int node) { return splitmix64(params.seed ^ static_cast<std::uint64_t>(space.key(pre.tree.node(node).state))); };

  std::optional<product::Plan> best;
  double best_cost = std::numeric_limits<double>::infinity();
  const unsigned jobs = std::max(1u, params.jobs);
  std::size_t next = 0, tried = 0;
  // Batches of `jobs` roots; a root whose prefix alone reaches the best total
  // cannot improve it. The outcome does not depend on the batch size.
  while (next < roots.size() && tried < params.max_suffix_roots) {
    std::vector<int> batch;
    for (; next < roots.size() && batch.size() < jobs && tried < params.max_suffix_roots; ++next) {
      if (pre.tree.node(roots[next]).cost >= best_cost) continue;
      batch.push_back(roots[next]);
      ++tried;
    }
    std::vector<Found> found(batch.size());
    if (batch.size() == 1) {
      found[0].cycle = grow_suffix_tree(space, pre.tree.node(batch[0]).state, params, seed_for(batch[0]));
      if (found[0].cycle) found[0].plan = product::plan_from_path(space, {}, found[0].cycle->path);
    } else {
      // Each worker explores its own copy of the lazy TS; results are mapped
      // back through TS states so ids never cross threads.
      std::vector<std::thread> pool;
      for (std::size_t w = 0; w < batch.size(); ++w) {
        pool.emplace_back([&, w] {
          ts::TransitionSystem local(tsys.scenario());
          ProductSpace lspace(local, nba);
          const ProductState p = pre.tree.node(batch[w]).state;
          const ProductState lp{local.intern(tsys.state(p.ts)), p.nba};
          found[w].cycle = grow_suffix_tree(lspace, lp, params, seed_for(batch[w]));
          if (found[w].cycle) found[w].plan = product::plan_from_path(lspace, {}, found[w].cycle->path);
        });
      }
      for (auto& t : pool) t.join();
    }
    for (std::size_t r = 0; r < batch.size(); ++r) {
      if (!found[r].cycle) continue;
      const double total = pre.tree.node(batch[r]).cost + found[r].cycle->cost;
      if (!(total < best_cost)) continue;
      best_cost = total;
      product::Plan plan = product::plan_from_path(space, pre.tree.path_to(batch[r]), {});
      plan.suffix = std::move(found[r].plan.suffix);
      plan.suffix_cost = found[r].plan.suffix_cost;
      best = std::move(plan);
    }
  }
  return best;
}

std::optional<product::Plan> plan_sampling(const world::Scenario& s, const ltl::Nba& nba, const PlannerParams& params) {
  ts::TransitionSystem tsys(s);
  return plan_sampling(tsys, nba, params);
}

}  // namespace tempofleet::planner
