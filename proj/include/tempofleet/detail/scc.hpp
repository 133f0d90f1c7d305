#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

namespace tempofleet::detail {

struct SccResult {
  std::vector<int> comp;              // component id per vertex, -1 if unvisited
  std::vector<int> size;              // vertices per component
};

/// Iterative Tarjan over vertices reachable from `roots`. `succ(v, out)`
/// must append the successors of v to out.
template <class Succ>
SccResult tarjan_scc(std::size_t n, const std::vector<int>& roots, Succ&& succ) {
  SccResult r;
  r.comp.assign(n, -1);
  std::vector<int> index(n, -1), low(n, 0);
  std::vector<char> on_stack(n, 0);
  std::vector<int> stack;
  // Successor lists live in one pool; frames are LIFO, so popping a frame
  // truncates the pool back to its start.
  struct Frame {
    int v;
    std::size_t begin, end, pos;
  };
  std::vector<Frame> call;
  std::vector<int> pool;
  int counter = 0;
  for (int root : roots) {
    if (index[static_cast<std::size_t>(root)] >= 0) continue;
    auto open = [&](int v) {
      index[v] = low[v] = counter++;
      stack.push_back(v);
      on_stack[v] = 1;
      const std::size_t begin = pool.size();
      succ(v, pool);
      call.push_back({v, begin, pool.size(), begin});
    };
    open(root);
    while (!call.empty()) {
      Frame& f = call.back();
      if (f.pos < f.end) {
        const int w = pool[f.pos++];
        if (index[w] < 0) {
          open(w);
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
        continue;
      }
      const int v = f.v;
      pool.resize(f.begin);
      call.pop_back();
      if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
      if (low[v] == index[v]) {
        const int id = static_cast<int>(r.size.size());
        int count = 0;
        int w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          r.comp[w] = id;
          ++count;
        } while (w != v);
        r.size.push_back(count);
      }
    }
  }
  return r;
}

}  // namespace tempofleet::detail
