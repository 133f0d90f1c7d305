#include <algorithm>
#include <array>
#include <bit>

#include "tempofleet/detail/scc.hpp"
#include "tempofleet/ltl.hpp"

namespace tempofleet::ltl {

namespace {

// Positions 0..n-1 of the lasso; the last one loops back to the cycle start.
struct Positions {
  std::size_t n;
  std::size_t loop;
  std::size_t succ(std::size_t i) const { return i + 1 < n ? i + 1 : loop; }
};

using Values = std::vector<bool>;

Values eval(const Formula& f, const LassoWord& w, const Positions& p) {
  const std::size_t n = p.n;
  auto letter = [&](std::size_t i) -> const Letter& {
    return i < w.prefix.size() ? w.prefix[i] : w.cycle[i - w.prefix.size()];
  };
  switch (f.op()) {
    case Op::True: return Values(n, true);
    case Op::False: return Values(n, false);
    case Op::Atom: {
      Values v(n);
      for (std::size_t i = 0; i < n; ++i) v[i] = letter(i).contains(f.name());
      return v;
    }
    case Op::Not: {
      Values v = eval(f.lhs(), w, p);
      v.flip();
      return v;
    }
    case Op::And:
    case Op::Or: {
      const Values a = eval(f.lhs(), w, p);
      const Values b = eval(f.rhs(), w, p);
      Values v(n);
      for (std::size_t i = 0; i < n; ++i) v[i] = f.op() == Op::And ? (a[i] && b[i]) : (a[i] || b[i]);
      return v;
    }
    case Op::Next: {
      const Values a = eval(f.lhs(), w, p);
      Values v(n);
      for (std::size_t i = 0; i < n; ++i) v[i] = a[p.succ(i)];
      return v;
    }
    case Op::Until:
    case Op::Eventually: {
      const Values a = f.op() == Op::Until ? eval(f.lhs(), w, p) : Values(n, true);
      const Values b = eval(f.op() == Op::Until ? f.rhs() : f.lhs(), w, p);
      Values v(n, false);  // least fixpoint
      for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t k = n; k-- > 0;) {
          const bool nv = b[k] || (a[k] && v[p.succ(k)]);
          if (nv != v[k]) {
            v[k] = nv;
            changed = true;
          }
        }
      }
      return v;
    }
    case Op::Release:
    case Op::Always: {
      const Values a = f.op() == Op::Release ? eval(f.lhs(), w, p) : Values(n, false);
      const Values b = eval(f.op() == Op::Release ? f.rhs() : f.lhs(), w, p);
      Values v(n, true);  // greatest fixpoint
      for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t k = n; k-- > 0;) {
          const bool nv = b[k] && (a[k] || v[p.succ(k)]);
          if (nv != v[k]) {
            v[k] = nv;
            changed = true;
          }
        }
      }
      return v;
    }
  }
  return Values(n, false);
}

// Same question on at most 64 product vertices with bitmask closures.
bool accepts_small(const Nba& a, const Positions& p, const std::vector<std::uint64_t>& letters) {
  const std::size_t total = a.num_states() * p.n;
  std::array<std::uint64_t, 64> next{};
  for (std::size_t v = 0; v < total; ++v) {
    const std::size_t q = v / p.n, i = v % p.n, j = p.succ(i);
    for (const auto& e : a.edges(static_cast<int>(q)))
      if (e.label.matches(letters[i])) next[v] |= std::uint64_t{1} << (static_cast<std::size_t>(e.target) * p.n + j);
  }
  std::uint64_t reach = 0;
  for (int q : a.initial()) reach |= std::uint64_t{1} << (static_cast<std::size_t>(q) * p.n);
  for (std::uint64_t frontier = reach; frontier;) {
    std::uint64_t grown = 0;
    for (std::uint64_t f = frontier; f; f &= f - 1) grown |= next[static_cast<std::size_t>(std::countr_zero(f))];
    frontier = grown & ~reach;
    reach |= grown;
  }
  // plus[v]: vertices reachable from v in one or more steps
  std::array<std::uint64_t, 64> plus = next;
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t v = 0; v < total; ++v) {
      std::uint64_t r = plus[v];
      for (std::uint64_t f = plus[v]; f; f &= f - 1) r |= plus[static_cast<std::size_t>(std::countr_zero(f))];
      if (r != plus[v]) {
        plus[v] = r;
        changed = true;
      }
    }
  }
  for (std::uint64_t f = reach; f; f &= f - 1) {
    const auto v = static_cast<std::size_t>(std::countr_zero(f));
    if (a.accepting(static_cast<int>(v / p.n)) && (plus[v] >> v & 1)) return true;
  }
  return false;
}

void check_word(const LassoWord& w) {
  if (w.cycle.empty()) throw std::invalid_argument("lasso cycle must be nonempty");
}

}  // namespace

bool eval_lasso(const Formula& f, const LassoWord& w) {
  check_word(w);
  const Positions p{w.prefix.size() + w.cycle.size(), w.prefix.size()};
  return eval(f, w, p)[0];
}

bool nba_accepts_lasso(const Nba& a, const LassoWord& w) {
  check_word(w);
  const Positions p{w.prefix.size() + w.cycle.size(), w.prefix.size()};
  std::vector<std::uint64_t> letters(p.n);
  for (std::size_t i = 0; i < p.n; ++i)
    letters[i] = a.encode(i < w.prefix.size() ? w.prefix[i] : w.cycle[i - w.prefix.size()]);

  // Product vertex = q * n + position.
  const std::size_t total = a.num_states() * p.n;
  if (total <= 64) return accepts_small(a, p, letters);
  auto succ = [&](int v, std::vector<int>& out) {
    const auto q = static_cast<std::size_t>(v) / p.n;
    const auto i = static_cast<std::size_t>(v) % p.n;
    const auto j = p.succ(i);
    for (const auto& e : a.edges(static_cast<int>(q)))
      if (e.label.matches(letters[i])) out.push_back(static_cast<int>(static_cast<std::size_t>(e.target) * p.n + j));
  };
  std::vector<int> roots;
  for (int q : a.initial()) roots.push_back(static_cast<int>(static_cast<std::size_t>(q) * p.n));
  const auto scc = detail::tarjan_scc(total, roots, succ);

  std::vector<int> out;
  for (std::size_t v = 0; v < total; ++v) {
    if (scc.comp[v] < 0 || !a.accepting(static_cast<int>(v / p.n))) continue;
    if (scc.size[static_cast<std::size_t>(scc.comp[v])] > 1) return true;
    out.clear();
    succ(static_cast<int>(v), out);
    if (std::find(out.begin(), out.end(), static_cast<int>(v)) != out.end()) return true;
  }
  return false;
}

}  // namespace tempofleet::ltl
