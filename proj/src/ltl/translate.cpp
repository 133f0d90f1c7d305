#include <algorithm>
#include <map>
#include <sstream>
#include <unordered_map>

#include "tempofleet/detail/scc.hpp"
#include "tempofleet/ltl.hpp"

namespace tempofleet::ltl {

Nba::Nba(std::vector<std::string> atoms, std::vector<std::string> state_names, std::vector<int> initial,
         std::vector<bool> accepting, std::vector<std::vector<NbaEdge>> edges)
    : atoms_(std::move(atoms)),
      names_(std::move(state_names)),
      initial_(std::move(initial)),
      accepting_(std::move(accepting)),
      edges_(std::move(edges)) {
  if (atoms_.size() > kMaxAtoms) throw std::invalid_argument("automaton supports at most 64 atoms");
  const auto n = names_.size();
  if (accepting_.size() != n || edges_.size() != n) throw std::invalid_argument("inconsistent automaton sizes");
  for (int q : initial_)
    if (q < 0 || static_cast<std::size_t>(q) >= n) throw std::invalid_argument("initial state out of range");
  for (const auto& out : edges_)
    for (const auto& e : out) {
      if (e.target < 0 || static_cast<std::size_t>(e.target) >= n)
        throw std::invalid_argument("edge target out of range");
      if (e.label.pos & e.label.neg) throw std::invalid_argument("contradictory edge label");
    }
}

std::size_t Nba::num_edges() const {
  std::size_t n = 0;
  for (const auto& out : edges_) n += out.size();
  return n;
}

std::uint64_t Nba::encode(const Letter& letter) const {
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < atoms_.size(); ++i)
    if (letter.contains(atoms_[i])) bits |= std::uint64_t{1} << i;
  return bits;
}

std::string Nba::label_text(const Label& l) const {
  std::string out;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    const auto bit = std::uint64_t{1} << i;
    if (!((l.pos | l.neg) & bit)) continue;
    if (!out.empty()) out += " & ";
    if (l.neg & bit) out += "!";
    out += "\"" + atoms_[i] + "\"";
  }
  return out.empty() ? "true" : out;
}

std::string Nba::to_text() const {
  std::ostringstream os;
  os << "states: " << num_states() << "\n";
  os << "edges: " << num_edges() << "\n";
  os << "initial:";
  for (int q : initial_) os << " " << q;
  os << "\naccepting:";
  for (std::size_t q = 0; q < num_states(); ++q)
    if (accepting_[q]) os << " " << q;
  os << "\n";
  for (std::size_t q = 0; q < num_states(); ++q) {
    os << q << " [" << names_[q] << "]\n";
    for (const auto& e : edges_[q]) os << "  -> " << e.target << " : " << label_text(e.label) << "\n";
  }
  return os.str();
}

namespace {

constexpr int kInit = -1;

// Subformulas are interned so tableau sets can hold small integers.
class Table {
 public:
  int intern(const Formula& f) {
    const auto key = f.str();
    auto it = ids_.find(key);
    if (it != ids_.end()) return it->second;
    const int id = static_cast<int>(forms_.size());
    forms_.push_back(f);
    ids_.emplace(key, id);
    return id;
  }
  const Formula& at(int id) const { return forms_[static_cast<std::size_t>(id)]; }
  std::size_t size() const { return forms_.size(); }

 private:
  std::vector<Formula> forms_;
  std::unordered_map<std::string, int> ids_;
};

struct Node {
  std::set<int> incoming;
  std::set<int> fresh;  // "New"
  std::set<int> old;
  std::set<int> next;
};

struct Tableau {
  std::vector<Node> nodes;  // completed nodes
  std::map<std::pair<std::set<int>, std::set<int>>, int> index;
};

bool is_literal(const Formula& f) {
  return f.op() == Op::Atom || (f.op() == Op::Not && f.lhs().op() == Op::Atom);
}

void expand_all(Table& tab, Tableau& out, Node start) {
  std::vector<Node> work;
  work.push_back(std::move(start));
  auto add_fresh = [&](Node& n, const Formula& f) {
    const int id = tab.intern(f);
    if (!n.old.contains(id)) n.fresh.insert(id);
  };
  while (!work.empty()) {
    Node node = std::move(work.back());
    work.pop_back();
    if (node.fresh.empty()) {
      auto key = std::make_pair(node.old, node.next);
      auto it = out.index.find(key);
      if (it != out.index.end()) {
        auto& existing = out.nodes[static_cast<std::size_t>(it->second)];
        existing.incoming.insert(node.incoming.begin(), node.incoming.end());
        continue;
      }
      const int id = static_cast<int>(out.nodes.size());
      out.index.emplace(std::move(key), id);
      Node succ;
      succ.incoming = {id};
      succ.fresh = node.next;
      out.nodes.push_back(std::move(node));
      work.push_back(std::move(succ));
      continue;
    }
    const int eta_id = *node.fresh.begin();
    node.fresh.erase(node.fresh.begin());
    if (node.old.contains(eta_id)) {
      work.push_back(std::move(node));
      continue;
    }
    const Formula eta = tab.at(eta_id);
    switch (eta.op()) {
      case Op::True:
        work.push_back(std::move(node));
        break;
      case Op::False:
        break;
      case Op::Atom:
      case Op::Not: {
        if (!is_literal(eta)) throw std::logic_error("translate expects negation normal form");
        const Formula complement = eta.op() == Op::Atom ? Formula::neg(eta) : eta.lhs();
        if (node.old.contains(tab.intern(complement))) break;
        node.old.insert(eta_id);
        work.push_back(std::move(node));
        break;
      }
      case Op::And:
        node.old.insert(eta_id);
        add_fresh(node, eta.lhs());
        add_fresh(node, eta.rhs());
        work.push_back(std::move(node));
        break;
      case Op::Next:
        node.old.insert(eta_id);
        node.next.insert(tab.intern(eta.lhs()));
        work.push_back(std::move(node));
        break;
      case Op::Or:
      case Op::Until:
      case Op::Release: {
        Node n1 = node;
        Node n2 = std::move(node);
        n1.old.insert(eta_id);
        n2.old.insert(eta_id);
        if (eta.op() == Op::Or) {
          add_fresh(n1, eta.lhs());
          add_fresh(n2, eta.rhs());
        } else if (eta.op() == Op::Until) {
          add_fresh(n1, eta.lhs());
          n1.next.insert(eta_id);
          add_fresh(n2, eta.rhs());
        } else {
          add_fresh(n1, eta.rhs());
          n1.next.insert(eta_id);
          add_fresh(n2, eta.lhs());
          add_fresh(n2, eta.rhs());
        }
        work.push_back(std::move(n2));
        work.push_back(std::move(n1));
        break;
      }
      case Op::Eventually:
      case Op::Always:
        throw std::logic_error("translate expects negation normal form");
    }
  }
}

}  // namespace

Nba translate(const Formula& input) {
  const Formula f = to_nnf(input);
  const auto atom_set = f.atoms();
  std::vector<std::string> atoms(atom_set.begin(), atom_set.end());
  if (atoms.size() > Nba::kMaxAtoms) throw std::invalid_argument("formula mentions more than 64 atoms");
  std::unordered_map<std::string, int> atom_bit;
  for (std::size_t i = 0; i < atoms.size(); ++i) atom_bit.emplace(atoms[i], static_cast<int>(i));

  Table tab;
  Tableau tb;
  Node start;
  start.incoming = {kInit};
  start.fresh = {tab.intern(f)};
  expand_all(tab, tb, std::move(start));

  const std::size_t n = tb.nodes.size();

  // Generalized acceptance: one set per Until subformula.
  std::vector<std::vector<bool>> acc_sets;
  for (std::size_t id = 0; id < tab.size(); ++id) {
    const Formula& g = tab.at(static_cast<int>(id));
    if (g.op() != Op::Until) continue;
    const bool rhs_true = g.rhs().op() == Op::True;
    const int rhs = tab.intern(g.rhs());
    std::vector<bool> in(n);
    for (std::size_t q = 0; q < n; ++q) {
      const auto& old = tb.nodes[q].old;
      in[q] = !old.contains(static_cast<int>(id)) || rhs_true || old.contains(rhs);
    }
    acc_sets.push_back(std::move(in));
  }
  const std::size_t k = acc_sets.size();

  std::vector<Label> labels(n);
  for (std::size_t q = 0; q < n; ++q) {
    for (int id : tb.nodes[q].old) {
      const Formula& g = tab.at(id);
      if (g.op() == Op::Atom)
        labels[q].pos |= std::uint64_t{1} << atom_bit.at(g.name());
      else if (g.op() == Op::Not)
        labels[q].neg |= std::uint64_t{1} << atom_bit.at(g.lhs().name());
    }
  }

  std::vector<std::vector<int>> succ(n);
  std::vector<int> init_nodes;
  for (std::size_t q = 0; q < n; ++q)
    for (int p : tb.nodes[q].incoming) {
      if (p == kInit)
        init_nodes.push_back(static_cast<int>(q));
      else
        succ[static_cast<std::size_t>(p)].push_back(static_cast<int>(q));
    }

  // Counter degeneralization, reachable part only.
  const std::size_t layers = std::max<std::size_t>(k, 1);
  auto in_set = [&](std::size_t q, std::size_t i) { return k == 0 || acc_sets[i][q]; };
  std::vector<int> id_of(n * layers, -1);
  std::vector<std::pair<int, int>> states;
  std::vector<std::vector<int>> dsucc;
  auto get = [&](int q, int i) {
    auto& slot = id_of[static_cast<std::size_t>(q) * layers + static_cast<std::size_t>(i)];
    if (slot < 0) {
      slot = static_cast<int>(states.size());
      states.emplace_back(q, i);
      dsucc.emplace_back();
    }
    return slot;
  };
  std::vector<int> dinit;
  for (int q : init_nodes) dinit.push_back(get(q, 0));
  for (std::size_t s = 0; s < states.size(); ++s) {
    const auto [q, i] = states[s];
    const int j = in_set(static_cast<std::size_t>(q), static_cast<std::size_t>(i))
                      ? static_cast<int>((static_cast<std::size_t>(i) + 1) % layers)
                      : i;
    for (int q2 : succ[static_cast<std::size_t>(q)]) {
      const int t = get(q2, j);
      dsucc[s].push_back(t);
    }
  }
  const std::size_t m = states.size();
  std::vector<bool> dacc(m);
  for (std::size_t s = 0; s < m; ++s)
    dacc[s] = states[s].second == 0 && in_set(static_cast<std::size_t>(states[s].first), 0);

  // Keep only states that can reach an accepting cycle.
  const auto scc = detail::tarjan_scc(m, dinit, [&](int v, std::vector<int>& out) {
    const auto& next = dsucc[static_cast<std::size_t>(v)];
    out.insert(out.end(), next.begin(), next.end());
  });
  std::vector<bool> good(m, false);
  std::vector<bool> comp_good(scc.size.size(), false);
  for (std::size_t s = 0; s < m; ++s) {
    if (!dacc[s] || scc.comp[s] < 0) continue;
    const int c = scc.comp[s];
    bool cyclic = scc.size[static_cast<std::size_t>(c)] > 1;
    for (int t : dsucc[s]) cyclic = cyclic || t == static_cast<int>(s);
    if (cyclic) comp_good[static_cast<std::size_t>(c)] = true;
  }
  std::vector<std::vector<int>> pred(m);
  std::vector<int> stack;
  for (std::size_t s = 0; s < m; ++s) {
    for (int t : dsucc[s]) pred[static_cast<std::size_t>(t)].push_back(static_cast<int>(s));
    if (scc.comp[s] >= 0 && comp_good[static_cast<std::size_t>(scc.comp[s])]) {
      good[s] = true;
      stack.push_back(static_cast<int>(s));
    }
  }
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int p : pred[static_cast<std::size_t>(v)])
      if (!good[static_cast<std::size_t>(p)]) {
        good[static_cast<std::size_t>(p)] = true;
        stack.push_back(p);
      }
  }

  std::vector<int> remap(m, -1);
  std::vector<std::string> names;
  for (std::size_t s = 0; s < m; ++s)
    if (good[s]) {
      remap[s] = static_cast<int>(names.size());
      names.push_back("n" + std::to_string(states[s].first) + "." + std::to_string(states[s].second));
    }
  std::vector<int> initial;
  for (int s : dinit)
    if (good[static_cast<std::size_t>(s)] &&
        std::find(initial.begin(), initial.end(), remap[static_cast<std::size_t>(s)]) == initial.end())
      initial.push_back(remap[static_cast<std::size_t>(s)]);
  std::vector<bool> accepting(names.size());
  std::vector<std::vector<NbaEdge>> edges(names.size());
  for (std::size_t s = 0; s < m; ++s) {
    if (!good[s]) continue;
    const auto r = static_cast<std::size_t>(remap[s]);
    accepting[r] = dacc[s];
    const Label& l = labels[static_cast<std::size_t>(states[s].first)];
    std::vector<int> targets;
    for (int t : dsucc[s])
      if (good[static_cast<std::size_t>(t)]) targets.push_back(remap[static_cast<std::size_t>(t)]);
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
    for (int t : targets) edges[r].push_back({t, l});
  }
  return Nba(std::move(atoms), std::move(names), std::move(initial), std::move(accepting), std::move(edges));
}

}  // namespace tempofleet::ltl
