#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tempofleet::ltl {

enum class Op {
  True,
  False,
  Atom,
  Not,
  And,
  Or,
  Next,
  Until,
  Release,
  Eventually,
  Always,
};

/// Immutable LTL syntax tree. Copies share structure.
class Formula {
 public:
  static Formula tt();
  static Formula ff();
  static Formula atom(std::string name);
  static Formula neg(Formula f);
  static Formula conj(Formula lhs, Formula rhs);
  static Formula disj(Formula lhs, Formula rhs);
  static Formula next(Formula f);
  static Formula until(Formula lhs, Formula rhs);
  static Formula release(Formula lhs, Formula rhs);
  static Formula eventually(Formula f);
  static Formula always(Formula f);

  Op op() const { return node_->op; }
  const std::string& name() const { return node_->name; }
  /// Operand of a unary node, left operand of a binary node.
  const Formula& lhs() const;
  const Formula& rhs() const;
  bool is_unary() const;
  bool is_binary() const;

  /// Number of AST levels; a leaf has depth 1.
  std::size_t depth() const;
  std::set<std::string> atoms() const;

  /// Fully parenthesized ASCII rendering accepted back by parse_ltl.
  std::string str() const;

  friend bool operator==(const Formula& a, const Formula& b);
  friend bool operator!=(const Formula& a, const Formula& b) { return !(a == b); }

 private:
  struct Node {
    Op op;
    std::string name;
    std::vector<Formula> kids;
  };
  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static Formula make(Op op, std::string name, std::vector<Formula> kids);

  std::shared_ptr<const Node> node_;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what + " at position " + std::to_string(position)),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class UnknownAtomError : public std::runtime_error {
 public:
  explicit UnknownAtomError(const std::string& atom)
      : std::runtime_error("unknown atomic proposition \"" + atom + "\""), atom_(atom) {}
  const std::string& atom() const { return atom_; }

 private:
  std::string atom_;
};

/// Parses the ASCII grammar
///   true | false | "atom" | ! | X | F | G | U | R | & | | | -> | ( )
/// with precedence (tightest first) unary, U/R (right-assoc), &, |, -> (right-assoc).
/// Implications are expanded on the fly.
Formula parse_ltl(std::string_view text);
/// Same, but every atom must belong to `universe`.
Formula parse_ltl(std::string_view text, const std::set<std::string>& universe);

/// Negation normal form: negation only above atoms, F/G rewritten to U/R.
Formula to_nnf(const Formula& f);

using Letter = std::set<std::string>;

/// Ultimately periodic word prefix . cycle^omega.
struct LassoWord {
  std::vector<Letter> prefix;
  std::vector<Letter> cycle;
};

/// Standard LTL satisfaction on a lasso word.
bool eval_lasso(const Formula& f, const LassoWord& w);

/// Conjunctive propositional constraint over the automaton's atom table.
struct Label {
  std::uint64_t pos = 0;
  std::uint64_t neg = 0;
  bool matches(std::uint64_t letter) const { return (letter & pos) == pos && (letter & neg) == 0; }
  friend bool operator==(const Label&, const Label&) = default;
};

struct NbaEdge {
  int target;
  Label label;
};

/// Nondeterministic Buchi automaton with propositional edge labels.
class Nba {
 public:
  static constexpr std::size_t kMaxAtoms = 64;

  Nba() = default;
  Nba(std::vector<std::string> atoms, std::vector<std::string> state_names, std::vector<int> initial,
      std::vector<bool> accepting, std::vector<std::vector<NbaEdge>> edges);

  std::size_t num_states() const { return names_.size(); }
  std::size_t num_edges() const;
  const std::vector<std::string>& atoms() const { return atoms_; }
  const std::vector<int>& initial() const { return initial_; }
  bool accepting(int q) const { return accepting_[static_cast<std::size_t>(q)]; }
  const std::vector<NbaEdge>& edges(int q) const { return edges_[static_cast<std::size_t>(q)]; }
  const std::string& state_name(int q) const { return names_[static_cast<std::size_t>(q)]; }

  /// Bitmask of the atoms of `letter` that this automaton mentions.
  std::uint64_t encode(const Letter& letter) const;
  std::string label_text(const Label& l) const;

  /// Human-readable dump: states, initial, accepting, labelled edges.
  std::string to_text() const;

 private:
  std::vector<std::string> atoms_;
  std::vector<std::string> names_;
  std::vector<int> initial_;
  std::vector<bool> accepting_;
  std::vector<std::vector<NbaEdge>> edges_;
};

/// Tableau translation to a generalized automaton followed by counter
/// degeneralization. `f` should be in NNF; it is normalized otherwise.
Nba translate(const Formula& f);

bool nba_accepts_lasso(const Nba& a, const LassoWord& w);

}  // namespace tempofleet::ltl
