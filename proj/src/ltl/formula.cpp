#include "tempofleet/ltl.hpp"

#include <algorithm>
#include <cassert>

namespace tempofleet::ltl {

Formula Formula::make(Op op, std::string name, std::vector<Formula> kids) {
  return Formula(std::make_shared<const Node>(Node{op, std::move(name), std::move(kids)}));
}

Formula Formula::tt() { return make(Op::True, {}, {}); }
Formula Formula::ff() { return make(Op::False, {}, {}); }

Formula Formula::atom(std::string name) {
  if (name.empty()) throw std::invalid_argument("atomic proposition name must be nonempty");
  return make(Op::Atom, std::move(name), {});
}

Formula Formula::neg(Formula f) { return make(Op::Not, {}, {std::move(f)}); }
Formula Formula::conj(Formula lhs, Formula rhs) { return make(Op::And, {}, {std::move(lhs), std::move(rhs)}); }
Formula Formula::disj(Formula lhs, Formula rhs) { return make(Op::Or, {}, {std::move(lhs), std::move(rhs)}); }
Formula Formula::next(Formula f) { return make(Op::Next, {}, {std::move(f)}); }
Formula Formula::until(Formula lhs, Formula rhs) { return make(Op::Until, {}, {std::move(lhs), std::move(rhs)}); }
Formula Formula::release(Formula lhs, Formula rhs) {
  return make(Op::Release, {}, {std::move(lhs), std::move(rhs)});
}
Formula Formula::eventually(Formula f) { return make(Op::Eventually, {}, {std::move(f)}); }
Formula Formula::always(Formula f) { return make(Op::Always, {}, {std::move(f)}); }

const Formula& Formula::lhs() const {
  if (node_->kids.empty()) throw std::logic_error("leaf formula has no operands");
  return node_->kids[0];
}

const Formula& Formula::rhs() const {
  if (node_->kids.size() < 2) throw std::logic_error("formula has no right operand");
  return node_->kids[1];
}

bool Formula::is_unary() const { return node_->kids.size() == 1; }
bool Formula::is_binary() const { return node_->kids.size() == 2; }

std::size_t Formula::depth() const {
  std::size_t d = 0;
  for (const auto& k : node_->kids) d = std::max(d, k.depth());
  return d + 1;
}

std::set<std::string> Formula::atoms() const {
  std::set<std::string> out;
  if (op() == Op::Atom) out.insert(name());
  for (const auto& k : node_->kids) {
    auto sub = k.atoms();
    out.insert(sub.begin(), sub.end());
  }
  return out;
}

namespace {

const char* binary_symbol(Op op) {
  switch (op) {
    case Op::And: return "&";
    case Op::Or: return "|";
    case Op::Until: return "U";
    case Op::Release: return "R";
    default: return "?";
  }
}

const char* unary_symbol(Op op) {
  switch (op) {
    case Op::Not: return "!";
    case Op::Next: return "X ";
    case Op::Eventually: return "F ";
    case Op::Always: return "G ";
    default: return "?";
  }
}

}  // namespace

std::string Formula::str() const {
  switch (op()) {
    case Op::True: return "true";
    case Op::False: return "false";
    case Op::Atom: return "\"" + name() + "\"";
    case Op::Not:
    case Op::Next:
    case Op::Eventually:
    case Op::Always: return unary_symbol(op()) + lhs().str();
    case Op::And:
    case Op::Or:
    case Op::Until:
    case Op::Release:
      return "(" + lhs().str() + " " + binary_symbol(op()) + " " + rhs().str() + ")";
  }
  return {};
}

bool operator==(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return true;
  if (a.op() != b.op() || a.name() != b.name()) return false;
  const auto& ka = a.node_->kids;
  const auto& kb = b.node_->kids;
  if (ka.size() != kb.size()) return false;
  for (std::size_t i = 0; i < ka.size(); ++i)
    if (ka[i] != kb[i]) return false;
  return true;
}

namespace {

Formula nnf_neg(const Formula& f);

Formula nnf_pos(const Formula& f) {
  switch (f.op()) {
    case Op::True:
    case Op::False:
    case Op::Atom: return f;
    case Op::Not: return nnf_neg(f.lhs());
    case Op::And: return Formula::conj(nnf_pos(f.lhs()), nnf_pos(f.rhs()));
    case Op::Or: return Formula::disj(nnf_pos(f.lhs()), nnf_pos(f.rhs()));
    case Op::Next: return Formula::next(nnf_pos(f.lhs()));
    case Op::Until: return Formula::until(nnf_pos(f.lhs()), nnf_pos(f.rhs()));
    case Op::Release: return Formula::release(nnf_pos(f.lhs()), nnf_pos(f.rhs()));
    case Op::Eventually: return Formula::until(Formula::tt(), nnf_pos(f.lhs()));
    case Op::Always: return Formula::release(Formula::ff(), nnf_pos(f.lhs()));
  }
  return f;
}

Formula nnf_neg(const Formula& f) {
  switch (f.op()) {
    case Op::True: return Formula::ff();
    case Op::False: return Formula::tt();
    case Op::Atom: return Formula::neg(f);
    case Op::Not: return nnf_pos(f.lhs());
    case Op::And: return Formula::disj(nnf_neg(f.lhs()), nnf_neg(f.rhs()));
    case Op::Or: return Formula::conj(nnf_neg(f.lhs()), nnf_neg(f.rhs()));
    case Op::Next: return Formula::next(nnf_neg(f.lhs()));
    case Op::Until: return Formula::release(nnf_neg(f.lhs()), nnf_neg(f.rhs()));
    case Op::Release: return Formula::until(nnf_neg(f.lhs()), nnf_neg(f.rhs()));
    case Op::Eventually: return Formula::release(Formula::ff(), nnf_neg(f.lhs()));
    case Op::Always: return Formula::until(Formula::tt(), nnf_neg(f.lhs()));
  }
  return f;
}

}  // namespace

Formula to_nnf(const Formula& f) { return nnf_pos(f); }

}  // namespace tempofleet::ltl
