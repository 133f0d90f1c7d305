#include <random>

#include "doctest.h"
#include "ltl_gen.hpp"
#include "tempofleet/ltl.hpp"

using namespace tempofleet::ltl;

namespace {
Formula A(const char* n) { return Formula::atom(n); }
Letter L(std::initializer_list<const char*> xs) {
  Letter l;
  for (auto x : xs) l.insert(x);
  return l;
}
}  // namespace

TEST_CASE("parse base cases and precedence") {
  CHECK(parse_ltl("true") == Formula::tt());
  CHECK(parse_ltl("G F \"a\"") == Formula::always(Formula::eventually(A("a"))));
  CHECK(parse_ltl("GF\"a\"") == Formula::always(Formula::eventually(A("a"))));
  // hand parse: ! applies to "a" only, then U
  CHECK(parse_ltl("!\"a\" U \"b\"") == Formula::until(Formula::neg(A("a")), A("b")));
  CHECK(parse_ltl("\"a\" U \"b\" U \"c\"") == Formula::until(A("a"), Formula::until(A("b"), A("c"))));
  CHECK(parse_ltl("\"a\" & \"b\" | \"c\"") == Formula::disj(Formula::conj(A("a"), A("b")), A("c")));
  CHECK(parse_ltl("\"a\" | \"b\" & \"c\"") == Formula::disj(A("a"), Formula::conj(A("b"), A("c"))));
  CHECK(parse_ltl("\"a\" U \"b\" & \"c\"") == Formula::conj(Formula::until(A("a"), A("b")), A("c")));
  CHECK(parse_ltl("\"a\" -> \"b\" -> \"c\"") ==
        Formula::disj(Formula::neg(A("a")), Formula::disj(Formula::neg(A("b")), A("c"))));
  CHECK(parse_ltl("X \"1-π2\"") == Formula::next(A("1-π2")));
}

TEST_CASE("parse errors") {
  CHECK_THROWS_AS(parse_ltl("\"a\" &"), ParseError);
  CHECK_THROWS_AS(parse_ltl("(\"a\""), ParseError);
  CHECK_THROWS_AS(parse_ltl("a"), ParseError);
  CHECK_THROWS_AS(parse_ltl("\"a\" \"b\""), ParseError);
  CHECK_THROWS_AS(parse_ltl("\"\""), ParseError);
  try {
    parse_ltl("\"a\" & # ");
    FAIL("expected throw");
  } catch (const ParseError& e) {
    CHECK(e.position() == 6);
  }
  const std::set<std::string> universe{"a", "b"};
  CHECK_NOTHROW(parse_ltl("\"a\" U \"b\"", universe));
  CHECK_THROWS_AS(parse_ltl("\"a\" U \"c\"", universe), UnknownAtomError);
}

TEST_CASE("nnf") {
  CHECK(to_nnf(Formula::neg(Formula::tt())) == Formula::ff());
  CHECK(to_nnf(Formula::neg(Formula::until(A("a"), A("b")))) ==
        Formula::release(Formula::neg(A("a")), Formula::neg(A("b"))));
  CHECK(to_nnf(Formula::neg(Formula::always(A("a")))) == Formula::until(Formula::tt(), Formula::neg(A("a"))));
}

bool only_atom_negations(const Formula& f) {
  if (f.op() == Op::Not) return f.lhs().op() == Op::Atom;
  if (f.op() == Op::Eventually || f.op() == Op::Always) return false;
  if (f.is_unary()) return only_atom_negations(f.lhs());
  if (f.is_binary()) return only_atom_negations(f.lhs()) && only_atom_negations(f.rhs());
  return true;
}

TEST_CASE("print/parse round trip and nnf shape") {
  std::mt19937_64 rng(7);
  const std::vector<std::string> atoms{"a", "b", "2-π3"};
  for (int i = 0; i < 2000; ++i) {
    const Formula f = tfgen::random_formula(rng, atoms, 5);
    CHECK(parse_ltl(f.str()) == f);
    CHECK(only_atom_negations(to_nnf(f)));
  }
}

TEST_CASE("eval_lasso examples") {
  CHECK(eval_lasso(A("a"), {{L({"a"})}, {L({})}}));
  CHECK(eval_lasso(Formula::always(A("a")), {{L({"a"})}, {L({"a"})}}));
  CHECK_FALSE(eval_lasso(Formula::always(A("a")), {{L({"a"})}, {L({})}}));
  CHECK(eval_lasso(Formula::until(A("a"), A("b")), {{L({"a"}), L({"a"}), L({"b"})}, {L({})}}));
  CHECK_FALSE(eval_lasso(Formula::until(A("a"), A("b")), {{L({"a"}), L({}), L({"b"})}, {L({})}}));
  // a holds forever, b never: weak release holds, until fails
  CHECK(eval_lasso(Formula::release(A("b"), A("a")), {{}, {L({"a"})}}));
  CHECK_FALSE(eval_lasso(Formula::until(A("a"), A("b")), {{}, {L({"a"})}}));
  CHECK(eval_lasso(Formula::next(A("b")), {{L({})}, {L({"b"})}}));
  CHECK_THROWS(eval_lasso(A("a"), {{L({"a"})}, {}}));
}

TEST_CASE("translate examples") {
  const Nba fa = translate(Formula::eventually(A("a")));
  CHECK(nba_accepts_lasso(fa, {{L({})}, {L({"a"})}}));
  CHECK_FALSE(nba_accepts_lasso(fa, {{L({})}, {L({})}}));
  const Nba t = translate(Formula::tt());
  CHECK(t.num_states() == 1);
  CHECK(nba_accepts_lasso(t, {{}, {L({"x"})}}));
  const Nba ga = translate(Formula::always(A("a")));
  CHECK(nba_accepts_lasso(ga, {{L({"a"})}, {L({"a"})}}));
  CHECK(translate(Formula::ff()).num_states() == 0);
  const Nba contra = translate(Formula::conj(A("p"), Formula::neg(A("p"))));
  CHECK(contra.initial().empty());

  // determinism of the output size
  const Formula g = parse_ltl("G F \"a\" & G F \"b\" & (!\"c\" U \"b\")");
  CHECK(translate(g).to_text() == translate(g).to_text());
}

TEST_CASE("hand-built nba") {
  Nba all({}, {"q"}, {0}, {true}, {{{0, Label{}}}});
  CHECK(nba_accepts_lasso(all, {{L({"z"})}, {L({})}}));
  CHECK_THROWS(Nba({"a"}, {"q"}, {0}, {true}, {{{0, Label{1, 1}}}}));
}

TEST_CASE("labels are disjoint and initial states in range") {
  std::mt19937_64 rng(11);
  const std::vector<std::string> atoms{"a", "b", "c"};
  for (int i = 0; i < 300; ++i) {
    const Nba n = translate(tfgen::random_formula(rng, atoms, 4));
    for (std::size_t q = 0; q < n.num_states(); ++q)
      for (const auto& e : n.edges(static_cast<int>(q))) CHECK((e.label.pos & e.label.neg) == 0);
    for (int q : n.initial()) CHECK(static_cast<std::size_t>(q) < n.num_states());
  }
}

TEST_CASE("oracle agreement: exhaustive depth 2, random depth 4") {
  const std::vector<std::string> two{"a", "b"};
  const auto words = tfgen::all_lassos(two, 2, 2);
  CHECK(words.size() == 420);
  const auto forms = tfgen::nnf_formulas(two, 2);
  CHECK(forms.size() == 156);
  for (const auto& f : forms) {
    const Nba n = translate(f);
    for (const auto& w : words) REQUIRE_MESSAGE(nba_accepts_lasso(n, w) == eval_lasso(f, w), f.str());
  }
  std::mt19937_64 rng(3);
  const std::vector<std::string> three{"a", "b", "c"};
  for (int i = 0; i < 3000; ++i) {
    const Formula f = tfgen::random_formula(rng, three, 4);
    const auto w = tfgen::random_lasso(rng, three, 3, 3);
    REQUIRE_MESSAGE(nba_accepts_lasso(translate(f), w) == eval_lasso(f, w), f.str());
    CHECK(eval_lasso(f, w) == eval_lasso(to_nnf(f), w));
  }
}
