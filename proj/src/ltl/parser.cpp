#include <cctype>
#include <optional>

#include "tempofleet/ltl.hpp"

namespace tempofleet::ltl {

namespace {

enum class Tok { End, True, False, Atom, Not, And, Or, Implies, Next, Until, Release, Eventually, Always, LParen, RParen };

struct Token {
  Tok kind;
  std::size_t pos;
  std::string text;
};

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    switch (c) {
      case '(': out.push_back({Tok::LParen, start, {}}); ++i; continue;
      case ')': out.push_back({Tok::RParen, start, {}}); ++i; continue;
      case '!': out.push_back({Tok::Not, start, {}}); ++i; continue;
      case '&': out.push_back({Tok::And, start, {}}); ++i; continue;
      case '|': out.push_back({Tok::Or, start, {}}); ++i; continue;
      case '-':
        if (i + 1 < s.size() && s[i + 1] == '>') {
          out.push_back({Tok::Implies, start, {}});
          i += 2;
          continue;
        }
        throw ParseError("expected '->'", start);
      case '"': {
        const auto close = s.find('"', i + 1);
        if (close == std::string_view::npos) throw ParseError("unterminated atom", start);
        std::string name(s.substr(i + 1, close - i - 1));
        if (name.empty()) throw ParseError("empty atom name", start);
        out.push_back({Tok::Atom, start, std::move(name)});
        i = close + 1;
        continue;
      }
      default: break;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < s.size() && std::isalnum(static_cast<unsigned char>(s[j]))) ++j;
      const std::string_view word = s.substr(i, j - i);
      if (word == "true") {
        out.push_back({Tok::True, start, {}});
      } else if (word == "false") {
        out.push_back({Tok::False, start, {}});
      } else if (word.find_first_not_of("XFGUR") == std::string_view::npos) {
        // Operator runs such as "GF" split into single operators.
        for (std::size_t k = 0; k < word.size(); ++k) {
          Tok t = Tok::Next;
          switch (word[k]) {
            case 'X': t = Tok::Next; break;
            case 'F': t = Tok::Eventually; break;
            case 'G': t = Tok::Always; break;
            case 'U': t = Tok::Until; break;
            case 'R': t = Tok::Release; break;
          }
          out.push_back({t, start + k, {}});
        }
      } else {
        throw ParseError("unexpected identifier '" + std::string(word) + "' (atoms must be quoted)", start);
      }
      i = j;
      continue;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", start);
  }
  out.push_back({Tok::End, s.size(), {}});
  return out;
}

class Parser {
 public:
  Parser(std::vector<Token> toks, const std::set<std::string>* universe)
      : toks_(std::move(toks)), universe_(universe) {}

  Formula parse() {
    Formula f = implication();
    if (peek().kind != Tok::End) throw ParseError("unexpected trailing input", peek().pos);
    return f;
  }

 private:
  const Token& peek() const { return toks_[i_]; }
  const Token& take() { return toks_[i_++]; }

  Formula implication() {
    Formula lhs = disjunction();
    if (peek().kind == Tok::Implies) {
      take();
      Formula rhs = implication();
      return Formula::disj(Formula::neg(lhs), rhs);
    }
    return lhs;
  }

  Formula disjunction() {
    Formula f = conjunction();
    while (peek().kind == Tok::Or) {
      take();
      f = Formula::disj(f, conjunction());
    }
    return f;
  }

  Formula conjunction() {
    Formula f = binary_temporal();
    while (peek().kind == Tok::And) {
      take();
      f = Formula::conj(f, binary_temporal());
    }
    return f;
  }

  Formula binary_temporal() {
    Formula lhs = unary();
    if (peek().kind == Tok::Until) {
      take();
      return Formula::until(lhs, binary_temporal());
    }
    if (peek().kind == Tok::Release) {
      take();
      return Formula::release(lhs, binary_temporal());
    }
    return lhs;
  }

  Formula unary() {
    switch (peek().kind) {
      case Tok::Not: take(); return Formula::neg(unary());
      case Tok::Next: take(); return Formula::next(unary());
      case Tok::Eventually: take(); return Formula::eventually(unary());
      case Tok::Always: take(); return Formula::always(unary());
      default: return primary();
    }
  }

  Formula primary() {
    const Token& t = take();
    switch (t.kind) {
      case Tok::True: return Formula::tt();
      case Tok::False: return Formula::ff();
      case Tok::Atom:
        if (universe_ && !universe_->contains(t.text)) throw UnknownAtomError(t.text);
        return Formula::atom(t.text);
      case Tok::LParen: {
        Formula f = implication();
        if (peek().kind != Tok::RParen) throw ParseError("expected ')'", peek().pos);
        take();
        return f;
      }
      case Tok::End: throw ParseError("unexpected end of formula", t.pos);
      default: throw ParseError("expected a formula", t.pos);
    }
  }

  std::vector<Token> toks_;
  std::size_t i_ = 0;
  const std::set<std::string>* universe_;
};

}  // namespace

Formula parse_ltl(std::string_view text) { return Parser(tokenize(text), nullptr).parse(); }

Formula parse_ltl(std::string_view text, const std::set<std::string>& universe) {
  return Parser(tokenize(text), &universe).parse();
}

}  // namespace tempofleet::ltl
