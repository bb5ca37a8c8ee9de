#include "ctscheme/polyparse.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace ctscheme {

namespace {

constexpr std::int64_t kMaxExponent = 1 << 20;

class Parser {
 public:
  Parser(const ExprSource& src, const Modulus& mod) : src_(src), text_(src.text), mod_(mod) {}

  LaurentPoly run() {
    LaurentPoly result = expr();
    skip_ws();
    if (pos_ != text_.size()) {
      throw SyntaxError(pos_, std::string("unexpected '") + text_[pos_] + "'");
    }
    return result;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  LaurentPoly one() const { return LaurentPoly::constant(mod_, src_.vars.size(), 1); }

  LaurentPoly expr() {
    LaurentPoly acc = term();
    while (true) {
      if (accept('+')) {
        acc = add(acc, term());
      } else if (accept('-')) {
        acc = subtract(acc, term());
      } else {
        return acc;
      }
    }
  }

  LaurentPoly term() {
    const bool negated = accept('-');
    LaurentPoly acc = factor();
    while (true) {
      if (accept('*')) {
        acc = multiply(acc, factor());
      } else if (accept('/')) {
        skip_ws();
        const std::size_t at = pos_;
        acc = multiply(acc, invert_monomial(factor(), at));
      } else {
        break;
      }
    }
    return negated ? negate(acc) : acc;
  }

  LaurentPoly factor() {
    LaurentPoly b = base();
    if (!accept('^')) return b;
    skip_ws();
    const std::size_t at = pos_;
    bool negative = false;
    if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) {
      negative = text_[pos_] == '-';
      ++pos_;
    }
    if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      throw SyntaxError(pos_, "expected an integer exponent");
    }
    std::int64_t e = 0;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      e = e * 10 + (text_[pos_] - '0');
      if (e > kMaxExponent) throw SyntaxError(at, "exponent too large");
      ++pos_;
    }
    if (negative) b = invert_monomial(b, at);
    return power(b, static_cast<std::uint64_t>(e));
  }

  LaurentPoly base() {
    skip_ws();
    if (pos_ >= text_.size()) throw SyntaxError(pos_, "unexpected end of input");
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::uint64_t v = 0;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        v = mod_.add(mod_.mul(v, 10 % mod_.m()), static_cast<Coeff>(text_[pos_] - '0') % mod_.m());
        ++pos_;
      }
      return LaurentPoly::constant(mod_, src_.vars.size(), v);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t at = pos_;
      while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      const std::string name = text_.substr(at, pos_ - at);
      auto it = std::find(src_.vars.begin(), src_.vars.end(), name);
      if (it == src_.vars.end()) throw UnknownVariable(at, "'" + name + "' is not a declared variable");
      Monomial e(src_.vars.size(), 0);
      e[static_cast<std::size_t>(it - src_.vars.begin())] = 1;
      return LaurentPoly::monomial(mod_, e);
    }
    if (c == '(') {
      ++pos_;
      LaurentPoly inner = expr();
      if (!accept(')')) throw SyntaxError(pos_, "expected ')'");
      return inner;
    }
    throw SyntaxError(pos_, std::string("unexpected '") + c + "'");
  }

  LaurentPoly invert_monomial(const LaurentPoly& f, std::size_t at) const {
    if (f.size() != 1) throw NonMonomialDivisor(at, "divisor is not a single monomial");
    const Coeff c = f.coeff(0);
    if (mod_.valuation(c) != 0) throw NonUnitDivisor(at, "divisor coefficient is not a unit");
    auto e = f.exponents(0);
    Monomial inv(e.begin(), e.end());
    for (auto& x : inv) x = -x;
    return LaurentPoly::monomial(mod_, inv, mod_.unit_inverse(c));
  }

  const ExprSource& src_;
  const std::string& text_;
  const Modulus& mod_;
  std::size_t pos_ = 0;
};

void validate_vars(const std::vector<std::string>& vars) {
  std::set<std::string> seen;
  for (const auto& v : vars) {
    if (v.empty() || !std::ranges::all_of(v, [](char c) { return std::isalpha(static_cast<unsigned char>(c)); })) {
      throw SyntaxError(0, "variable name '" + v + "' must be nonempty and alphabetic");
    }
    if (!seen.insert(v).second) throw SyntaxError(0, "variable '" + v + "' declared twice");
  }
}

}  // namespace

LaurentPoly parse_laurent(const ExprSource& src, const Modulus& mod) {
  validate_vars(src.vars);
  return Parser(src, mod).run();
}

std::vector<std::string> split_vars(const std::string& list) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : list) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

}  // namespace ctscheme
