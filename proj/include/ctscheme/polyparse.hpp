#pragma once

#include <string>
#include <vector>

#include "ctscheme/laurent.hpp"

namespace ctscheme {

struct ExprSource {
  std::string text;
  std::vector<std::string> vars;
};

/// Parses a Laurent polynomial expression.
///
///   expr   := term (('+'|'-') term)*
///   term   := ['-'] factor (('*'|'/') factor)*
///   factor := base ('^' signedInt)?
///   base   := uint | var | '(' expr ')'
///
/// Whitespace is ignored; there is no implicit multiplication.  Division and
/// negative powers require a single monomial with unit coefficient.  Integer
/// literals are reduced modulo p^r.
///
/// Throws SyntaxError, NonMonomialDivisor, NonUnitDivisor or UnknownVariable,
/// each carrying the byte offset of the offending token.
LaurentPoly parse_laurent(const ExprSource& src, const Modulus& mod);

/// Splits "x,y,z" (commas and/or whitespace) into variable names.
std::vector<std::string> split_vars(const std::string& list);

}  // namespace ctscheme
