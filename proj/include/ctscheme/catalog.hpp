#pragma once

#include <string>
#include <vector>

#include "ctscheme/analyze.hpp"
#include "ctscheme/polyparse.hpp"

namespace ctscheme {

struct SequenceDef {
  std::string name;
  std::string P_text;
  std::string Q_text;
  std::vector<std::string> vars;

  ExprSource P() const { return {P_text, vars}; }
  ExprSource Q() const { return {Q_text, vars}; }
};

/// catalan, motzkin, apery2, apery3.  Throws UnknownSequence.
SequenceDef builtin(const std::string& name);
std::vector<std::string> builtin_names();

/// nu_2(M(n)) for the Motzkin numbers, read off the base-4 digits of n+1
/// and n+2:
///   2  if n+1 = 4^e u with e >= 1, u = 1 mod 4,  or n+2 = 4^e u, e >= 1, u = 3 mod 4
///   1  if n+2 = 4^e u with e >= 1, u = 1 mod 4,  or n+1 = 4^e u, e >= 1, u = 3 mod 4
///   0  otherwise
int motzkin_nu2_reference(const BigIndex& n);

}  // namespace ctscheme
