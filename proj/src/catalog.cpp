#include "ctscheme/catalog.hpp"

#include <array>

namespace ctscheme {

namespace {

const std::array<SequenceDef, 4>& table() {
  static const std::array<SequenceDef, 4> defs{{
      {"catalan", "1/x+2+x", "1-x", {"x"}},
      {"motzkin", "1/x+1+x", "1-x^2", {"x"}},
      {"apery2", "(x+1)*(x+y)*(x+y+1)/(x*y)", "1", {"x", "y"}},
      {"apery3", "(x+y)*(1+z)*(x+y+z)*(1+y+z)/(x*y*z)", "1", {"x", "y", "z"}},
  }};
  return defs;
}

// (e, u mod 4) with m = 4^e u, 4 not dividing u.
std::pair<unsigned, unsigned> split_base4(BigIndex m) {
  unsigned e = 0;
  while (m % 4 == 0) {
    m /= 4;
    ++e;
  }
  return {e, static_cast<unsigned>(m % 4)};
}

}  // namespace

SequenceDef builtin(const std::string& name) {
  for (const auto& d : table()) {
    if (d.name == name) return d;
  }
  throw UnknownSequence("'" + name + "' (known: catalan, motzkin, apery2, apery3)");
}

std::vector<std::string> builtin_names() {
  std::vector<std::string> out;
  for (const auto& d : table()) out.push_back(d.name);
  return out;
}

int motzkin_nu2_reference(const BigIndex& n) {
  const auto [e1, u1] = split_base4(n + 1);
  const auto [e2, u2] = split_base4(n + 2);
  if ((e1 >= 1 && u1 == 1) || (e2 >= 1 && u2 == 3)) return 2;
  if ((e2 >= 1 && u2 == 1) || (e1 >= 1 && u1 == 3)) return 1;
  return 0;
}

}  // namespace ctscheme
