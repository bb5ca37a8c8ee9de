#pragma once

// Brute-force reference values: ct[P^n Q] by explicit powering.  Used by the
// equivalence tests; shares only the polynomial arithmetic with the rest of
// the library.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ctscheme/laurent.hpp"

namespace ctscheme::oracle {

constexpr std::size_t kTermCap = 10'000'000;

/// ct[P^n Q] mod p^r via binary powering.  Throws TermCapExceeded.
Coeff ct_direct(const LaurentPoly& P, const LaurentPoly& Q, std::uint64_t n);

/// ct[P^n Q] for n < count, one multiplication per step.
std::vector<Coeff> sequence_prefix(const LaurentPoly& P, const LaurentPoly& Q, std::size_t count);

}  // namespace ctscheme::oracle
