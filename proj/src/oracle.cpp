#include "ctscheme/oracle.hpp"

#include <algorithm>

#include "ctscheme/errors.hpp"

namespace ctscheme::oracle {

namespace {

// Upper bound on the number of terms of f * g: the smaller of the pair count
// and the size of the exponent bounding box.
double product_size_bound(const LaurentPoly& f, const LaurentPoly& g) {
  double box = 1;
  for (std::size_t v = 0; v < f.nvars(); ++v) {
    std::int64_t span = 1;
    for (const auto* h : {&f, &g}) {
      std::int32_t lo = 0, hi = 0;
      for (std::size_t t = 0; t < h->size(); ++t) {
        const auto e = h->exponents(t)[v];
        lo = t == 0 ? e : std::min(lo, e);
        hi = t == 0 ? e : std::max(hi, e);
      }
      span += hi - lo;
    }
    box *= static_cast<double>(span);
  }
  return std::min(box, static_cast<double>(f.size()) * static_cast<double>(g.size()));
}

// Upper bound on the number of terms of P^n: the exponent box, or the number
// of multisets of n terms of P.
double power_size_bound(const LaurentPoly& P, std::uint64_t n) {
  double box = 1;
  for (std::size_t v = 0; v < P.nvars(); ++v) {
    std::int32_t lo = 0, hi = 0;
    for (std::size_t t = 0; t < P.size(); ++t) {
      const auto e = P.exponents(t)[v];
      lo = t == 0 ? e : std::min(lo, e);
      hi = t == 0 ? e : std::max(hi, e);
    }
    box *= static_cast<double>(n) * static_cast<double>(hi - lo) + 1;
  }
  double multisets = 1;
  const double k = static_cast<double>(P.size());
  for (double i = 1; i < k && multisets <= box; ++i) multisets *= (static_cast<double>(n) + i) / i;
  return std::min(box, multisets);
}

void check_power(const LaurentPoly& P, std::uint64_t n) {
  if (power_size_bound(P, n) > static_cast<double>(kTermCap)) {
    throw TermCapExceeded("P^" + std::to_string(n) + " could exceed " + std::to_string(kTermCap) +
                          " terms");
  }
}

LaurentPoly capped_multiply(const LaurentPoly& f, const LaurentPoly& g) {
  if (product_size_bound(f, g) > static_cast<double>(kTermCap)) {
    throw TermCapExceeded("oracle product could exceed " + std::to_string(kTermCap) + " terms");
  }
  return multiply(f, g);
}

// ct[f * Q] without forming the product.
Coeff paired_constant_term(const LaurentPoly& f, const LaurentPoly& Q) {
  const Modulus& mod = f.modulus();
  Monomial neg(Q.nvars());
  Coeff acc = 0;
  for (std::size_t t = 0; t < Q.size(); ++t) {
    auto e = Q.exponents(t);
    for (std::size_t i = 0; i < neg.size(); ++i) neg[i] = -e[i];
    acc = mod.add(acc, mod.mul(Q.coeff(t), f.coefficient_of(neg)));
  }
  return acc;
}

}  // namespace

Coeff ct_direct(const LaurentPoly& P, const LaurentPoly& Q, std::uint64_t n) {
  check_power(P, n);
  LaurentPoly acc = LaurentPoly::constant(P.modulus(), P.nvars(), 1);
  LaurentPoly base = P;
  while (n > 0) {
    if (n & 1) {
      acc = capped_multiply(acc, base);
    }
    n >>= 1;
    if (n > 0) {
      base = capped_multiply(base, base);
    }
  }
  return paired_constant_term(acc, Q);
}

std::vector<Coeff> sequence_prefix(const LaurentPoly& P, const LaurentPoly& Q, std::size_t count) {
  if (count > 0) check_power(P, count - 1);
  std::vector<Coeff> out;
  out.reserve(count);
  LaurentPoly cur = LaurentPoly::constant(P.modulus(), P.nvars(), 1);
  for (std::size_t n = 0; n < count; ++n) {
    out.push_back(paired_constant_term(cur, Q));
    if (n + 1 < count) {
      cur = capped_multiply(cur, P);
    }
  }
  return out;
}

}  // namespace ctscheme::oracle
