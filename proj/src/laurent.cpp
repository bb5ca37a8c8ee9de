#include "ctscheme/laurent.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

namespace ctscheme {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t floor_mod(std::int64_t a, std::int64_t b) { return a - floor_div(a, b) * b; }

void check_context(const LaurentPoly& f, const LaurentPoly& g, const char* op) {
  if (f.nvars() != g.nvars() || !(f.modulus() == g.modulus())) {
    throw ContextMismatch(std::string(op) + ": operands live in different rings");
  }
}

// Mixed-radix packing of exponent tuples inside a bounding box.  Numeric key
// order coincides with lexicographic tuple order.
struct Box {
  std::vector<std::int64_t> lo;
  std::vector<std::uint64_t> stride;
  std::vector<std::uint64_t> width;
  std::uint64_t size = 1;

  Box(std::span<const std::int64_t> low, std::span<const std::int64_t> high)
      : lo(low.begin(), low.end()), stride(low.size()), width(low.size()) {
    constexpr std::uint64_t limit = std::uint64_t{1} << 62;
    for (std::size_t i = low.size(); i-- > 0;) {
      width[i] = static_cast<std::uint64_t>(high[i] - low[i] + 1);
      stride[i] = size;
      if (width[i] != 0 && size > limit / width[i]) {
        throw TermCapExceeded("exponent range too large to pack");
      }
      size *= width[i];
    }
  }

  void decode(std::uint64_t key, std::int32_t* out) const {
    for (std::size_t i = 0; i < lo.size(); ++i) {
      out[i] = static_cast<std::int32_t>(lo[i] + static_cast<std::int64_t>((key / stride[i]) % width[i]));
    }
  }
};

// Coefficient accumulator over a Box.  Dense when the box is small relative
// to the work, hashed otherwise.  For moduli below 2^31 products are summed
// lazily and only reduced when the running sum nears overflow.
class Accumulator {
 public:
  Accumulator(const Modulus& mod, const Box& box, std::uint64_t work)
      : mod_(mod), box_(box), lazy_(mod.m() <= (Coeff{1} << 31)) {
    constexpr std::uint64_t dense_cap = std::uint64_t{1} << 25;
    dense_ = box.size <= dense_cap && box.size <= std::max<std::uint64_t>(4096, 16 * work);
    if (dense_) acc_.assign(box.size, 0);
  }

  void add_product(std::uint64_t key, Coeff a, Coeff b) {
    Coeff& slot = dense_ ? acc_[key] : map_[key];
    if (lazy_) {
      slot += a * b;
      if (slot >= (Coeff{1} << 63)) slot %= mod_.m();
    } else {
      slot = mod_.add(slot, mod_.mul(a, b));
    }
  }

  LaurentPoly finish(std::size_t nvars) {
    std::vector<std::int32_t> exps;
    std::vector<Coeff> coeffs;
    auto emit = [&](std::uint64_t key, Coeff v) {
      v %= mod_.m();
      if (v == 0) return;
      std::size_t at = exps.size();
      exps.resize(at + nvars);
      box_.decode(key, exps.data() + at);
      coeffs.push_back(v);
    };
    if (dense_) {
      for (std::uint64_t k = 0; k < acc_.size(); ++k) {
        if (acc_[k] != 0) emit(k, acc_[k]);
      }
    } else {
      std::vector<std::pair<std::uint64_t, Coeff>> items(map_.begin(), map_.end());
      std::sort(items.begin(), items.end());
      for (auto [k, v] : items) emit(k, v);
    }
    return LaurentPoly::from_sorted(mod_, nvars, std::move(exps), std::move(coeffs));
  }

 private:
  const Modulus& mod_;
  const Box& box_;
  bool lazy_;
  bool dense_ = false;
  std::vector<Coeff> acc_;
  std::unordered_map<std::uint64_t, Coeff> map_;
};

void bounds(const LaurentPoly& f, std::vector<std::int64_t>& lo, std::vector<std::int64_t>& hi) {
  const std::size_t d = f.nvars();
  lo.assign(d, 0);
  hi.assign(d, 0);
  for (std::size_t t = 0; t < f.size(); ++t) {
    auto e = f.exponents(t);
    for (std::size_t i = 0; i < d; ++i) {
      if (t == 0 || e[i] < lo[i]) lo[i] = e[i];
      if (t == 0 || e[i] > hi[i]) hi[i] = e[i];
    }
  }
}

bool lex_less(std::span<const std::int32_t> a, std::span<const std::int32_t> b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

// Sorts and merges raw terms.
LaurentPoly normalize(const Modulus& mod, std::size_t nvars, const std::vector<std::int32_t>& exps,
                      const std::vector<Coeff>& coeffs) {
  const std::size_t n = coeffs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto at = [&](std::size_t i) { return std::span<const std::int32_t>(exps.data() + i * nvars, nvars); };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return lex_less(at(a), at(b)); });
  std::vector<std::int32_t> out_exps;
  std::vector<Coeff> out_coeffs;
  std::size_t i = 0;
  while (i < n) {
    Coeff sum = 0;
    std::size_t j = i;
    while (j < n && std::ranges::equal(at(order[i]), at(order[j]))) {
      sum = mod.add(sum, coeffs[order[j]] % mod.m());
      ++j;
    }
    if (sum != 0) {
      auto e = at(order[i]);
      out_exps.insert(out_exps.end(), e.begin(), e.end());
      out_coeffs.push_back(sum);
    }
    i = j;
  }
  return LaurentPoly::from_sorted(mod, nvars, std::move(out_exps), std::move(out_coeffs));
}

}  // namespace

LaurentPoly LaurentPoly::from_sorted(const Modulus& mod, std::size_t nvars,
                                     std::vector<std::int32_t> exps, std::vector<Coeff> coeffs) {
  LaurentPoly f(mod, nvars);
  f.exps_ = std::move(exps);
  f.coeffs_ = std::move(coeffs);
  return f;
}

LaurentPoly LaurentPoly::constant(const Modulus& mod, std::size_t nvars, Coeff c) {
  c %= mod.m();
  if (c == 0) return LaurentPoly(mod, nvars);
  return from_sorted(mod, nvars, std::vector<std::int32_t>(nvars, 0), {c});
}

LaurentPoly LaurentPoly::monomial(const Modulus& mod, std::span<const std::int32_t> exps, Coeff c) {
  c %= mod.m();
  if (c == 0) return LaurentPoly(mod, exps.size());
  return from_sorted(mod, exps.size(), std::vector<std::int32_t>(exps.begin(), exps.end()), {c});
}

LaurentPoly LaurentPoly::from_terms(const Modulus& mod, std::size_t nvars,
                                    std::vector<std::pair<Monomial, Coeff>> terms) {
  std::vector<std::int32_t> exps;
  std::vector<Coeff> coeffs;
  exps.reserve(terms.size() * nvars);
  for (auto& [m, c] : terms) {
    if (m.size() != nvars) throw ContextMismatch("monomial arity differs from ring arity");
    exps.insert(exps.end(), m.begin(), m.end());
    coeffs.push_back(c % mod.m());
  }
  return normalize(mod, nvars, exps, coeffs);
}

std::size_t LaurentPoly::find(std::span<const std::int32_t> exps) const {
  std::size_t lo = 0, hi = size();
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (lex_less(exponents(mid), exps)) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  if (lo < size() && std::ranges::equal(exponents(lo), exps)) return lo;
  return size();
}

Coeff LaurentPoly::coefficient_of(std::span<const std::int32_t> exps) const {
  std::size_t i = find(exps);
  return i == size() ? 0 : coeffs_[i];
}

std::size_t LaurentPoly::hash() const noexcept {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ nvars_;
  auto mix = [&h](std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h *= 0xbf58476d1ce4e5b9ULL;
    h ^= h >> 31;
  };
  for (auto e : exps_) mix(static_cast<std::uint32_t>(e));
  for (auto c : coeffs_) mix(c);
  return static_cast<std::size_t>(h);
}

LaurentPoly add(const LaurentPoly& f, const LaurentPoly& g) {
  check_context(f, g, "add");
  const auto& mod = f.modulus();
  const std::size_t d = f.nvars();
  std::vector<std::int32_t> exps;
  std::vector<Coeff> coeffs;
  std::size_t i = 0, j = 0;
  auto push = [&](std::span<const std::int32_t> e, Coeff c) {
    if (c == 0) return;
    exps.insert(exps.end(), e.begin(), e.end());
    coeffs.push_back(c);
  };
  while (i < f.size() || j < g.size()) {
    if (j == g.size() || (i < f.size() && lex_less(f.exponents(i), g.exponents(j)))) {
      push(f.exponents(i), f.coeff(i));
      ++i;
    } else if (i == f.size() || lex_less(g.exponents(j), f.exponents(i))) {
      push(g.exponents(j), g.coeff(j));
      ++j;
    } else {
      push(f.exponents(i), mod.add(f.coeff(i), g.coeff(j)));
      ++i;
      ++j;
    }
  }
  return LaurentPoly::from_sorted(mod, d, std::move(exps), std::move(coeffs));
}

LaurentPoly negate(const LaurentPoly& f) { return scale(f, f.modulus().m() - 1); }

LaurentPoly subtract(const LaurentPoly& f, const LaurentPoly& g) { return add(f, negate(g)); }

LaurentPoly scale(const LaurentPoly& f, Coeff c) {
  const auto& mod = f.modulus();
  c %= mod.m();
  std::vector<std::int32_t> exps;
  std::vector<Coeff> coeffs;
  for (std::size_t i = 0; i < f.size(); ++i) {
    Coeff v = mod.mul(c, f.coeff(i));
    if (v == 0) continue;
    auto e = f.exponents(i);
    exps.insert(exps.end(), e.begin(), e.end());
    coeffs.push_back(v);
  }
  return LaurentPoly::from_sorted(mod, f.nvars(), std::move(exps), std::move(coeffs));
}

LaurentPoly multiply(const LaurentPoly& f, const LaurentPoly& g) {
  check_context(f, g, "multiply");
  const std::size_t d = f.nvars();
  if (f.is_zero() || g.is_zero()) return LaurentPoly(f.modulus(), d);
  std::vector<std::int64_t> flo, fhi, glo, ghi;
  bounds(f, flo, fhi);
  bounds(g, glo, ghi);
  std::vector<std::int64_t> lo(d), hi(d);
  for (std::size_t i = 0; i < d; ++i) {
    lo[i] = flo[i] + glo[i];
    hi[i] = fhi[i] + ghi[i];
  }
  Box box(lo, hi);
  Accumulator acc(f.modulus(), box, static_cast<std::uint64_t>(f.size()) * g.size());
  // Keys are affine in the exponents, so key(a+b) = key_f(a) + key_g(b) with
  // per-operand offsets absorbed by the box origin.
  auto partial = [&](const LaurentPoly& h, const std::vector<std::int64_t>& hlo) {
    std::vector<std::uint64_t> keys(h.size());
    for (std::size_t t = 0; t < h.size(); ++t) {
      auto e = h.exponents(t);
      std::uint64_t k = 0;
      for (std::size_t i = 0; i < d; ++i) k += static_cast<std::uint64_t>(e[i] - hlo[i]) * box.stride[i];
      keys[t] = k;
    }
    return keys;
  };
  auto fk = partial(f, flo);
  auto gk = partial(g, glo);
  auto fc = f.coeffs();
  auto gc = g.coeffs();
  for (std::size_t a = 0; a < fk.size(); ++a) {
    const std::uint64_t ka = fk[a];
    const Coeff ca = fc[a];
    for (std::size_t b = 0; b < gk.size(); ++b) acc.add_product(ka + gk[b], ca, gc[b]);
  }
  return acc.finish(d);
}

LaurentPoly power(const LaurentPoly& f, std::uint64_t e) {
  LaurentPoly result = LaurentPoly::constant(f.modulus(), f.nvars(), 1);
  if (e == 0) return result;
  LaurentPoly base = f;
  while (true) {
    if (e & 1) result = multiply(result, base);
    e >>= 1;
    if (e == 0) break;
    base = multiply(base, base);
  }
  return result;
}

LaurentPoly cartier(const LaurentPoly& f, std::uint64_t p) {
  const std::size_t d = f.nvars();
  const auto pp = static_cast<std::int32_t>(p);
  std::vector<std::int32_t> exps;
  std::vector<Coeff> coeffs;
  for (std::size_t t = 0; t < f.size(); ++t) {
    auto e = f.exponents(t);
    if (!std::ranges::all_of(e, [pp](std::int32_t x) { return x % pp == 0; })) continue;
    for (auto x : e) exps.push_back(x / pp);
    coeffs.push_back(f.coeff(t));
  }
  return LaurentPoly::from_sorted(f.modulus(), d, std::move(exps), std::move(coeffs));
}

LaurentPoly inflate(const LaurentPoly& f, std::uint64_t p) {
  std::vector<std::int32_t> exps(f.flat_exponents().begin(), f.flat_exponents().end());
  for (auto& x : exps) x *= static_cast<std::int32_t>(p);
  return LaurentPoly::from_sorted(f.modulus(), f.nvars(), std::move(exps),
                                  std::vector<Coeff>(f.coeffs().begin(), f.coeffs().end()));
}

std::optional<LaurentPoly> collapse_pth_roots(const LaurentPoly& f, std::uint64_t p) {
  const auto pp = static_cast<std::int32_t>(p);
  for (auto x : f.flat_exponents()) {
    if (x % pp != 0) return std::nullopt;
  }
  return cartier(f, p);
}

Coeff constant_term(const LaurentPoly& f) {
  const std::vector<std::int32_t> zero(f.nvars(), 0);
  return f.coefficient_of(zero);
}

CartierProduct::CartierProduct(const LaurentPoly& f, std::uint64_t p) : f_(f), p_(p) {
  const std::size_t d = f.nvars();
  std::vector<std::int64_t> lo, hi;
  bounds(f, lo, hi);
  lo_.assign(lo.begin(), lo.end());
  hi_.assign(hi.begin(), hi.end());
  std::uint64_t classes = 1;
  for (std::size_t i = 0; i < d; ++i) {
    classes *= p;
    if (classes > (std::uint64_t{1} << 20)) return;  // fall back to full products
  }
  bucketed_ = true;
  std::vector<std::size_t> count(classes + 1, 0);
  std::vector<std::size_t> cls(f.size());
  for (std::size_t t = 0; t < f.size(); ++t) {
    cls[t] = class_of(f.exponents(t), false);
    ++count[cls[t] + 1];
  }
  offsets_.assign(classes + 1, 0);
  for (std::size_t b = 0; b < classes; ++b) offsets_[b + 1] = offsets_[b] + count[b + 1];
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  exps_.resize(f.size() * d);
  coeffs_.resize(f.size());
  for (std::size_t t = 0; t < f.size(); ++t) {
    std::size_t at = fill[cls[t]]++;
    auto e = f.exponents(t);
    std::copy(e.begin(), e.end(), exps_.begin() + static_cast<std::ptrdiff_t>(at * d));
    coeffs_[at] = f.coeff(t);
  }
}

std::size_t CartierProduct::class_of(std::span<const std::int32_t> exps, bool negated) const {
  std::size_t id = 0;
  const auto p = static_cast<std::int64_t>(p_);
  for (auto x : exps) {
    std::int64_t v = negated ? -static_cast<std::int64_t>(x) : x;
    id = id * p_ + static_cast<std::size_t>(floor_mod(v, p));
  }
  return id;
}

LaurentPoly CartierProduct::apply(const LaurentPoly& g) const {
  check_context(f_, g, "CartierProduct");
  if (!bucketed_) return cartier(multiply(f_, g), p_);
  const std::size_t d = f_.nvars();
  if (f_.is_zero() || g.is_zero()) return LaurentPoly(f_.modulus(), d);
  std::vector<std::int64_t> glo, ghi;
  bounds(g, glo, ghi);
  const auto p = static_cast<std::int64_t>(p_);
  std::vector<std::int64_t> lo(d), hi(d);
  for (std::size_t i = 0; i < d; ++i) {
    lo[i] = floor_div(lo_[i] + glo[i], p);
    hi[i] = floor_div(hi_[i] + ghi[i], p);
  }
  Box box(lo, hi);
  const std::uint64_t work =
      std::max<std::uint64_t>(1, static_cast<std::uint64_t>(f_.size()) * g.size() / offsets_.size());
  Accumulator acc(f_.modulus(), box, work);
  // Relative to the box origin: key = sum_i ((ef_i + eg_i)/p - lo_i) * stride_i.
  for (std::size_t t = 0; t < g.size(); ++t) {
    auto eg = g.exponents(t);
    const Coeff cg = g.coeff(t);
    const std::size_t b = class_of(eg, true);
    for (std::size_t s = offsets_[b]; s < offsets_[b + 1]; ++s) {
      const std::int32_t* ef = exps_.data() + s * d;
      std::uint64_t key = 0;
      for (std::size_t i = 0; i < d; ++i) {
        key += static_cast<std::uint64_t>((static_cast<std::int64_t>(ef[i]) + eg[i]) / p - lo[i]) * box.stride[i];
      }
      acc.add_product(key, coeffs_[s], cg);
    }
  }
  return acc.finish(d);
}

namespace {

std::int64_t stat_of(std::span<const std::int32_t> e, DegreeKind kind, std::size_t var) {
  switch (kind) {
    case DegreeKind::upper:
      return e[var];
    case DegreeKind::lower:
      return -static_cast<std::int64_t>(e[var]);
    case DegreeKind::total_upper:
      return std::accumulate(e.begin(), e.end(), std::int64_t{0});
    case DegreeKind::total_lower:
      return -std::accumulate(e.begin(), e.end(), std::int64_t{0});
  }
  return 0;
}

void check_var(const LaurentPoly& f, DegreeKind kind, std::size_t var) {
  if ((kind == DegreeKind::upper || kind == DegreeKind::lower) && var >= f.nvars()) {
    throw ContextMismatch("degree_stat: variable index out of range");
  }
}

}  // namespace

std::int64_t degree_stat(const LaurentPoly& f, DegreeKind kind, std::size_t var) {
  if (f.is_zero()) throw ZeroPolynomial("degree_stat of the zero polynomial");
  check_var(f, kind, var);
  std::int64_t best = 0;
  for (std::size_t t = 0; t < f.size(); ++t) best = std::max(best, stat_of(f.exponents(t), kind, var));
  return best;
}

std::int64_t symmetric_degree_stat(const LaurentPoly& f, const SymmetryGroup& sym, DegreeKind kind,
                                   std::size_t var) {
  if (f.is_zero()) throw ZeroPolynomial("degree_stat of the zero polynomial");
  check_var(f, kind, var);
  std::int64_t best = 0;
  std::vector<std::int32_t> img(f.nvars());
  for (std::size_t t = 0; t < f.size(); ++t) {
    for (const auto& sigma : sym.elements) {
      sigma.apply(f.exponents(t), img);
      best = std::max(best, stat_of(img, kind, var));
    }
  }
  return best;
}

bool SignedPermutation::is_identity() const {
  for (std::size_t i = 0; i < perm.size(); ++i) {
    if (perm[i] != i || flip[i]) return false;
  }
  return true;
}

void SignedPermutation::apply(std::span<const std::int32_t> in, std::span<std::int32_t> out) const {
  for (std::size_t i = 0; i < perm.size(); ++i) {
    out[i] = flip[i] ? -in[perm[i]] : in[perm[i]];
  }
}

LaurentPoly substitute(const LaurentPoly& f, const SignedPermutation& sigma) {
  const std::size_t d = f.nvars();
  std::vector<std::int32_t> exps(f.size() * d);
  std::vector<Coeff> coeffs(f.coeffs().begin(), f.coeffs().end());
  for (std::size_t t = 0; t < f.size(); ++t) {
    sigma.apply(f.exponents(t), std::span<std::int32_t>(exps.data() + t * d, d));
  }
  return normalize(f.modulus(), d, exps, coeffs);
}

SymmetryGroup SymmetryGroup::trivial(std::size_t nvars) {
  SymmetryGroup g;
  g.nvars = nvars;
  SignedPermutation id;
  for (std::size_t i = 0; i < nvars; ++i) {
    id.perm.push_back(static_cast<std::uint8_t>(i));
    id.flip.push_back(0);
  }
  g.elements.push_back(std::move(id));
  return g;
}

SymmetryGroup detect_symmetries(const LaurentPoly& P) {
  const std::size_t d = P.nvars();
  if (d > kMaxSymmetryVars) {
    throw TooManyVariables(std::to_string(d) + " variables; symmetry search supports at most " +
                           std::to_string(kMaxSymmetryVars));
  }
  SymmetryGroup group;
  group.nvars = d;
  std::vector<std::uint8_t> perm(d);
  std::iota(perm.begin(), perm.end(), std::uint8_t{0});
  do {
    for (std::uint32_t mask = 0; mask < (1U << d); ++mask) {
      SignedPermutation sigma{perm, std::vector<std::uint8_t>(d)};
      for (std::size_t i = 0; i < d; ++i) sigma.flip[i] = (mask >> i) & 1;
      if (substitute(P, sigma) == P) group.elements.push_back(std::move(sigma));
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return group;
}

LaurentPoly canonical_fold(const LaurentPoly& Q, const SymmetryGroup& sym) {
  if (sym.is_trivial()) return Q;
  const std::size_t d = Q.nvars();
  std::vector<std::int32_t> exps(Q.size() * d);
  std::vector<Coeff> coeffs(Q.coeffs().begin(), Q.coeffs().end());
  std::vector<std::int32_t> img(d);
  for (std::size_t t = 0; t < Q.size(); ++t) {
    std::span<std::int32_t> best(exps.data() + t * d, d);
    auto e = Q.exponents(t);
    std::copy(e.begin(), e.end(), best.begin());
    for (const auto& sigma : sym.elements) {
      sigma.apply(e, img);
      if (lex_less(best, img)) std::copy(img.begin(), img.end(), best.begin());
    }
  }
  return normalize(Q.modulus(), d, exps, coeffs);
}

std::string to_string(const LaurentPoly& f, std::span<const std::string> vars) {
  if (vars.size() != f.nvars()) throw ContextMismatch("to_string: variable name count mismatch");
  if (f.is_zero()) return "0";
  std::string out;
  for (std::size_t t = 0; t < f.size(); ++t) {
    if (t > 0) out += " + ";
    auto e = f.exponents(t);
    std::string mono;
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (e[i] == 0) continue;
      if (!mono.empty()) mono += "*";
      mono += vars[i];
      if (e[i] != 1) mono += "^" + std::to_string(e[i]);
    }
    const Coeff c = f.coeff(t);
    if (mono.empty()) {
      out += std::to_string(c);
    } else if (c == 1) {
      out += mono;
    } else {
      out += std::to_string(c) + "*" + mono;
    }
  }
  return out;
}

}  // namespace ctscheme
