#include "ctscheme/modring.hpp"

#include <algorithm>
#include <limits>

namespace ctscheme {

namespace {

using u128 = unsigned __int128;

std::uint64_t mulmod64(std::uint64_t a, std::uint64_t b, std::uint64_t n) {
  return static_cast<std::uint64_t>(static_cast<u128>(a) * b % n);
}

std::uint64_t powmod64(std::uint64_t a, std::uint64_t e, std::uint64_t n) {
  std::uint64_t result = 1 % n;
  a %= n;
  while (e > 0) {
    if (e & 1) result = mulmod64(result, a, n);
    a = mulmod64(a, a, n);
    e >>= 1;
  }
  return result;
}

// Extended Euclid on signed 128-bit to avoid overflow near 2^63.
std::int64_t inverse_mod(std::int64_t a, std::int64_t n) {
  __int128 old_r = a, r = n, old_s = 1, s = 0;
  while (r != 0) {
    __int128 q = old_r / r;
    __int128 t = old_r - q * r;
    old_r = r;
    r = t;
    t = old_s - q * s;
    old_s = s;
    s = t;
  }
  __int128 inv = old_s % n;
  if (inv < 0) inv += n;
  return static_cast<std::int64_t>(inv);
}

}  // namespace

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t q : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    if (n % q == 0) return n == q;
  }
  std::uint64_t d = n - 1;
  unsigned s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  // This base set is deterministic for all n < 2^64.
  for (std::uint64_t a : {2ULL, 325ULL, 9375ULL, 28178ULL, 450775ULL, 9780504ULL, 1795265022ULL}) {
    std::uint64_t x = powmod64(a, d, n);
    if (x == 0 || x == 1 || x == n - 1) continue;
    bool composite = true;
    for (unsigned i = 1; i < s; ++i) {
      x = mulmod64(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

Modulus::Modulus(std::uint64_t p, unsigned r) : p_(p), r_(r), m_(1) {
  if (!is_prime(p)) throw InvalidModulus(std::to_string(p) + " is not prime");
  if (r < 1) throw InvalidModulus("exponent must be at least 1");
  constexpr std::uint64_t limit = std::uint64_t{1} << 63;
  for (unsigned i = 0; i < r; ++i) {
    if (m_ > (limit - 1) / p) {
      throw InvalidModulus(std::to_string(p) + "^" + std::to_string(r) + " exceeds 2^63");
    }
    m_ *= p;
  }
}

Coeff Modulus::pow(Coeff a, std::uint64_t e) const noexcept {
  Coeff result = reduce(std::uint64_t{1});
  a = reduce(a);
  while (e > 0) {
    if (e & 1) result = mul(result, a);
    a = mul(a, a);
    e >>= 1;
  }
  return result;
}

Coeff Modulus::p_power(unsigned e) const noexcept {
  if (e >= r_) return 0;
  Coeff v = 1;
  for (unsigned i = 0; i < e; ++i) v *= p_;
  return v;
}

unsigned Modulus::valuation(Coeff a) const noexcept {
  a %= m_;
  if (a == 0) return r_;
  unsigned v = 0;
  while (a % p_ == 0) {
    a /= p_;
    ++v;
  }
  return v;
}

Coeff Modulus::unit_inverse(Coeff a) const {
  a %= m_;
  if (a % p_ == 0) {
    throw NonUnit(std::to_string(a) + " is not invertible modulo " + std::to_string(m_));
  }
  if (m_ == 1) return 0;
  return static_cast<Coeff>(inverse_mod(static_cast<std::int64_t>(a), static_cast<std::int64_t>(m_)));
}

std::string Modulus::to_string() const {
  if (r_ == 1) return std::to_string(p_);
  return std::to_string(p_) + "^" + std::to_string(r_);
}

unsigned valuation(const Residue& x) { return x.modulus.valuation(x.value); }

Residue unit_inverse(const Residue& x) {
  return Residue(x.modulus.unit_inverse(x.value), x.modulus);
}

std::optional<Coeff> solve_scalar_multiple(const Modulus& mod,
                                           std::span<const Coeff> target,
                                           std::span<const Coeff> base) {
  if (target.size() != base.size()) {
    throw ContextMismatch("solve_scalar_multiple: length mismatch");
  }
  // Anchor on the leftmost coordinate of minimal valuation.
  std::size_t anchor = base.size();
  unsigned s = mod.r();
  for (std::size_t i = 0; i < base.size(); ++i) {
    unsigned v = mod.valuation(base[i]);
    if (v < s) {
      s = v;
      anchor = i;
    }
  }
  if (anchor == base.size()) {
    throw ZeroPolynomial("solve_scalar_multiple: base vector is zero");
  }
  const Coeff ps = mod.p_power(s);
  const Coeff t = target[anchor] % mod.m();
  if (t % ps != 0) return std::nullopt;
  // base[anchor] = p^s u with u a unit; alpha is pinned mod p^(r-s).  Every
  // other coordinate has valuation >= s, so all lifts alpha0 + j p^(r-s)
  // produce the same products and the smallest lift alpha0 decides.
  const Coeff low = mod.m() / ps;  // p^(r-s)
  const Coeff u = (base[anchor] % mod.m()) / ps;
  const Coeff alpha = mod.mul(t / ps, mod.unit_inverse(u)) % low;
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (mod.mul(alpha, base[i] % mod.m()) != target[i] % mod.m()) return std::nullopt;
  }
  return alpha;
}

void RowMatrix::add_row(std::vector<Coeff> row) {
  if (rows.empty() && width == 0) width = row.size();
  if (row.size() != width) throw ContextMismatch("RowMatrix: row width mismatch");
  rows.push_back(std::move(row));
}

HowellWorkspace::HowellWorkspace(const Modulus& mod, std::size_t width)
    : mod_(mod), width_(width) {}

void HowellWorkspace::widen(std::size_t width) {
  if (width <= width_) return;
  width_ = width;
  for (auto& row : rows_) row.data.resize(width_, 0);
}

void HowellWorkspace::axpy(std::vector<Coeff>& y, Coeff a, const std::vector<Coeff>& x,
                           std::size_t from) const {
  if (a == 0) return;
  if (y.size() < x.size()) y.resize(x.size(), 0);
  for (std::size_t i = from; i < x.size(); ++i) {
    if (x[i] != 0) y[i] = mod_.add(y[i], mod_.mul(a, x[i]));
  }
}

void HowellWorkspace::scale(std::vector<Coeff>& y, Coeff a) const {
  for (auto& v : y) v = mod_.mul(a, v);
}

void HowellWorkspace::add_generator(std::span<const Coeff> v) {
  if (v.size() > width_) widen(v.size());
  std::vector<Coeff> data(width_, 0);
  for (std::size_t i = 0; i < v.size(); ++i) data[i] = v[i] % mod_.m();
  std::vector<Coeff> combo(generators_ + 1, 0);
  combo[generators_] = 1;
  ++generators_;
  insert(std::move(data), std::move(combo));
}

void HowellWorkspace::insert(std::vector<Coeff> data, std::vector<Coeff> combo) {
  struct Pending {
    std::vector<Coeff> data, combo;
  };
  std::vector<Pending> stack;
  stack.push_back({std::move(data), std::move(combo)});
  while (!stack.empty()) {
    Pending w = std::move(stack.back());
    stack.pop_back();
    std::size_t c = 0;
    while (true) {
      while (c < width_ && w.data[c] == 0) ++c;
      if (c == width_) break;  // reduced to zero: already in the span
      const unsigned v = mod_.valuation(w.data[c]);
      auto it = by_pivot_.find(c);
      if (it != by_pivot_.end() && v >= rows_[it->second].shift) {
        const Row& row = rows_[it->second];
        const Coeff t = w.data[c] / mod_.p_power(row.shift);
        const Coeff mt = mod_.neg(t);
        axpy(w.data, mt, row.data, c);
        axpy(w.combo, mt, row.combo);
        continue;
      }
      // w becomes the pivot row at column c; normalize its pivot to p^v.
      const Coeff u = w.data[c] / mod_.p_power(v);
      const Coeff uinv = mod_.unit_inverse(u);
      scale(w.data, uinv);
      scale(w.combo, uinv);
      Row fresh{c, v, w.data, w.combo};
      if (v > 0) {
        const Coeff ann = mod_.p_power(mod_.r() - v);
        Pending a{fresh.data, fresh.combo};
        scale(a.data, ann);
        scale(a.combo, ann);
        stack.push_back(std::move(a));
      }
      if (it == by_pivot_.end()) {
        by_pivot_.emplace(c, rows_.size());
        rows_.push_back(std::move(fresh));
      } else {
        // Displace the old row (larger pivot valuation) and re-insert what is
        // left of it after clearing column c.
        Row old = std::move(rows_[it->second]);
        const Coeff t = mod_.neg(mod_.p_power(old.shift - v));
        axpy(old.data, t, fresh.data, c);
        axpy(old.combo, t, fresh.combo);
        rows_[it->second] = std::move(fresh);
        stack.push_back({std::move(old.data), std::move(old.combo)});
      }
      break;
    }
  }
}

HowellWorkspace::Reduction HowellWorkspace::reduce(std::span<const Coeff> target) const {
  if (target.size() > width_) throw ContextMismatch("HowellWorkspace::reduce: target wider than workspace");
  Reduction out;
  out.remainder.assign(width_, 0);
  for (std::size_t i = 0; i < target.size(); ++i) out.remainder[i] = target[i] % mod_.m();
  out.coeffs.assign(generators_, 0);
  auto& w = out.remainder;
  for (const auto& [col, idx] : by_pivot_) {
    const Coeff t = w[col];
    if (t == 0) continue;
    const Row& row = rows_[idx];
    const Coeff mult = t / mod_.p_power(row.shift);
    if (mult == 0) continue;
    axpy(w, mod_.neg(mult), row.data, col);
    for (std::size_t j = 0; j < row.combo.size(); ++j) {
      if (row.combo[j] != 0) out.coeffs[j] = mod_.add(out.coeffs[j], mod_.mul(mult, row.combo[j]));
    }
  }
  return out;
}

std::optional<std::vector<Coeff>> HowellWorkspace::express(std::span<const Coeff> target) const {
  const std::size_t n = std::min(target.size(), width_);
  for (std::size_t i = n; i < target.size(); ++i) {
    if (target[i] % mod_.m() != 0) return std::nullopt;
  }
  Reduction red = reduce(target.first(n));
  if (std::any_of(red.remainder.begin(), red.remainder.end(), [](Coeff x) { return x != 0; })) {
    return std::nullopt;
  }
  return std::move(red.coeffs);
}

void HowellWorkspace::canonicalize() {
  // Walk pivots left to right; clear the entries above each pivot.
  std::vector<std::size_t> order;
  for (const auto& [col, idx] : by_pivot_) order.push_back(idx);
  for (std::size_t j = 0; j < order.size(); ++j) {
    const Row& pivot = rows_[order[j]];
    const Coeff ps = mod_.p_power(pivot.shift);
    for (std::size_t i = 0; i < j; ++i) {
      Row& row = rows_[order[i]];
      const Coeff x = row.data[pivot.pivot];
      const Coeff t = x / ps;
      if (t == 0) continue;
      axpy(row.data, mod_.neg(t), pivot.data, pivot.pivot);
      axpy(row.combo, mod_.neg(t), pivot.combo);
    }
  }
}

RowMatrix HowellWorkspace::basis() const {
  RowMatrix out;
  out.width = width_;
  for (const auto& [col, idx] : by_pivot_) out.rows.push_back(rows_[idx].data);
  return out;
}

RowMatrix howell_form(const Modulus& mod, const RowMatrix& mat) {
  HowellWorkspace ws(mod, mat.width);
  for (const auto& row : mat.rows) ws.add_generator(row);
  ws.canonicalize();
  return ws.basis();
}

std::optional<std::vector<Coeff>> solve_span_membership(const Modulus& mod,
                                                        const RowMatrix& basis,
                                                        std::span<const Coeff> target) {
  if (!basis.rows.empty() && target.size() != basis.width) {
    throw ContextMismatch("solve_span_membership: width mismatch");
  }
  HowellWorkspace ws(mod, target.size());
  for (const auto& row : basis.rows) ws.add_generator(row);
  ws.canonicalize();
  auto x = ws.express(target);
  if (x) {
    // Re-substitute; a mismatch means the workspace is corrupt.
    std::vector<Coeff> check(target.size(), 0);
    for (std::size_t j = 0; j < basis.rows.size(); ++j) {
      for (std::size_t i = 0; i < check.size(); ++i) {
        check[i] = mod.add(check[i], mod.mul((*x)[j], basis.rows[j][i]));
      }
    }
    for (std::size_t i = 0; i < check.size(); ++i) {
      if (check[i] != target[i] % mod.m()) {
        throw InvariantViolation("span membership coefficients do not re-substitute");
      }
    }
  }
  return x;
}

}  // namespace ctscheme
