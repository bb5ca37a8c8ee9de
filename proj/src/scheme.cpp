#include "ctscheme/scheme.hpp"

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <map>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

namespace ctscheme {

namespace {

struct MonomialHash {
  std::size_t operator()(const Monomial& m) const noexcept {
    std::size_t h = 0x9e3779b97f4a7c15ULL;
    for (auto e : m) h = (h ^ static_cast<std::uint32_t>(e)) * 0x100000001b3ULL;
    return h;
  }
};

struct PairHash {
  std::size_t operator()(const std::pair<std::uint32_t, Coeff>& x) const noexcept {
    return std::hash<Coeff>{}(x.second * 0x9e3779b97f4a7c15ULL ^ x.first);
  }
};

bool is_constant_poly(const LaurentPoly& f) {
  if (f.size() != 1) return false;
  auto e = f.exponents(0);
  return std::ranges::all_of(e, [](std::int32_t x) { return x == 0; });
}

// First term of minimal valuation.
std::size_t anchor_term(const LaurentPoly& q) {
  const Modulus& mod = q.modulus();
  std::size_t best = 0;
  unsigned shift = mod.r() + 1;
  for (std::size_t t = 0; t < q.size(); ++t) {
    const unsigned v = mod.valuation(q.coeff(t));
    if (v < shift) {
      shift = v;
      best = t;
    }
  }
  return best;
}

// Hash of q divided by the unit part of its anchor coefficient; invariant
// under multiplication by units.
std::size_t shape_hash(const LaurentPoly& q) {
  const Modulus& mod = q.modulus();
  const Coeff c = q.coeff(anchor_term(q));
  const Coeff u = c / mod.p_power(mod.valuation(c));
  return scale(q, mod.unit_inverse(u % mod.m())).hash();
}

// v . initial for one linear form.
Coeff apply_form(const Modulus& mod, const LinearForm& form, const std::vector<Coeff>& values) {
  Coeff acc = 0;
  for (const auto& t : form) acc = mod.add(acc, mod.mul(t.coeff, values[t.state]));
  return acc;
}

}  // namespace

std::string to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::linear: return "linear";
    case SchemeKind::scaling: return "scaling";
    case SchemeKind::automatic: return "automatic";
  }
  return "?";
}

SchemeKind parse_kind(const std::string& text) {
  if (text == "linear") return SchemeKind::linear;
  if (text == "scaling") return SchemeKind::scaling;
  if (text == "automatic") return SchemeKind::automatic;
  throw FormatError("kind: unknown scheme kind '" + text + "'");
}

bool CongruenceScheme::has_zero_entries() const {
  for (const auto& row : transitions) {
    for (const auto& form : row.digits) {
      if (form.empty()) return true;
    }
  }
  return false;
}

std::int64_t degree_bound(std::int64_t a, std::int64_t b, std::uint64_t p, unsigned r) {
  __int128 scale = 1;
  for (unsigned i = 1; i < r; ++i) scale *= p;
  __int128 v = scale * a - 1 + std::max<std::int64_t>(0, b - a + 1);
  constexpr auto cap = static_cast<__int128>(INT64_MAX);
  return static_cast<std::int64_t>(v > cap ? cap : v);
}

// ---------------------------------------------------------------------------
// Builder

struct SchemeBuilder::PEntry {
  explicit PEntry(LaurentPoly f) : poly(std::move(f)) {}

  LaurentPoly poly;
  bool ready = false;
  std::size_t next = 0;
  unsigned collapses = 0;
  std::vector<LaurentPoly> powers;       // P^k, used when collapses == 0
  std::vector<CartierProduct> products;  // Lambda_p[P^k * .], when collapses > 0
};

struct SchemeBuilder::ClassIndex {
  std::vector<std::uint32_t> members;  // creation order
  // automatic
  std::unordered_multimap<std::size_t, std::uint32_t> by_hash;
  // scaling: minimal-valuation coefficient of each member
  struct Anchor {
    std::size_t term;
    unsigned shift;
    Coeff unit_inv;
  };
  std::vector<Anchor> anchors;
  // shape(p^e * q) -> member position, for every e with p^e * q != 0
  std::unordered_multimap<std::size_t, std::uint32_t> by_shape;
  // linear
  std::unique_ptr<HowellWorkspace> ws;
  std::unordered_map<Monomial, std::size_t, MonomialHash> columns;
  std::vector<Monomial> column_monomials;
};

SchemeBuilder::SchemeBuilder(const LaurentPoly& P, const LaurentPoly& Q, SchemeKind kind,
                             SchemeOptions opts)
    : mod_(P.modulus()), kind_(kind), opts_(opts), sym_(SymmetryGroup::trivial(P.nvars())) {
  if (!(P.modulus() == Q.modulus()) || P.nvars() != Q.nvars()) {
    throw ContextMismatch("compute_scheme: P and Q live in different rings");
  }
  if (P.is_zero()) throw ZeroPolynomial("P must be nonzero");
  if (Q.is_zero()) throw ZeroPolynomial("Q must be nonzero");
  if (opts_.use_symmetry && P.nvars() <= kMaxSymmetryVars) sym_ = detect_symmetries(P);

  LaurentPoly q0 = canonical_fold(Q, sym_);
  if (q0.is_zero()) throw ZeroPolynomial("Q folds to zero under the symmetries of P");

  const std::size_t nv = P.nvars();
  auto push_bound = [&](DegreeKind dk, std::size_t var) {
    const auto a = symmetric_degree_stat(P, sym_, dk, var);
    const auto b = symmetric_degree_stat(q0, sym_, dk, var);
    bounds_.push_back({dk, var, degree_bound(a, b, mod_.p(), mod_.r())});
  };
  for (std::size_t v = 0; v < nv; ++v) {
    push_bound(DegreeKind::upper, v);
    push_bound(DegreeKind::lower, v);
  }
  push_bound(DegreeKind::total_upper, 0);
  push_bound(DegreeKind::total_lower, 0);

  register_p(P);
  add_state(0, std::move(q0));
}

SchemeBuilder::~SchemeBuilder() = default;

const LaurentPoly& SchemeBuilder::ptable_entry(std::size_t i) const { return entries_.at(i)->poly; }

std::size_t SchemeBuilder::register_p(const LaurentPoly& poly) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i]->poly == poly) return i;
  }
  entries_.push_back(std::make_unique<PEntry>(poly));
  classes_.push_back(std::make_unique<ClassIndex>());
  return entries_.size() - 1;
}

SchemeBuilder::PEntry& SchemeBuilder::ready_entry(std::size_t index) {
  PEntry* e = entries_.at(index).get();
  if (e->ready) return *e;
  const std::uint64_t p = mod_.p();
  std::vector<LaurentPoly> powers;
  powers.reserve(p);
  powers.push_back(LaurentPoly::constant(mod_, e->poly.nvars(), 1));
  for (std::uint64_t k = 1; k < p; ++k) powers.push_back(multiply(powers.back(), e->poly));
  LaurentPoly t = multiply(powers.back(), e->poly);
  unsigned c = 0;
  while (!is_constant_poly(t)) {
    auto g = collapse_pth_roots(t, p);
    if (!g) break;
    t = std::move(*g);
    ++c;
  }
  e->collapses = c;
  e->next = register_p(t);
  if (c == 0) {
    e->powers = std::move(powers);
  } else {
    e->products.reserve(p);
    for (const auto& pk : powers) e->products.emplace_back(pk, p);
  }
  e->ready = true;
  return *e;
}

SchemeBuilder::Step SchemeBuilder::advance_state(std::size_t state, unsigned digit) {
  if (digit >= mod_.p()) throw ContextMismatch("advance_state: digit out of range");
  const SchemeState& st = states_.at(state);
  PEntry& e = ready_entry(st.p_index);
  const SchemeState& s = states_.at(state);  // ready_entry never adds states
  LaurentPoly u = e.collapses == 0 ? multiply(e.powers[digit], s.q)
                                   : e.products[digit].apply(s.q);
  for (unsigned c = 1; c < e.collapses; ++c) u = cartier(u, mod_.p());
  return {e.next, canonical_fold(u, sym_)};
}

void SchemeBuilder::check_degree_bounds(const LaurentPoly& q) const {
  for (const auto& b : bounds_) {
    const auto d = symmetric_degree_stat(q, sym_, b.kind, b.var);
    if (d > b.limit) {
      throw InvariantViolation("state degree " + std::to_string(d) + " exceeds bound " +
                               std::to_string(b.limit));
    }
  }
}

std::uint32_t SchemeBuilder::add_state(std::size_t p_index, LaurentPoly q) {
  if (opts_.max_states && states_.size() >= *opts_.max_states) {
    throw StateCapExceeded("more than " + std::to_string(*opts_.max_states) + " states");
  }
  check_degree_bounds(q);
  const auto id = static_cast<std::uint32_t>(states_.size());
  ClassIndex& cls = *classes_.at(p_index);
  switch (kind_) {
    case SchemeKind::automatic:
      cls.by_hash.emplace(q.hash(), id);
      break;
    case SchemeKind::scaling: {
      const std::size_t best = anchor_term(q);
      const unsigned shift = mod_.valuation(q.coeff(best));
      const Coeff unit = q.coeff(best) / mod_.p_power(shift);
      cls.anchors.push_back({best, shift, mod_.unit_inverse(unit % mod_.m())});
      const auto pos = static_cast<std::uint32_t>(cls.members.size());
      for (unsigned e = 0; e + shift < mod_.r(); ++e) {
        const LaurentPoly m = e == 0 ? q : scale(q, mod_.p_power(e));
        if (m.is_zero()) break;
        cls.by_shape.emplace(shape_hash(m), pos);
      }
      break;
    }
    case SchemeKind::linear: {
      if (!cls.ws) cls.ws = std::make_unique<HowellWorkspace>(mod_);
      for (std::size_t t = 0; t < q.size(); ++t) {
        auto e = q.exponents(t);
        if (cls.columns.try_emplace(Monomial(e.begin(), e.end()), cls.column_monomials.size()).second) {
          cls.column_monomials.emplace_back(e.begin(), e.end());
        }
      }
      cls.ws->widen(cls.columns.size());
      std::vector<Coeff> v(cls.columns.size(), 0);
      for (std::size_t t = 0; t < q.size(); ++t) {
        auto e = q.exponents(t);
        v[cls.columns.at(Monomial(e.begin(), e.end()))] = q.coeff(t);
      }
      cls.ws->add_generator(v);
      break;
    }
  }
  cls.members.push_back(id);
  states_.push_back({p_index, std::move(q)});
  return id;
}

std::optional<LinearForm> SchemeBuilder::match_exact(const ClassIndex& cls,
                                                     const LaurentPoly& q) const {
  auto [lo, hi] = cls.by_hash.equal_range(q.hash());
  std::optional<std::uint32_t> best;
  for (auto it = lo; it != hi; ++it) {
    if (states_[it->second].q == q && (!best || it->second < *best)) best = it->second;
  }
  if (best) return LinearForm{{*best, 1}};
  return std::nullopt;
}

std::optional<LinearForm> SchemeBuilder::match_scalar(const ClassIndex& cls,
                                                      const LaurentPoly& q) const {
  // q == alpha * base forces shape(q) == shape(p^nu(alpha) * base), so only
  // the bucket of shape(q) needs checking; the earliest member wins.
  auto [lo, hi] = cls.by_shape.equal_range(shape_hash(q));
  std::vector<std::uint32_t> candidates;
  for (auto it = lo; it != hi; ++it) candidates.push_back(it->second);
  std::ranges::sort(candidates);
  for (const std::uint32_t idx : candidates) {
    const LaurentPoly& base = states_[cls.members[idx]].q;
    if (q.size() > base.size()) continue;
    // Every alpha with q == alpha * base agrees with the anchor solution
    // modulo p^(r - shift), and all such lifts give the same product.
    const auto& a = cls.anchors[idx];
    const Coeff t = q.coefficient_of(base.exponents(a.term));
    const Coeff ps = mod_.p_power(a.shift);
    if (t % ps != 0) continue;
    const Coeff alpha = mod_.mul(t / ps, a.unit_inv) % (mod_.m() / ps);
    if (alpha == 0) continue;
    bool ok = true;
    std::size_t i = 0;
    for (std::size_t j = 0; j < base.size() && ok; ++j) {
      const Coeff prod = mod_.mul(alpha, base.coeff(j));
      auto be = base.exponents(j);
      if (i < q.size()) {
        auto qe = q.exponents(i);
        if (std::ranges::lexicographical_compare(qe, be)) {
          ok = false;
        } else if (std::ranges::equal(qe, be)) {
          ok = prod == q.coeff(i);
          ++i;
          continue;
        }
      }
      ok = ok && prod == 0;
    }
    if (ok && i == q.size()) return LinearForm{{cls.members[idx], alpha}};
  }
  return std::nullopt;
}

LinearForm SchemeBuilder::resolve_linear(std::size_t p_index, const LaurentPoly& q) {
  ClassIndex& cls = *classes_.at(p_index);
  if (!cls.ws) cls.ws = std::make_unique<HowellWorkspace>(mod_);
  for (std::size_t t = 0; t < q.size(); ++t) {
    auto e = q.exponents(t);
    if (cls.columns.try_emplace(Monomial(e.begin(), e.end()), cls.column_monomials.size()).second) {
      cls.column_monomials.emplace_back(e.begin(), e.end());
    }
  }
  cls.ws->widen(cls.columns.size());
  std::vector<Coeff> v(cls.columns.size(), 0);
  for (std::size_t t = 0; t < q.size(); ++t) {
    auto e = q.exponents(t);
    v[cls.columns.at(Monomial(e.begin(), e.end()))] = q.coeff(t);
  }
  auto red = cls.ws->reduce(v);
  LinearForm form;
  LaurentPoly check(mod_, q.nvars());
  for (std::size_t g = 0; g < red.coeffs.size(); ++g) {
    if (red.coeffs[g] == 0) continue;
    form.push_back({cls.members[g], red.coeffs[g]});
    check = add(check, scale(states_[cls.members[g]].q, red.coeffs[g]));
  }
  if (std::ranges::any_of(red.remainder, [](Coeff c) { return c != 0; })) {
    // The remainder spans the same module together with the existing states.
    std::vector<std::pair<Monomial, Coeff>> terms;
    for (std::size_t c = 0; c < red.remainder.size(); ++c) {
      if (red.remainder[c] != 0) terms.emplace_back(cls.column_monomials[c], red.remainder[c]);
    }
    LaurentPoly w = LaurentPoly::from_terms(mod_, q.nvars(), std::move(terms));
    check = add(check, w);
    form.push_back({add_state(p_index, std::move(w)), 1});
  }
  if (!(check == q)) throw InvariantViolation("span reduction does not reproduce the target");
  return form;
}

LinearForm SchemeBuilder::resolve(std::size_t p_index, LaurentPoly q) {
  if (kind_ == SchemeKind::linear) return resolve_linear(p_index, q);
  const ClassIndex& cls = *classes_.at(p_index);
  if (kind_ == SchemeKind::automatic) {
    if (auto form = match_exact(cls, q)) return *form;
    return {{add_state(p_index, std::move(q)), 1}};
  }
  if (auto form = match_scalar(cls, q)) return *form;
  // New scaling states are normalized so that their anchor coefficient is a
  // power of p; the unit goes into the transition.
  const std::size_t t = anchor_term(q);
  const Coeff u = q.coeff(t) / mod_.p_power(mod_.valuation(q.coeff(t)));
  LaurentPoly w = scale(q, mod_.unit_inverse(u % mod_.m()));
  return {{add_state(p_index, std::move(w)), u % mod_.m()}};
}

CongruenceScheme SchemeBuilder::run(Provenance provenance) {
  std::vector<TransitionRow> rows;
  for (std::size_t i = 0; i < states_.size(); ++i) {
    TransitionRow row;
    row.digits.resize(mod_.p());
    for (unsigned k = 0; k < mod_.p(); ++k) {
      Step step = advance_state(i, k);
      if (step.q.is_zero()) continue;
      row.digits[k] = resolve(step.p_index, std::move(step.q));
    }
    rows.push_back(std::move(row));
  }

  CongruenceScheme s;
  s.kind = kind_;
  s.modulus = mod_;
  for (const auto& e : entries_) s.ptable.push_back(e->poly);
  if (s.ptable.size() > mod_.r()) {
    throw InvariantViolation("P-table has " + std::to_string(s.ptable.size()) +
                             " entries, more than r");
  }
  for (const auto& st : states_) s.initial.push_back(constant_term(st.q));
  s.states = states_;
  s.transitions = std::move(rows);
  provenance.symmetry_folded = !sym_.is_trivial();
  s.provenance = std::move(provenance);
  for (std::size_t i = 0; i < s.state_count(); ++i) {
    if (apply_form(mod_, s.transitions[i].digits[0], s.initial) != s.initial[i]) {
      throw InvariantViolation("initial values are not fixed by the digit-0 transition");
    }
  }
  return s;
}

CongruenceScheme compute_scheme(const LaurentPoly& P, const LaurentPoly& Q, SchemeKind kind,
                                SchemeOptions opts, Provenance provenance) {
  SchemeBuilder builder(P, Q, kind, opts);
  return builder.run(std::move(provenance));
}

// ---------------------------------------------------------------------------
// Conversions

std::size_t default_node_cap() {
  if (const char* env = std::getenv("CTSCHEME_NODE_CAP")) {
    char* end = nullptr;
    const auto v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return 1'000'000;
}

CongruenceScheme scaling_to_automatic(const CongruenceScheme& s, std::size_t max_states) {
  if (s.kind == SchemeKind::automatic) return s;
  if (s.kind != SchemeKind::scaling) throw KindMismatch("scaling_to_automatic needs a scaling scheme");
  const Modulus& mod = s.modulus;

  using Node = std::pair<std::uint32_t, Coeff>;
  std::unordered_map<Node, std::uint32_t, PairHash> ids;
  std::vector<Node> nodes;
  auto intern = [&](Node n) {
    auto [it, fresh] = ids.try_emplace(n, static_cast<std::uint32_t>(nodes.size()));
    if (fresh) {
      if (nodes.size() >= max_states) {
        throw StateCapExceeded("automatic expansion exceeds " + std::to_string(max_states) + " states");
      }
      nodes.push_back(n);
    }
    return it->second;
  };

  CongruenceScheme out;
  out.kind = SchemeKind::automatic;
  out.modulus = mod;
  out.provenance = s.provenance;
  intern({0, 1 % mod.m()});
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto [j, alpha] = nodes[i];
    TransitionRow row;
    row.digits.resize(s.p());
    for (std::size_t k = 0; k < s.p(); ++k) {
      const auto& form = s.transitions[j].digits[k];
      if (form.empty()) continue;
      const Coeff gamma = mod.mul(alpha, form.front().coeff);
      if (gamma == 0) continue;
      row.digits[k] = {{intern({form.front().state, gamma}), 1}};
    }
    out.transitions.push_back(std::move(row));
    out.initial.push_back(mod.mul(alpha, s.initial[j]));
  }
  return out;
}

CongruenceScheme minimize(const CongruenceScheme& s) {
  if (s.kind != SchemeKind::automatic) throw KindMismatch("minimize needs an automatic scheme");
  const std::size_t n = s.state_count();
  const std::size_t p = s.p();
  const std::size_t sink = n;
  const std::size_t total = n + 1;

  std::vector<std::uint32_t> delta(total * p);
  for (std::size_t i = 0; i < total; ++i) {
    for (std::size_t k = 0; k < p; ++k) {
      std::size_t t = sink;
      if (i < n && !s.transitions[i].digits[k].empty()) t = s.transitions[i].digits[k].front().state;
      delta[i * p + k] = static_cast<std::uint32_t>(t);
    }
  }

  std::vector<std::uint32_t> block(total);
  std::size_t count = 0;
  {
    std::map<Coeff, std::uint32_t> by_output;
    for (std::size_t i = 0; i < total; ++i) {
      const Coeff out = i < n ? s.initial[i] : 0;
      auto [it, fresh] = by_output.try_emplace(out, static_cast<std::uint32_t>(by_output.size()));
      block[i] = it->second;
    }
    count = by_output.size();
  }

  struct SigHash {
    std::size_t operator()(const std::vector<std::uint32_t>& v) const noexcept {
      std::size_t h = 0xcbf29ce484222325ULL;
      for (auto x : v) h = (h ^ x) * 0x100000001b3ULL;
      return h;
    }
  };
  std::vector<std::uint32_t> sig(p + 1);
  while (true) {
    std::unordered_map<std::vector<std::uint32_t>, std::uint32_t, SigHash> ids;
    ids.reserve(count * 2);
    std::vector<std::uint32_t> next(total);
    for (std::size_t i = 0; i < total; ++i) {
      sig[0] = block[i];
      for (std::size_t k = 0; k < p; ++k) sig[k + 1] = block[delta[i * p + k]];
      auto [it, fresh] = ids.try_emplace(sig, static_cast<std::uint32_t>(ids.size()));
      next[i] = it->second;
    }
    block = std::move(next);
    if (ids.size() == count) break;
    count = ids.size();
  }

  // Breadth-first renumbering from the block of state 0.
  std::vector<std::size_t> rep(count, total);
  for (std::size_t i = 0; i < total; ++i) {
    if (rep[block[i]] == total) rep[block[i]] = i;
  }
  const std::uint32_t sink_block = block[sink];
  std::vector<std::int64_t> new_id(count, -1);
  std::vector<std::uint32_t> order;
  CongruenceScheme out;
  out.kind = SchemeKind::automatic;
  out.modulus = s.modulus;
  out.provenance = s.provenance;
  if (block[0] == sink_block) {
    // A == 0 identically.
    TransitionRow row;
    row.digits.resize(p);
    out.transitions.push_back(std::move(row));
    out.initial.push_back(0);
    return out;
  }
  new_id[block[0]] = 0;
  order.push_back(block[0]);
  for (std::size_t head = 0; head < order.size(); ++head) {
    const std::size_t r = rep[order[head]];
    TransitionRow row;
    row.digits.resize(p);
    for (std::size_t k = 0; k < p; ++k) {
      const std::uint32_t b = block[delta[r * p + k]];
      if (b == sink_block) continue;
      if (new_id[b] < 0) {
        new_id[b] = static_cast<std::int64_t>(order.size());
        order.push_back(b);
      }
      row.digits[k] = {{static_cast<std::uint32_t>(new_id[b]), 1}};
    }
    out.transitions.push_back(std::move(row));
    out.initial.push_back(s.initial[r]);
  }
  return out;
}

CongruenceScheme reduce_scaling(const CongruenceScheme& s, std::size_t max_states) {
  if (s.kind == SchemeKind::linear) throw KindMismatch("reduce_scaling needs a scaling or automatic scheme");
  const CongruenceScheme m = minimize(scaling_to_automatic(s, max_states));
  const Modulus& mod = m.modulus;
  const std::size_t n = m.state_count();
  const std::size_t p = m.p();
  const std::size_t sink = n;
  auto succ = [&](std::size_t i, std::size_t k) -> std::size_t {
    if (i == sink || m.transitions[i].digits[k].empty()) return sink;
    return m.transitions[i].digits[k].front().state;
  };
  auto out = [&](std::size_t i) -> Coeff { return i == sink ? 0 : m.initial[i]; };

  // Values at n < p^2 as a cheap necessary test.
  std::vector<std::vector<Coeff>> prefix(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    prefix[i].push_back(out(i));
    for (std::size_t k = 0; k < p * p; ++k) prefix[i].push_back(out(succ(succ(i, k % p), k / p)));
  }

  // seq(t) == alpha * seq(r), checked on every pair of the product automaton.
  auto multiple_of = [&](std::size_t t, std::size_t r) -> std::optional<Coeff> {
    if (!solve_scalar_multiple(mod, prefix[t], prefix[r])) return std::nullopt;
    std::vector<Coeff> a, b;
    std::unordered_map<std::uint64_t, bool> seen;
    std::vector<std::pair<std::size_t, std::size_t>> queue{{t, r}};
    seen[static_cast<std::uint64_t>(t) * (n + 1) + r] = true;
    for (std::size_t h = 0; h < queue.size(); ++h) {
      const auto [x, y] = queue[h];
      if (y == sink && x != sink) return std::nullopt;  // only the sink is zero after minimization
      a.push_back(out(x));
      b.push_back(out(y));
      for (std::size_t k = 0; k < p; ++k) {
        const std::size_t nx = succ(x, k), ny = succ(y, k);
        if (seen.try_emplace(static_cast<std::uint64_t>(nx) * (n + 1) + ny, true).second) {
          queue.emplace_back(nx, ny);
        }
      }
    }
    return solve_scalar_multiple(mod, a, b);
  };

  CongruenceScheme result;
  result.kind = SchemeKind::scaling;
  result.modulus = mod;
  result.provenance = s.provenance;
  std::vector<std::size_t> reps;
  if (out(0) == 0 && std::ranges::all_of(m.transitions[0].digits, [](const LinearForm& f) { return f.empty(); })) {
    result.transitions.push_back({std::vector<LinearForm>(p)});
    result.initial.push_back(0);
    return result;
  }
  reps.push_back(0);
  for (std::size_t h = 0; h < reps.size(); ++h) {
    TransitionRow row;
    row.digits.resize(p);
    for (std::size_t k = 0; k < p; ++k) {
      const std::size_t t = succ(reps[h], k);
      if (t == sink) continue;
      std::optional<std::pair<std::size_t, Coeff>> hit;
      for (std::size_t j = 0; j < reps.size() && !hit; ++j) {
        if (auto alpha = multiple_of(t, reps[j])) hit = {{j, *alpha}};
      }
      if (!hit) {
        hit = {{reps.size(), 1}};
        reps.push_back(t);
      }
      row.digits[k] = {{static_cast<std::uint32_t>(hit->first), hit->second}};
    }
    result.transitions.push_back(std::move(row));
    result.initial.push_back(out(reps[h]));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Validation and I/O

void validate(const CongruenceScheme& s) {
  const std::size_t n = s.initial.size();
  const Modulus& mod = s.modulus;
  if (n == 0) throw FormatError("states: a scheme needs at least one state");
  if (s.transitions.size() != n) throw FormatError("transitions: expected one row per state");
  for (std::size_t i = 0; i < n; ++i) {
    if (s.initial[i] >= mod.m()) throw FormatError("initial: value out of range");
    const auto& row = s.transitions[i];
    if (row.digits.size() != s.p()) throw FormatError("transitions: expected p entries per row");
    for (const auto& form : row.digits) {
      if (s.kind != SchemeKind::linear && form.size() > 1) {
        throw FormatError("transitions: " + to_string(s.kind) + " rows have at most one term");
      }
      for (std::size_t t = 0; t < form.size(); ++t) {
        if (form[t].state >= n) throw FormatError("transitions: state index out of range");
        if (t > 0 && form[t - 1].state >= form[t].state) {
          throw FormatError("transitions: state indices must be increasing");
        }
        if (form[t].coeff == 0 || form[t].coeff >= mod.m()) {
          throw FormatError("transitions: coefficient out of range");
        }
        if (s.kind == SchemeKind::automatic && form[t].coeff != 1) {
          throw FormatError("transitions: automatic coefficients must be 1");
        }
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (apply_form(mod, s.transitions[i].digits[0], s.initial) != s.initial[i]) {
      throw FormatError("initial: not a fixed point of the digit-0 transition");
    }
  }
}

std::string serialize(const CongruenceScheme& s) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["format"] = "ctscheme-v1";
  j["kind"] = to_string(s.kind);
  j["p"] = s.modulus.p();
  j["r"] = s.modulus.r();
  j["states"] = s.state_count();
  j["initial"] = s.initial;
  ordered_json rows = ordered_json::array();
  for (const auto& row : s.transitions) {
    ordered_json jr = ordered_json::array();
    for (const auto& form : row.digits) {
      ordered_json m = ordered_json::object();
      for (const auto& t : form) m[std::to_string(t.state)] = t.coeff;
      jr.push_back(std::move(m));
    }
    rows.push_back(std::move(jr));
  }
  j["transitions"] = std::move(rows);
  ordered_json meta;
  meta["P"] = s.provenance.P;
  meta["Q"] = s.provenance.Q;
  meta["vars"] = s.provenance.vars;
  meta["symmetry_folded"] = s.provenance.symmetry_folded;
  j["meta"] = std::move(meta);
  return j.dump() + "\n";
}

namespace {

std::uint64_t get_uint(const nlohmann::json& j, const std::string& field) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return j.get<std::uint64_t>();
  throw FormatError(field + ": expected a nonnegative integer");
}

const nlohmann::json& require(const nlohmann::json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end()) throw FormatError(std::string(field) + ": missing");
  return *it;
}

std::uint32_t parse_index(const std::string& key) {
  if (key.empty() || key.size() > 9 || !std::ranges::all_of(key, [](char c) { return c >= '0' && c <= '9'; })) {
    throw FormatError("transitions: key '" + key + "' is not a state index");
  }
  return static_cast<std::uint32_t>(std::stoul(key));
}

}  // namespace

CongruenceScheme deserialize(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("json: ") + e.what());
  }
  if (!j.is_object()) throw FormatError("json: top level must be an object");
  const auto& format = require(j, "format");
  if (!format.is_string() || format.get<std::string>() != "ctscheme-v1") {
    throw FormatError("format: expected \"ctscheme-v1\"");
  }
  const auto& kind = require(j, "kind");
  if (!kind.is_string()) throw FormatError("kind: expected a string");

  CongruenceScheme s;
  s.kind = parse_kind(kind.get<std::string>());
  const auto p = get_uint(require(j, "p"), "p");
  const auto r = get_uint(require(j, "r"), "r");
  try {
    if (r == 0 || r > 64) throw InvalidModulus("r out of range");
    s.modulus = Modulus(p, static_cast<unsigned>(r));
  } catch (const InvalidModulus& e) {
    throw FormatError(std::string("p/r: ") + e.what());
  }
  const auto n = get_uint(require(j, "states"), "states");

  const auto& initial = require(j, "initial");
  if (!initial.is_array() || initial.size() != n) throw FormatError("initial: expected one value per state");
  for (const auto& v : initial) s.initial.push_back(get_uint(v, "initial"));

  const auto& transitions = require(j, "transitions");
  if (!transitions.is_array() || transitions.size() != n) {
    throw FormatError("transitions: expected one row per state");
  }
  for (const auto& jr : transitions) {
    if (!jr.is_array() || jr.size() != p) throw FormatError("transitions: expected p entries per row");
    TransitionRow row;
    for (const auto& jm : jr) {
      if (!jm.is_object()) throw FormatError("transitions: entries must be objects");
      LinearForm form;
      for (auto it = jm.begin(); it != jm.end(); ++it) {
        form.push_back({parse_index(it.key()), get_uint(it.value(), "transitions")});
      }
      std::ranges::sort(form, {}, &Transition::state);
      row.digits.push_back(std::move(form));
    }
    s.transitions.push_back(std::move(row));
  }

  if (auto it = j.find("meta"); it != j.end()) {
    const auto& meta = *it;
    if (!meta.is_object()) throw FormatError("meta: expected an object");
    try {
      if (meta.contains("P")) s.provenance.P = meta["P"].get<std::string>();
      if (meta.contains("Q")) s.provenance.Q = meta["Q"].get<std::string>();
      if (meta.contains("vars")) s.provenance.vars = meta["vars"].get<std::vector<std::string>>();
      if (meta.contains("symmetry_folded")) s.provenance.symmetry_folded = meta["symmetry_folded"].get<bool>();
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("meta: ") + e.what());
    }
  }
  validate(s);
  return s;
}

std::string export_dot(const CongruenceScheme& s) {
  if (s.kind == SchemeKind::linear) throw KindMismatch("export_dot needs an automatic or scaling scheme");
  const std::size_t n = s.state_count();
  const std::size_t p = s.p();
  const bool sink = s.has_zero_entries();
  auto name = [&](std::size_t i) { return i == n ? std::string("zero") : "s" + std::to_string(i); };

  std::ostringstream out;
  out << "digraph scheme {\n  rankdir=LR;\n  node [shape=circle];\n";
  for (std::size_t i = 0; i < n; ++i) {
    out << "  " << name(i) << " [label=\"" << s.initial[i] << "\"" << (i == 0 ? ", penwidth=3" : "")
        << "];\n";
  }
  if (sink) out << "  zero [label=\"0\"];\n";

  for (std::size_t i = 0; i <= n; ++i) {
    if (i == n && !sink) break;
    // (target, coeff) -> digits, in order of first digit
    std::vector<std::pair<std::pair<std::size_t, Coeff>, std::vector<std::size_t>>> groups;
    for (std::size_t k = 0; k < p; ++k) {
      std::pair<std::size_t, Coeff> key{n, 1};
      if (i < n && !s.transitions[i].digits[k].empty()) {
        const auto& t = s.transitions[i].digits[k].front();
        key = {t.state, t.coeff};
      }
      auto it = std::ranges::find_if(groups, [&](const auto& g) { return g.first == key; });
      if (it == groups.end()) {
        groups.push_back({key, {k}});
      } else {
        it->second.push_back(k);
      }
    }
    for (const auto& [key, digits] : groups) {
      std::string label;
      for (std::size_t d = 0; d < digits.size(); ++d) {
        if (d) label += ",";
        label += std::to_string(digits[d]);
        if (key.second != 1) label += ":" + std::to_string(key.second);
      }
      out << "  " << name(i) << " -> " << name(key.first) << " [label=\"" << label << "\"];\n";
    }
  }
  out << "}\n";
  return out.str();
}

}  // namespace ctscheme
