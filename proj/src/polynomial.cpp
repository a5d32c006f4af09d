#include "kmsf/polynomial.hpp"

#include <algorithm>

#include "kmsf/errors.hpp"

namespace kmsf {

// ---------------------------------------------------------------------------
// Monomial

Monomial Monomial::variable(VarId v, std::uint32_t exponent) {
  Monomial m;
  if (exponent > 0) m.powers_.emplace_back(v, exponent);
  return m;
}

std::uint32_t Monomial::degree(VarId v) const {
  for (const auto& [var, e] : powers_) {
    if (var == v) return e;
    if (var > v) break;
  }
  return 0;
}

std::uint32_t Monomial::total_degree() const {
  std::uint32_t d = 0;
  for (const auto& p : powers_) d += p.second;
  return d;
}

bool Monomial::divides(const Monomial& other) const {
  auto it = other.powers_.begin();
  for (const auto& [v, e] : powers_) {
    while (it != other.powers_.end() && it->first < v) ++it;
    if (it == other.powers_.end() || it->first != v || it->second < e) return false;
  }
  return true;
}

Monomial Monomial::quotient_of(const Monomial& other) const {
  Monomial q;
  auto it = powers_.begin();
  for (const auto& [v, e] : other.powers_) {
    while (it != powers_.end() && it->first < v) ++it;
    std::uint32_t mine = (it != powers_.end() && it->first == v) ? it->second : 0;
    if (e > mine) q.powers_.emplace_back(v, e - mine);
  }
  return q;
}

Monomial Monomial::with_degree(VarId v, std::uint32_t exponent) const {
  Monomial m;
  bool placed = false;
  for (const auto& p : powers_) {
    if (!placed && p.first >= v) {
      if (exponent > 0) m.powers_.emplace_back(v, exponent);
      placed = true;
      if (p.first == v) continue;
    }
    m.powers_.push_back(p);
  }
  if (!placed && exponent > 0) m.powers_.emplace_back(v, exponent);
  return m;
}

Monomial operator*(const Monomial& a, const Monomial& b) {
  Monomial m;
  m.powers_.reserve(a.powers_.size() + b.powers_.size());
  auto i = a.powers_.begin();
  auto j = b.powers_.begin();
  while (i != a.powers_.end() || j != b.powers_.end()) {
    if (j == b.powers_.end() || (i != a.powers_.end() && i->first < j->first)) {
      m.powers_.push_back(*i++);
    } else if (i == a.powers_.end() || j->first < i->first) {
      m.powers_.push_back(*j++);
    } else {
      m.powers_.emplace_back(i->first, i->second + j->second);
      ++i;
      ++j;
    }
  }
  return m;
}

int Monomial::compare(const Monomial& a, const Monomial& b) {
  auto i = a.powers_.begin();
  auto j = b.powers_.begin();
  for (; i != a.powers_.end() && j != b.powers_.end(); ++i, ++j) {
    if (i->first != j->first) return i->first < j->first ? 1 : -1;
    if (i->second != j->second) return i->second > j->second ? 1 : -1;
  }
  if (i != a.powers_.end()) return 1;
  if (j != b.powers_.end()) return -1;
  return 0;
}

// ---------------------------------------------------------------------------
// Polynomial

Polynomial::Polynomial(long c) {
  if (c != 0) terms_.emplace(Monomial(), mpz_class(c));
}

Polynomial::Polynomial(const mpz_class& c) {
  if (c != 0) terms_.emplace(Monomial(), c);
}

Polynomial Polynomial::variable(VarId v) { return term(Monomial::variable(v), 1); }

Polynomial Polynomial::term(const Monomial& m, const mpz_class& c) {
  Polynomial p;
  if (c != 0) p.terms_.emplace(m, c);
  return p;
}

bool Polynomial::is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.is_one()); }

mpz_class Polynomial::constant_value() const {
  if (terms_.empty()) return 0;
  if (!is_constant()) throw InvalidArgument("polynomial is not constant");
  return terms_.begin()->second;
}

std::optional<VarId> Polynomial::main_variable() const {
  std::optional<VarId> best;
  for (const auto& [m, c] : terms_) {
    if (!m.powers().empty()) {
      const VarId v = m.powers().front().first;
      if (!best || v < *best) best = v;
    }
  }
  return best;
}

bool Polynomial::contains(VarId v) const {
  return std::any_of(terms_.begin(), terms_.end(), [v](const auto& t) { return t.first.degree(v) > 0; });
}

std::uint32_t Polynomial::degree(VarId v) const {
  std::uint32_t d = 0;
  for (const auto& [m, c] : terms_) d = std::max(d, m.degree(v));
  return d;
}

std::vector<VarId> Polynomial::variables() const {
  std::vector<VarId> vars;
  for (const auto& [m, c] : terms_) {
    for (const auto& [v, e] : m.powers()) vars.push_back(v);
  }
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  return vars;
}

std::vector<Polynomial> Polynomial::coefficients(VarId v) const {
  std::vector<Polynomial> out(degree(v) + 1);
  for (const auto& [m, c] : terms_) {
    const std::uint32_t e = m.degree(v);
    out[e].add_term(m.with_degree(v, 0), c);
  }
  return out;
}

Polynomial Polynomial::from_coefficients(VarId v, const std::vector<Polynomial>& coeffs) {
  Polynomial p;
  for (std::size_t e = 0; e < coeffs.size(); ++e) {
    for (const auto& [m, c] : coeffs[e].terms_) {
      p.add_term(m.with_degree(v, static_cast<std::uint32_t>(e)), c);
    }
  }
  return p;
}

mpz_class Polynomial::content() const {
  mpz_class g = 0;
  for (const auto& [m, c] : terms_) {
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_mpz_t());
    if (g == 1) break;
  }
  return g;
}

Polynomial Polynomial::derivative(VarId v) const {
  Polynomial d;
  for (const auto& [m, c] : terms_) {
    const std::uint32_t e = m.degree(v);
    if (e == 0) continue;
    d.add_term(m.with_degree(v, e - 1), c * e);
  }
  return d;
}

Polynomial Polynomial::pow(unsigned exponent) const {
  Polynomial result(1);
  Polynomial base = *this;
  while (exponent > 0) {
    if (exponent & 1U) result *= base;
    exponent >>= 1U;
    if (exponent > 0) base *= base;
  }
  return result;
}

Polynomial Polynomial::substitute(VarId v, const Polynomial& p) const {
  if (!contains(v)) return *this;
  const auto coeffs = coefficients(v);
  // Horner in v.
  Polynomial result;
  for (std::size_t e = coeffs.size(); e-- > 0;) {
    result *= p;
    result += coeffs[e];
  }
  return result;
}

Rational Polynomial::evaluate(const std::function<Rational(VarId)>& value) const {
  std::map<VarId, Rational> cache;
  Rational total = 0;
  for (const auto& [m, c] : terms_) {
    Rational t(c);
    for (const auto& [v, e] : m.powers()) {
      auto it = cache.find(v);
      if (it == cache.end()) it = cache.emplace(v, value(v)).first;
      t *= it->second.pow(static_cast<int>(e));
    }
    total += t;
  }
  return total;
}

void Polynomial::add_term(const Monomial& m, const mpz_class& c) {
  if (c == 0) return;
  auto [it, inserted] = terms_.try_emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  for (const auto& [m, c] : o.terms_) add_term(m, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
  for (const auto& [m, c] : o.terms_) add_term(m, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(const Polynomial& o) {
  *this = *this * o;
  return *this;
}

Polynomial& Polynomial::operator*=(const mpz_class& c) {
  if (c == 0) {
    terms_.clear();
    return *this;
  }
  for (auto& t : terms_) t.second *= c;
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  Polynomial p;
  if (a.is_zero() || b.is_zero()) return p;
  for (const auto& [ma, ca] : a.terms_) {
    for (const auto& [mb, cb] : b.terms_) p.add_term(ma * mb, ca * cb);
  }
  return p;
}

Polynomial operator-(const Polynomial& a) {
  Polynomial p = a;
  for (auto& t : p.terms_) t.second = -t.second;
  return p;
}

// ---------------------------------------------------------------------------
// Division and gcd

Polynomial divide_exact(const Polynomial& a, const mpz_class& c) {
  if (c == 1) return a;
  Polynomial q;
  for (const auto& [m, coef] : a.terms()) {
    if (!mpz_divisible_p(coef.get_mpz_t(), c.get_mpz_t())) {
      throw InternalInconsistency("inexact integer division of polynomial");
    }
    mpz_class r;
    mpz_divexact(r.get_mpz_t(), coef.get_mpz_t(), c.get_mpz_t());
    q += Polynomial::term(m, r);
  }
  return q;
}

Polynomial divide_exact(const Polynomial& a, const Polynomial& b) {
  if (b.is_zero()) throw DivisionByZero();
  if (b.is_constant()) return divide_exact(a, b.constant_value());
  Polynomial quotient;
  Polynomial rest = a;
  const Monomial& lb = b.leading_monomial();
  const mpz_class& cb = b.leading_coefficient();
  while (!rest.is_zero()) {
    const Monomial& lr = rest.leading_monomial();
    const mpz_class& cr = rest.leading_coefficient();
    if (!lb.divides(lr) || !mpz_divisible_p(cr.get_mpz_t(), cb.get_mpz_t())) {
      throw InternalInconsistency("inexact polynomial division");
    }
    mpz_class qc;
    mpz_divexact(qc.get_mpz_t(), cr.get_mpz_t(), cb.get_mpz_t());
    const Polynomial t = Polynomial::term(lb.quotient_of(lr), qc);
    quotient += t;
    rest -= t * b;
  }
  return quotient;
}

namespace {

using Dense = std::vector<Polynomial>;

Polynomial normalize_sign(Polynomial p) {
  if (!p.is_zero() && p.leading_coefficient() < 0) return -p;
  return p;
}

void trim(Dense& d) {
  while (!d.empty() && d.back().is_zero()) d.pop_back();
}

Polynomial monomial_gcd(const Polynomial& single, const Polynomial& other) {
  const auto& [m, c] = *single.terms().begin();
  mpz_class g = other.content();
  mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_mpz_t());
  Monomial common = m;
  for (const auto& [om, oc] : other.terms()) {
    Monomial next;
    for (const auto& [v, e] : common.powers()) {
      const std::uint32_t d = std::min(e, om.degree(v));
      if (d > 0) next = next * Monomial::variable(v, d);
    }
    common = next;
    if (common.is_one()) break;
  }
  return Polynomial::term(common, g);
}

Polynomial dense_content(const Dense& d) {
  Polynomial g;
  for (const auto& c : d) {
    g = gcd(g, c);
    if (g.is_constant() && g.constant_value() == 1) break;
  }
  return g;
}

Dense dense_primitive(const Dense& d) {
  const Polynomial c = dense_content(d);
  Dense out;
  out.reserve(d.size());
  for (const auto& x : d) out.push_back(divide_exact(x, c));
  return out;
}

/// Pseudo-remainder of a by b (both dense in the same variable).
Dense pseudo_remainder(Dense a, const Dense& b) {
  const std::size_t n = b.size() - 1;
  const Polynomial& lb = b.back();
  std::size_t steps = a.size() >= b.size() ? a.size() - n : 0;
  while (!a.empty() && a.size() - 1 >= n) {
    const std::size_t d = a.size() - 1;
    const Polynomial lr = a.back();
    for (std::size_t i = 0; i <= d; ++i) a[i] *= lb;
    for (std::size_t j = 0; j <= n; ++j) a[j + d - n] -= lr * b[j];
    a.back() = Polynomial();
    trim(a);
    --steps;
  }
  if (steps > 0) {
    const Polynomial f = lb.pow(static_cast<unsigned>(steps));
    for (auto& x : a) x *= f;
  }
  return a;
}

Polynomial content_in(const Polynomial& p, VarId v) { return dense_content(p.coefficients(v)); }

}  // namespace

Polynomial gcd(const Polynomial& a, const Polynomial& b) {
  if (a.is_zero()) return normalize_sign(b);
  if (b.is_zero()) return normalize_sign(a);
  if (a.is_constant() || b.is_constant()) {
    mpz_class g = a.content();
    const mpz_class cb = b.content();
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), cb.get_mpz_t());
    return Polynomial(g);
  }
  if (a.is_monomial()) return monomial_gcd(a, b);
  if (b.is_monomial()) return monomial_gcd(b, a);
  if (a == b || a == -b) return normalize_sign(a);

  const VarId va = *a.main_variable();
  const VarId vb = *b.main_variable();
  const VarId v = std::min(va, vb);
  if (!a.contains(v)) return gcd(a, content_in(b, v));
  if (!b.contains(v)) return gcd(content_in(a, v), b);

  Dense da = a.coefficients(v);
  Dense db = b.coefficients(v);
  const Polynomial ca = dense_content(da);
  const Polynomial cb = dense_content(db);
  const Polynomial g = gcd(ca, cb);
  for (auto& x : da) x = divide_exact(x, ca);
  for (auto& x : db) x = divide_exact(x, cb);
  if (da.size() < db.size()) std::swap(da, db);

  Dense result;
  while (true) {
    Dense r = pseudo_remainder(da, db);
    if (r.empty()) {
      result = db;
      break;
    }
    if (r.size() == 1) {
      result = Dense{Polynomial(1)};
      break;
    }
    da = std::move(db);
    db = dense_primitive(r);
  }
  return normalize_sign(g * Polynomial::from_coefficients(v, dense_primitive(result)));
}

std::optional<Polynomial> exact_sqrt(const Polynomial& p) {
  if (p.is_zero()) return Polynomial();
  if (p.leading_coefficient() < 0) return std::nullopt;

  // Per-variable exponent bounds for any term of the root.
  std::map<VarId, std::uint32_t> bound;
  for (VarId v : p.variables()) bound[v] = p.degree(v) / 2;

  const Monomial& lm = p.leading_monomial();
  const mpz_class& lc = p.leading_coefficient();
  if (!mpz_perfect_square_p(lc.get_mpz_t())) return std::nullopt;
  Monomial root_lm;
  for (const auto& [v, e] : lm.powers()) {
    if (e % 2 != 0) return std::nullopt;
    root_lm = root_lm * Monomial::variable(v, e / 2);
  }
  mpz_class root_lc;
  mpz_sqrt(root_lc.get_mpz_t(), lc.get_mpz_t());

  Polynomial root = Polynomial::term(root_lm, root_lc);
  Polynomial rest = p - root * root;
  Monomial last = root_lm;
  while (!rest.is_zero()) {
    const Monomial& rm = rest.leading_monomial();
    const mpz_class& rc = rest.leading_coefficient();
    const mpz_class denom = 2 * root_lc;
    if (!root_lm.divides(rm) || !mpz_divisible_p(rc.get_mpz_t(), denom.get_mpz_t())) return std::nullopt;
    const Monomial tm = root_lm.quotient_of(rm);
    if (Monomial::compare(tm, last) >= 0) return std::nullopt;
    for (const auto& [v, e] : tm.powers()) {
      auto it = bound.find(v);
      if (it == bound.end() || e > it->second) return std::nullopt;
    }
    mpz_class tc;
    mpz_divexact(tc.get_mpz_t(), rc.get_mpz_t(), denom.get_mpz_t());
    const Polynomial t = Polynomial::term(tm, tc);
    // rest - (2*root*t + t^2)
    rest -= (root + root + t) * t;
    root += t;
    last = tm;
  }
  return root;
}

}  // namespace kmsf
