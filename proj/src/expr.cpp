#include "kmsf/expr.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <mutex>
#include <shared_mutex>
#include <sstream>
#include <unordered_map>

#include "kmsf/errors.hpp"

namespace kmsf {

struct Expr::Rep {
  Polynomial num;
  Polynomial den;
};

namespace {

struct SymbolEntry {
  std::string name;
  // Null for plain symbols; the canonical radicand for sqrt atoms.
  std::shared_ptr<const Expr::Rep> radicand;
};

class SymbolTable {
 public:
  VarId intern_plain(std::string_view name) {
    {
      std::shared_lock lock(mu_);
      auto it = by_key_.find(std::string(name));
      if (it != by_key_.end()) return it->second;
    }
    std::unique_lock lock(mu_);
    auto [it, inserted] = by_key_.try_emplace(std::string(name), static_cast<VarId>(entries_.size()));
    if (inserted) entries_.push_back({std::string(name), nullptr});
    return it->second;
  }

  VarId intern_atom(std::shared_ptr<const Expr::Rep> radicand, const std::string& printed) {
    const std::string key = "sqrt(" + printed + ")";
    {
      std::shared_lock lock(mu_);
      auto it = by_key_.find(key);
      if (it != by_key_.end()) return it->second;
    }
    std::unique_lock lock(mu_);
    auto [it, inserted] = by_key_.try_emplace(key, static_cast<VarId>(entries_.size()));
    if (inserted) entries_.push_back({key, std::move(radicand)});
    return it->second;
  }

  std::optional<VarId> find_plain(std::string_view name) const {
    std::shared_lock lock(mu_);
    auto it = by_key_.find(std::string(name));
    if (it == by_key_.end() || entries_[it->second].radicand) return std::nullopt;
    return it->second;
  }

  SymbolEntry get(VarId v) const {
    std::shared_lock lock(mu_);
    return entries_.at(v);
  }

 private:
  mutable std::shared_mutex mu_;
  std::deque<SymbolEntry> entries_;
  std::unordered_map<std::string, VarId> by_key_;
};

SymbolTable& table() {
  static SymbolTable t;
  return t;
}

bool is_atom(VarId v) { return table().get(v).radicand != nullptr; }

std::vector<VarId> atoms_in(const Polynomial& a, const Polynomial& b) {
  std::vector<VarId> out;
  for (const Polynomial* p : {&a, &b}) {
    for (VarId v : p->variables()) {
      if (is_atom(v)) out.push_back(v);
    }
  }
  std::sort(out.begin(), out.end(), std::greater<>());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Rewrites s^k as s^(k mod 2) * (P/Q)^(k div 2). Returns the new polynomial
/// and the power of Q that was cleared from its denominator.
std::pair<Polynomial, unsigned> reduce_atom_powers(const Polynomial& p, VarId s, const Expr::Rep& r) {
  if (p.degree(s) < 2) return {p, 0};
  const auto coeffs = p.coefficients(s);
  const unsigned top = static_cast<unsigned>((coeffs.size() - 1) / 2);
  Polynomial out;
  const Polynomial sv = Polynomial::variable(s);
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    if (coeffs[k].is_zero()) continue;
    const unsigned half = static_cast<unsigned>(k / 2);
    Polynomial t = coeffs[k] * r.num.pow(half) * r.den.pow(top - half);
    if (k % 2 == 1) t *= sv;
    out += t;
  }
  return {out, top};
}

std::string print_polynomial(const Polynomial& p);

}  // namespace

// ---------------------------------------------------------------------------
// Construction and normalization

Expr::Expr() : Expr(0L) {}

Expr::Expr(long v) : rep_(std::make_shared<Rep>(Rep{Polynomial(v), Polynomial(1)})) {}

Expr::Expr(int v) : Expr(static_cast<long>(v)) {}

Expr::Expr(const Rational& v) : rep_(std::make_shared<Rep>(Rep{Polynomial(v.num()), Polynomial(v.den())})) {}

Expr Expr::make(Polynomial num, Polynomial den, const Polynomial* cancel_within) {
  if (den.is_zero()) throw DivisionByZero();
  if (num.is_zero()) return Expr(0L);

  bool reduced = false;
  for (VarId s : atoms_in(num, den)) {
    if (num.degree(s) < 2 && !den.contains(s)) continue;
    reduced = true;
    const auto radicand = table().get(s).radicand;
    while (true) {
      auto [n2, kn] = reduce_atom_powers(num, s, *radicand);
      auto [d2, kd] = reduce_atom_powers(den, s, *radicand);
      num = std::move(n2);
      den = std::move(d2);
      if (kd > 0) num *= radicand->den.pow(kd);
      if (kn > 0) den *= radicand->den.pow(kn);
      if (!den.contains(s)) break;
      // den = A + B s; multiply through by the conjugate A - B s.
      const auto dc = den.coefficients(s);
      const Polynomial conj = dc[0] - dc[1] * Polynomial::variable(s);
      num *= conj;
      den = radicand->den * dc[0] * dc[0] - radicand->num * dc[1] * dc[1];
      num *= radicand->den;
      if (den.is_zero()) throw DivisionByZero();
    }
    if (num.is_zero()) return Expr(0L);
  }

  const Polynomial g = (cancel_within && !reduced) ? gcd(num, *cancel_within) : gcd(num, den);
  if (!(g.is_constant() && g.constant_value() == 1)) {
    num = divide_exact(num, g);
    den = divide_exact(den, g);
  }
  if (den.leading_coefficient() < 0) {
    num = -num;
    den = -den;
  }
  return Expr(std::make_shared<Rep>(Rep{std::move(num), std::move(den)}));
}

Expr Expr::symbol(std::string_view name) {
  if (name.empty()) throw InvalidArgument("empty symbol name");
  return Expr(std::make_shared<Rep>(Rep{Polynomial::variable(table().intern_plain(name)), Polynomial(1)}));
}

Expr Expr::sqrt(const Expr& radicand) {
  if (radicand.is_zero()) return Expr(0L);
  if (auto c = radicand.constant_value()) {
    if (c->sign() < 0) throw DomainError("square root of negative constant " + c->str());
    if (auto root = c->sqrt()) return Expr(*root);
  } else if (radicand.numerator().leading_coefficient() > 0) {
    auto rn = exact_sqrt(radicand.numerator());
    auto rd = rn ? exact_sqrt(radicand.denominator()) : std::nullopt;
    if (rn && rd) return make(std::move(*rn), std::move(*rd));
  }
  const VarId v = table().intern_atom(radicand.rep_, radicand.str());
  return Expr(std::make_shared<Rep>(Rep{Polynomial::variable(v), Polynomial(1)}));
}

// ---------------------------------------------------------------------------
// Queries

bool Expr::is_zero() const { return rep_->num.is_zero(); }

bool Expr::is_constant() const { return rep_->num.is_constant() && rep_->den.is_constant(); }

std::optional<Rational> Expr::constant_value() const {
  if (!is_constant()) return std::nullopt;
  return Rational(rep_->num.constant_value(), rep_->den.constant_value());
}

std::set<std::string> Expr::free_symbols() const {
  std::set<std::string> out;
  for (const Polynomial* p : {&rep_->num, &rep_->den}) {
    for (VarId v : p->variables()) {
      const auto e = table().get(v);
      if (!e.radicand) {
        out.insert(e.name);
      } else {
        const auto inner = Expr(e.radicand).free_symbols();
        out.insert(inner.begin(), inner.end());
      }
    }
  }
  return out;
}

const Polynomial& Expr::numerator() const { return rep_->num; }
const Polynomial& Expr::denominator() const { return rep_->den; }

bool operator==(const Expr& a, const Expr& b) {
  if (a.rep_ == b.rep_) return true;
  return a.rep_->num == b.rep_->num && a.rep_->den == b.rep_->den;
}

std::string variable_name(VarId v) { return table().get(v).name; }

// ---------------------------------------------------------------------------
// Arithmetic

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  const auto& [an, ad] = *a.rep_;
  const auto& [bn, bd] = *b.rep_;
  if (ad == bd) return Expr::make(an + bn, ad, &ad);
  // With g = gcd(ad, bd), any common factor of the new numerator and
  // denominator divides g.
  const Polynomial g = gcd(ad, bd);
  const Polynomial ad_g = divide_exact(ad, g);
  const Polynomial bd_g = divide_exact(bd, g);
  return Expr::make(an * bd_g + bn * ad_g, ad_g * bd, &g);
}

Expr operator-(const Expr& a) {
  if (a.is_zero()) return a;
  return Expr(std::make_shared<Expr::Rep>(Expr::Rep{-a.rep_->num, a.rep_->den}));
}

Expr operator-(const Expr& a, const Expr& b) { return a + (-b); }

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_zero() || b.is_zero()) return Expr(0L);
  const auto& [an, ad] = *a.rep_;
  const auto& [bn, bd] = *b.rep_;
  // Cross-cancel first to keep intermediate sizes small.
  const Polynomial g1 = gcd(an, bd);
  const Polynomial g2 = gcd(bn, ad);
  const Polynomial one(1);
  return Expr::make(divide_exact(an, g1) * divide_exact(bn, g2), divide_exact(ad, g2) * divide_exact(bd, g1), &one);
}

Expr operator/(const Expr& a, const Expr& b) {
  if (b.is_zero()) throw DivisionByZero();
  const auto& [bn, bd] = *b.rep_;
  return a * Expr::make(bd, bn);
}

Expr& Expr::operator+=(const Expr& o) { return *this = *this + o; }
Expr& Expr::operator-=(const Expr& o) { return *this = *this - o; }
Expr& Expr::operator*=(const Expr& o) { return *this = *this * o; }
Expr& Expr::operator/=(const Expr& o) { return *this = *this / o; }

Expr Expr::pow(int exponent) const {
  if (exponent < 0) return Expr(1L) / pow(-exponent);
  if (exponent == 0) return Expr(1L);
  const auto e = static_cast<unsigned>(exponent);
  return make(rep_->num.pow(e), rep_->den.pow(e));
}

// ---------------------------------------------------------------------------
// Calculus and evaluation

namespace {

Expr map_polynomial(const Polynomial& p, const std::function<Expr(VarId)>& image) {
  std::map<VarId, Expr> cache;
  Expr total;
  for (const auto& [m, c] : p.terms()) {
    Expr t{Rational(c)};
    for (const auto& [v, e] : m.powers()) {
      auto it = cache.find(v);
      if (it == cache.end()) it = cache.emplace(v, image(v)).first;
      t *= it->second.pow(static_cast<int>(e));
    }
    total += t;
  }
  return total;
}

Expr variable_expr(VarId v) { return Expr::parse(variable_name(v)); }

}  // namespace

Expr Expr::diff(std::string_view symbol) const {
  const auto x = table().find_plain(symbol);
  if (!x) return Expr(0L);

  // d/dx of a polynomial, chaining through sqrt atoms: d sqrt(r) = r' sqrt(r) / (2 r).
  auto dpoly = [&](const Polynomial& p) {
    Expr d = make(p.derivative(*x), Polynomial(1));
    for (VarId v : p.variables()) {
      const auto entry = table().get(v);
      if (!entry.radicand) continue;
      const Expr r(entry.radicand);
      const Expr dr = r.diff(symbol);
      if (dr.is_zero()) continue;
      const Expr atom(std::make_shared<Rep>(Rep{Polynomial::variable(v), Polynomial(1)}));
      d += make(p.derivative(v), Polynomial(1)) * dr * atom / (Expr(2L) * r);
    }
    return d;
  };

  const Expr n = make(rep_->num, Polynomial(1));
  const Expr d = make(rep_->den, Polynomial(1));
  if (rep_->den.is_constant()) return dpoly(rep_->num) / d;
  return (dpoly(rep_->num) * d - n * dpoly(rep_->den)) / (d * d);
}

Rational Expr::eval(const Point& point) const {
  std::function<Rational(VarId)> value = [&](VarId v) -> Rational {
    const auto entry = table().get(v);
    if (!entry.radicand) {
      auto it = point.find(entry.name);
      if (it == point.end()) throw DomainError("symbol '" + entry.name + "' has no value at the sample point");
      return it->second;
    }
    const Rational r = Expr(entry.radicand).eval(point);
    if (r.sign() < 0) throw DomainError("negative radicand in " + entry.name);
    auto root = r.sqrt();
    if (!root) throw IrrationalAtPoint(entry.name + " is irrational at the sample point (radicand " + r.str() + ")");
    return *root;
  };
  const Rational d = rep_->den.evaluate(value);
  if (d.is_zero()) throw DomainError("denominator " + print_polynomial(rep_->den) + " vanishes at the sample point");
  return rep_->num.evaluate(value) / d;
}

Expr Expr::partial_eval(const Point& point) const {
  std::function<Expr(VarId)> image = [&](VarId v) -> Expr {
    const auto entry = table().get(v);
    if (!entry.radicand) {
      auto it = point.find(entry.name);
      return it == point.end() ? variable_expr(v) : Expr(it->second);
    }
    return Expr::sqrt(Expr(entry.radicand).partial_eval(point));
  };
  return map_polynomial(rep_->num, image) / map_polynomial(rep_->den, image);
}

Expr Expr::substitute(std::string_view symbol, const Expr& value) const {
  std::function<Expr(VarId)> image = [&](VarId v) -> Expr {
    const auto entry = table().get(v);
    if (!entry.radicand) return entry.name == symbol ? value : variable_expr(v);
    return Expr::sqrt(Expr(entry.radicand).substitute(symbol, value));
  };
  return map_polynomial(rep_->num, image) / map_polynomial(rep_->den, image);
}

// ---------------------------------------------------------------------------
// Printing

namespace {

using NamedTerm = std::pair<std::vector<std::pair<std::string, std::uint32_t>>, mpz_class>;

// Plain symbols sort before sqrt atoms; within a kind, by name.
std::string sort_key(const std::string& name) { return (name.rfind("sqrt(", 0) == 0 ? "1" : "0") + name; }

int compare_named(const NamedTerm& a, const NamedTerm& b) {
  auto i = a.first.begin();
  auto j = b.first.begin();
  for (; i != a.first.end() && j != b.first.end(); ++i, ++j) {
    const std::string ki = sort_key(i->first);
    const std::string kj = sort_key(j->first);
    if (ki != kj) return ki < kj ? 1 : -1;
    if (i->second != j->second) return i->second > j->second ? 1 : -1;
  }
  if (i != a.first.end()) return 1;
  if (j != b.first.end()) return -1;
  return 0;
}

std::string print_polynomial(const Polynomial& p) {
  if (p.is_zero()) return "0";
  std::vector<NamedTerm> terms;
  for (const auto& [m, c] : p.terms()) {
    NamedTerm t;
    for (const auto& [v, e] : m.powers()) t.first.emplace_back(variable_name(v), e);
    std::sort(t.first.begin(), t.first.end(),
              [](const auto& x, const auto& y) { return sort_key(x.first) < sort_key(y.first); });
    t.second = c;
    terms.push_back(std::move(t));
  }
  std::sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) { return compare_named(a, b) > 0; });

  std::ostringstream os;
  bool first = true;
  for (const auto& [factors, c] : terms) {
    const bool negative = c < 0;
    const mpz_class mag = abs(c);
    if (first) {
      if (negative) os << '-';
    } else {
      os << (negative ? " - " : " + ");
    }
    first = false;
    bool need_star = false;
    if (factors.empty() || mag != 1) {
      os << mag.get_str();
      need_star = true;
    }
    for (const auto& [name, e] : factors) {
      if (need_star) os << '*';
      os << name;
      if (e != 1) os << '^' << e;
      need_star = true;
    }
  }
  return os.str();
}

bool is_single_factor(const Polynomial& p) {
  if (p.size() != 1) return false;
  const auto& [m, c] = *p.terms().begin();
  if (m.is_one()) return c > 0;
  return c == 1 && m.powers().size() == 1;
}

}  // namespace

std::string Expr::str() const {
  const std::string n = print_polynomial(rep_->num);
  if (rep_->den.is_constant() && rep_->den.constant_value() == 1) return n;
  const std::string d = print_polynomial(rep_->den);
  const std::string ns = rep_->num.size() > 1 ? "(" + n + ")" : n;
  const std::string ds = is_single_factor(rep_->den) ? d : "(" + d + ")";
  return ns + "/" + ds;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expr parse() {
    Expr e = expression();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("expression '" + std::string(text_) + "' at column " + std::to_string(pos_ + 1) + ": " + what);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr expression() {
    Expr e = term();
    while (true) {
      if (accept('+')) {
        e += term();
      } else if (accept('-')) {
        e -= term();
      } else {
        return e;
      }
    }
  }

  Expr term() {
    Expr e = unary();
    while (true) {
      if (accept('*')) {
        e *= unary();
      } else if (accept('/')) {
        const Expr d = unary();
        if (d.is_zero()) fail("division by zero");
        e /= d;
      } else {
        return e;
      }
    }
  }

  Expr unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (accept('^')) {
      skip_space();
      bool negative = false;
      if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) {
        negative = text_[pos_] == '-';
        ++pos_;
      }
      const std::string digits = read_digits();
      if (digits.empty()) fail("integer exponent expected after '^'");
      if (digits.size() > 6) fail("exponent too large");
      const int e = std::stoi(digits);
      if (negative && base.is_zero()) fail("division by zero");
      base = base.pow(negative ? -e : e);
    }
    return base;
  }

  std::string read_digits() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  Expr primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      const std::string digits = read_digits();
      if (pos_ < text_.size() && (text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E')) {
        fail("only exact integer and p/q literals are accepted");
      }
      return Expr(Rational(mpz_class(digits, 10)));
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
      const std::string name(text_.substr(start, pos_ - start));
      if (name == "sqrt") {
        if (!accept('(')) fail("'(' expected after sqrt");
        Expr inner = expression();
        if (!accept(')')) fail("')' expected");
        try {
          return Expr::sqrt(inner);
        } catch (const DomainError& e) {
          fail(e.what());
        }
      }
      skip_space();
      if (pos_ < text_.size() && text_[pos_] == '(') fail("unknown function '" + name + "'");
      return Expr::symbol(name);
    }
    if (accept('(')) {
      Expr inner = expression();
      if (!accept(')')) fail("')' expected");
      return inner;
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr Expr::parse(std::string_view text) { return Parser(text).parse(); }

}  // namespace kmsf
