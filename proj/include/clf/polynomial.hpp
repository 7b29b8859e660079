#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "clf/error.hpp"
#include "clf/interval.hpp"

namespace clf {

// Coefficients with magnitude below this are dropped on canonicalization.
inline constexpr double kZeroTol = 1e-12;

// Power product  x_{v1}^{e1} * x_{v2}^{e2} * ...  stored sparsely as
// (variable, exponent) pairs sorted by variable with no zero exponents.
class Monomial {
 public:
  using Factor = std::pair<std::uint32_t, std::uint32_t>;

  Monomial() = default;

  explicit Monomial(std::vector<Factor> factors) : factors_(std::move(factors)) { canonicalize(); }

  static Monomial variable(std::uint32_t var, std::uint32_t power = 1) {
    return Monomial({{var, power}});
  }

  // Dense exponent vector -> monomial.
  static Monomial from_exponents(std::span<const std::uint32_t> exps) {
    std::vector<Factor> f;
    for (std::uint32_t i = 0; i < exps.size(); ++i)
      if (exps[i] != 0) f.emplace_back(i, exps[i]);
    return Monomial(std::move(f));
  }

  [[nodiscard]] const std::vector<Factor>& factors() const { return factors_; }
  [[nodiscard]] bool is_constant() const { return factors_.empty(); }

  [[nodiscard]] std::uint32_t degree() const {
    std::uint32_t d = 0;
    for (const auto& [v, e] : factors_) d += e;
    return d;
  }

  [[nodiscard]] std::uint32_t exponent(std::uint32_t var) const {
    for (const auto& [v, e] : factors_)
      if (v == var) return e;
    return 0;
  }

  // One past the largest variable index used.
  [[nodiscard]] std::uint32_t span_vars() const { return factors_.empty() ? 0 : factors_.back().first + 1; }

  [[nodiscard]] std::vector<std::uint32_t> exponents(std::size_t n) const {
    std::vector<std::uint32_t> out(n, 0);
    for (const auto& [v, e] : factors_) {
      if (v >= n) throw DimensionError("monomial uses variable beyond dimension");
      out[v] = e;
    }
    return out;
  }

  friend Monomial operator*(const Monomial& a, const Monomial& b) {
    std::vector<Factor> out;
    out.reserve(a.factors_.size() + b.factors_.size());
    auto i = a.factors_.begin();
    auto j = b.factors_.begin();
    while (i != a.factors_.end() || j != b.factors_.end()) {
      if (j == b.factors_.end() || (i != a.factors_.end() && i->first < j->first)) {
        out.push_back(*i++);
      } else if (i == a.factors_.end() || j->first < i->first) {
        out.push_back(*j++);
      } else {
        out.emplace_back(i->first, i->second + j->second);
        ++i;
        ++j;
      }
    }
    Monomial m;
    m.factors_ = std::move(out);
    return m;
  }

  // True when every exponent of `other` is <= the matching exponent here.
  [[nodiscard]] bool divisible_by(const Monomial& other) const {
    for (const auto& [v, e] : other.factors_)
      if (exponent(v) < e) return false;
    return true;
  }

  // Precondition: divisible_by(other).
  [[nodiscard]] Monomial divide(const Monomial& other) const {
    std::vector<Factor> out;
    for (const auto& [v, e] : factors_) {
      const auto d = e - other.exponent(v);
      if (d != 0) out.emplace_back(v, d);
    }
    Monomial m;
    m.factors_ = std::move(out);
    return m;
  }

  [[nodiscard]] double eval(std::span<const double> x) const {
    double r = 1.0;
    for (const auto& [v, e] : factors_) {
      const double xv = x[v];
      for (std::uint32_t k = 0; k < e; ++k) r *= xv;
    }
    return r;
  }

  [[nodiscard]] Interval eval(std::span<const Interval> box) const {
    Interval r{1.0};
    for (const auto& [v, e] : factors_) r *= pow(box[v], e);
    return r;
  }

  friend bool operator==(const Monomial&, const Monomial&) = default;

  // Graded lexicographic order: total degree first, then the exponent of
  // x0, x1, ... compared in turn (larger exponent of an earlier variable
  // sorts later).
  friend std::strong_ordering operator<=>(const Monomial& a, const Monomial& b) {
    const auto da = a.degree(), db = b.degree();
    if (da != db) return da <=> db;
    auto i = a.factors_.begin();
    auto j = b.factors_.begin();
    while (i != a.factors_.end() && j != b.factors_.end()) {
      if (i->first != j->first) {
        // a has a positive exponent on an earlier variable where b has 0
        return i->first < j->first ? std::strong_ordering::greater : std::strong_ordering::less;
      }
      if (i->second != j->second) return i->second <=> j->second;
      ++i;
      ++j;
    }
    return std::strong_ordering::equal;  // equal degree and prefix => identical
  }

 private:
  void canonicalize() {
    std::sort(factors_.begin(), factors_.end());
    std::vector<Factor> merged;
    for (const auto& f : factors_) {
      if (!merged.empty() && merged.back().first == f.first)
        merged.back().second += f.second;
      else
        merged.push_back(f);
    }
    std::erase_if(merged, [](const Factor& f) { return f.second == 0; });
    factors_ = std::move(merged);
  }

  std::vector<Factor> factors_;
};

// Axis-aligned box, one interval per state variable.
class Box {
 public:
  Box() = default;
  Box(std::vector<double> lower, std::vector<double> upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.size() != upper_.size()) throw DimensionError("box bounds of different length");
    for (std::size_t i = 0; i < lower_.size(); ++i)
      if (!(lower_[i] <= upper_[i])) throw ModelError("box lower bound exceeds upper bound");
  }
  static Box cube(std::size_t n, double lo, double hi) { return Box(std::vector<double>(n, lo), std::vector<double>(n, hi)); }

  [[nodiscard]] std::size_t dim() const { return lower_.size(); }
  [[nodiscard]] const std::vector<double>& lower() const { return lower_; }
  [[nodiscard]] const std::vector<double>& upper() const { return upper_; }
  [[nodiscard]] Interval operator[](std::size_t i) const { return {lower_[i], upper_[i]}; }

  [[nodiscard]] std::vector<Interval> intervals() const {
    std::vector<Interval> out;
    for (std::size_t i = 0; i < dim(); ++i) out.push_back((*this)[i]);
    return out;
  }

  [[nodiscard]] bool contains(std::span<const double> x, double tol = 0.0) const {
    for (std::size_t i = 0; i < dim(); ++i)
      if (x[i] < lower_[i] - tol || x[i] > upper_[i] + tol) return false;
    return true;
  }

  // max_i max(|lower_i|, |upper_i|)
  [[nodiscard]] double radius_inf() const {
    double r = 0.0;
    for (std::size_t i = 0; i < dim(); ++i) r = std::max({r, std::abs(lower_[i]), std::abs(upper_[i])});
    return r;
  }

  // All 2^n corners, enumerated with variable 0 as the fastest-changing bit.
  [[nodiscard]] std::vector<std::vector<double>> vertices() const {
    const std::size_t n = dim();
    std::vector<std::vector<double>> out;
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
      std::vector<double> v(n);
      for (std::size_t i = 0; i < n; ++i) v[i] = (mask >> i) & 1U ? upper_[i] : lower_[i];
      out.push_back(std::move(v));
    }
    return out;
  }

  friend bool operator==(const Box&, const Box&) = default;

 private:
  std::vector<double> lower_;
  std::vector<double> upper_;
};

// Sparse multivariate polynomial in `nvars` real variables with double
// coefficients. Terms are kept in graded-lex order with no zero coefficients.
class Polynomial {
 public:
  using Terms = std::map<Monomial, double>;

  Polynomial() = default;
  explicit Polynomial(std::size_t nvars) : nvars_(nvars) {}

  static Polynomial constant(std::size_t nvars, double c) {
    Polynomial p(nvars);
    p.add_term(Monomial{}, c);
    return p;
  }
  static Polynomial variable(std::size_t nvars, std::uint32_t var) {
    if (var >= nvars) throw DimensionError("variable index out of range");
    Polynomial p(nvars);
    p.add_term(Monomial::variable(var), 1.0);
    return p;
  }
  static Polynomial monomial(std::size_t nvars, const Monomial& m, double c = 1.0) {
    if (m.span_vars() > nvars) throw DimensionError("monomial uses variable beyond dimension");
    Polynomial p(nvars);
    p.add_term(m, c);
    return p;
  }

  [[nodiscard]] std::size_t nvars() const { return nvars_; }
  [[nodiscard]] const Terms& terms() const { return terms_; }
  [[nodiscard]] bool is_zero() const { return terms_.empty(); }
  [[nodiscard]] std::size_t size() const { return terms_.size(); }

  [[nodiscard]] double coeff(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? 0.0 : it->second;
  }

  [[nodiscard]] std::uint32_t degree() const {
    std::uint32_t d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
    return d;
  }

  // Smallest total degree among the terms (0 for the zero polynomial).
  [[nodiscard]] std::uint32_t min_degree() const {
    if (terms_.empty()) return 0;
    std::uint32_t d = terms_.begin()->first.degree();
    for (const auto& [m, c] : terms_) d = std::min(d, m.degree());
    return d;
  }

  [[nodiscard]] std::vector<Monomial> monomials() const {
    std::vector<Monomial> out;
    out.reserve(terms_.size());
    for (const auto& [m, c] : terms_) out.push_back(m);
    return out;
  }

  [[nodiscard]] double l1_norm() const {
    double s = 0.0;
    for (const auto& [m, c] : terms_) s += std::abs(c);
    return s;
  }

  void add_term(const Monomial& m, double c) {
    if (m.span_vars() > nvars_) nvars_ = m.span_vars();
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) it->second += c;
    if (std::abs(it->second) <= kZeroTol) terms_.erase(it);
  }

  Polynomial& operator+=(const Polynomial& o) {
    nvars_ = std::max(nvars_, o.nvars_);
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) {
    nvars_ = std::max(nvars_, o.nvars_);
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
  }
  Polynomial& operator*=(double s) {
    if (std::abs(s) <= kZeroTol) {
      terms_.clear();
      return *this;
    }
    for (auto& [m, c] : terms_) c *= s;
    std::erase_if(terms_, [](const auto& kv) { return std::abs(kv.second) <= kZeroTol; });
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator-(Polynomial a) { return a *= -1.0; }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    Polynomial out(std::max(a.nvars_, b.nvars_));
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) out.add_term(ma * mb, ca * cb);
    return out;
  }
  Polynomial& operator*=(const Polynomial& o) { return *this = *this * o; }

  [[nodiscard]] Polynomial pow(unsigned k) const {
    Polynomial r = constant(nvars_, 1.0);
    for (unsigned i = 0; i < k; ++i) r *= *this;
    return r;
  }

  [[nodiscard]] Polynomial partial(std::uint32_t var) const {
    Polynomial out(nvars_);
    for (const auto& [m, c] : terms_) {
      const auto e = m.exponent(var);
      if (e == 0) continue;
      out.add_term(m.divide(Monomial::variable(var)), c * e);
    }
    return out;
  }

  [[nodiscard]] double eval(std::span<const double> x) const {
    check_point(x.size());
    double s = 0.0;
    for (const auto& [m, c] : terms_) s += c * m.eval(x);
    return s;
  }

  [[nodiscard]] Interval eval(std::span<const Interval> box) const {
    check_point(box.size());
    Interval s{0.0};
    for (const auto& [m, c] : terms_) s += Interval(c) * m.eval(box);
    return s;
  }

  // Substitute x_var := value.
  [[nodiscard]] Polynomial substitute(std::uint32_t var, double value) const {
    Polynomial out(nvars_);
    for (const auto& [m, c] : terms_) {
      const auto e = m.exponent(var);
      std::vector<Monomial::Factor> rest;
      for (const auto& f : m.factors())
        if (f.first != var) rest.push_back(f);
      out.add_term(Monomial(std::move(rest)), c * std::pow(value, static_cast<double>(e)));
    }
    return out;
  }

  friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.terms_ == b.terms_; }

 private:
  void check_point(std::size_t n) const {
    if (nvars_ != 0 && n != nvars_)
      throw DimensionError("point has " + std::to_string(n) + " coordinates, polynomial has " +
                           std::to_string(nvars_) + " variables");
  }

  std::size_t nvars_{0};
  Terms terms_;
};

using VectorField = std::vector<Polynomial>;

// Sum_i dp/dx_i * field_i.
inline Polynomial lie_derivative(const Polynomial& p, const VectorField& field) {
  if (p.nvars() != 0 && field.size() != p.nvars())
    throw DimensionError("field has " + std::to_string(field.size()) + " components, polynomial has " +
                         std::to_string(p.nvars()) + " variables");
  Polynomial out(std::max<std::size_t>(p.nvars(), field.size()));
  for (std::uint32_t i = 0; i < field.size() && i < p.nvars(); ++i) out += p.partial(i) * field[i];
  return out;
}

inline Interval interval_eval(const Polynomial& p, const Box& box) { return p.eval(box.intervals()); }

inline std::vector<double> eval_field(const VectorField& f, std::span<const double> x) {
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i].eval(x);
  return out;
}

// Flat, allocation-free evaluator for the simulator's inner loop.
class CompiledPolynomial {
 public:
  CompiledPolynomial() = default;
  explicit CompiledPolynomial(const Polynomial& p) : nvars_(p.nvars()) {
    for (const auto& [m, c] : p.terms()) {
      coeffs_.push_back(c);
      offsets_.push_back(static_cast<std::uint32_t>(factors_.size()));
      for (const auto& f : m.factors()) factors_.push_back(f);
    }
    offsets_.push_back(static_cast<std::uint32_t>(factors_.size()));
  }

  [[nodiscard]] double operator()(std::span<const double> x) const {
    double s = 0.0;
    for (std::size_t t = 0; t < coeffs_.size(); ++t) {
      double r = coeffs_[t];
      for (std::uint32_t k = offsets_[t]; k < offsets_[t + 1]; ++k) {
        const double xv = x[factors_[k].first];
        for (std::uint32_t e = 0; e < factors_[k].second; ++e) r *= xv;
      }
      s += r;
    }
    return s;
  }

 private:
  std::size_t nvars_{0};
  std::vector<double> coeffs_;
  std::vector<std::uint32_t> offsets_;
  std::vector<Monomial::Factor> factors_;
};

// ---------------------------------------------------------------------------
// Text form: "2*x^2*y - 0.5*y + 1". Variables are referenced by name.

inline std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

inline std::string to_string(const Monomial& m, std::span<const std::string> names) {
  if (m.is_constant()) return "1";
  std::string s;
  for (const auto& [v, e] : m.factors()) {
    if (!s.empty()) s += '*';
    s += v < names.size() ? names[v] : "x" + std::to_string(v);
    if (e > 1) s += '^' + std::to_string(e);
  }
  return s;
}

inline std::string to_string(const Polynomial& p, std::span<const std::string> names) {
  if (p.is_zero()) return "0";
  std::string s;
  // highest degree first reads naturally
  for (auto it = p.terms().rbegin(); it != p.terms().rend(); ++it) {
    const auto& [m, c] = *it;
    double mag = std::abs(c);
    if (s.empty())
      s += c < 0 ? "-" : "";
    else
      s += c < 0 ? " - " : " + ";
    if (m.is_constant())
      s += format_number(mag);
    else if (mag == 1.0)
      s += to_string(m, names);
    else
      s += format_number(mag) + "*" + to_string(m, names);
  }
  return s;
}

namespace detail {

class PolyParser {
 public:
  PolyParser(std::string_view text, std::span<const std::string> names) : text_(text), names_(names) {}

  Polynomial parse() {
    Polynomial p = expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected character");
    return p;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(what + " at position " + std::to_string(pos_) + " in \"" + std::string(text_) + "\"");
  }
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Polynomial expr() {
    Polynomial p = term();
    for (;;) {
      if (accept('+'))
        p += term();
      else if (accept('-'))
        p -= term();
      else
        return p;
    }
  }
  Polynomial term() {
    Polynomial p = unary();
    for (;;) {
      if (accept('*'))
        p *= unary();
      else if (accept('/')) {
        Polynomial d = unary();
        if (d.degree() != 0 || d.is_zero()) fail("division only by nonzero constants");
        p *= 1.0 / d.coeff(Monomial{});
      } else
        return p;
    }
  }
  Polynomial unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }
  Polynomial power() {
    Polynomial base = atom();
    if (accept('^')) {
      skip_ws();
      std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (start == pos_) fail("expected integer exponent");
      base = base.pow(static_cast<unsigned>(std::stoul(std::string(text_.substr(start, pos_ - start)))));
    }
    return base;
  }
  Polynomial atom() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Polynomial p = expr();
      if (!accept(')')) fail("expected ')'");
      return p;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t used = 0;
      const double v = std::stod(std::string(text_.substr(pos_)), &used);
      pos_ += used;
      return Polynomial::constant(names_.size(), v);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      const std::string_view name = text_.substr(start, pos_ - start);
      for (std::uint32_t i = 0; i < names_.size(); ++i)
        if (names_[i] == name) return Polynomial::variable(names_.size(), i);
      fail("unknown variable '" + std::string(name) + "'");
    }
    fail("unexpected character");
  }

  std::string_view text_;
  std::span<const std::string> names_;
  std::size_t pos_{0};
};

}  // namespace detail

inline Polynomial parse_polynomial(std::string_view text, std::span<const std::string> names) {
  Polynomial p = detail::PolyParser(text, names).parse();
  Polynomial out(names.size());
  out += p;
  return out;
}

}  // namespace clf
