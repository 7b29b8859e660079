#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "clf/error.hpp"
#include "clf/plant.hpp"
#include "clf/polynomial.hpp"

namespace clf {

// phi(x) = sum_i x_i^(2 d_i)
struct PhiFunction {
  std::vector<std::uint32_t> d;

  static PhiFunction quadratic(std::size_t n) { return {std::vector<std::uint32_t>(n, 1)}; }

  [[nodiscard]] std::size_t n() const { return d.size(); }

  [[nodiscard]] bool is_constant() const {
    return std::all_of(d.begin(), d.end(), [](auto v) { return v == 0; });
  }
  [[nodiscard]] bool is_definite() const {
    return std::all_of(d.begin(), d.end(), [](auto v) { return v > 0; });
  }

  [[nodiscard]] Polynomial polynomial() const {
    Polynomial p(d.size());
    for (std::uint32_t i = 0; i < d.size(); ++i) p.add_term(d[i] == 0 ? Monomial{} : Monomial::variable(i, 2 * d[i]), 1.0);
    return p;
  }

  // Minimum of phi over { x : ||x||_2 >= r }.
  [[nodiscard]] double min_outside_ball(double r) const {
    if (std::any_of(d.begin(), d.end(), [](auto v) { return v == 0; })) {
      // every zero exponent contributes 1
      return static_cast<double>(std::count(d.begin(), d.end(), 0U));
    }
    if (std::all_of(d.begin(), d.end(), [](auto v) { return v == 1; })) return r * r;
    const double s = r / std::sqrt(static_cast<double>(d.size()));
    double best = std::numeric_limits<double>::infinity();
    for (auto di : d) best = std::min(best, std::pow(s, 2.0 * di));
    return best;
  }

  friend bool operator==(const PhiFunction&, const PhiFunction&) = default;
};

// Degree condition: every monomial m of p has degree(m) >= 2 d_i for every i.
inline bool phi_bounded_check(const Polynomial& p, const PhiFunction& phi) {
  std::uint32_t dmax = 0;
  for (auto v : phi.d) dmax = std::max(dmax, v);
  for (const auto& [m, c] : p.terms())
    if (m.degree() < 2 * dmax) return false;
  return true;
}

// Finer sufficient test: x^a is bounded by sum_i x_i^(2 d_i) near 0 when
// sum_i a_i / (2 d_i) >= 1, and any monomial is bounded when some d_i = 0.
inline bool phi_bounded_weighted(const Polynomial& p, const PhiFunction& phi) {
  if (std::any_of(phi.d.begin(), phi.d.end(), [](auto v) { return v == 0; })) return true;
  for (const auto& [m, c] : p.terms()) {
    double w = 0.0;
    for (const auto& [v, e] : m.factors()) w += static_cast<double>(e) / (2.0 * phi.d.at(v));
    if (w < 1.0 - 1e-12) return false;
  }
  return true;
}

namespace detail {

inline std::set<Monomial> support(const Polynomial& p) {
  std::set<Monomial> s;
  for (const auto& [m, c] : p.terms()) s.insert(m);
  return s;
}

// Monomial support of the second Lie derivative of V over all coefficient
// values: the union of supports of L_f L_f m_j over the template.
inline std::set<Monomial> second_lie_support(const ClfTemplate& t, const VectorField& f) {
  std::set<Monomial> s;
  for (const auto& m : t.monomials) {
    Polynomial v = Polynomial::monomial(f.size(), m);
    auto part = support(lie_derivative(lie_derivative(v, f), f));
    s.insert(part.begin(), part.end());
  }
  return s;
}

inline std::uint32_t min_degree(const std::set<Monomial>& s) {
  std::uint32_t d = std::numeric_limits<std::uint32_t>::max();
  for (const auto& m : s) d = std::min(d, m.degree());
  return d;
}

}  // namespace detail

struct PhiSelection {
  PhiFunction phi;
  bool constant{false};  // d = 0: phi is positive but not definite
};

// Decreasing fixpoint: seed every d_i with floor(mindeg(supp V'')/2), then lower
// exponents until the induced phi' support also passes the degree condition.
// With an empty V'' support the seed is 1.
inline PhiSelection select_phi(const ClfTemplate& t, const VectorField& f) {
  const std::size_t n = f.size();
  const auto vdd = detail::second_lie_support(t, f);
  std::uint32_t seed = vdd.empty() ? 1 : detail::min_degree(vdd) / 2;
  PhiFunction phi{std::vector<std::uint32_t>(n, seed)};
  for (;;) {
    const auto pd = detail::support(lie_derivative(phi.polynomial(), f));
    bool changed = false;
    if (!pd.empty()) {
      const std::uint32_t cap = detail::min_degree(pd) / 2;
      for (auto& di : phi.d)
        if (di > cap) {
          di = cap;
          changed = true;
        }
    }
    if (!changed) break;
  }
  return {phi, phi.is_constant()};
}

inline PhiSelection select_phi(const ClfTemplate& t, const Mode& mode) { return select_phi(t, mode.field); }

struct LambdaBound {
  double certified{0.0};  // sound constant
  double sampled{0.0};    // largest p/phi seen on a sample grid (advisory)
};

// Constructive bound max(1, L0)^deg(p) * sum|c_i| with L0 the box radius.
// The max(1, .) keeps the bound sound on boxes inside the unit cube.
inline double lambda_constructive(const Polynomial& p, const PhiFunction& phi, const Box& box) {
  if (!phi_bounded_check(p, phi)) throw Error("polynomial is not phi-bounded by the degree condition");
  if (p.is_zero()) return 0.0;
  const double l0 = std::max(1.0, box.radius_inf());
  return std::pow(l0, static_cast<double>(p.degree())) * p.l1_norm();
}

inline double sampled_ratio(const Polynomial& p, const PhiFunction& phi, const Box& box, std::size_t per_axis) {
  const std::size_t n = box.dim();
  const Polynomial ph = phi.polynomial();
  std::vector<std::size_t> idx(n, 0);
  std::vector<double> x(n);
  double best = 0.0;
  for (;;) {
    for (std::size_t i = 0; i < n; ++i)
      x[i] = per_axis == 1 ? box.lower()[i]
                           : box.lower()[i] + (box.upper()[i] - box.lower()[i]) * static_cast<double>(idx[i]) /
                                                  static_cast<double>(per_axis - 1);
    const double den = ph.eval(x);
    if (den > 1e-12) best = std::max(best, p.eval(x) / den);
    std::size_t k = 0;
    while (k < n && ++idx[k] == per_axis) idx[k++] = 0;
    if (k == n) break;
  }
  return best;
}

inline LambdaBound lambda_bound(const Polynomial& p, const PhiFunction& phi, const Box& box) {
  LambdaBound out;
  out.certified = lambda_constructive(p, phi, box);
  const std::size_t per_axis = box.dim() <= 2 ? 41 : box.dim() <= 4 ? 9 : 3;
  out.sampled = std::min(out.certified, sampled_ratio(p, phi, box, per_axis));
  return out;
}

// Bound valid on P outside B_r: (upper bound of p on P) / (min of phi outside B_r).
inline double lambda_region(const Polynomial& p, const PhiFunction& phi, const Box& box, double r) {
  if (r <= 0) throw Error("region bound needs a positive exclusion radius");
  const double ub = std::max(0.0, interval_eval(p, box).hi);
  return ub / phi.min_outside_ball(r);
}

// h(delta) = lambda L1 e^(L2 delta) delta / (lambda - e^(L2 delta))
inline double dwell_h(double delta, double lambda1, double lambda2, double lambda) {
  if (lambda2 == 0.0) return lambda * lambda1 * delta / (lambda - 1.0);
  const double e = std::exp(lambda2 * delta);
  return lambda * lambda1 * e * delta / (lambda - e);
}

struct ModeBounds {
  double lambda1{0.0};
  double lambda2{0.0};
};

struct DwellBound {
  double lambda{2.0};
  double delta_lb{0.0};
  std::vector<double> per_mode;
};

// Largest delta with h(delta) <= eps. Bisects down to floating-point resolution.
inline double dwell_inverse(double eps, double lambda1, double lambda2, double lambda) {
  if (!(lambda > 1.0)) throw Error("dwell scale lambda must exceed 1");
  if (!(eps > 0.0)) throw Error("dwell bound needs eps > 0");
  if (lambda1 < 0 || lambda2 < 0) throw Error("negative Lambda bound");
  if (lambda2 == 0.0) {
    if (lambda1 == 0.0) return std::numeric_limits<double>::infinity();
    return (lambda - 1.0) * eps / (lambda * lambda1);
  }
  const double hi_limit = std::log(lambda) / lambda2;
  if (lambda1 == 0.0) return hi_limit;
  double lo = 0.0, hi = hi_limit;
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (dwell_h(mid, lambda1, lambda2, lambda) <= eps)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

inline DwellBound dwell_time(const std::vector<double>& eps, const std::vector<ModeBounds>& bounds, double lambda) {
  if (eps.size() != bounds.size()) throw DimensionError("eps and bounds differ in length");
  if (eps.empty()) throw Error("dwell bound needs at least one mode");
  DwellBound out;
  out.lambda = lambda;
  out.delta_lb = std::numeric_limits<double>::infinity();
  for (std::size_t q = 0; q < eps.size(); ++q) {
    const double d = dwell_inverse(eps[q], bounds[q].lambda1, bounds[q].lambda2, lambda);
    out.per_mode.push_back(d);
    out.delta_lb = std::min(out.delta_lb, d);
  }
  return out;
}

}  // namespace clf
