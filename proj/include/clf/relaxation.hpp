#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "clf/error.hpp"
#include "clf/plant.hpp"
#include "clf/polynomial.hpp"

namespace clf {

// Monomial vector m; Z relaxes m m^T.
struct MonomialBasis {
  std::vector<Monomial> monomials;
  std::map<Monomial, std::size_t> index;
  // product monomial -> basis pairs (i <= j) with m_i m_j equal to it
  std::map<Monomial, std::vector<std::pair<std::size_t, std::size_t>>> pair_table;

  [[nodiscard]] std::size_t size() const { return monomials.size(); }

  void add(const Monomial& m) {
    if (index.contains(m)) return;
    const std::size_t k = monomials.size();
    monomials.push_back(m);
    index[m] = k;
    for (std::size_t i = 0; i <= k; ++i) pair_table[monomials[i] * m].emplace_back(i, k);
  }

  [[nodiscard]] bool covers(const Monomial& m) const { return pair_table.contains(m); }

  [[nodiscard]] Eigen::VectorXd eval(std::span<const double> x) const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(size()));
    for (std::size_t i = 0; i < size(); ++i) v(static_cast<Eigen::Index>(i)) = monomials[i].eval(x);
    return v;
  }
};

namespace detail {

inline Monomial half_floor(const Monomial& m) {
  std::vector<Monomial::Factor> f;
  for (const auto& [v, e] : m.factors())
    if (e / 2) f.emplace_back(v, e / 2);
  return Monomial(std::move(f));
}

}  // namespace detail

// {1, x_1..x_n}, then for every constraint monomial not yet a pairwise
// product (in graded-lex order) add floor(mu/2) and mu - floor(mu/2).
inline MonomialBasis build_basis(std::size_t n, const std::set<Monomial>& constraint_monomials) {
  MonomialBasis b;
  b.add(Monomial{});
  for (std::uint32_t i = 0; i < n; ++i) b.add(Monomial::variable(i));
  for (const auto& mu : constraint_monomials) {
    if (b.covers(mu)) continue;
    const Monomial lo = detail::half_floor(mu);
    b.add(lo);
    b.add(mu.divide(lo));
  }
  return b;
}

// Linear functional on moment vectors: sum_k coeff_k y_k.
using Functional = std::vector<std::pair<std::size_t, double>>;

inline double apply_functional(const Functional& f, const std::vector<double>& y) {
  double s = 0.0;
  for (const auto& [k, c] : f) s += c * y[k];
  return s;
}

struct RelaxedProblem {
  std::size_t n{0};
  MonomialBasis basis;
  std::vector<Monomial> moments;          // distinct entries of m m^T; moments[0] = 1
  std::map<Monomial, std::size_t> moment_index;
  std::vector<Interval> moment_bounds;    // lifted box, per moment
  Functional G;                           // alpha
  std::vector<Functional> F;              // V = sum c_j F_j
  std::vector<Functional> Gq;             // per mode decrease target (eps_q phi_q or alpha_Q)
  std::vector<std::vector<Functional>> Fq;  // per mode, per coefficient: -Vdot_q = sum c_j Fq_j
  double threshold{0.0};                  // <G, Z> > threshold
  std::vector<Polynomial> template_polys;
  Polynomial alpha;
  std::vector<Polynomial> decay;
  std::vector<std::vector<Polynomial>> neg_lie;  // -L_{f_q} m_j

  [[nodiscard]] std::size_t dim() const { return basis.size(); }
  [[nodiscard]] std::size_t num_modes() const { return Fq.size(); }
  [[nodiscard]] std::size_t num_coeffs() const { return F.size(); }

  [[nodiscard]] Functional functional(const Polynomial& p) const {
    Functional f;
    for (const auto& [m, c] : p.terms()) {
      auto it = moment_index.find(m);
      if (it == moment_index.end()) throw Error("monomial not representable in the relaxation basis");
      f.emplace_back(it->second, c);
    }
    return f;
  }

  // Moment vector read off a matrix, averaging aliased entries.
  [[nodiscard]] std::vector<double> moments_of(const Eigen::MatrixXd& Z) const {
    std::vector<double> y(moments.size(), 0.0);
    for (std::size_t k = 0; k < moments.size(); ++k) {
      const auto& pairs = basis.pair_table.at(moments[k]);
      double s = 0.0;
      for (const auto& [i, j] : pairs) s += 0.5 * (Z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) +
                                                   Z(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)));
      y[k] = s / static_cast<double>(pairs.size());
    }
    return y;
  }

  // Symmetric A with <A, m m^T> = p; coefficients split equally among aliases.
  [[nodiscard]] Eigen::MatrixXd gram(const Functional& f) const {
    const auto s = static_cast<Eigen::Index>(dim());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(s, s);
    for (const auto& [k, c] : f) {
      const auto& pairs = basis.pair_table.at(moments[k]);
      const double share = c / static_cast<double>(pairs.size());
      for (const auto& [i, j] : pairs) {
        const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
        if (a == b) {
          A(a, a) += share;
        } else {
          A(a, b) += 0.5 * share;
          A(b, a) += 0.5 * share;
        }
      }
    }
    return A;
  }

  [[nodiscard]] Eigen::MatrixXd lift(std::span<const double> x) const {
    const Eigen::VectorXd m = basis.eval(x);
    return m * m.transpose();
  }

  [[nodiscard]] Interval entry_bounds(std::size_t i, std::size_t j) const {
    return moment_bounds[moment_index.at(basis.monomials[i] * basis.monomials[j])];
  }

  [[nodiscard]] bool in_lifted_box(const Eigen::MatrixXd& Z, double tol) const {
    for (std::size_t i = 0; i < dim(); ++i)
      for (std::size_t j = i; j < dim(); ++j) {
        const Interval iv = entry_bounds(i, j);
        const double z = Z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        if (z < iv.lo - tol || z > iv.hi + tol) return false;
      }
    return true;
  }
};

inline Eigen::MatrixXd lift_point(const MonomialBasis& b, std::span<const double> x) {
  const Eigen::VectorXd m = b.eval(x);
  return m * m.transpose();
}

// Builds the relaxed constraint data for a switched plant. `decay[q]` is the
// right-hand side of the mode condition (eps_q phi_q, or alpha_Q when eps_q = 0).
inline RelaxedProblem assemble(const SwitchedPlant& plant, const ClfTemplate& tmpl, const Polynomial& alpha,
                               const std::vector<Polynomial>& decay, double threshold) {
  if (tmpl.monomials.empty()) throw Error("template is empty");
  if (decay.size() != plant.modes.size()) throw DimensionError("one decay polynomial per mode required");
  const std::size_t n = plant.n();
  RelaxedProblem r;
  r.n = n;
  r.threshold = threshold;
  r.alpha = alpha;
  r.decay = decay;
  for (const auto& m : tmpl.monomials) r.template_polys.push_back(Polynomial::monomial(n, m));
  r.neg_lie.resize(plant.modes.size());
  for (std::size_t q = 0; q < plant.modes.size(); ++q)
    for (const auto& v : r.template_polys) r.neg_lie[q].push_back(-lie_derivative(v, plant.modes[q].field));

  std::set<Monomial> mons;
  auto collect = [&](const Polynomial& p) {
    for (const auto& [m, c] : p.terms()) mons.insert(m);
  };
  for (const auto& v : r.template_polys) collect(v);
  collect(alpha);
  for (const auto& d : decay) collect(d);
  for (const auto& row : r.neg_lie)
    for (const auto& p : row) collect(p);
  r.basis = build_basis(n, mons);

  const auto box = plant.domain.intervals();
  for (const auto& [m, pairs] : r.basis.pair_table) {
    r.moment_index[m] = r.moments.size();
    r.moments.push_back(m);
    r.moment_bounds.push_back(m.eval(std::span<const Interval>(box)));
  }
  // graded-lex map order puts the constant first
  if (!r.moments.front().is_constant()) throw Error("moment ordering lost the constant monomial");

  r.G = r.functional(alpha);
  for (const auto& v : r.template_polys) r.F.push_back(r.functional(v));
  for (const auto& d : decay) r.Gq.push_back(r.functional(d));
  r.Fq.resize(plant.modes.size());
  for (std::size_t q = 0; q < plant.modes.size(); ++q)
    for (const auto& p : r.neg_lie[q]) r.Fq[q].push_back(r.functional(p));
  return r;
}

inline nlohmann::json relaxation_to_json(const RelaxedProblem& r, const std::vector<std::string>& names) {
  auto mat = [](const Eigen::MatrixXd& A) {
    auto rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
      auto row = nlohmann::json::array();
      for (Eigen::Index j = 0; j < A.cols(); ++j) row.push_back(A(i, j));
      rows.push_back(row);
    }
    return rows;
  };
  nlohmann::json j;
  auto basis = nlohmann::json::array();
  for (const auto& m : r.basis.monomials) basis.push_back(to_string(m, names));
  j["basis"] = basis;
  auto bounds = nlohmann::json::array();
  for (std::size_t k = 0; k < r.moments.size(); ++k)
    bounds.push_back({{"monomial", to_string(r.moments[k], names)},
                      {"lower", r.moment_bounds[k].lo},
                      {"upper", r.moment_bounds[k].hi}});
  j["lifted_box"] = bounds;
  j["G"] = mat(r.gram(r.G));
  auto F = nlohmann::json::array();
  for (const auto& f : r.F) F.push_back(mat(r.gram(f)));
  j["F"] = F;
  auto modes = nlohmann::json::array();
  for (std::size_t q = 0; q < r.num_modes(); ++q) {
    auto fq = nlohmann::json::array();
    for (const auto& f : r.Fq[q]) fq.push_back(mat(r.gram(f)));
    modes.push_back({{"Gq", mat(r.gram(r.Gq[q]))}, {"Fq", fq}});
  }
  j["modes"] = modes;
  j["threshold"] = r.threshold;
  return j;
}

}  // namespace clf
