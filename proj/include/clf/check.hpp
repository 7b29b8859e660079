#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "clf/relaxation.hpp"
#include "clf/sdp.hpp"

namespace clf {

struct CheckTolerances {
  sdp::Tolerances solver{};
  double strict{1e-6};  // <G, Z> >= threshold + strict * (largest coefficient of G)
  double margin{1e-6};  // gamma above this is a counterexample
};

enum class CheckOutcome { NoCounterexample, Counterexample, NumericalFailure };

struct ProgramResult {
  sdp::Status status{sdp::Status::NumericalFailure};
  double gamma{0.0};
  Eigen::MatrixXd Z;
  int iterations{0};
  std::string detail;
};

struct CheckReport {
  CheckOutcome outcome{CheckOutcome::NoCounterexample};
  int violated{0};  // 1: positivity program, 2: decrease program
  Eigen::MatrixXd witness;
  ProgramResult positivity;
  ProgramResult decrease;
  std::string detail;
};

namespace detail {

inline void add_functional(std::map<std::size_t, double>& acc, const Functional& f, double scale) {
  for (const auto& [k, c] : f) acc[k] += scale * c;
}

// Moment-space program: one variable per non-constant moment plus gamma.
inline sdp::Problem moment_program(const RelaxedProblem& r) {
  sdp::Problem p;
  p.dim = static_cast<int>(r.dim());
  p.base = Eigen::MatrixXd::Zero(p.dim, p.dim);
  p.base(0, 0) = 1.0;
  for (std::size_t k = 1; k < r.moments.size(); ++k) {
    sdp::SparseSym b;
    for (const auto& [i, j] : r.basis.pair_table.at(r.moments[k]))
      b.push_back({static_cast<int>(i), static_cast<int>(j), 1.0});
    p.add_var(std::move(b), r.moment_bounds[k].lo, r.moment_bounds[k].hi);
  }
  p.add_var({}, -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), 1.0);
  return p;
}

inline sdp::LinearRow row_from(const std::map<std::size_t, double>& acc, lp::Relation rel, double rhs,
                               int gamma_var, double gamma_coeff) {
  sdp::LinearRow row;
  row.rel = rel;
  row.rhs = rhs;
  for (const auto& [k, c] : acc) {
    if (k == 0)
      row.rhs -= c;  // constant moment is fixed at 1
    else if (c != 0.0)
      row.coeffs.emplace_back(static_cast<int>(k - 1), c);
  }
  if (gamma_coeff != 0.0) row.coeffs.emplace_back(gamma_var, gamma_coeff);
  return row;
}

// Bounds gamma by the largest magnitude any gamma row can take over the lifted
// box, which never cuts off the optimum but keeps the feasible set compact.
inline void bound_gamma(sdp::Problem& p, const RelaxedProblem& r) {
  const int g = p.num_vars() - 1;
  double big = 1.0;
  for (const auto& row : p.rows) {
    double s = std::abs(row.rhs);
    bool has_gamma = false;
    for (const auto& [k, a] : row.coeffs) {
      if (k == g) {
        has_gamma = true;
        continue;
      }
      s += std::abs(a) * r.moment_bounds[static_cast<std::size_t>(k) + 1].mag();
    }
    if (has_gamma) big = std::max(big, s);
  }
  p.lower[g] = -2.0 * big;
  p.upper[g] = 2.0 * big;
}

inline void add_exclusion(sdp::Problem& p, const RelaxedProblem& r, double strict) {
  std::map<std::size_t, double> acc;
  add_functional(acc, r.G, 1.0);
  double gscale = 0.0;
  for (const auto& [k, c] : r.G) gscale = std::max(gscale, std::abs(c));
  p.rows.push_back(row_from(acc, lp::Relation::GreaterEq, r.threshold + strict * gscale, -1, 0.0));
}

}  // namespace detail

// maximize gamma  s.t.  <F(c) - G, Z> <= -gamma, exclusion, lifted box, Z PSD
inline sdp::Problem positivity_program(const RelaxedProblem& r, const std::vector<double>& c, double strict) {
  sdp::Problem p = detail::moment_program(r);
  const int g = p.num_vars() - 1;
  std::map<std::size_t, double> acc;
  for (std::size_t j = 0; j < c.size(); ++j) detail::add_functional(acc, r.F[j], c[j]);
  detail::add_functional(acc, r.G, -1.0);
  p.rows.push_back(detail::row_from(acc, lp::Relation::LessEq, 0.0, g, 1.0));
  detail::add_exclusion(p, r, strict);
  detail::bound_gamma(p, r);
  return p;
}

// maximize gamma  s.t.  for all q: <F_q(c) - G_q, Z> <= -gamma, exclusion, lifted box, Z PSD
inline sdp::Problem decrease_program(const RelaxedProblem& r, const std::vector<double>& c, double strict) {
  sdp::Problem p = detail::moment_program(r);
  const int g = p.num_vars() - 1;
  for (std::size_t q = 0; q < r.num_modes(); ++q) {
    std::map<std::size_t, double> acc;
    for (std::size_t j = 0; j < c.size(); ++j) detail::add_functional(acc, r.Fq[q][j], c[j]);
    detail::add_functional(acc, r.Gq[q], -1.0);
    p.rows.push_back(detail::row_from(acc, lp::Relation::LessEq, 0.0, g, 1.0));
  }
  detail::add_exclusion(p, r, strict);
  detail::bound_gamma(p, r);
  return p;
}

inline ProgramResult run_program(const sdp::Problem& p, const CheckTolerances& tol) {
  ProgramResult out;
  auto sol = sdp::solve(p, tol.solver);
  if (sol.status != sdp::Status::Optimal && sol.status != sdp::Status::Infeasible) {
    // one retry with a longer iteration budget
    sdp::Tolerances t2 = tol.solver;
    t2.max_iter *= 2;
    sol = sdp::solve(p, t2);
  }
  out.status = sol.status;
  out.iterations = sol.iterations;
  out.detail = sol.detail;
  if (sol.status == sdp::Status::Optimal) {
    out.gamma = sol.y.back();
    out.Z = sol.Z;
  }
  return out;
}

inline CheckReport check_candidate(const RelaxedProblem& r, const std::vector<double>& c,
                                   const CheckTolerances& tol = {}) {
  if (c.size() != r.num_coeffs()) throw DimensionError("candidate length does not match the template");
  CheckReport rep;
  rep.positivity = run_program(positivity_program(r, c, tol.strict), tol);
  rep.decrease = run_program(decrease_program(r, c, tol.strict), tol);
  for (const auto* pr : {&rep.positivity, &rep.decrease}) {
    if (pr->status == sdp::Status::Infeasible) {
      // no admissible Z at all: nothing can violate the conditions
      continue;
    }
    if (pr->status != sdp::Status::Optimal) {
      rep.outcome = CheckOutcome::NumericalFailure;
      rep.detail = std::string("SDP ") + sdp::to_string(pr->status) + (pr->detail.empty() ? "" : ": " + pr->detail);
      return rep;
    }
  }
  const bool p1 = rep.positivity.status == sdp::Status::Optimal && rep.positivity.gamma > tol.margin;
  const bool p2 = rep.decrease.status == sdp::Status::Optimal && rep.decrease.gamma > tol.margin;
  if (!p1 && !p2) return rep;
  rep.outcome = CheckOutcome::Counterexample;
  if (p1 && (!p2 || rep.positivity.gamma >= rep.decrease.gamma)) {
    rep.violated = 1;
    rep.witness = rep.positivity.Z;
  } else {
    rep.violated = 2;
    rep.witness = rep.decrease.Z;
  }
  return rep;
}

// Plain-text dump: "dim K", base matrix, then per variable its sparse entries, rows and bounds.
inline std::string dump_sdp(const sdp::Problem& p) {
  std::ostringstream os;
  os.precision(17);
  os << "dim " << p.dim << " vars " << p.num_vars() << "\nbase\n";
  for (int i = 0; i < p.dim; ++i) {
    for (int j = 0; j < p.dim; ++j) os << (j ? " " : "") << p.base(i, j);
    os << "\n";
  }
  for (int k = 0; k < p.num_vars(); ++k) {
    os << "var " << k << " obj " << p.objective[k] << " lower " << p.lower[k] << " upper " << p.upper[k]
       << " entries";
    for (const auto& e : p.basis[k]) os << " " << e.i << "," << e.j << "," << e.v;
    os << "\n";
  }
  for (const auto& r : p.rows) {
    os << "row " << (r.rel == lp::Relation::LessEq ? "<=" : r.rel == lp::Relation::Equal ? "=" : ">=") << " " << r.rhs;
    for (const auto& [k, a] : r.coeffs) os << " " << k << ":" << a;
    os << "\n";
  }
  return os.str();
}

}  // namespace clf
