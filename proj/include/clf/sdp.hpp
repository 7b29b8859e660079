#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "clf/error.hpp"
#include "clf/lp.hpp"

// Small dense SDP solver for problems of the form
//
//   maximize    c . y
//   subject to  Z(y) = B0 + sum_k y_k B_k  is PSD
//               a_r . y  (<=, =, >=)  rhs_r
//               lower_k <= y_k <= upper_k
//
// solved as the dual of a block (SDP + LP) conic program by an infeasible
// primal-dual path-following method with the HKM direction and Mehrotra
// predictor-corrector steps.
namespace clf::sdp {

using lp::Relation;

struct SymEntry {
  int i;
  int j;
  double v;  // value at (i, j) and (j, i)
};
using SparseSym = std::vector<SymEntry>;

struct LinearRow {
  std::vector<std::pair<int, double>> coeffs;
  Relation rel{Relation::LessEq};
  double rhs{0.0};
};

struct Problem {
  int dim{0};
  Eigen::MatrixXd base;
  std::vector<SparseSym> basis;
  std::vector<double> objective;
  std::vector<LinearRow> rows;
  std::vector<double> lower;
  std::vector<double> upper;

  [[nodiscard]] int num_vars() const { return static_cast<int>(basis.size()); }

  int add_var(SparseSym b, double lo = -std::numeric_limits<double>::infinity(),
              double hi = std::numeric_limits<double>::infinity(), double obj = 0.0) {
    basis.push_back(std::move(b));
    lower.push_back(lo);
    upper.push_back(hi);
    objective.push_back(obj);
    return num_vars() - 1;
  }

  [[nodiscard]] Eigen::MatrixXd matrix(const std::vector<double>& y) const {
    Eigen::MatrixXd z = base;
    for (std::size_t k = 0; k < basis.size(); ++k)
      for (const auto& e : basis[k]) {
        z(e.i, e.j) += y[k] * e.v;
        if (e.i != e.j) z(e.j, e.i) += y[k] * e.v;
      }
    return z;
  }
};

// One variable per upper-triangle entry of Z, so that the constraints can be
// written entrywise: var(i, j) == Z(i, j).
struct EntrywiseProblem {
  Problem problem;
  std::vector<std::vector<int>> var;

  explicit EntrywiseProblem(int n) {
    problem.dim = n;
    problem.base = Eigen::MatrixXd::Zero(n, n);
    var.assign(n, std::vector<int>(n, -1));
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) var[i][j] = var[j][i] = problem.add_var({{i, j, 1.0}});
  }
};

enum class Status { Optimal, Infeasible, MaxIter, NumericalFailure };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::MaxIter: return "max_iter";
    case Status::NumericalFailure: return "numerical_failure";
  }
  return "?";
}

struct Tolerances {
  double feas{1e-7};
  double psd{1e-8};
  double gap{1e-6};
  int max_iter{200};
};

struct Solution {
  Status status{Status::NumericalFailure};
  std::vector<double> y;
  Eigen::MatrixXd Z;
  double objective{0.0};
  double primal_residual{0.0};  // worst linear-constraint violation in the original space
  double min_eig{0.0};
  double gap{0.0};
  double infeasibility_residual{0.0};
  int iterations{0};
  std::string detail;
};

namespace detail {

struct Entry {
  int a, b;
  double v;
};

// Conic data:  maximize b.t  s.t.  C - sum t_k A_k = S (PSD),  c_l - a_l.t = s_l >= 0.
struct Conic {
  int s{0};
  int K{0};
  Eigen::MatrixXd C;
  std::vector<std::vector<Entry>> A;  // full symmetric entry lists
  struct Row {
    std::vector<std::pair<int, double>> a;
    double c;
  };
  std::vector<Row> lp;
  Eigen::VectorXd b;
};

inline double inner(const Eigen::MatrixXd& X, const std::vector<Entry>& A) {
  double s = 0.0;
  for (const auto& e : A) s += e.v * X(e.a, e.b);
  return s;
}

inline std::vector<Entry> full_entries(const SparseSym& m) {
  std::vector<Entry> out;
  for (const auto& e : m) {
    if (e.v == 0.0) continue;
    out.push_back({e.i, e.j, e.v});
    if (e.i != e.j) out.push_back({e.j, e.i, e.v});
  }
  return out;
}

// Largest step alpha in (0, inf] keeping X + alpha dX PSD, given the Cholesky factor of X.
inline double max_step(const Eigen::LLT<Eigen::MatrixXd>& llt, const Eigen::MatrixXd& dX) {
  if (dX.rows() == 0) return std::numeric_limits<double>::infinity();
  const auto& L = llt.matrixL();
  Eigen::MatrixXd T = L.solve(dX);
  T = L.solve(T.transpose()).transpose();
  T = 0.5 * (T + T.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  return lmin >= 0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

inline double max_step_lp(const Eigen::VectorXd& x, const Eigen::VectorXd& dx) {
  double a = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (dx(i) < 0) a = std::min(a, -x(i) / dx(i));
  return a;
}

struct IpmResult {
  Status status{Status::NumericalFailure};
  Eigen::VectorXd t;
  double pobj{0}, dobj{0};
  double infeas_residual{0};
  int iterations{0};
  std::string detail;
};

class Ipm {
 public:
  Ipm(const Conic& d, const Tolerances& tol) : d_(d), tol_(tol) {}

  IpmResult run() {
    const int s = d_.s, K = d_.K, L = static_cast<int>(d_.lp.size());
    const double N = s + L;
    IpmResult res;
    if (N == 0) {
      res.status = Status::NumericalFailure;
      res.detail = "empty cone";
      return res;
    }

    double cnorm = d_.C.norm();
    for (const auto& r : d_.lp) cnorm = std::max(cnorm, std::abs(r.c));
    double anorm = 0.0;
    for (const auto& Ak : d_.A) {
      double f = 0;
      for (const auto& e : Ak) f += e.v * e.v;
      anorm = std::max(anorm, std::sqrt(f));
    }
    const double bnorm = d_.b.norm();
    const double xi = std::max({10.0, std::sqrt(N), bnorm / (1.0 + anorm) * std::sqrt(N)});
    const double eta = std::max({10.0, std::sqrt(N), cnorm, anorm});

    Eigen::MatrixXd X = xi * Eigen::MatrixXd::Identity(s, s);
    Eigen::MatrixXd S = eta * Eigen::MatrixXd::Identity(s, s);
    Eigen::VectorXd x = Eigen::VectorXd::Constant(L, xi);
    Eigen::VectorXd sl = Eigen::VectorXd::Constant(L, eta);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(K);

    const double bscale = 1.0 + bnorm;
    std::optional<Eigen::VectorXd> fallback;
    double fallback_gap = 0.0, fallback_p = 0.0, fallback_d = 0.0;
    auto give_up = [&](Status st, const char* why) {
      if (fallback) {
        res.status = Status::Optimal;
        res.t = *fallback;
        res.pobj = fallback_p;
        res.dobj = fallback_d;
        return res;
      }
      res.status = st;
      res.detail = why;
      return res;
    };
    const double cscale = 1.0 + cnorm;

    for (int it = 0; it < tol_.max_iter; ++it) {
      res.iterations = it;
      // residuals
      Eigen::VectorXd Rp = d_.b - apply_A(X, x);
      Eigen::MatrixXd Rd = d_.C - S;
      subtract_At(y, Rd);
      Eigen::VectorXd rd = lp_c() - sl - lp_At(y);

      const double pobj = primal_obj(X, x);
      const double dobj = d_.b.dot(y);
      const double mu = ((X.array() * S.array()).sum() + x.dot(sl)) / N;
      const double pinf = Rp.norm() / bscale;
      const double dinf = std::sqrt(Rd.squaredNorm() + rd.squaredNorm()) / cscale;
      const double relgap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
      res.pobj = pobj;
      res.dobj = dobj;
      res.t = y;

      if (pinf < 1e-8 && dinf < 1e-9 && relgap < tol_.gap * 0.1) {
        res.status = Status::Optimal;
        return res;
      }
      // Near-optimal fallback if later iterations stall numerically.
      if (pinf < 1e-6 && dinf < 1e-9 && relgap < tol_.gap && (!fallback || relgap < fallback_gap)) {
        fallback = y;
        fallback_gap = relgap;
        fallback_p = pobj;
        fallback_d = dobj;
      }
      // Primal ray: A(X) ~ 0 with negative cost certifies the LMI side is empty.
      if (pobj < 0) {
        const double ray = apply_A(X, x).norm() / -pobj;
        if (ray < 1e-8 && dinf > 1e-6) {
          res.status = Status::Infeasible;
          res.infeas_residual = ray;
          return res;
        }
      }
      // Dual ray: the objective grows without the constraints catching up.
      if (dobj > 0 && pinf > 1e-6) {
        Eigen::MatrixXd ray_s = Eigen::MatrixXd::Zero(s, s);
        subtract_At(y, ray_s);
        const Eigen::VectorXd ry = (-lp_At(y)).cwiseMax(0.0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(-ray_s, Eigen::EigenvaluesOnly);
        const double neg = s ? std::max(0.0, -es.eigenvalues().minCoeff()) : 0.0;
        if ((neg + ry.norm()) / dobj < 1e-10 && dobj > 1e10) {
          res.status = Status::NumericalFailure;
          res.detail = "objective unbounded";
          return res;
        }
      }

      Eigen::LLT<Eigen::MatrixXd> lltS(S);
      Eigen::LLT<Eigen::MatrixXd> lltX(X);
      if (lltS.info() != Eigen::Success || lltX.info() != Eigen::Success)
        return give_up(Status::NumericalFailure, "iterate lost positive definiteness");
      const Eigen::MatrixXd Sinv = lltS.solve(Eigen::MatrixXd::Identity(s, s));

      Eigen::MatrixXd M = schur(X, Sinv, x, sl);
      const double reg = 1e-14 * std::max(1.0, M.diagonal().cwiseAbs().maxCoeff());
      M.diagonal().array() += reg;
      Eigen::LLT<Eigen::MatrixXd> lltM(M);
      if (lltM.info() != Eigen::Success) return give_up(Status::NumericalFailure, "Schur complement not positive definite");

      // Predictor (sigma = 0).
      Eigen::MatrixXd dX, dS;
      Eigen::VectorXd dx, ds, dy;
      const Eigen::MatrixXd XRdSinv = X * Rd * Sinv;
      Eigen::VectorXd base_rhs = d_.b + apply_A(sym(XRdSinv), (x.array() * rd.array() / sl.array()).matrix());
      direction(lltM, base_rhs, X, Sinv, x, sl, Rd, rd, 0.0, mu, nullptr, dX, dS, dx, ds, dy);
      double ap = std::min(1.0, std::min(max_step(lltX, dX), max_step_lp(x, dx)));
      double ad = std::min(1.0, std::min(max_step(lltS, dS), max_step_lp(sl, ds)));
      const double mu_aff = (((X + ap * dX).array() * (S + ad * dS).array()).sum() +
                             (x + ap * dx).dot(sl + ad * ds)) /
                            N;
      const double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);

      // Corrector.
      Corr corr{dX * dS * Sinv, (dx.array() * ds.array() / sl.array()).matrix()};
      direction(lltM, base_rhs, X, Sinv, x, sl, Rd, rd, sigma, mu, &corr, dX, dS, dx, ds, dy);
      ap = std::min(1.0, 0.98 * std::min(max_step(lltX, dX), max_step_lp(x, dx)));
      ad = std::min(1.0, 0.98 * std::min(max_step(lltS, dS), max_step_lp(sl, ds)));
      if (!(ap > 1e-14) || !(ad > 1e-14) || !std::isfinite(ap) || !std::isfinite(ad))
        return give_up(Status::NumericalFailure, "step length collapsed");
      X += ap * dX;
      x += ap * dx;
      S += ad * dS;
      sl += ad * ds;
      y += ad * dy;
      X = sym(X);
      S = sym(S);
    }
    res.t = y;
    return give_up(Status::MaxIter, "");
  }

 private:
  struct Corr {
    Eigen::MatrixXd sdp;  // dX_aff dS_aff S^-1
    Eigen::VectorXd lp;   // dx_aff ds_aff / s
  };

  static Eigen::MatrixXd sym(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

  [[nodiscard]] double primal_obj(const Eigen::MatrixXd& X, const Eigen::VectorXd& x) const {
    double v = (d_.C.array() * X.array()).sum();
    for (std::size_t l = 0; l < d_.lp.size(); ++l) v += d_.lp[l].c * x(static_cast<Eigen::Index>(l));
    return v;
  }

  [[nodiscard]] Eigen::VectorXd apply_A(const Eigen::MatrixXd& X, const Eigen::VectorXd& x) const {
    Eigen::VectorXd out(d_.K);
    for (int k = 0; k < d_.K; ++k) out(k) = inner(X, d_.A[k]);
    for (std::size_t l = 0; l < d_.lp.size(); ++l)
      for (const auto& [k, a] : d_.lp[l].a) out(k) += a * x(static_cast<Eigen::Index>(l));
    return out;
  }

  // m -= sum_k y_k A_k (matrix block only)
  void subtract_At(const Eigen::VectorXd& y, Eigen::MatrixXd& m) const {
    for (int k = 0; k < d_.K; ++k) {
      if (y(k) == 0.0) continue;
      for (const auto& e : d_.A[k]) m(e.a, e.b) -= y(k) * e.v;
    }
  }

  [[nodiscard]] Eigen::VectorXd lp_c() const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(d_.lp.size()));
    for (std::size_t l = 0; l < d_.lp.size(); ++l) v(static_cast<Eigen::Index>(l)) = d_.lp[l].c;
    return v;
  }

  [[nodiscard]] Eigen::MatrixXd schur(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Sinv, const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& sl) const {
    const int K = d_.K;
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(K, K);
    // M_ij = tr(A_i X A_j S^-1) = sum A_i[a,b] A_j[c,d] X[b,c] Sinv[d,a]
    for (int i = 0; i < K; ++i) {
      const auto& Ai = d_.A[i];
      if (Ai.empty()) continue;
      for (int j = i; j < K; ++j) {
        const auto& Aj = d_.A[j];
        double acc = 0.0;
        for (const auto& e : Ai)
          for (const auto& f : Aj) acc += e.v * f.v * X(e.b, f.a) * Sinv(f.b, e.a);
        M(i, j) = acc;
      }
    }
    for (std::size_t l = 0; l < d_.lp.size(); ++l) {
      const double w = x(static_cast<Eigen::Index>(l)) / sl(static_cast<Eigen::Index>(l));
      const auto& row = d_.lp[l].a;
      for (const auto& [i, ai] : row)
        for (const auto& [j, aj] : row)
          if (i <= j) M(i, j) += w * ai * aj;
    }
    M.triangularView<Eigen::StrictlyLower>() = M.transpose().triangularView<Eigen::StrictlyLower>();
    return M;
  }

  void direction(const Eigen::LLT<Eigen::MatrixXd>& lltM, const Eigen::VectorXd& base_rhs, const Eigen::MatrixXd& X,
                 const Eigen::MatrixXd& Sinv, const Eigen::VectorXd& x, const Eigen::VectorXd& sl,
                 const Eigen::MatrixXd& Rd, const Eigen::VectorXd& rd, double sigma, double mu, const Corr* corr,
                 Eigen::MatrixXd& dX, Eigen::MatrixXd& dS, Eigen::VectorXd& dx, Eigen::VectorXd& ds,
                 Eigen::VectorXd& dy) const {
    Eigen::VectorXd rhs = base_rhs;
    if (sigma != 0.0) rhs -= sigma * mu * apply_A(Sinv, sl.cwiseInverse());
    if (corr) rhs += apply_A(sym(corr->sdp), corr->lp);
    dy = lltM.solve(rhs);
    dS = Rd;
    subtract_At(dy, dS);
    ds = rd - lp_At(dy);
    dX = sigma * mu * Sinv - X - X * dS * Sinv;
    if (corr) dX -= corr->sdp;
    dX = sym(dX);
    dx = (sigma * mu / sl.array() - x.array() - x.array() * ds.array() / sl.array()).matrix();
    if (corr) dx -= corr->lp;
  }

  [[nodiscard]] Eigen::VectorXd lp_At(const Eigen::VectorXd& y) const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(d_.lp.size()));
    for (std::size_t l = 0; l < d_.lp.size(); ++l) {
      double acc = 0.0;
      for (const auto& [k, a] : d_.lp[l].a) acc += a * y(k);
      v(static_cast<Eigen::Index>(l)) = acc;
    }
    return v;
  }

  const Conic& d_;
  Tolerances tol_;
};

}  // namespace detail

inline Solution solve(const Problem& p, const Tolerances& tol = {}) {
  const int n = p.dim;
  const int K = p.num_vars();
  if (n < 1) throw DimensionError("SDP dimension must be at least 1");
  if (p.base.rows() != n || p.base.cols() != n) throw DimensionError("SDP base matrix has the wrong size");
  if (static_cast<int>(p.objective.size()) != K || static_cast<int>(p.lower.size()) != K ||
      static_cast<int>(p.upper.size()) != K)
    throw DimensionError("SDP variable data of inconsistent length");
  for (const auto& b : p.basis)
    for (const auto& e : b)
      if (e.i < 0 || e.j < 0 || e.i >= n || e.j >= n) throw DimensionError("SDP basis entry out of range");
  for (const auto& r : p.rows)
    for (const auto& [k, a] : r.coeffs)
      if (k < 0 || k >= K) throw DimensionError("SDP row references an unknown variable");

  Solution sol;

  // 1. Equalities (rows and fixed variables): y = y0 + N t.
  std::vector<std::pair<Eigen::VectorXd, double>> eqs;
  for (const auto& r : p.rows) {
    if (r.rel != Relation::Equal) continue;
    Eigen::VectorXd a = Eigen::VectorXd::Zero(K);
    for (const auto& [k, v] : r.coeffs) a(k) += v;
    eqs.emplace_back(a, r.rhs);
  }
  for (int k = 0; k < K; ++k) {
    if (p.lower[k] > p.upper[k]) {
      sol.status = Status::Infeasible;
      sol.detail = "variable bounds are inconsistent";
      return sol;
    }
    if (p.lower[k] == p.upper[k]) {
      Eigen::VectorXd a = Eigen::VectorXd::Zero(K);
      a(k) = 1.0;
      eqs.emplace_back(a, p.lower[k]);
    }
  }
  Eigen::VectorXd y0 = Eigen::VectorXd::Zero(K);
  Eigen::MatrixXd Nsp;
  const bool identity = eqs.empty();
  if (!identity) {
    Eigen::MatrixXd E(static_cast<Eigen::Index>(eqs.size()), K);
    Eigen::VectorXd e(static_cast<Eigen::Index>(eqs.size()));
    for (std::size_t r = 0; r < eqs.size(); ++r) {
      E.row(static_cast<Eigen::Index>(r)) = eqs[r].first.transpose();
      e(static_cast<Eigen::Index>(r)) = eqs[r].second;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(E);
    lu.setThreshold(1e-12);
    y0 = lu.solve(e);
    if ((E * y0 - e).norm() > 1e-9 * (1.0 + e.norm())) {
      sol.status = Status::Infeasible;
      sol.detail = "equality constraints are inconsistent";
      sol.infeasibility_residual = (E * y0 - e).norm();
      return sol;
    }
    Nsp = lu.rank() == K ? Eigen::MatrixXd(K, 0) : Eigen::MatrixXd(lu.kernel());
  }
  const int T = identity ? K : static_cast<int>(Nsp.cols());

  // 2. Variable scaling (identity case only: scale by bound magnitude).
  Eigen::VectorXd vscale = Eigen::VectorXd::Ones(T);
  if (identity)
    for (int k = 0; k < K; ++k) {
      const double m = std::max(std::isfinite(p.lower[k]) ? std::abs(p.lower[k]) : 0.0,
                                std::isfinite(p.upper[k]) ? std::abs(p.upper[k]) : 0.0);
      if (m > 0) vscale(k) = m;
    }

  // Basis matrices in t-space, dense where the nullspace mixes them.
  Eigen::MatrixXd base = p.base;
  for (int k = 0; k < K; ++k)
    if (y0(k) != 0.0)
      for (const auto& e : p.basis[k]) {
        base(e.i, e.j) += y0(k) * e.v;
        if (e.i != e.j) base(e.j, e.i) += y0(k) * e.v;
      }
  std::vector<SparseSym> tb(T);
  if (identity) {
    for (int k = 0; k < K; ++k) {
      tb[k] = p.basis[k];
      for (auto& e : tb[k]) e.v *= vscale(k);
    }
  } else {
    for (int t = 0; t < T; ++t) {
      Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
      for (int k = 0; k < K; ++k) {
        if (Nsp(k, t) == 0.0) continue;
        for (const auto& e : p.basis[k]) {
          m(e.i, e.j) += Nsp(k, t) * e.v;
          if (e.i != e.j) m(e.j, e.i) += Nsp(k, t) * e.v;
        }
      }
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
          if (std::abs(m(i, j)) > 1e-15) tb[t].push_back({i, j, m(i, j)});
    }
  }

  // Inequality rows in t-space: a.t <= c.
  struct Ineq {
    std::vector<std::pair<int, double>> a;
    double c;
  };
  std::vector<Ineq> ineqs;
  auto add_ineq = [&](const Eigen::VectorXd& a_y, double rhs, double sign) -> bool {
    // sign * (a_y . y) <= sign * rhs
    const double c = sign * (rhs - a_y.dot(y0));
    Ineq row;
    double norm = 0.0;
    if (identity) {
      for (int k = 0; k < K; ++k)
        if (a_y(k) != 0.0) row.a.emplace_back(k, sign * a_y(k) * vscale(k));
    } else {
      const Eigen::VectorXd at = Nsp.transpose() * a_y;
      for (int t = 0; t < T; ++t)
        if (std::abs(at(t)) > 1e-15) row.a.emplace_back(t, sign * at(t));
    }
    for (const auto& [k, v] : row.a) norm += v * v;
    norm = std::sqrt(norm);
    if (norm < 1e-13) return c >= -1e-9 * (1.0 + std::abs(rhs));
    for (auto& [k, v] : row.a) v /= norm;
    row.c = c / norm;
    ineqs.push_back(std::move(row));
    return true;
  };
  for (const auto& r : p.rows) {
    if (r.rel == Relation::Equal) continue;
    Eigen::VectorXd a = Eigen::VectorXd::Zero(K);
    for (const auto& [k, v] : r.coeffs) a(k) += v;
    if (!add_ineq(a, r.rhs, r.rel == Relation::LessEq ? 1.0 : -1.0)) {
      sol.status = Status::Infeasible;
      sol.detail = "constant inequality row is violated";
      return sol;
    }
  }
  for (int k = 0; k < K; ++k) {
    if (p.lower[k] == p.upper[k]) continue;
    Eigen::VectorXd a = Eigen::VectorXd::Zero(K);
    a(k) = 1.0;
    if (std::isfinite(p.upper[k]) && !add_ineq(a, p.upper[k], 1.0)) {
      sol.status = Status::Infeasible;
      return sol;
    }
    if (std::isfinite(p.lower[k]) && !add_ineq(a, p.lower[k], -1.0)) {
      sol.status = Status::Infeasible;
      return sol;
    }
  }

  // 3. Congruence scaling of the matrix block by the diagonal upper bounds.
  Eigen::VectorXd dscale = Eigen::VectorXd::Ones(n);
  if (identity) {
    for (int i = 0; i < n; ++i) {
      double ub = base(i, i);
      bool finite = true;
      for (int k = 0; k < K && finite; ++k)
        for (const auto& e : p.basis[k])
          if (e.i == i && e.j == i) {
            const double lo = p.lower[k] * e.v, hi = p.upper[k] * e.v;
            const double m = std::max(lo, hi);
            if (!std::isfinite(m)) finite = false;
            else ub += m;
          }
      if (finite && ub > 1e-12) dscale(i) = 1.0 / std::sqrt(ub);
    }
  }

  detail::Conic d;
  d.s = n;
  d.K = T;
  d.C = dscale.asDiagonal() * base * dscale.asDiagonal();
  d.A.resize(T);
  for (int t = 0; t < T; ++t) {
    SparseSym neg = tb[t];
    for (auto& e : neg) e.v = -e.v * dscale(e.i) * dscale(e.j);
    d.A[t] = detail::full_entries(neg);
  }
  for (auto& r : ineqs) d.lp.push_back({std::move(r.a), r.c});
  d.b = Eigen::VectorXd::Zero(T);
  {
    Eigen::VectorXd cy = Eigen::Map<const Eigen::VectorXd>(p.objective.data(), K);
    if (identity)
      d.b = cy.cwiseProduct(vscale);
    else
      d.b = Nsp.transpose() * cy;
  }
  const double bmax = d.b.size() ? d.b.cwiseAbs().maxCoeff() : 0.0;
  const double oscale = bmax > 0 ? bmax : 1.0;
  d.b /= oscale;

  // 4. Solve.
  detail::IpmResult r;
  if (T == 0) {
    r.status = Status::Optimal;
    r.t = Eigen::VectorXd(0);
  } else {
    r = detail::Ipm(d, tol).run();
  }
  sol.iterations = r.iterations;
  sol.detail = r.detail;
  sol.infeasibility_residual = r.infeas_residual;
  if (r.status == Status::Infeasible || r.status == Status::NumericalFailure) {
    sol.status = r.status;
    return sol;
  }

  // 5. Map back and measure residuals in the original space.
  Eigen::VectorXd y = y0;
  if (identity)
    y += r.t.cwiseProduct(vscale);
  else if (T > 0)
    y += Nsp * r.t;
  sol.y.assign(y.data(), y.data() + K);
  sol.Z = p.matrix(sol.y);
  sol.objective = 0.0;
  for (int k = 0; k < K; ++k) sol.objective += p.objective[k] * sol.y[k];

  double viol = 0.0;
  for (const auto& row : p.rows) {
    double v = 0.0;
    for (const auto& [k, a] : row.coeffs) v += a * sol.y[k];
    double amax = 1.0;
    for (const auto& [k, a] : row.coeffs) amax = std::max(amax, std::abs(a));
    double e = 0.0;
    if (row.rel == Relation::LessEq) e = v - row.rhs;
    else if (row.rel == Relation::GreaterEq) e = row.rhs - v;
    else e = std::abs(v - row.rhs);
    viol = std::max(viol, e / amax);
  }
  for (int k = 0; k < K; ++k) {
    if (std::isfinite(p.upper[k])) viol = std::max(viol, sol.y[k] - p.upper[k]);
    if (std::isfinite(p.lower[k])) viol = std::max(viol, p.lower[k] - sol.y[k]);
  }
  sol.primal_residual = viol;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sol.Z, Eigen::EigenvaluesOnly);
  sol.min_eig = es.eigenvalues().minCoeff();
  sol.gap = std::abs(r.pobj - r.dobj) * oscale;

  if (r.status == Status::MaxIter) {
    sol.status = Status::MaxIter;
    return sol;
  }
  const double zscale = std::max(1.0, sol.Z.diagonal().cwiseAbs().maxCoeff());
  if (viol > tol.feas || sol.min_eig < -tol.psd * zscale) {
    sol.status = Status::NumericalFailure;
    sol.detail = "solution misses tolerances (residual " + std::to_string(viol) + ", min eig " +
                 std::to_string(sol.min_eig) + ")";
    return sol;
  }
  sol.status = Status::Optimal;
  return sol;
}

}  // namespace clf::sdp
