#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "clf/error.hpp"

namespace clf::lp {

enum class Relation { LessEq, Equal, GreaterEq };

struct Row {
  std::vector<double> coeffs;
  Relation rel{Relation::LessEq};
  double rhs{0.0};
};

// maximize objective . x  subject to rows, x >= 0.
struct Problem {
  std::size_t num_vars{0};
  std::vector<double> objective;
  std::vector<Row> rows;
};

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

struct Solution {
  Status status{Status::Infeasible};
  std::vector<double> x;
  double value{0.0};
  std::size_t pivots{0};
};

namespace detail {

// Dense tableau. Column layout: [structural | slack/surplus | artificial | rhs].
class Tableau {
 public:
  Tableau(const Problem& p, double tol) : tol_(tol) {
    m_ = p.rows.size();
    n_ = p.num_vars;
    std::size_t slacks = 0, artificials = 0;
    for (const auto& r : p.rows) {
      if (r.coeffs.size() != n_) throw DimensionError("LP row length does not match variable count");
      const bool flip = r.rhs < 0;
      const Relation rel = flip ? mirror(r.rel) : r.rel;
      if (rel != Relation::Equal) ++slacks;
      if (rel != Relation::LessEq) ++artificials;
    }
    art_begin_ = n_ + slacks;
    cols_ = art_begin_ + artificials;
    width_ = cols_ + 1;
    t_.assign((m_ + 1) * width_, 0.0);
    basis_.assign(m_, 0);

    std::size_t s = n_, a = art_begin_;
    for (std::size_t i = 0; i < m_; ++i) {
      const auto& r = p.rows[i];
      const bool flip = r.rhs < 0;
      const double sign = flip ? -1.0 : 1.0;
      const Relation rel = flip ? mirror(r.rel) : r.rel;
      for (std::size_t j = 0; j < n_; ++j) at(i, j) = sign * r.coeffs[j];
      at(i, cols_) = sign * r.rhs;
      if (rel == Relation::LessEq) {
        at(i, s) = 1.0;
        basis_[i] = s++;
      } else if (rel == Relation::GreaterEq) {
        at(i, s++) = -1.0;
        at(i, a) = 1.0;
        basis_[i] = a++;
      } else {
        at(i, a) = 1.0;
        basis_[i] = a++;
      }
    }
  }

  Solution solve(const std::vector<double>& objective, std::size_t max_pivots) {
    Solution sol;
    // Phase 1: maximize -sum(artificials).
    if (cols_ > art_begin_) {
      std::vector<double> c1(cols_, 0.0);
      for (std::size_t j = art_begin_; j < cols_; ++j) c1[j] = -1.0;
      set_objective(c1);
      const Status st = iterate(cols_, max_pivots, sol.pivots);
      if (st == Status::IterationLimit) {
        sol.status = st;
        return sol;
      }
      if (at(m_, cols_) > tol_ * 10) {  // holds the artificial sum
        sol.status = Status::Infeasible;
        return sol;
      }
      drive_out_artificials();
    }
    std::vector<double> c2(cols_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) c2[j] = objective[j];
    set_objective(c2);
    const Status st = iterate(art_begin_, max_pivots, sol.pivots);
    sol.status = st;
    sol.x.assign(n_, 0.0);
    for (std::size_t i = 0; i < m_; ++i)
      if (basis_[i] < n_) sol.x[basis_[i]] = at(i, cols_);
    sol.value = 0.0;
    for (std::size_t j = 0; j < n_; ++j) sol.value += objective[j] * sol.x[j];
    return sol;
  }

 private:
  static Relation mirror(Relation r) {
    if (r == Relation::LessEq) return Relation::GreaterEq;
    if (r == Relation::GreaterEq) return Relation::LessEq;
    return r;
  }
  double& at(std::size_t i, std::size_t j) { return t_[i * width_ + j]; }

  // Objective row holds reduced costs d_j = c_j - c_B B^-1 A_j; optimal when all <= tol.
  void set_objective(const std::vector<double>& c) {
    for (std::size_t j = 0; j <= cols_; ++j) at(m_, j) = j < cols_ ? c[j] : 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      const double cb = c[basis_[i]];
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j <= cols_; ++j) at(m_, j) -= cb * at(i, j);
    }
  }

  void pivot(std::size_t r, std::size_t c) {
    const double inv = 1.0 / at(r, c);
    double* prow = &t_[r * width_];
    for (std::size_t j = 0; j < width_; ++j) prow[j] *= inv;
    prow[c] = 1.0;
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i == r) continue;
      double* row = &t_[i * width_];
      const double f = row[c];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < width_; ++j) row[j] -= f * prow[j];
      row[c] = 0.0;
    }
    basis_[r] = c;
  }

  // Dantzig pricing, falling back to Bland's rule after a run of
  // degenerate pivots so cycling cannot occur.
  Status iterate(std::size_t allowed_cols, std::size_t max_pivots, std::size_t& pivots) {
    std::size_t degenerate_run = 0;
    for (;;) {
      const bool bland = degenerate_run > 50;
      std::size_t enter = allowed_cols;
      double best = tol_;
      for (std::size_t j = 0; j < allowed_cols; ++j) {
        const double d = at(m_, j);
        if (d > best) {
          enter = j;
          if (bland) break;
          best = d;
        }
      }
      if (enter == allowed_cols) return Status::Optimal;
      std::size_t leave = m_;
      double ratio = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m_; ++i) {
        const double a = at(i, enter);
        if (a <= tol_) continue;
        const double q = at(i, cols_) / a;
        if (leave == m_ || q < ratio - tol_) {
          ratio = q;
          leave = i;
        } else if (q <= ratio + tol_ && basis_[i] < basis_[leave]) {
          ratio = std::min(ratio, q);
          leave = i;
        }
      }
      if (leave == m_) return Status::Unbounded;
      degenerate_run = ratio <= tol_ ? degenerate_run + 1 : 0;
      pivot(leave, enter);
      if (++pivots >= max_pivots) return Status::IterationLimit;
    }
  }

  void drive_out_artificials() {
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < art_begin_) continue;
      std::size_t best = art_begin_;
      double mag = tol_;
      for (std::size_t j = 0; j < art_begin_; ++j)
        if (std::abs(at(i, j)) > mag) {
          mag = std::abs(at(i, j));
          best = j;
        }
      if (best < art_begin_) pivot(i, best);
      // otherwise the row is redundant; the artificial stays basic at zero
    }
  }

  double tol_;
  std::size_t m_{0}, n_{0}, cols_{0}, art_begin_{0}, width_{0};
  std::vector<double> t_;
  std::vector<std::size_t> basis_;
};

}  // namespace detail

inline Solution solve(const Problem& p, double tol = 1e-9, std::size_t max_pivots = 200000) {
  if (p.objective.size() != p.num_vars) throw DimensionError("LP objective length does not match variable count");
  detail::Tableau t(p, tol);
  return t.solve(p.objective, max_pivots);
}

}  // namespace clf::lp
