#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "clf/error.hpp"
#include "clf/lp.hpp"
#include "clf/relaxation.hpp"

namespace clf {

enum class WitnessOrigin { InitialVertex, Positivity, Decrease };

inline const char* to_string(WitnessOrigin o) {
  switch (o) {
    case WitnessOrigin::InitialVertex: return "initial-vertex";
    case WitnessOrigin::Positivity: return "sdp-counterexample/positivity";
    case WitnessOrigin::Decrease: return "sdp-counterexample/decrease";
  }
  return "?";
}

struct Witness {
  Eigen::MatrixXd Z;
  std::vector<double> moments;
  WitnessOrigin origin{WitnessOrigin::InitialVertex};
  std::size_t iteration{0};
};

// Linear rows instantiated at one witness: a . c >= b (+ tau ||a||).
struct WitnessRows {
  std::vector<double> pos_a;
  double pos_b{0.0};
  std::vector<std::vector<double>> mode_a;
  std::vector<double> mode_b;
};

inline WitnessRows witness_rows(const RelaxedProblem& r, const std::vector<double>& y) {
  WitnessRows w;
  for (const auto& f : r.F) w.pos_a.push_back(apply_functional(f, y));
  w.pos_b = apply_functional(r.G, y);
  for (std::size_t q = 0; q < r.num_modes(); ++q) {
    std::vector<double> a;
    for (const auto& f : r.Fq[q]) a.push_back(apply_functional(f, y));
    w.mode_a.push_back(std::move(a));
    w.mode_b.push_back(apply_functional(r.Gq[q], y));
  }
  return w;
}

struct WitnessCheck {
  bool ok{true};
  std::string reason;
};

inline WitnessCheck validate_witness(const RelaxedProblem& r, const Eigen::MatrixXd& Z, double tol) {
  if (Z.rows() != static_cast<Eigen::Index>(r.dim()) || Z.cols() != Z.rows()) return {false, "wrong size"};
  if ((Z - Z.transpose()).cwiseAbs().maxCoeff() > tol) return {false, "not symmetric"};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Z, Eigen::EigenvaluesOnly);
  const double scale = std::max(1.0, Z.diagonal().cwiseAbs().maxCoeff());
  if (es.eigenvalues().minCoeff() < -tol * scale) return {false, "not positive semidefinite"};
  if (!r.in_lifted_box(Z, tol * scale)) return {false, "outside the lifted box"};
  if (apply_functional(r.G, r.moments_of(Z)) <= r.threshold) return {false, "exclusion functional not positive"};
  return {};
}

class WitnessSet {
 public:
  explicit WitnessSet(const RelaxedProblem& r) : r_(&r) {}

  // Returns false when Z duplicates an existing witness.
  bool add(Eigen::MatrixXd Z, WitnessOrigin origin, std::size_t iteration, double tol = 1e-7) {
    const auto chk = validate_witness(*r_, Z, tol);
    if (!chk.ok) throw Error("witness rejected: " + chk.reason);
    for (const auto& w : items_)
      if ((w.Z - Z).cwiseAbs().maxCoeff() <= 1e-12) return false;
    Witness w{std::move(Z), {}, origin, iteration};
    w.moments = r_->moments_of(w.Z);
    rows_.push_back(witness_rows(*r_, w.moments));
    items_.push_back(std::move(w));
    preferred_.push_back(-1);
    return true;
  }

  [[nodiscard]] std::size_t size() const { return items_.size(); }
  [[nodiscard]] const std::vector<Witness>& items() const { return items_; }
  [[nodiscard]] const std::vector<WitnessRows>& rows() const { return rows_; }
  [[nodiscard]] const RelaxedProblem& problem() const { return *r_; }
  std::vector<int>& preferred() { return preferred_; }

 private:
  const RelaxedProblem* r_;
  std::vector<Witness> items_;
  std::vector<WitnessRows> rows_;
  std::vector<int> preferred_;  // mode used for this witness by the last candidate
};

struct CandidateOptions {
  double tau{1e-4};
  double c_lower{-1.0};
  double c_upper{1.0};
  std::size_t max_nodes{20000};
  std::size_t improve_nodes{200};  // extra LPs spent raising the slack after the first hit
};

enum class CandidateStatus { Found, Unsat, SearchLimit };

struct CandidateResult {
  CandidateStatus status{CandidateStatus::Unsat};
  std::vector<double> c;
  double slack{0.0};
  std::vector<int> modes;  // mode row satisfied per witness
  std::size_t lp_solves{0};
};

namespace detail {

struct NormRow {
  std::vector<double> a;  // unit norm (or zero)
  double b;
  bool constant;
};

inline NormRow normalize(const std::vector<double>& a, double b) {
  double n = 0.0;
  for (double v : a) n += v * v;
  n = std::sqrt(n);
  if (n < 1e-12) return {a, b, true};
  NormRow r{a, b / n, false};
  for (auto& v : r.a) v /= n;
  return r;
}

inline double slack(const NormRow& r, const std::vector<double>& c) {
  double s = -r.b;
  if (!r.constant)
    for (std::size_t j = 0; j < c.size(); ++j) s += r.a[j] * c[j];
  return s;
}

class CandidateSearch {
 public:
  CandidateSearch(WitnessSet& ws, const CandidateOptions& opt) : ws_(ws), opt_(opt) {
    m_ = ws.problem().num_coeffs();
    for (const auto& w : ws.rows()) {
      pos_.push_back(normalize(w.pos_a, w.pos_b));
      std::vector<NormRow> modes;
      for (std::size_t q = 0; q < w.mode_a.size(); ++q) modes.push_back(normalize(w.mode_a[q], w.mode_b[q]));
      mode_.push_back(std::move(modes));
    }
    // shift so that t = v - shift with v >= 0 always admits a feasible point
    shift_ = 1.0;
    const double cmax = std::max(std::abs(opt.c_lower), std::abs(opt.c_upper));
    auto grow = [&](const NormRow& r) {
      double l1 = 0.0;
      for (double v : r.a) l1 += std::abs(v);
      shift_ = std::max(shift_, 1.0 + std::abs(r.b) + l1 * cmax);
    };
    for (const auto& r : pos_) grow(r);
    for (const auto& ms : mode_)
      for (const auto& r : ms) grow(r);
  }

  CandidateResult run() {
    CandidateResult res;
    if (ws_.size() == 0) {
      res.status = CandidateStatus::Found;
      res.c.assign(m_, 0.5 * (opt_.c_lower + opt_.c_upper));
      res.slack = std::numeric_limits<double>::infinity();
      return res;
    }
    for (const auto& r : pos_)
      if (r.constant && -r.b < opt_.tau) return res;  // Unsat: a positivity row no c can satisfy
    std::vector<int> assign(ws_.size(), -1);
    search(assign, res);
    const bool found = have_;
    res.lp_solves = lp_solves_;
    if (found) {
      res.status = CandidateStatus::Found;
      auto& pref = ws_.preferred();
      for (std::size_t k = 0; k < res.modes.size(); ++k) pref[k] = res.modes[k];
    } else {
      res.status = limit_hit_ ? CandidateStatus::SearchLimit : CandidateStatus::Unsat;
      res.c.clear();
    }
    return res;
  }

 private:
  struct LpOut {
    bool feasible{false};
    std::vector<double> c;
    double t{0.0};
  };

  LpOut solve_lp(const std::vector<int>& assign) {
    ++lp_solves_;
    // variables: u_j = c_j - lo in [0, hi - lo], v = t + shift >= 0
    const std::size_t nv = m_ + 1;
    lp::Problem p;
    p.num_vars = nv;
    p.objective.assign(nv, 0.0);
    p.objective[m_] = 1.0;
    auto add_row = [&](const NormRow& r) {
      // a.c - t >= b  ->  a.u - v >= b - a.lo - shift
      lp::Row row{std::vector<double>(nv, 0.0), lp::Relation::GreaterEq, r.b - shift_};
      for (std::size_t j = 0; j < m_; ++j) {
        row.coeffs[j] = r.a[j];
        row.rhs -= r.a[j] * opt_.c_lower;
      }
      row.coeffs[m_] = -1.0;
      p.rows.push_back(std::move(row));
    };
    for (const auto& r : pos_)
      if (!r.constant) add_row(r);
    for (std::size_t k = 0; k < assign.size(); ++k)
      if (assign[k] >= 0 && !mode_[k][assign[k]].constant) add_row(mode_[k][assign[k]]);
    for (std::size_t j = 0; j < m_; ++j) {
      lp::Row row{std::vector<double>(nv, 0.0), lp::Relation::LessEq, opt_.c_upper - opt_.c_lower};
      row.coeffs[j] = 1.0;
      p.rows.push_back(std::move(row));
    }
    {
      lp::Row row{std::vector<double>(nv, 0.0), lp::Relation::LessEq, shift_ + 1.0};  // t <= 1
      row.coeffs[m_] = 1.0;
      p.rows.push_back(std::move(row));
    }
    const auto sol = lp::solve(p);
    LpOut out;
    if (sol.status != lp::Status::Optimal) return out;
    out.feasible = true;
    out.c.resize(m_);
    for (std::size_t j = 0; j < m_; ++j) out.c[j] = sol.x[j] + opt_.c_lower;
    out.t = sol.x[m_] - shift_;
    // re-evaluate independently; constant rows are handled outside the LP
    double t = 1.0;
    for (const auto& r : pos_) t = std::min(t, slack(r, out.c));
    for (std::size_t k = 0; k < assign.size(); ++k)
      if (assign[k] >= 0) t = std::min(t, slack(mode_[k][assign[k]], out.c));
    out.t = std::min(out.t, t);
    return out;
  }

  // Depth-first branch and bound on the per-witness mode choice, maximizing
  // the minimum slack. Returns true when the search should stop.
  bool search(std::vector<int>& assign, CandidateResult& res) {
    if (lp_solves_ >= opt_.max_nodes || (have_ && lp_solves_ >= found_at_ + opt_.improve_nodes)) {
      limit_hit_ = !have_;
      return true;
    }
    const LpOut lpo = solve_lp(assign);
    if (!lpo.feasible || lpo.t < opt_.tau) return false;
    if (have_ && lpo.t <= res.slack * (1.0 + 1e-6) + 1e-12) return false;
    // branch on the witness whose best mode is furthest below the LP bound
    std::size_t branch = assign.size();
    double worst = std::numeric_limits<double>::infinity();
    std::vector<int> chosen(assign.size(), -1);
    for (std::size_t k = 0; k < assign.size(); ++k) {
      if (assign[k] >= 0) {
        chosen[k] = assign[k];
        continue;
      }
      int best = -1;
      double best_s = -std::numeric_limits<double>::infinity();
      for (std::size_t q = 0; q < mode_[k].size(); ++q) {
        const double s = slack(mode_[k][q], lpo.c);
        if (s > best_s) {
          best_s = s;
          best = static_cast<int>(q);
        }
      }
      if (best_s < worst) {
        worst = best_s;
        branch = k;
      }
      chosen[k] = best;
    }
    const double here = std::min(lpo.t, worst);
    if (here >= opt_.tau && (!have_ || here > res.slack)) {
      res.c = lpo.c;
      res.slack = here;
      res.modes = chosen;
      if (!have_) found_at_ = lp_solves_;
      have_ = true;
    }
    if (branch == assign.size() || worst >= lpo.t - 1e-9 * (1.0 + std::abs(lpo.t))) return false;
    // order modes: last successful choice first, then by slack at the current optimum
    std::vector<std::size_t> order(mode_[branch].size());
    for (std::size_t q = 0; q < order.size(); ++q) order[q] = q;
    const int pref = ws_.preferred()[branch];
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if ((static_cast<int>(a) == pref) != (static_cast<int>(b) == pref)) return static_cast<int>(a) == pref;
      return slack(mode_[branch][a], lpo.c) > slack(mode_[branch][b], lpo.c);
    });
    for (std::size_t q : order) {
      if (mode_[branch][q].constant && -mode_[branch][q].b < opt_.tau) continue;
      assign[branch] = static_cast<int>(q);
      if (search(assign, res)) {
        assign[branch] = -1;
        return true;
      }
    }
    assign[branch] = -1;
    return false;
  }

  WitnessSet& ws_;
  CandidateOptions opt_;
  std::size_t m_{0};
  std::vector<NormRow> pos_;
  std::vector<std::vector<NormRow>> mode_;
  double shift_{1.0};
  std::size_t lp_solves_{0};
  bool limit_hit_{false};
  bool have_{false};
  std::size_t found_at_{0};
};

}  // namespace detail

inline CandidateResult find_candidate(WitnessSet& ws, const CandidateOptions& opt = {}) {
  if (!(opt.tau > 0)) throw Error("candidate margin tau must be positive");
  return detail::CandidateSearch(ws, opt).run();
}

// Minimum normalized slack of c over every required row (positivity, and
// the best mode row per witness).
inline double candidate_slack(const WitnessSet& ws, const std::vector<double>& c) {
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& w : ws.rows()) {
    worst = std::min(worst, detail::slack(detail::normalize(w.pos_a, w.pos_b), c));
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < w.mode_a.size(); ++q)
      best = std::max(best, detail::slack(detail::normalize(w.mode_a[q], w.mode_b[q]), c));
    worst = std::min(worst, best);
  }
  return worst;
}

}  // namespace clf
