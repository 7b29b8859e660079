#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "clf/cegis.hpp"
#include "clf/plant.hpp"
#include "clf/polynomial.hpp"

namespace clf {

// Switching law: stay in q until Vdot_q >= -eps_q phi_q / lambda, then jump to
// the eligible mode with the steepest normalized descent.
class SwitchingLaw {
 public:
  SwitchingLaw(const SwitchedPlant& plant, const Certificate& cert, std::optional<double> lambda = std::nullopt)
      : n_(plant.n()), lambda_(lambda.value_or(cert.lambda)), V_(cert.V), region_(cert.region),
        target_radius_(cert.target_radius) {
    if (cert.modes.size() != plant.modes.size()) throw DimensionError("certificate and plant disagree on mode count");
    if (cert.V.nvars() != plant.n()) throw DimensionError("certificate and plant disagree on state dimension");
    for (std::size_t q = 0; q < plant.modes.size(); ++q) {
      fields_.emplace_back();
      for (const auto& p : plant.modes[q].field) fields_.back().emplace_back(p);
      vdot_.emplace_back(lie_derivative(cert.V, plant.modes[q].field));
      phi_.emplace_back(cert.modes[q].phi.polynomial());
      eps_.push_back(cert.modes[q].eps);
    }
  }

  [[nodiscard]] std::size_t n() const { return n_; }
  [[nodiscard]] std::size_t num_modes() const { return fields_.size(); }
  [[nodiscard]] double lambda() const { return lambda_; }
  [[nodiscard]] double V(std::span<const double> x) const { return V_(x); }
  [[nodiscard]] double Vdot(std::size_t q, std::span<const double> x) const { return vdot_[q](x); }
  [[nodiscard]] double phi(std::size_t q, std::span<const double> x) const { return phi_[q](x); }
  [[nodiscard]] double eps(std::size_t q) const { return eps_[q]; }

  void field(std::size_t q, std::span<const double> x, std::span<double> out) const {
    for (std::size_t i = 0; i < n_; ++i) out[i] = fields_[q][i](x);
  }

  [[nodiscard]] bool in_target(std::span<const double> x) const {
    if (!region_) return false;
    double s = 0.0;
    for (double v : x) s += v * v;
    return s <= target_radius_ * target_radius_;
  }

  [[nodiscard]] bool decreasing(std::size_t q, std::span<const double> x) const {
    return Vdot(q, x) <= -eps_[q] * phi(q, x);
  }

  [[nodiscard]] bool must_leave(std::size_t q, std::span<const double> x) const {
    return Vdot(q, x) >= -eps_[q] * phi(q, x) / lambda_;
  }

  // Eligible mode with the smallest Vdot/phi, lowest index on ties; nullopt if none.
  [[nodiscard]] std::optional<std::size_t> best_mode(std::span<const double> x) const {
    std::optional<std::size_t> best;
    double best_score = std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < num_modes(); ++q) {
      if (!decreasing(q, x)) continue;
      const double ph = phi(q, x);
      const double score = ph > 0.0 ? Vdot(q, x) / ph : Vdot(q, x);
      if (score < best_score) {
        best_score = score;
        best = q;
      }
    }
    return best;
  }

  // Returns the next mode; nullopt when the guard fires but no mode qualifies.
  [[nodiscard]] std::optional<std::size_t> select_mode(std::size_t q, std::span<const double> x) const {
    if (!must_leave(q, x) || (Vdot(q, x) == 0.0 && phi(q, x) == 0.0)) return q;
    auto b = best_mode(x);
    if (!b) return std::nullopt;
    return b;
  }

  // Mode at t = 0: best eligible mode, else the one with the smallest Vdot/phi.
  [[nodiscard]] std::size_t initial_mode(std::span<const double> x) const {
    if (auto b = best_mode(x)) return *b;
    std::size_t best = 0;
    double best_score = std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < num_modes(); ++q) {
      const double ph = phi(q, x);
      const double score = ph > 0.0 ? Vdot(q, x) / ph : Vdot(q, x);
      if (score < best_score) {
        best_score = score;
        best = q;
      }
    }
    return best;
  }

 private:
  std::size_t n_;
  double lambda_;
  CompiledPolynomial V_;
  bool region_;
  double target_radius_;
  std::vector<std::vector<CompiledPolynomial>> fields_;
  std::vector<CompiledPolynomial> vdot_;
  std::vector<CompiledPolynomial> phi_;
  std::vector<double> eps_;
};

enum class HaltReason { Horizon, DomainExit, TargetReached, NoEligibleMode };

inline const char* to_string(HaltReason h) {
  switch (h) {
    case HaltReason::Horizon: return "horizon";
    case HaltReason::DomainExit: return "domain-exit";
    case HaltReason::TargetReached: return "target-reached";
    case HaltReason::NoEligibleMode: return "no-eligible-mode";
  }
  return "?";
}

struct TraceSample {
  double t{0.0};
  std::vector<double> x;
  std::size_t mode{0};
  double V{0.0};
  double Vdot{0.0};
};

struct SwitchEvent {
  double t{0.0};
  std::size_t from{0};
  std::size_t to{0};
};

struct Trace {
  std::vector<TraceSample> samples;
  std::vector<SwitchEvent> switches;
  HaltReason halt{HaltReason::Horizon};
  double step{0.0};
};

struct SimOptions {
  double horizon{50.0};
  std::optional<double> step;  // default: dwell bound / 20, else 1e-3
  double refine{0.01};         // switch instants located to refine * step
  double residence{1.0};       // RS: time inside the target before halting
};

// Default integration step for a certificate, kept within [1e-4, 1e-2].
inline double default_step(const Certificate& cert) {
  if (cert.dwell && cert.dwell->delta_lb > 0.0 && std::isfinite(cert.dwell->delta_lb))
    return std::clamp(cert.dwell->delta_lb / 20.0, 1e-4, 1e-2);
  return 1e-3;
}

namespace detail {

inline void rk4(const SwitchingLaw& law, std::size_t q, std::span<const double> x, double h, std::span<double> out) {
  const std::size_t n = law.n();
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  law.field(q, x, k1);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
  law.field(q, tmp, k2);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
  law.field(q, tmp, k3);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
  law.field(q, tmp, k4);
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

}  // namespace detail

inline Trace simulate(const SwitchingLaw& law, const Box& domain, std::span<const double> x0,
                      const SimOptions& opt = {}) {
  if (x0.size() != law.n()) throw DimensionError("initial state has the wrong dimension");
  const double h = opt.step.value_or(1e-3);
  if (!(h > 0.0) || !(opt.horizon >= 0.0)) throw Error("step must be positive and horizon non-negative");
  Trace tr;
  tr.step = h;
  std::vector<double> x(x0.begin(), x0.end()), y(x.size());
  std::size_t q = law.initial_mode(x);
  double t = 0.0;
  double entered = -1.0;  // RS: time of the latest entry into the target
  auto record = [&](double tt, std::span<const double> s, std::size_t m) {
    tr.samples.push_back({tt, std::vector<double>(s.begin(), s.end()), m, law.V(s), law.Vdot(m, s)});
  };
  record(t, x, q);
  if (!domain.contains(x)) {
    tr.halt = HaltReason::DomainExit;
    return tr;
  }
  auto fires = [&](std::span<const double> s) { return !law.in_target(s) && law.select_mode(q, s) != q; };
  std::vector<double> z(x.size());
  while (opt.horizon - t > 1e-12 * std::max(1.0, opt.horizon)) {
    const double dt = std::min(h, opt.horizon - t);
    detail::rk4(law, q, x, dt, y);
    if (fires(y)) {
      // earliest instant in (t, t + dt] where the guard fires, to refine * h
      double lo = 0.0, hi = dt;
      while (hi - lo > opt.refine * h) {
        const double mid = 0.5 * (lo + hi);
        detail::rk4(law, q, x, mid, z);
        if (fires(z)) hi = mid;
        else lo = mid;
      }
      detail::rk4(law, q, x, hi, y);
      t += hi;
      auto next = law.select_mode(q, y);
      if (!next) {
        record(t, y, q);
        tr.halt = HaltReason::NoEligibleMode;
        return tr;
      }
      record(t, y, q);
      tr.switches.push_back({t, q, *next});
      q = *next;
      x = y;
      record(t, x, q);
    } else {
      t += dt;
      x = y;
      record(t, x, q);
    }
    if (!domain.contains(x)) {
      tr.halt = HaltReason::DomainExit;
      return tr;
    }
    if (law.in_target(x)) {
      if (entered < 0.0) entered = t;
      if (t - entered >= opt.residence) {
        tr.halt = HaltReason::TargetReached;
        return tr;
      }
    } else {
      entered = -1.0;
    }
  }
  tr.halt = HaltReason::Horizon;
  return tr;
}

struct AuditReport {
  std::size_t switches{0};
  std::optional<double> min_gap;
  double dwell_lb{0.0};
  bool dwell_ok{true};
  double max_v_increase{0.0};
  double v_tolerance{0.0};
  bool monotone_ok{true};
  std::size_t pstar_violations{0};
  bool domain_exit{false};
  bool law_violation{false};
  std::optional<double> target_entry;
  double initial_norm{0.0};
  double final_norm{0.0};

  [[nodiscard]] bool ok() const {
    return dwell_ok && monotone_ok && pstar_violations == 0 && !domain_exit && !law_violation;
  }
};

inline double euclidean_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

// Point of P* = { x in P : V(x) < beta_lb }, with a relative tolerance on the level.
inline bool in_pstar(const Certificate& cert, const Box& domain, std::span<const double> x, double tol = 1e-9) {
  if (!domain.contains(x)) return false;
  return cert.V.eval(x) <= cert.beta_lb + tol * std::max(1.0, std::abs(cert.beta_lb));
}

inline AuditReport audit_trace(const Trace& tr, const Certificate& cert, const Box& domain) {
  AuditReport a;
  a.switches = tr.switches.size();
  a.dwell_lb = cert.dwell ? cert.dwell->delta_lb : 0.0;
  for (std::size_t i = 1; i < tr.switches.size(); ++i) {
    const double gap = tr.switches[i].t - tr.switches[i - 1].t;
    a.min_gap = a.min_gap ? std::min(*a.min_gap, gap) : gap;
  }
  if (a.min_gap && *a.min_gap < a.dwell_lb - tr.step) a.dwell_ok = false;
  if (tr.samples.empty()) return a;
  double vscale = 0.0;
  for (const auto& s : tr.samples) vscale = std::max(vscale, std::abs(s.V));
  a.v_tolerance = 10.0 * std::pow(tr.step, 4) * std::max(1.0, vscale) + 1e-12 * vscale;
  for (std::size_t i = 1; i < tr.samples.size(); ++i) {
    const auto& p = tr.samples[i - 1];
    const auto& s = tr.samples[i];
    if (p.mode != s.mode) continue;  // a switch sample starts a new segment
    if (cert.region && std::min(euclidean_norm(p.x), euclidean_norm(s.x)) <= cert.target_radius) continue;
    a.max_v_increase = std::max(a.max_v_increase, s.V - p.V);
  }
  a.monotone_ok = a.max_v_increase <= a.v_tolerance;
  for (const auto& s : tr.samples) {
    if (!in_pstar(cert, domain, s.x)) ++a.pstar_violations;
    if (!a.target_entry && cert.region && euclidean_norm(s.x) <= cert.target_radius) a.target_entry = s.t;
  }
  a.domain_exit = tr.halt == HaltReason::DomainExit;
  a.law_violation = tr.halt == HaltReason::NoEligibleMode;
  a.initial_norm = euclidean_norm(tr.samples.front().x);
  a.final_norm = euclidean_norm(tr.samples.back().x);
  return a;
}

inline void write_trace_csv(std::ostream& os, const Trace& tr) {
  const std::size_t n = tr.samples.empty() ? 0 : tr.samples.front().x.size();
  os << "t";
  for (std::size_t i = 0; i < n; ++i) os << ",x" << i + 1;
  os << ",mode,V,Vdot\n";
  for (const auto& s : tr.samples) {
    os << format_number(s.t);
    for (double v : s.x) os << ',' << format_number(v);
    os << ',' << s.mode << ',' << format_number(s.V) << ',' << format_number(s.Vdot) << '\n';
  }
}

inline nlohmann::json switches_to_json(const Trace& tr, const std::vector<std::string>& mode_ids) {
  auto ev = nlohmann::json::array();
  for (const auto& s : tr.switches)
    ev.push_back({{"t", s.t}, {"from", mode_ids.at(s.from)}, {"to", mode_ids.at(s.to)}});
  return {{"step", tr.step}, {"halt", to_string(tr.halt)}, {"switches", ev}};
}

inline nlohmann::json audit_to_json(const AuditReport& a) {
  nlohmann::json j{{"ok", a.ok()},
                   {"switches", a.switches},
                   {"dwell_lb", a.dwell_lb},
                   {"dwell_ok", a.dwell_ok},
                   {"max_v_increase", a.max_v_increase},
                   {"v_tolerance", a.v_tolerance},
                   {"monotone_ok", a.monotone_ok},
                   {"pstar_violations", a.pstar_violations},
                   {"domain_exit", a.domain_exit},
                   {"law_violation", a.law_violation},
                   {"initial_norm", a.initial_norm},
                   {"final_norm", a.final_norm}};
  j["min_gap"] = a.min_gap ? nlohmann::json(*a.min_gap) : nlohmann::json(nullptr);
  j["target_entry"] = a.target_entry ? nlohmann::json(*a.target_entry) : nlohmann::json(nullptr);
  return j;
}

}  // namespace clf
