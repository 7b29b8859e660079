#pragma once

#include <chrono>
#include <functional>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "clf/candidate.hpp"
#include "clf/check.hpp"
#include "clf/phi.hpp"
#include "clf/plant.hpp"
#include "clf/polynomial_json.hpp"
#include "clf/relaxation.hpp"

namespace clf {

struct IterationLog {
  std::size_t iteration{0};
  std::size_t witnesses{0};
  std::size_t lp_solves{0};
  double slack{0.0};
  double gamma_positivity{0.0};
  double gamma_decrease{0.0};
  std::string outcome;
};

struct SynthesisConfig {
  ClfTemplate tmpl;
  std::vector<double> eps;  // per mode; 0 selects the plain decrease target decay_scale * |x|^2
  double lambda{2.0};
  double alpha_scale{1.0};
  double decay_scale{1.0};
  std::string phi_mode{"auto"};
  CandidateOptions candidate{};
  CheckTolerances check{};
  std::size_t max_iters{200};
  std::size_t samples{100000};
  std::uint64_t seed{0};
  std::function<void(const IterationLog&)> on_iteration;
};

inline ClfTemplate template_for(const SwitchedPlant& p, const nlohmann::json& spec) {
  if (spec.is_string() && spec.get<std::string>() == "quad") return quadratic_template(p.n());
  return template_from_json(spec, p.variables);
}

inline SynthesisConfig default_config(const SwitchedPlant& p) {
  SynthesisConfig cfg;
  cfg.tmpl = template_for(p, p.defaults.template_spec);
  for (const auto& m : p.modes) cfg.eps.push_back(p.defaults.eps_for(m.id));
  cfg.alpha_scale = p.defaults.alpha_scale;
  cfg.decay_scale = p.defaults.decay_scale;
  cfg.phi_mode = p.defaults.phi;
  cfg.max_iters = p.defaults.max_iters;
  return cfg;
}

enum class FailureReason { CandidateUnsat, IterationCap, NumericalFailure, ConfirmationFailed };

inline const char* to_string(FailureReason r) {
  switch (r) {
    case FailureReason::CandidateUnsat: return "CandidateUnsat";
    case FailureReason::IterationCap: return "IterationCap";
    case FailureReason::NumericalFailure: return "NumericalFailure";
    case FailureReason::ConfirmationFailed: return "ConfirmationFailed";
  }
  return "?";
}

inline int exit_code(FailureReason r) {
  switch (r) {
    case FailureReason::CandidateUnsat: return 2;
    case FailureReason::IterationCap: return 3;
    case FailureReason::NumericalFailure: return 4;
    case FailureReason::ConfirmationFailed: return 5;
  }
  return 4;
}

struct ConfirmationReport {
  std::size_t samples{0};
  std::size_t skipped{0};  // inside the target ball
  std::size_t positivity_violations{0};
  std::size_t decrease_violations{0};
  double worst_positivity{std::numeric_limits<double>::infinity()};  // min of V - alpha
  double worst_decrease{std::numeric_limits<double>::infinity()};    // min over x of max_q (-Vdot_q - w_q)
  std::vector<double> worst_point;
  bool quadratic_psd{true};
  double quadratic_min_eig{0.0};

  [[nodiscard]] bool ok() const {
    return positivity_violations == 0 && decrease_violations == 0 && quadratic_psd;
  }
};

struct ModeCertificate {
  std::string id;
  PhiFunction phi;
  double eps{0.0};
  std::optional<double> lambda1;  // empty when the degree condition fails and no region bound applies
  std::optional<double> lambda2;
};

struct Certificate {
  std::vector<std::string> variables;
  std::string model_name;
  std::string model_hash;
  std::vector<double> c;
  Polynomial V;
  std::vector<ModeCertificate> modes;
  double beta_lb{0.0};
  double lambda{2.0};
  std::optional<DwellBound> dwell;
  std::size_t iterations{0};
  std::size_t witness_count{0};
  ConfirmationReport confirmation;
  double alpha_scale{1.0};
  bool region{false};
  double target_radius{0.0};
};

struct SynthesisStats {
  double candidate_seconds{0.0};
  double sdp_seconds{0.0};
  double total_seconds{0.0};
  std::size_t lp_solves{0};
};

struct SynthesisResult {
  bool success{false};
  std::optional<Certificate> certificate;
  FailureReason reason{FailureReason::NumericalFailure};
  std::string detail;
  std::size_t iterations{0};
  std::vector<Witness> witnesses;
  std::vector<std::vector<double>> candidates;
  SynthesisStats stats;
};

// Problem data shared by the engine, the sampler and the certificate builder.
struct SynthesisProblem {
  SwitchedPlant plant;
  SynthesisConfig config;
  std::vector<PhiFunction> phi;
  std::vector<double> eps_eff;  // decrease coefficient actually used per mode
  Polynomial alpha;
  std::vector<Polynomial> decay;
  double threshold{0.0};
  RelaxedProblem relaxed;
};

inline Polynomial squared_norm(std::size_t n, double scale) {
  Polynomial p(n);
  for (std::uint32_t i = 0; i < n; ++i) p.add_term(Monomial::variable(i, 2), scale);
  return p;
}

inline SynthesisProblem prepare(const SwitchedPlant& plant, const SynthesisConfig& cfg) {
  if (cfg.max_iters < 1) throw Error("iteration cap must be at least 1");
  if (cfg.eps.size() != plant.modes.size()) throw DimensionError("one eps per mode required");
  if (!(cfg.lambda > 1.0)) throw Error("lambda must exceed 1");
  if (!(cfg.alpha_scale > 0.0)) throw Error("alpha scale must be positive");
  for (double e : cfg.eps)
    if (e < 0) throw Error("eps must be nonnegative");
  if (cfg.phi_mode != "auto" && cfg.phi_mode != "quad") throw Error("phi mode must be auto or quad");
  for (const auto& m : cfg.tmpl.monomials)
    if (m.is_constant()) throw Error("template must not contain the constant monomial");

  SynthesisProblem sp{plant, cfg, {}, {}, {}, {}, 0.0, {}};
  const std::size_t n = plant.n();
  sp.alpha = squared_norm(n, cfg.alpha_scale);
  sp.threshold = plant.spec.is_region() ? cfg.alpha_scale * plant.spec.target_radius * plant.spec.target_radius : 0.0;
  for (std::size_t q = 0; q < plant.modes.size(); ++q) {
    if (cfg.eps[q] == 0.0) {
      sp.phi.push_back(PhiFunction::quadratic(n));
      sp.eps_eff.push_back(cfg.decay_scale);
    } else {
      sp.phi.push_back(cfg.phi_mode == "quad" ? PhiFunction::quadratic(n) : select_phi(cfg.tmpl, plant.modes[q]).phi);
      sp.eps_eff.push_back(cfg.eps[q]);
    }
    sp.decay.push_back(sp.eps_eff.back() * sp.phi.back().polynomial());
  }
  sp.relaxed = assemble(plant, cfg.tmpl, sp.alpha, sp.decay, sp.threshold);
  return sp;
}

// Lifted vertices of P that satisfy the exclusion constraint.
inline std::vector<Eigen::MatrixXd> initial_witnesses(const SynthesisProblem& sp) {
  std::vector<Eigen::MatrixXd> out;
  for (const auto& v : sp.plant.domain.vertices()) {
    if (sp.alpha.eval(v) <= sp.threshold + sp.config.check.strict * sp.config.alpha_scale) continue;
    out.push_back(sp.relaxed.lift(v));
  }
  return out;
}

namespace detail {

inline double uniform01(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

}  // namespace detail

// Pointwise check of V > alpha and min_q (Vdot_q + w_q) < 0 at uniform samples.
inline ConfirmationReport confirm_by_sampling(const SynthesisProblem& sp, const Polynomial& V, std::size_t samples,
                                              std::uint64_t seed, double tol = 1e-7) {
  ConfirmationReport rep;
  const auto& plant = sp.plant;
  const std::size_t n = plant.n();
  const CompiledPolynomial cv(V), ca(sp.alpha);
  std::vector<CompiledPolynomial> cd, cw;
  for (std::size_t q = 0; q < plant.modes.size(); ++q) {
    cd.emplace_back(lie_derivative(V, plant.modes[q].field));
    cw.emplace_back(sp.decay[q]);
  }
  const double r2 = plant.spec.is_region() ? plant.spec.target_radius * plant.spec.target_radius : 0.0;
  std::mt19937_64 gen(seed);
  std::vector<double> x(n);
  for (std::size_t s = 0; s < samples; ++s) {
    double nn = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double lo = plant.domain.lower()[i], hi = plant.domain.upper()[i];
      x[i] = lo + (hi - lo) * detail::uniform01(gen);
      nn += x[i] * x[i];
    }
    ++rep.samples;
    if (plant.spec.is_region() && nn <= r2) {
      ++rep.skipped;
      continue;
    }
    const double pos = cv(x) - ca(x);
    double dec = -std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < cd.size(); ++q) dec = std::max(dec, -cd[q](x) - cw[q](x));
    if (pos < -tol) ++rep.positivity_violations;
    if (dec < -tol) ++rep.decrease_violations;
    if (pos < rep.worst_positivity) rep.worst_positivity = pos;
    if (dec < rep.worst_decrease) {
      rep.worst_decrease = dec;
      rep.worst_point = x;
    }
  }
  // quadratic part of V
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  bool any = false;
  for (const auto& [m, c] : V.terms()) {
    if (m.degree() != 2) continue;
    any = true;
    const auto& f = m.factors();
    if (f.size() == 1) {
      Q(f[0].first, f[0].first) += c;
    } else {
      Q(f[0].first, f[1].first) += 0.5 * c;
      Q(f[1].first, f[0].first) += 0.5 * c;
    }
  }
  if (any) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q, Eigen::EigenvaluesOnly);
    rep.quadratic_min_eig = es.eigenvalues().minCoeff();
    // only binding when V is a pure quadratic form
    bool pure = true;
    for (const auto& [m, c] : V.terms()) pure = pure && m.degree() == 2;
    rep.quadratic_psd = !pure || rep.quadratic_min_eig >= -1e-9;
  }
  return rep;
}

// Certified lower bound on min of V over the boundary of the box. Each face is
// covered by cells; a cell's bound is the larger of V(center) - L h / 2 (L an
// interval bound on |grad V|_1 over the cell, h its widest edge) and the
// interval enclosure of V over the cell. The cell with the lowest bound is
// split until the bound is within 1% of the best sampled value.
inline double sublevel_threshold(const Polynomial& V, const Box& box, std::size_t max_cells = 20000) {
  const std::size_t n = box.dim();
  std::vector<Polynomial> grad;
  for (std::uint32_t i = 0; i < n; ++i) grad.push_back(V.partial(i));
  struct Cell {
    std::vector<double> lo, hi;
    double bound;
  };
  // for a pure quadratic form, lambda_min(Q) * dist(0, cell)^2 is a further valid bound
  double qmin = -1.0;
  {
    bool pure = !V.is_zero();
    for (const auto& [m, c] : V.terms()) pure = pure && m.degree() == 2;
    if (pure) {
      Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
      for (const auto& [m, c] : V.terms()) {
        const auto& f = m.factors();
        if (f.size() == 1) {
          Q(f[0].first, f[0].first) += c;
        } else {
          Q(f[0].first, f[1].first) += 0.5 * c;
          Q(f[1].first, f[0].first) += 0.5 * c;
        }
      }
      qmin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Q, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
    }
  }
  double best_value = std::numeric_limits<double>::infinity();
  auto make = [&](std::vector<double> lo, std::vector<double> hi) {
    std::vector<double> mid(n);
    double h = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mid[i] = 0.5 * (lo[i] + hi[i]);
      h = std::max(h, hi[i] - lo[i]);
    }
    const Box b(lo, hi);
    double L = 0.0;
    for (const auto& g : grad) L += interval_eval(g, b).mag();
    const double vc = V.eval(mid);
    best_value = std::min(best_value, vc);
    double bound = std::max(vc - L * h / 2.0, interval_eval(V, b).lo);
    if (qmin > 0) {
      double d2 = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = lo[i] > 0 ? lo[i] : hi[i] < 0 ? -hi[i] : 0.0;
        d2 += d * d;
      }
      bound = std::max(bound, qmin * d2);
    }
    return Cell{std::move(lo), std::move(hi), bound};
  };
  auto cmp = [](const Cell& a, const Cell& b) { return a.bound > b.bound; };
  std::priority_queue<Cell, std::vector<Cell>, decltype(cmp)> pq(cmp);
  for (std::size_t i = 0; i < n; ++i)
    for (int side = 0; side < 2; ++side) {
      std::vector<double> lo = box.lower(), hi = box.upper();
      const double v = side == 0 ? lo[i] : hi[i];
      lo[i] = hi[i] = v;
      pq.push(make(lo, hi));
    }
  std::size_t cells = pq.size();
  while (true) {
    Cell c = pq.top();
    const double gap = best_value - c.bound;
    if (gap <= 0.01 * std::abs(best_value) || cells >= max_cells) return c.bound;
    pq.pop();
    std::size_t axis = 0;
    double w = -1.0;
    for (std::size_t i = 0; i < n; ++i)
      if (c.hi[i] - c.lo[i] > w) {
        w = c.hi[i] - c.lo[i];
        axis = i;
      }
    if (w <= 0.0) return c.bound;
    const double mid = 0.5 * (c.lo[axis] + c.hi[axis]);
    auto hi1 = c.hi;
    hi1[axis] = mid;
    auto lo2 = c.lo;
    lo2[axis] = mid;
    pq.push(make(c.lo, hi1));
    pq.push(make(lo2, c.hi));
    ++cells;
  }
}

namespace detail {

inline std::optional<double> phi_bound(const Polynomial& p, const PhiFunction& phi, const SwitchedPlant& plant) {
  std::optional<double> best;
  if (phi_bounded_check(p, phi)) best = lambda_constructive(p, phi, plant.domain);
  if (plant.spec.is_region()) {
    const double reg = lambda_region(p, phi, plant.domain, plant.spec.target_radius);
    best = best ? std::min(*best, reg) : reg;
  } else if (phi.is_constant()) {
    const double reg = std::max(0.0, interval_eval(p, plant.domain).hi) / phi.min_outside_ball(0.0);
    best = best ? std::min(*best, reg) : reg;
  }
  return best;
}

}  // namespace detail

inline Certificate build_certificate(const SynthesisProblem& sp, const std::vector<double>& c, std::size_t iterations,
                                     std::size_t witness_count, ConfirmationReport confirmation) {
  const auto& plant = sp.plant;
  Certificate cert;
  cert.variables = plant.variables;
  cert.model_name = plant.name;
  cert.c = c;
  cert.V = sp.config.tmpl.instantiate(c, plant.n());
  cert.lambda = sp.config.lambda;
  cert.iterations = iterations;
  cert.witness_count = witness_count;
  cert.confirmation = std::move(confirmation);
  cert.alpha_scale = sp.config.alpha_scale;
  cert.region = plant.spec.is_region();
  cert.target_radius = plant.spec.target_radius;
  std::vector<double> eps;
  std::vector<ModeBounds> bounds;
  bool all_bounded = true;
  for (std::size_t q = 0; q < plant.modes.size(); ++q) {
    ModeCertificate mc{plant.modes[q].id, sp.phi[q], sp.eps_eff[q], {}, {}};
    const auto& f = plant.modes[q].field;
    const Polynomial vdd = lie_derivative(lie_derivative(cert.V, f), f);
    const Polynomial phid = lie_derivative(sp.phi[q].polynomial(), f);
    mc.lambda1 = detail::phi_bound(vdd, sp.phi[q], plant);
    mc.lambda2 = detail::phi_bound(phid, sp.phi[q], plant);
    if (mc.lambda1 && mc.lambda2) {
      eps.push_back(mc.eps);
      bounds.push_back({*mc.lambda1, *mc.lambda2});
    } else {
      all_bounded = false;
    }
    cert.modes.push_back(std::move(mc));
  }
  if (all_bounded) cert.dwell = dwell_time(eps, bounds, sp.config.lambda);
  cert.beta_lb = sublevel_threshold(cert.V, plant.domain);
  return cert;
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline SynthesisResult synthesize(const SwitchedPlant& plant, const SynthesisConfig& cfg,
                                  std::optional<std::vector<double>> c0 = std::nullopt) {
  const auto t_start = std::chrono::steady_clock::now();
  SynthesisResult res;
  SynthesisProblem sp = prepare(plant, cfg);
  const RelaxedProblem& r = sp.relaxed;
  WitnessSet ws(r);
  for (auto& Z : initial_witnesses(sp)) ws.add(std::move(Z), WitnessOrigin::InitialVertex, 0);

  auto fail = [&](FailureReason why, std::string detail) {
    res.success = false;
    res.reason = why;
    res.detail = std::move(detail);
    res.witnesses = ws.items();
    res.stats.total_seconds = seconds_since(t_start);
    return res;
  };

  for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
    res.iterations = it;
    std::vector<double> c;
    if (it == 1 && c0) {
      c = *c0;
      if (c.size() != cfg.tmpl.size()) throw DimensionError("initial candidate does not match the template");
    } else {
      const auto t0 = std::chrono::steady_clock::now();
      auto cand = find_candidate(ws, cfg.candidate);
      res.stats.candidate_seconds += seconds_since(t0);
      res.stats.lp_solves += cand.lp_solves;
      if (cand.status == CandidateStatus::Unsat)
        return fail(FailureReason::CandidateUnsat, "no coefficient vector satisfies the witness constraints");
      if (cand.status == CandidateStatus::SearchLimit)
        return fail(FailureReason::NumericalFailure, "candidate search exceeded its node budget");
      c = cand.c;
    }
    res.candidates.push_back(c);

    const auto t1 = std::chrono::steady_clock::now();
    const auto rep = check_candidate(r, c, cfg.check);
    res.stats.sdp_seconds += seconds_since(t1);
    if (cfg.on_iteration) {
      IterationLog log{it, ws.size(), res.stats.lp_solves, candidate_slack(ws, c), rep.positivity.gamma,
                       rep.decrease.gamma,
                       rep.outcome == CheckOutcome::Counterexample ? "counterexample"
                       : rep.outcome == CheckOutcome::NumericalFailure ? "numerical failure"
                                                                         : "no counterexample"};
      cfg.on_iteration(log);
    }
    if (rep.outcome == CheckOutcome::NumericalFailure) return fail(FailureReason::NumericalFailure, rep.detail);
    if (rep.outcome == CheckOutcome::Counterexample) {
      const auto origin = rep.violated == 1 ? WitnessOrigin::Positivity : WitnessOrigin::Decrease;
      bool added = false;
      try {
        added = ws.add(rep.witness, origin, it, 1e-6);
      } catch (const Error& e) {
        return fail(FailureReason::NumericalFailure, std::string("counterexample unusable: ") + e.what());
      }
      if (!added) return fail(FailureReason::NumericalFailure, "check returned a repeated witness");
      continue;
    }
    auto conf = confirm_by_sampling(sp, cfg.tmpl.instantiate(c, plant.n()), cfg.samples, cfg.seed);
    if (!conf.ok()) {
      res.witnesses = ws.items();
      return fail(FailureReason::ConfirmationFailed, "sampling found " +
                                                         std::to_string(conf.positivity_violations) +
                                                         " positivity and " +
                                                         std::to_string(conf.decrease_violations) +
                                                         " decrease violations");
    }
    auto cert = build_certificate(sp, c, it, ws.size(), std::move(conf));
    if (!(cert.beta_lb > 0.0)) return fail(FailureReason::ConfirmationFailed, "boundary level bound is not positive");
    cert.model_hash = model_hash(Model{plant});
    res.success = true;
    res.certificate = std::move(cert);
    res.witnesses = ws.items();
    res.stats.total_seconds = seconds_since(t_start);
    return res;
  }
  return fail(FailureReason::IterationCap, "iteration cap reached");
}

inline nlohmann::json confirmation_to_json(const ConfirmationReport& c) {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  return {{"samples", c.samples},
          {"skipped_in_target", c.skipped},
          {"positivity_violations", c.positivity_violations},
          {"decrease_violations", c.decrease_violations},
          {"worst_positivity_margin", num(c.worst_positivity)},
          {"worst_decrease_margin", num(c.worst_decrease)},
          {"quadratic_min_eig", c.quadratic_min_eig},
          {"ok", c.ok()}};
}

inline nlohmann::json certificate_to_json(const Certificate& cert) {
  const auto& names = cert.variables;
  nlohmann::json j;
  j["model"] = cert.model_name;
  j["model_hash"] = cert.model_hash;
  j["variables"] = names;
  j["V"] = to_string(cert.V, names);
  j["V_terms"] = polynomial_to_json(cert.V, names);
  j["c"] = cert.c;
  nlohmann::json phi = nlohmann::json::object(), eps = nlohmann::json::object(), l1 = nlohmann::json::object(),
                 l2 = nlohmann::json::object(), phid = nlohmann::json::object();
  for (const auto& m : cert.modes) {
    phi[m.id] = to_string(m.phi.polynomial(), names);
    phid[m.id] = m.phi.d;
    eps[m.id] = m.eps;
    l1[m.id] = m.lambda1 ? nlohmann::json(*m.lambda1) : nlohmann::json(nullptr);
    l2[m.id] = m.lambda2 ? nlohmann::json(*m.lambda2) : nlohmann::json(nullptr);
  }
  auto ids = nlohmann::json::array();
  for (const auto& m : cert.modes) ids.push_back(m.id);
  j["modes"] = ids;
  j["phi"] = phi;
  j["phi_exponents"] = phid;
  j["eps"] = eps;
  j["lambda1"] = l1;
  j["lambda2"] = l2;
  j["beta_lb"] = cert.beta_lb;
  j["dwell_lb"] = cert.dwell && std::isfinite(cert.dwell->delta_lb) ? nlohmann::json(cert.dwell->delta_lb)
                                                                     : nlohmann::json(nullptr);
  j["dwell_unbounded"] = cert.dwell && !std::isfinite(cert.dwell->delta_lb);
  j["lambda"] = cert.lambda;
  j["alpha_scale"] = cert.alpha_scale;
  j["spec"] = {{"kind", cert.region ? "RS" : "AS"}, {"target_radius", cert.target_radius}};
  j["iterations"] = cert.iterations;
  j["witness_count"] = cert.witness_count;
  j["confirmation"] = confirmation_to_json(cert.confirmation);
  return j;
}

inline Certificate certificate_from_json(const nlohmann::json& j) {
  Certificate cert;
  cert.variables = j.at("variables").get<std::vector<std::string>>();
  cert.model_name = j.value("model", std::string());
  cert.model_hash = j.at("model_hash").get<std::string>();
  cert.c = j.at("c").get<std::vector<double>>();
  cert.V = polynomial_from_json(j.at("V_terms"), cert.variables);
  for (const auto& idj : j.at("modes")) {
    const auto id = idj.get<std::string>();
    const auto& d = j.at("phi_exponents").at(id);
    ModeCertificate mc{id, PhiFunction{d.get<std::vector<std::uint32_t>>()}, j.at("eps").at(id).get<double>(), {}, {}};
    if (!j.at("lambda1").at(id).is_null()) mc.lambda1 = j.at("lambda1").at(id).get<double>();
    if (!j.at("lambda2").at(id).is_null()) mc.lambda2 = j.at("lambda2").at(id).get<double>();
    cert.modes.push_back(std::move(mc));
  }
  cert.beta_lb = j.at("beta_lb").get<double>();
  cert.lambda = j.at("lambda").get<double>();
  if (!j.at("dwell_lb").is_null() || j.value("dwell_unbounded", false)) {
    DwellBound d;
    d.lambda = cert.lambda;
    d.delta_lb = j.at("dwell_lb").is_null() ? std::numeric_limits<double>::infinity() : j.at("dwell_lb").get<double>();
    cert.dwell = d;
  }
  cert.alpha_scale = j.value("alpha_scale", 1.0);
  cert.region = j.at("spec").at("kind") == "RS";
  cert.target_radius = j.at("spec").at("target_radius").get<double>();
  cert.iterations = j.value("iterations", std::size_t{0});
  cert.witness_count = j.value("witness_count", std::size_t{0});
  if (j.contains("confirmation")) {
    const auto& c = j.at("confirmation");
    auto num = [](const nlohmann::json& v) {
      return v.is_null() ? std::numeric_limits<double>::infinity() : v.get<double>();
    };
    auto& r = cert.confirmation;
    r.samples = c.value("samples", std::size_t{0});
    r.skipped = c.value("skipped_in_target", std::size_t{0});
    r.positivity_violations = c.value("positivity_violations", std::size_t{0});
    r.decrease_violations = c.value("decrease_violations", std::size_t{0});
    r.worst_positivity = num(c.value("worst_positivity_margin", nlohmann::json()));
    r.worst_decrease = num(c.value("worst_decrease_margin", nlohmann::json()));
    r.quadratic_min_eig = c.value("quadratic_min_eig", 0.0);
    r.quadratic_psd = c.value("ok", true) || r.positivity_violations + r.decrease_violations > 0;
  }
  return cert;
}

}  // namespace clf
