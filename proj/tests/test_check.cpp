#include <gtest/gtest.h>

#include "clf/catalog.hpp"
#include "clf/cegis.hpp"
#include "clf/check.hpp"
#include "gen.hpp"

using namespace clf;

namespace {

SynthesisProblem problem_for(int id) {
  const auto plant = as_switched(benchmark(id).model);
  return prepare(plant, default_config(plant));
}

// Largest violation of either condition over a uniform grid of the domain.
double grid_violation(const SynthesisProblem& sp, const std::vector<double>& c, int per_axis) {
  const auto& plant = sp.plant;
  const std::size_t n = plant.n();
  const Polynomial V = sp.config.tmpl.instantiate(c, n);
  std::vector<Polynomial> vdot;
  for (const auto& m : plant.modes) vdot.push_back(lie_derivative(V, m.field));
  std::vector<int> idx(n, 0);
  std::vector<double> x(n);
  double worst = -1e300;
  for (;;) {
    for (std::size_t i = 0; i < n; ++i)
      x[i] = plant.domain.lower()[i] + (plant.domain.upper()[i] - plant.domain.lower()[i]) * idx[i] / (per_axis - 1);
    if (sp.alpha.eval(x) > sp.threshold + 1e-4) {
      worst = std::max(worst, sp.alpha.eval(x) - V.eval(x));
      double best_mode = 1e300;
      for (std::size_t q = 0; q < vdot.size(); ++q) best_mode = std::min(best_mode, vdot[q].eval(x) + sp.decay[q].eval(x));
      worst = std::max(worst, best_mode);
    }
    std::size_t k = 0;
    while (k < n && ++idx[k] == per_axis) idx[k++] = 0;
    if (k == n) break;
  }
  return worst;
}

}  // namespace

TEST(Check, ZeroCandidateHasCounterexample) {
  const auto sp = problem_for(1);
  const auto& r = sp.relaxed;
  const std::vector<double> c(r.num_coeffs(), 0.0);
  const auto rep = check_candidate(r, c);
  ASSERT_EQ(rep.outcome, CheckOutcome::Counterexample) << rep.detail;
  ASSERT_EQ(rep.positivity.status, sdp::Status::Optimal);
  EXPECT_GT(rep.positivity.gamma, 1e-6);
  const auto y = r.moments_of(rep.witness);
  EXPECT_GT(apply_functional(r.G, y), r.threshold);
  EXPECT_TRUE(r.in_lifted_box(rep.witness, 1e-7));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rep.witness, Eigen::EigenvaluesOnly);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-7);
  // with c = 0 the positivity gap is exactly <G, Z>
  EXPECT_NEAR(rep.positivity.gamma, apply_functional(r.G, r.moments_of(rep.positivity.Z)), 1e-6);
}

TEST(Check, SynthesizedCandidateHasNoCounterexample) {
  const auto plant = as_switched(benchmark(9).model);
  const auto res = synthesize(plant, default_config(plant));
  ASSERT_TRUE(res.success) << res.detail;
  const auto sp = prepare(plant, default_config(plant));
  const auto rep = check_candidate(sp.relaxed, res.certificate->c);
  EXPECT_EQ(rep.outcome, CheckOutcome::NoCounterexample);
  EXPECT_LE(grid_violation(sp, res.certificate->c, 9), 1e-9);
}

TEST(Check, WrongCandidateLengthThrows) {
  const auto sp = problem_for(1);
  EXPECT_THROW((void)check_candidate(sp.relaxed, {1.0}), DimensionError);
}

TEST(Check, DumpListsDimensionAndRows) {
  const auto sp = problem_for(1);
  const auto text = dump_sdp(positivity_program(sp.relaxed, std::vector<double>(3, 0.0), 1e-6));
  EXPECT_NE(text.find("dim 3"), std::string::npos);
  EXPECT_NE(text.find("row"), std::string::npos);
}

// Relaxing the lifted box enlarges the feasible set, so gamma cannot drop.
TEST(CheckProperty, GammaIsMonotoneUnderBoxRelaxation) {
  gen::Rng r(71);
  const auto sp = problem_for(1);
  CheckTolerances tol;
  for (int k = 0; k < 20; ++k) {
    std::vector<double> c(sp.relaxed.num_coeffs());
    for (auto& v : c) v = r.uniform(-1, 1);
    RelaxedProblem wide = sp.relaxed;
    for (auto& b : wide.moment_bounds) {
      if (b.lo == b.hi) continue;
      const double mid = 0.5 * (b.lo + b.hi), half = 0.5 * (b.hi - b.lo);
      b = Interval{mid - 1.5 * half, mid + 1.5 * half};
    }
    for (int which = 0; which < 2; ++which) {
      const auto narrow_p = which ? decrease_program(sp.relaxed, c, tol.strict) : positivity_program(sp.relaxed, c, tol.strict);
      const auto wide_p = which ? decrease_program(wide, c, tol.strict) : positivity_program(wide, c, tol.strict);
      const auto a = run_program(narrow_p, tol), b = run_program(wide_p, tol);
      ASSERT_EQ(a.status, sdp::Status::Optimal) << a.detail;
      ASSERT_EQ(b.status, sdp::Status::Optimal) << b.detail;
      EXPECT_GE(b.gamma, a.gamma - 1e-5 * std::max(1.0, std::abs(a.gamma)));
    }
  }
}

// Whenever a grid exhibits a violation, the relaxation must report one too.
TEST(CheckProperty, GridViolationsAreNeverMissed) {
  gen::Rng r(72);
  int violated = 0;
  for (int id : {1, 4, 5, 9}) {
    const auto sp = problem_for(id);
    const auto plant = sp.plant;
    const auto cert = synthesize(plant, sp.config);
    for (int k = 0; k < 15; ++k) {
      std::vector<double> c(sp.relaxed.num_coeffs());
      for (std::size_t j = 0; j < c.size(); ++j) {
        const double base = cert.success ? cert.certificate->c[j] : 0.0;
        c[j] = k < 5 ? r.uniform(-1, 1) : base + r.uniform(-0.05, 0.05) * (k - 4);
      }
      const double g = grid_violation(sp, c, plant.n() <= 2 ? 41 : 13);
      if (g <= 1e-3) continue;
      ++violated;
      const auto rep = check_candidate(sp.relaxed, c);
      EXPECT_EQ(rep.outcome, CheckOutcome::Counterexample) << "system " << id << " grid " << g;
    }
  }
  EXPECT_GT(violated, 10);
}
