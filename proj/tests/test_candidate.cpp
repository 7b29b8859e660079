#include <gtest/gtest.h>

#include "clf/candidate.hpp"
#include "clf/catalog.hpp"
#include "clf/cegis.hpp"
#include "gen.hpp"

using namespace clf;

namespace {

SwitchedPlant plant_from(const std::vector<VectorField>& fields, std::size_t n) {
  SwitchedPlant p;
  for (std::size_t i = 0; i < n; ++i) p.variables.push_back("x" + std::to_string(i + 1));
  p.domain = Box(std::vector<double>(n, -1.0), std::vector<double>(n, 1.0));
  for (std::size_t q = 0; q < fields.size(); ++q) p.modes.push_back({"q" + std::to_string(q), fields[q]});
  return p;
}

SynthesisProblem problem(const SwitchedPlant& p, double eps = 0.1) {
  auto cfg = default_config(p);
  cfg.eps.assign(p.modes.size(), eps);
  cfg.phi_mode = "quad";
  return prepare(p, cfg);
}

VectorField scalar(const char* f) { return {parse_polynomial(f, std::vector<std::string>{"x1"})}; }

VectorField random_linear(gen::Rng& r, std::size_t n) {
  VectorField f;
  for (std::size_t i = 0; i < n; ++i) {
    Polynomial c(n);
    for (std::uint32_t j = 0; j < n; ++j) c.add_term(Monomial::variable(j), r.uniform(-2, 2));
    f.push_back(c);
  }
  return f;
}

// Best minimum slack over a uniform grid of the coefficient box.
double grid_best(const WitnessSet& ws, std::size_t m, int per_axis) {
  std::vector<int> idx(m, 0);
  std::vector<double> c(m);
  double best = -1e300;
  for (;;) {
    for (std::size_t j = 0; j < m; ++j) c[j] = -1.0 + 2.0 * idx[j] / (per_axis - 1);
    best = std::max(best, candidate_slack(ws, c));
    std::size_t k = 0;
    while (k < m && ++idx[k] == per_axis) idx[k++] = 0;
    if (k == m) break;
  }
  return best;
}

}  // namespace

TEST(Candidate, EmptyWitnessSetGivesCenter) {
  const auto sp = problem(plant_from({scalar("-x1")}, 1));
  WitnessSet ws(sp.relaxed);
  CandidateOptions opt;
  opt.c_lower = -1;
  opt.c_upper = 3;
  const auto res = find_candidate(ws, opt);
  ASSERT_EQ(res.status, CandidateStatus::Found);
  EXPECT_EQ(res.c, std::vector<double>{1.0});
}

TEST(Candidate, UnstableScalarModeIsUnsat) {
  // x' = x: V = c x^2 needs c >= 1 and -2c >= 0.1 at once
  const auto sp = problem(plant_from({scalar("x1")}, 1));
  WitnessSet ws(sp.relaxed);
  for (auto& Z : initial_witnesses(sp)) ws.add(Z, WitnessOrigin::InitialVertex, 0);
  CandidateOptions opt;
  opt.c_lower = -5;
  opt.c_upper = 5;
  EXPECT_EQ(find_candidate(ws, opt).status, CandidateStatus::Unsat);
}

TEST(Candidate, StableScalarModeMaximizesSlack) {
  const auto sp = problem(plant_from({scalar("-x1")}, 1));
  WitnessSet ws(sp.relaxed);
  for (auto& Z : initial_witnesses(sp)) ws.add(Z, WitnessOrigin::InitialVertex, 0);
  // normalized rows at x = +-1: c - 1 >= t and c - 0.05 >= t, with t capped at 1
  CandidateOptions opt;
  opt.c_upper = 3;
  const auto res = find_candidate(ws, opt);
  ASSERT_EQ(res.status, CandidateStatus::Found);
  EXPECT_NEAR(res.slack, 1.0, 1e-9);
  EXPECT_GE(res.c[0], 2.0 - 1e-9);
  EXPECT_LE(res.c[0], 3.0 + 1e-9);
  opt.c_upper = 1;  // best slack is then 0, below the margin
  EXPECT_EQ(find_candidate(ws, opt).status, CandidateStatus::Unsat);
}

TEST(Candidate, DuplicateAndInvalidWitnesses) {
  gen::Rng r(1);
  const auto sp = problem(plant_from({random_linear(r, 2)}, 2));
  WitnessSet ws(sp.relaxed);
  const std::vector<double> x{0.5, -0.5};
  EXPECT_TRUE(ws.add(sp.relaxed.lift(x), WitnessOrigin::Positivity, 1));
  EXPECT_FALSE(ws.add(sp.relaxed.lift(x), WitnessOrigin::Positivity, 2));
  EXPECT_EQ(ws.size(), 1U);
  Eigen::MatrixXd bad = sp.relaxed.lift(x);
  bad(1, 2) = bad(2, 1) = 5.0;
  EXPECT_THROW(ws.add(bad, WitnessOrigin::Decrease, 3), Error);
  EXPECT_THROW(ws.add(sp.relaxed.lift(std::vector<double>{0.0, 0.0}), WitnessOrigin::Decrease, 3), Error);
  EXPECT_THROW(ws.add(Eigen::MatrixXd::Identity(2, 2), WitnessOrigin::Decrease, 3), Error);
}

TEST(Candidate, VertexWitnessesOfSystemOne) {
  const auto plant = as_switched(benchmark(1).model);
  const auto sp = prepare(plant, default_config(plant));
  WitnessSet ws(sp.relaxed);
  for (auto& Z : initial_witnesses(sp)) ws.add(Z, WitnessOrigin::InitialVertex, 0);
  EXPECT_EQ(ws.size(), 4U);
  const auto res = find_candidate(ws);
  ASSERT_EQ(res.status, CandidateStatus::Found);
  EXPECT_GE(candidate_slack(ws, res.c), 1e-4 - 1e-12);
  for (double v : res.c) {
    EXPECT_GE(v, -1.0 - 1e-12);
    EXPECT_LE(v, 1.0 + 1e-12);
  }
}

TEST(Candidate, RejectsNonPositiveMargin) {
  const auto sp = problem(plant_from({scalar("-x1")}, 1));
  WitnessSet ws(sp.relaxed);
  CandidateOptions opt;
  opt.tau = 0.0;
  EXPECT_THROW((void)find_candidate(ws, opt), Error);
}

// Found candidates satisfy every witness; Unsat agrees with a brute-force grid.
TEST(CandidateProperty, AgreesWithGridSearch) {
  gen::Rng r(81);
  int found = 0, unsat = 0;
  for (int k = 0; k < 60; ++k) {
    const auto plant = plant_from({random_linear(r, 2), random_linear(r, 2)}, 2);
    const auto sp = problem(plant);
    WitnessSet ws(sp.relaxed);
    const int count = r.integer(1, 6);
    for (int i = 0; i < count; ++i) {
      auto x = gen::point(r, 2, -1.0, 1.0);
      if (std::hypot(x[0], x[1]) < 0.1) continue;
      ws.add(sp.relaxed.lift(x), WitnessOrigin::Positivity, 1);
    }
    if (ws.size() == 0) continue;
    const auto res = find_candidate(ws);
    ASSERT_NE(res.status, CandidateStatus::SearchLimit);
    const double g = grid_best(ws, 3, 41);
    if (res.status == CandidateStatus::Found) {
      ++found;
      EXPECT_GE(candidate_slack(ws, res.c), 1e-4 - 1e-9);
      if (ws.size() == 1) EXPECT_GE(res.slack, g - 1e-9);
    } else {
      ++unsat;
      EXPECT_LT(g, 1e-4);
    }
  }
  EXPECT_GT(found, 10);
  EXPECT_GT(unsat, 3);
}

// A counterexample for c rules c out, so the next candidate differs.
TEST(CandidateProperty, NewWitnessExcludesPreviousCandidate) {
  gen::Rng r(82);
  CandidateOptions opt;
  opt.c_lower = -5;
  opt.c_upper = 5;
  int checked = 0;
  for (int k = 0; k < 40; ++k) {
    const auto plant = plant_from({random_linear(r, 2), random_linear(r, 2)}, 2);
    const auto sp = problem(plant);
    WitnessSet ws(sp.relaxed);
    for (auto& Z : initial_witnesses(sp)) ws.add(Z, WitnessOrigin::InitialVertex, 0);
    const auto first = find_candidate(ws, opt);
    if (first.status != CandidateStatus::Found) continue;
    // a state where the first candidate fails some condition
    for (int s = 0; s < 2000; ++s) {
      const auto x = gen::point(r, 2, -1.0, 1.0);
      if (std::hypot(x[0], x[1]) < 0.1) continue;
      WitnessSet probe(sp.relaxed);
      probe.add(sp.relaxed.lift(x), WitnessOrigin::Decrease, 1);
      if (candidate_slack(probe, first.c) >= 0) continue;
      ws.add(sp.relaxed.lift(x), WitnessOrigin::Decrease, 1);
      const auto next = find_candidate(ws, opt);
      if (next.status == CandidateStatus::Found) EXPECT_NE(next.c, first.c);
      ++checked;
      break;
    }
  }
  EXPECT_GT(checked, 5);
}
