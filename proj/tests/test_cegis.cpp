#include <gtest/gtest.h>

#include <set>

#include "clf/catalog.hpp"
#include "clf/cegis.hpp"
#include "gen.hpp"

using namespace clf;

namespace {

SynthesisResult run(int id) {
  const auto plant = as_switched(benchmark(id).model);
  return synthesize(plant, default_config(plant));
}

Polynomial P2(const std::string& s) { return parse_polynomial(s, std::vector<std::string>{"x", "y"}); }

}  // namespace

TEST(Cegis, HeaterThreeSolvesInOneIteration) {
  const auto res = run(9);
  ASSERT_TRUE(res.success) << res.detail;
  EXPECT_EQ(res.iterations, 1U);
  const auto& cert = *res.certificate;
  EXPECT_TRUE(cert.confirmation.ok());
  EXPECT_EQ(cert.confirmation.samples, 100000U);
  EXPECT_GT(cert.beta_lb, 0.0);
  EXPECT_NEAR(cert.V.eval(std::vector<double>(3, 0.0)), 0.0, 1e-15);
}

TEST(Cegis, CertificateSurvivesSamplingAndMutation) {
  const auto plant = as_switched(benchmark(5).model);
  const auto cfg = default_config(plant);
  const auto res = synthesize(plant, cfg);
  ASSERT_TRUE(res.success) << res.detail;
  const auto sp = prepare(plant, cfg);
  const auto ok = confirm_by_sampling(sp, res.certificate->V, 100000, 99);
  EXPECT_TRUE(ok.ok());
  EXPECT_GE(ok.worst_positivity, -1e-7);
  EXPECT_GE(ok.worst_decrease, -1e-7);
  // flip the sign of the largest coefficient
  auto c = res.certificate->c;
  std::size_t big = 0;
  for (std::size_t j = 1; j < c.size(); ++j)
    if (std::abs(c[j]) > std::abs(c[big])) big = j;
  c[big] = -c[big];
  const auto bad = confirm_by_sampling(sp, cfg.tmpl.instantiate(c, plant.n()), 20000, 99);
  EXPECT_FALSE(bad.ok());
  EXPECT_GT(bad.positivity_violations + bad.decrease_violations, 0U);
}

TEST(Cegis, RegionSpecSkipsTargetBall) {
  for (const auto& e : benchmark_catalog()) {
    const auto plant = as_switched(e.model);
    if (!plant.spec.is_region()) continue;
    const auto sp = prepare(plant, default_config(plant));
    const auto rep = confirm_by_sampling(sp, sp.alpha, 20000, 3);
    EXPECT_EQ(rep.samples, 20000U);
    double vol = 1.0, ball = plant.spec.target_radius;
    for (std::size_t i = 0; i < plant.n(); ++i) vol *= plant.domain.upper()[i] - plant.domain.lower()[i];
    if (plant.n() == 2) EXPECT_NEAR(rep.skipped / 20000.0, M_PI * ball * ball / vol, 0.02);
    return;
  }
  GTEST_SKIP() << "catalog has no region-stability system";
}

TEST(Cegis, SublevelThresholdExamples) {
  const Box sq({-1, -1}, {1, 1});
  const double a = sublevel_threshold(P2("x^2 + y^2"), sq);
  EXPECT_LE(a, 1.0);
  EXPECT_GE(a, 0.99);
  const double b = sublevel_threshold(P2("x^2 + 4*y^2"), sq);
  EXPECT_LE(b, 1.0);
  EXPECT_GE(b, 0.99);
  // on the face x = 1 the minimum of (1+y)^2 + 0.01 (1-y)^2 is 4 * 0.01 / 1.01
  const double exact = 0.04 / 1.01;
  const double c = sublevel_threshold(P2("(x + y)^2 + 0.01*(x - y)^2"), sq);
  EXPECT_LE(c, exact);
  EXPECT_GE(c, 0.99 * exact);
  double grid = 1e300;
  for (int i = 0; i <= 200000; ++i) {
    const double y = -1.0 + 2.0 * i / 200000;
    grid = std::min(grid, P2("(x + y)^2 + 0.01*(x - y)^2").eval(std::vector<double>{1.0, y}));
  }
  EXPECT_NEAR(grid, exact, 1e-9);
}

TEST(Cegis, CertificateJsonRoundTrip) {
  const auto res = run(1);
  ASSERT_TRUE(res.success);
  const auto j = certificate_to_json(*res.certificate);
  const auto back = certificate_from_json(j);
  EXPECT_EQ(certificate_to_json(back), j);
  EXPECT_EQ(back.V, res.certificate->V);
  ASSERT_TRUE(back.dwell.has_value());
  EXPECT_EQ(back.dwell->delta_lb, res.certificate->dwell->delta_lb);
}

TEST(Cegis, RunsAreDeterministic) {
  const auto a = run(3), b = run(3);
  ASSERT_TRUE(a.success);
  ASSERT_TRUE(b.success);
  EXPECT_EQ(certificate_to_json(*a.certificate).dump(), certificate_to_json(*b.certificate).dump());
  EXPECT_EQ(a.candidates, b.candidates);
}

TEST(Cegis, FailureReasonsAndExitCodes) {
  EXPECT_EQ(exit_code(FailureReason::CandidateUnsat), 2);
  EXPECT_EQ(exit_code(FailureReason::IterationCap), 3);
  EXPECT_EQ(exit_code(FailureReason::NumericalFailure), 4);
  EXPECT_EQ(exit_code(FailureReason::ConfirmationFailed), 5);

  const auto plant = as_switched(benchmark(3).model);
  auto cfg = default_config(plant);
  cfg.max_iters = 2;
  const auto capped = synthesize(plant, cfg);
  EXPECT_FALSE(capped.success);
  EXPECT_EQ(capped.reason, FailureReason::IterationCap);
  EXPECT_FALSE(capped.certificate.has_value());
  EXPECT_FALSE(capped.witnesses.empty());

  const auto unstable = run(16);
  EXPECT_FALSE(unstable.success);
  EXPECT_EQ(unstable.reason, FailureReason::CandidateUnsat);

  cfg.max_iters = 0;
  EXPECT_THROW(prepare(plant, cfg), Error);
}

TEST(Cegis, BadInitialCandidateIsRejected) {
  const auto plant = as_switched(benchmark(1).model);
  EXPECT_THROW(synthesize(plant, default_config(plant), std::vector<double>{1.0}), DimensionError);
  const auto res = synthesize(plant, default_config(plant), std::vector<double>{0.0, 0.0, 0.0});
  ASSERT_TRUE(res.success);
  EXPECT_EQ(res.candidates.front(), (std::vector<double>{0.0, 0.0, 0.0}));
}

// Candidates never repeat and every stored witness stays admissible.
TEST(CegisProperty, LoopInvariants) {
  for (int id : {3, 6, 10}) {
    const auto plant = as_switched(benchmark(id).model);
    const auto cfg = default_config(plant);
    const auto res = synthesize(plant, cfg);
    std::set<std::vector<double>> seen(res.candidates.begin(), res.candidates.end());
    EXPECT_EQ(seen.size(), res.candidates.size()) << id;
    const auto sp = prepare(plant, cfg);
    for (const auto& w : res.witnesses) EXPECT_TRUE(validate_witness(sp.relaxed, w.Z, 1e-6).ok) << id;
  }
}

// V evaluated at random states agrees with the template instantiation.
TEST(CegisProperty, CertificatePolynomialMatchesCoefficients) {
  gen::Rng r(91);
  for (int id : {1, 4, 9}) {
    const auto plant = as_switched(benchmark(id).model);
    const auto cfg = default_config(plant);
    const auto res = synthesize(plant, cfg);
    ASSERT_TRUE(res.success) << id;
    for (int s = 0; s < 100; ++s) {
      const auto x = gen::point(r, plant.domain);
      double v = 0.0;
      for (std::size_t j = 0; j < cfg.tmpl.size(); ++j)
        v += res.certificate->c[j] * Polynomial::monomial(plant.n(), cfg.tmpl.monomials[j]).eval(x);
      EXPECT_NEAR(res.certificate->V.eval(x), v, 1e-12 * std::max(1.0, std::abs(v)));
    }
  }
}
