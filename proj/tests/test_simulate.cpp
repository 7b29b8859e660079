#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "clf/catalog.hpp"
#include "clf/cegis.hpp"
#include "clf/simulate.hpp"
#include "gen.hpp"

using namespace clf;

namespace {

SwitchedPlant scalar_plant(const std::vector<std::string>& fields) {
  SwitchedPlant p;
  p.variables = {"x"};
  p.domain = Box({-1}, {1});
  for (std::size_t q = 0; q < fields.size(); ++q)
    p.modes.push_back({"q" + std::to_string(q), {parse_polynomial(fields[q], p.variables)}});
  return p;
}

Certificate scalar_certificate(std::size_t modes, double eps) {
  Certificate c;
  c.variables = {"x"};
  c.V = parse_polynomial("x^2", c.variables);
  c.c = {1.0};
  for (std::size_t q = 0; q < modes; ++q) c.modes.push_back({"q" + std::to_string(q), PhiFunction::quadratic(1), eps, {}, {}});
  c.beta_lb = 1.0;
  return c;
}

struct Solved {
  SwitchedPlant plant;
  Certificate cert;
};

Solved solve(int id) {
  const auto plant = as_switched(benchmark(id).model);
  auto res = synthesize(plant, default_config(plant));
  if (!res.success) throw Error("synthesis failed");
  return {plant, *res.certificate};
}

std::vector<double> point_in_pstar(gen::Rng& r, const Solved& s) {
  for (;;) {
    auto x = gen::point(r, s.plant.domain);
    if (s.cert.V.eval(x) < 0.9 * s.cert.beta_lb && euclidean_norm(x) > 1e-3) return x;
  }
}

}  // namespace

TEST(Simulate, ExponentialDecayMatchesClosedForm) {
  const auto plant = scalar_plant({"-x"});
  const auto cert = scalar_certificate(1, 1.0);
  const SwitchingLaw law(plant, cert);
  SimOptions opt;
  opt.horizon = 2.0;
  opt.step = 1e-2;
  const std::vector<double> x0{0.8};
  const auto tr = simulate(law, plant.domain, x0, opt);
  EXPECT_EQ(tr.halt, HaltReason::Horizon);
  EXPECT_TRUE(tr.switches.empty());
  ASSERT_GT(tr.samples.size(), 100U);
  for (const auto& s : tr.samples) EXPECT_NEAR(s.x[0], 0.8 * std::exp(-s.t), 1e-9);
  EXPECT_NEAR(tr.samples.back().t, 2.0, 1e-12);
  EXPECT_TRUE(audit_trace(tr, cert, plant.domain).ok());
}

TEST(Simulate, SelectModeExamples) {
  const auto plant = scalar_plant({"x", "-x", "-3*x"});
  const auto cert = scalar_certificate(3, 0.5);
  const SwitchingLaw law(plant, cert);
  const std::vector<double> x{0.5};
  // V' = 2x^2, -2x^2, -6x^2 against eps phi = 0.5 x^2
  EXPECT_EQ(law.select_mode(0, x), std::optional<std::size_t>(2));
  EXPECT_EQ(law.select_mode(1, x), std::optional<std::size_t>(1));
  EXPECT_EQ(law.select_mode(2, x), std::optional<std::size_t>(2));
  EXPECT_EQ(law.initial_mode(x), 2U);

  const auto stuck_plant = scalar_plant({"x", "2*x"});
  const SwitchingLaw stuck(stuck_plant, scalar_certificate(2, 0.5));
  EXPECT_FALSE(stuck.select_mode(0, x).has_value());
  EXPECT_EQ(stuck.initial_mode(x), 0U);
}

TEST(Simulate, UnstableModeHaltsWithoutEligibleMode) {
  const auto plant = scalar_plant({"x", "2*x"});
  const SwitchingLaw law(plant, scalar_certificate(2, 0.5));
  const std::vector<double> x0{0.3};
  const auto tr = simulate(law, plant.domain, x0, {});
  EXPECT_EQ(tr.halt, HaltReason::NoEligibleMode);
}

TEST(Simulate, StartOutsideDomainHaltsImmediately) {
  const auto plant = scalar_plant({"-x"});
  const SwitchingLaw law(plant, scalar_certificate(1, 1.0));
  const std::vector<double> x0{1.5};
  EXPECT_EQ(simulate(law, plant.domain, x0, {}).halt, HaltReason::DomainExit);
}

TEST(Simulate, MismatchedCertificateThrows) {
  const auto plant = scalar_plant({"-x", "x"});
  EXPECT_THROW(SwitchingLaw(plant, scalar_certificate(1, 1.0)), DimensionError);
}

TEST(Simulate, EmptyTracePassesAudit) {
  Trace tr;
  tr.step = 1e-3;
  const auto cert = scalar_certificate(1, 1.0);
  const auto a = audit_trace(tr, cert, Box({-1}, {1}));
  EXPECT_TRUE(a.ok());
  EXPECT_EQ(a.switches, 0U);
  EXPECT_FALSE(a.min_gap.has_value());
}

TEST(Simulate, DefaultStepIsClamped) {
  auto cert = scalar_certificate(1, 1.0);
  EXPECT_DOUBLE_EQ(default_step(cert), 1e-3);
  cert.dwell = DwellBound{2.0, 0.1, {0.1}};
  EXPECT_DOUBLE_EQ(default_step(cert), 0.005);
  cert.dwell->delta_lb = 1e-7;
  EXPECT_DOUBLE_EQ(default_step(cert), 1e-4);
  cert.dwell->delta_lb = 10.0;
  EXPECT_DOUBLE_EQ(default_step(cert), 1e-2);
}

TEST(Simulate, TraceCsvHasHeaderAndRows) {
  const auto plant = scalar_plant({"-x"});
  const SwitchingLaw law(plant, scalar_certificate(1, 1.0));
  SimOptions opt;
  opt.horizon = 0.1;
  opt.step = 0.01;
  const std::vector<double> x0{0.5};
  const auto tr = simulate(law, plant.domain, x0, opt);
  std::ostringstream os;
  write_trace_csv(os, tr);
  const auto text = os.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "t,x1,mode,V,Vdot");
  EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')), tr.samples.size() + 1);
}

TEST(Simulate, SystemOneTraceFromHalfCorner) {
  const auto s = solve(1);
  const SwitchingLaw law(s.plant, s.cert);
  // scale a corner of the box onto the P* boundary, then halve it
  std::vector<double> x0{1.0, 1.0};
  const double k = std::sqrt(s.cert.beta_lb / s.cert.V.eval(x0));
  for (auto& v : x0) v *= 0.5 * std::min(1.0, k);
  SimOptions opt;
  opt.horizon = 20.0;
  const auto tr = simulate(law, s.plant.domain, x0, opt);
  const auto a = audit_trace(tr, s.cert, s.plant.domain);
  EXPECT_TRUE(a.ok()) << audit_to_json(a).dump();
  EXPECT_LT(a.final_norm, a.initial_norm);
}

// An overstated dwell bound must be caught by the gap check.
TEST(Simulate, InflatedDwellBoundIsFlagged) {
  auto s = solve(1);
  ASSERT_TRUE(s.cert.dwell.has_value());
  const SwitchingLaw law(s.plant, s.cert);
  gen::Rng r(101);
  for (int k = 0; k < 20; ++k) {
    const auto x0 = point_in_pstar(r, s);
    SimOptions opt;
    opt.horizon = 5.0;
    const auto tr = simulate(law, s.plant.domain, x0, opt);
    if (tr.switches.size() < 2) continue;
    const auto honest = audit_trace(tr, s.cert, s.plant.domain);
    EXPECT_TRUE(honest.dwell_ok);
    auto inflated = s.cert;
    inflated.dwell->delta_lb = *honest.min_gap + 2.0 * tr.step;
    const auto a = audit_trace(tr, inflated, s.plant.domain);
    EXPECT_FALSE(a.dwell_ok);
    EXPECT_FALSE(a.ok());
    return;
  }
  FAIL() << "no trace with two switches";
}

TEST(SimulateProperty, HealthyTracesPassAudit) {
  gen::Rng r(102);
  for (int id : {1, 5, 6}) {
    const auto s = solve(id);
    const SwitchingLaw law(s.plant, s.cert);
    for (int k = 0; k < 4; ++k) {
      const auto x0 = point_in_pstar(r, s);
      SimOptions opt;
      opt.horizon = 10.0;
      const auto tr = simulate(law, s.plant.domain, x0, opt);
      const auto a = audit_trace(tr, s.cert, s.plant.domain);
      EXPECT_TRUE(a.ok()) << "system " << id << " " << audit_to_json(a).dump();
      for (std::size_t i = 1; i < tr.switches.size(); ++i) EXPECT_GT(tr.switches[i].t, tr.switches[i - 1].t);
    }
  }
}
