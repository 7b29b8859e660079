#include <gtest/gtest.h>

#include "clf/catalog.hpp"
#include "clf/cegis.hpp"
#include "clf/relaxation.hpp"
#include "gen.hpp"

using namespace clf;

namespace {

Monomial mono(std::vector<std::uint32_t> e) { return Monomial::from_exponents(e); }

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

}  // namespace

TEST(Relaxation, QuadraticConstraintsNeedOnlyLinearBasis) {
  const auto b = build_basis(2, {mono({2, 0}), mono({1, 1}), mono({0, 2})});
  EXPECT_EQ(b.size(), 3U);
  EXPECT_TRUE(b.monomials[0].is_constant());
  for (const auto& m : {mono({2, 0}), mono({1, 1}), mono({0, 2}), mono({1, 0}), mono({0, 0})})
    EXPECT_TRUE(b.covers(m));
}

TEST(Relaxation, HigherDegreeMonomialsExtendBasis) {
  const auto b = build_basis(2, {mono({4, 0}), mono({3, 1})});
  EXPECT_TRUE(b.covers(mono({4, 0})));
  EXPECT_TRUE(b.covers(mono({3, 1})));
  EXPECT_TRUE(b.index.contains(mono({2, 0})));
}

TEST(Relaxation, LiftedBoxOfUnitSquare) {
  const auto plant = as_switched(benchmark(1).model);
  const auto sp = prepare(plant, default_config(plant));
  const auto& r = sp.relaxed;
  const Interval xx = r.moment_bounds[r.moment_index.at(mono({2, 0}))];
  const Interval xy = r.moment_bounds[r.moment_index.at(mono({1, 1}))];
  EXPECT_DOUBLE_EQ(xx.lo, 0.0);
  EXPECT_DOUBLE_EQ(xx.hi, 1.0);
  EXPECT_DOUBLE_EQ(xy.lo, -1.0);
  EXPECT_DOUBLE_EQ(xy.hi, 1.0);
  Eigen::MatrixXd Z = r.lift(std::vector<double>{1.0, -1.0});
  EXPECT_TRUE(r.in_lifted_box(Z, 0.0));
  Z(1, 1) = 1.5;
  EXPECT_FALSE(r.in_lifted_box(Z, 1e-9));
}

TEST(Relaxation, FunctionalRejectsUnknownMonomial) {
  const auto plant = as_switched(benchmark(1).model);
  const auto sp = prepare(plant, default_config(plant));
  Polynomial p(2);
  p.add_term(mono({7, 0}), 1.0);
  EXPECT_THROW((void)sp.relaxed.functional(p), Error);
}

// For every catalog system, lifting a state gives a PSD point of the lifted
// box whose functionals equal direct polynomial evaluation.
TEST(RelaxationProperty, RankOneLiftMatchesDirectEvaluation) {
  gen::Rng r(61);
  for (const auto& e : benchmark_catalog()) {
    const auto plant = as_switched(e.model);
    const auto sp = prepare(plant, default_config(plant));
    const auto& rp = sp.relaxed;
    for (int s = 0; s < 200; ++s) {
      const auto x = gen::point(r, plant.domain);
      const Eigen::MatrixXd Z = rp.lift(x);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Z, Eigen::EigenvaluesOnly);
      ASSERT_GE(es.eigenvalues().minCoeff(), -1e-9 * std::max(1.0, Z.norm())) << e.id;
      ASSERT_TRUE(rp.in_lifted_box(Z, 1e-9)) << e.id;
      const auto y = rp.moments_of(Z);
      ASSERT_NEAR(y[0], 1.0, 1e-15);
      for (std::size_t k = 0; k < rp.moments.size(); ++k)
        ASSERT_LE(rel_err(y[k], rp.moments[k].eval(std::span<const double>(x))), 1e-9) << e.id;
      ASSERT_LE(rel_err(apply_functional(rp.G, y), sp.alpha.eval(x)), 1e-9);
      for (std::size_t j = 0; j < rp.num_coeffs(); ++j)
        ASSERT_LE(rel_err(apply_functional(rp.F[j], y), rp.template_polys[j].eval(x)), 1e-9);
      for (std::size_t q = 0; q < rp.num_modes(); ++q) {
        ASSERT_LE(rel_err(apply_functional(rp.Gq[q], y), sp.decay[q].eval(x)), 1e-9);
        for (std::size_t j = 0; j < rp.num_coeffs(); ++j) {
          const double direct = -lie_derivative(rp.template_polys[j], plant.modes[q].field).eval(x);
          ASSERT_LE(rel_err(apply_functional(rp.Fq[q][j], y), direct), 1e-9) << e.id;
          ASSERT_LE(rel_err((rp.gram(rp.Fq[q][j]).array() * Z.array()).sum(), direct), 1e-9) << e.id;
        }
      }
    }
  }
}

TEST(RelaxationProperty, FunctionalsAreLinearInCoefficients) {
  gen::Rng r(62);
  for (int id : {1, 5, 9, 18}) {
    const auto plant = as_switched(benchmark(id).model);
    const auto sp = prepare(plant, default_config(plant));
    const auto& rp = sp.relaxed;
    for (int s = 0; s < 50; ++s) {
      std::vector<double> c(rp.num_coeffs());
      for (auto& v : c) v = r.uniform(-1, 1);
      const Polynomial V = sp.config.tmpl.instantiate(c, plant.n());
      const auto x = gen::point(r, plant.domain);
      const auto y = rp.moments_of(rp.lift(x));
      double lhs = 0.0;
      for (std::size_t j = 0; j < c.size(); ++j) lhs += c[j] * apply_functional(rp.F[j], y);
      EXPECT_LE(rel_err(lhs, V.eval(x)), 1e-9);
      for (std::size_t q = 0; q < rp.num_modes(); ++q) {
        double d = 0.0;
        for (std::size_t j = 0; j < c.size(); ++j) d += c[j] * apply_functional(rp.Fq[q][j], y);
        EXPECT_LE(rel_err(d, -lie_derivative(V, plant.modes[q].field).eval(x)), 1e-9);
      }
    }
  }
}
