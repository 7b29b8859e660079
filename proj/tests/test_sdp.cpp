#include <gtest/gtest.h>

#include "clf/sdp.hpp"
#include "gen.hpp"

using namespace clf;

TEST(Sdp, MaximizeCornerEntry) {
  sdp::EntrywiseProblem ep(2);
  auto& p = ep.problem;
  p.objective[ep.var[1][1]] = 1.0;
  p.rows.push_back({{{ep.var[0][0], 1.0}}, sdp::Relation::Equal, 1.0});
  p.rows.push_back({{{ep.var[1][1], 1.0}}, sdp::Relation::LessEq, 1.0});
  p.lower[ep.var[0][1]] = -1;
  p.upper[ep.var[0][1]] = 1;
  const auto s = sdp::solve(p);
  ASSERT_EQ(s.status, sdp::Status::Optimal) << s.detail;
  EXPECT_NEAR(s.objective, 1.0, 1e-6);
  EXPECT_GE(s.min_eig, -1e-8);
}

TEST(Sdp, ContradictoryRowsAreInfeasible) {
  sdp::EntrywiseProblem ep(2);
  auto& p = ep.problem;
  p.rows.push_back({{{ep.var[0][0], 1.0}}, sdp::Relation::Equal, 1.0});
  p.rows.push_back({{{ep.var[0][0], 1.0}}, sdp::Relation::LessEq, 0.0});
  EXPECT_EQ(sdp::solve(p).status, sdp::Status::Infeasible);
}

TEST(Sdp, NegativeDiagonalIsInfeasible) {
  sdp::EntrywiseProblem ep(2);
  auto& p = ep.problem;
  p.rows.push_back({{{ep.var[0][0], 1.0}}, sdp::Relation::Equal, -1.0});
  for (int k = 0; k < p.num_vars(); ++k) {
    p.lower[k] = -5;
    p.upper[k] = 5;
  }
  const auto s = sdp::solve(p);
  EXPECT_EQ(s.status, sdp::Status::Infeasible) << sdp::to_string(s.status) << " " << s.detail;
}

TEST(Sdp, DimensionErrors) {
  sdp::Problem p;
  EXPECT_THROW((void)sdp::solve(p), DimensionError);
  sdp::EntrywiseProblem ep(2);
  ep.problem.rows.push_back({{{7, 1.0}}, sdp::Relation::LessEq, 1.0});
  EXPECT_THROW((void)sdp::solve(ep.problem), DimensionError);
}

// max <C, Z> s.t. trace Z = 1, Z PSD equals the largest eigenvalue of C.
TEST(SdpProperty, TraceConstrainedMaximumIsLargestEigenvalue) {
  gen::Rng r(31);
  for (int k = 0; k < 60; ++k) {
    const int n = r.integer(2, 6);
    Eigen::MatrixXd C(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) C(i, j) = C(j, i) = r.uniform(-1, 1);
    sdp::EntrywiseProblem ep(n);
    auto& p = ep.problem;
    sdp::LinearRow tr;
    tr.rel = sdp::Relation::Equal;
    tr.rhs = 1.0;
    for (int i = 0; i < n; ++i) {
      tr.coeffs.emplace_back(ep.var[i][i], 1.0);
      for (int j = i; j < n; ++j) {
        p.objective[ep.var[i][j]] = i == j ? C(i, i) : 2 * C(i, j);
        p.lower[ep.var[i][j]] = i == j ? 0.0 : -1.0;
        p.upper[ep.var[i][j]] = 1.0;
      }
    }
    p.rows.push_back(tr);
    const auto s = sdp::solve(p);
    ASSERT_EQ(s.status, sdp::Status::Optimal) << s.detail;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
    EXPECT_NEAR(s.objective, es.eigenvalues().maxCoeff(), 1e-5);
    EXPECT_NEAR(s.Z.trace(), 1.0, 1e-7);
    EXPECT_GE(s.min_eig, -1e-8);
  }
}

TEST(SdpProperty, SolvesAreDeterministic) {
  gen::Rng r(32);
  sdp::EntrywiseProblem ep(4);
  auto& p = ep.problem;
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) {
      p.objective[ep.var[i][j]] = r.uniform(-1, 1);
      p.lower[ep.var[i][j]] = -1;
      p.upper[ep.var[i][j]] = 1;
    }
  const auto a = sdp::solve(p), b = sdp::solve(p);
  ASSERT_EQ(a.status, sdp::Status::Optimal);
  EXPECT_EQ(a.y, b.y);
  EXPECT_EQ(a.objective, b.objective);
}
