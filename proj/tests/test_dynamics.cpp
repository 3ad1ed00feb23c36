// Copyright 2026 The eoslab Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "eoslab/dynamics.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"

namespace eoslab {
namespace {

TEST(Loss, TwoPointAtOrigin) {
  const Dataset ds = make_two_point(0.2);
  const LossGrad lg = loss_and_grad(ds, LossKind::Logistic, Vector::Zero(2));
  EXPECT_NEAR(lg.loss, 2.0 * std::log(2.0), 1e-15);
  EXPECT_NEAR(lg.grad(0), -0.2, 1e-15);
  EXPECT_NEAR(lg.grad(1), 0.0, 1e-15);

  const LossGrad ex = loss_and_grad(ds, LossKind::Exponential, Vector::Zero(2));
  EXPECT_DOUBLE_EQ(ex.loss, 2.0);
  EXPECT_NEAR(ex.grad(0), -0.4, 1e-15);
  EXPECT_NEAR(ex.grad(1), 0.0, 1e-15);
}

TEST(Loss, LogisticTailIsTiny) {
  const Dataset ds = gen_separable(10, 3, 0.3, 2);
  const MarginGeometry geo = solve_hard_margin(ds);
  const Vector w = geo.w_hat * 40.0;  // every margin >= 40
  const LossGrad lg = loss_and_grad(ds, LossKind::Logistic, w);
  EXPECT_LT(lg.loss, 10.0 * std::exp(-40.0));
  EXPECT_LT(lg.grad.norm(), 10.0 * std::exp(-40.0));
}

TEST(Loss, StableSoftplusAndSigmoid) {
  for (double m : {-800.0, -45.0, -30.5, -29.5, -3.0, 0.0, 2.0, 29.5, 30.5, 45.0, 700.0}) {
    const long double ref = std::log1p(std::exp(-static_cast<long double>(m)));
    const double got = softplus_neg(m);
    ASSERT_TRUE(std::isfinite(got)) << m;
    EXPECT_NEAR(got, double(ref), 1e-13 * std::max(1.0L, std::fabs(ref)) + 1e-300) << m;
    const long double sig = 1.0L / (1.0L + std::exp(static_cast<long double>(m)));
    EXPECT_NEAR(sigmoid_neg(m), double(sig), 1e-15 * double(sig) + 1e-300) << m;
  }
}

TEST(Loss, DimensionMismatchThrows) {
  EXPECT_THROW(loss_and_grad(make_two_point(0.2), LossKind::Logistic, Vector::Zero(3)), Error);
}

TEST(Loss, FiniteDifferenceAgreement) {
  std::mt19937_64 rng(99);
  for (LossKind kind : {LossKind::Logistic, LossKind::Exponential}) {
    for (int k = 0; k < 200; ++k) {
      const Index d = 2 + k % 4;
      const Dataset ds = testing::random_separable(5 + k % 6, d, rng);
      const Vector w = testing::random_vector(d, rng, 0.7);
      const Vector g = loss_and_grad(ds, kind, w).grad;
      const Vector fd = oracle::fd_grad(
          [&](const Vector& v) { return loss_and_grad(ds, kind, v).loss; }, w, 1e-6);
      for (Index i = 0; i < d; ++i)
        EXPECT_NEAR(g(i), fd(i), 1e-5 * std::max(1.0, std::abs(fd(i)))) << to_string(kind) << " " << k;
    }
  }
}

TEST(Loss, LogisticGradientIsBounded) {
  std::mt19937_64 rng(4);
  for (int k = 0; k < 50; ++k) {
    const Dataset ds = testing::random_separable(8, 3, rng);
    const Vector w = testing::random_vector(3, rng, 20.0);
    EXPECT_LE(loss_and_grad(ds, LossKind::Logistic, w).grad.norm(),
              double(ds.n()) * ds.max_row_norm() + 1e-12);
  }
}

TEST(Hessian, OrthonormalFeaturesAtOrigin) {
  const Dataset ds = testing::make_dataset(Matrix::Identity(2, 2), Vector::Ones(2));
  EXPECT_NEAR(hessian_top_eig(ds, LossKind::Logistic, Vector::Zero(2), 20), 0.25, 1e-12);
}

TEST(Hessian, MatchesDenseEigensolver) {
  std::mt19937_64 rng(12);
  for (int k = 0; k < 20; ++k) {
    const Dataset ds = testing::random_separable(8, 3, rng);
    const Vector w = testing::random_vector(3, rng);
    const Matrix z = ds.signed_features();
    Vector h(8);
    for (Index i = 0; i < 8; ++i) {
      const double m = z.row(i).dot(w);
      const double s = 1.0 / (1.0 + std::exp(-m));
      h(i) = s * (1.0 - s);
    }
    const Matrix hess = z.transpose() * h.asDiagonal() * z;
    const double top = Eigen::SelfAdjointEigenSolver<Matrix>(hess).eigenvalues().maxCoeff();
    EXPECT_NEAR(hessian_top_eig(ds, LossKind::Logistic, w, 500), top, 1e-6) << k;
  }
}

TEST(Hessian, LogisticSigmoidVarianceBound) {
  std::mt19937_64 rng(13);
  for (int k = 0; k < 30; ++k) {
    const Dataset ds = testing::random_separable(7, 4, rng);
    const Vector w = testing::random_vector(4, rng, 2.0);
    const double bound = double(ds.n()) / 4.0 * std::pow(ds.max_row_norm(), 2) + 1e-8;
    EXPECT_LE(hessian_top_eig(ds, LossKind::Logistic, w, 50), bound);
  }
}

TEST(Hessian, RejectsFewIterationsAndOverflow) {
  const Dataset ds = make_two_point(0.2);
  EXPECT_THROW(hessian_top_eig(ds, LossKind::Logistic, Vector::Zero(2), 5), Error);
  EXPECT_THROW(hessian_top_eig(ds, LossKind::Exponential, Eigen::Vector2d(0, 1000), 20), Error);
}

class TwoPointRun : public ::testing::Test {
 protected:
  Dataset ds = make_two_point(0.2);
  MarginGeometry geo = solve_hard_margin(ds);
};

TEST_F(TwoPointRun, FirstLogisticStep) {
  const Trajectory tr = gd_run(ds, LossKind::Logistic, 2.0, 1, Vector::Zero(2), geo);
  ASSERT_EQ(tr.records.size(), 2u);
  EXPECT_NEAR(tr.records[1].w(0), 0.4, 1e-15);
  EXPECT_NEAR(tr.records[1].w(1), 0.0, 1e-15);
  EXPECT_EQ(tr.terminated.kind, Termination::Completed);
}

TEST_F(TwoPointRun, FirstExponentialStep) {
  const Trajectory tr = gd_run(ds, LossKind::Exponential, 4.0, 1, Eigen::Vector2d(0, 1), geo);
  const double e = std::exp(1.0);
  const Vector& w1 = tr.records.at(1).w;
  EXPECT_NEAR(w1(0), 4.0 * 0.2 * (1.0 / e + e), 1e-12);
  EXPECT_NEAR(w1(1), 1.0 - 4.0 * (e - 1.0 / e), 1e-12);
  EXPECT_NEAR(w1(0), 2.46887, 1e-4);
  EXPECT_NEAR(w1(1), -8.40156, 1e-4);
}

TEST_F(TwoPointRun, ExponentialBlowUpIsRecordedNotThrown) {
  const Trajectory tr = gd_run(ds, LossKind::Exponential, 4.0, 200, Eigen::Vector2d(0, 1), geo);
  EXPECT_EQ(tr.terminated.kind, Termination::Overflow);
  EXPECT_LT(tr.terminated.step, 200);
  EXPECT_EQ(tr.records.front().t, 0);
}

TEST_F(TwoPointRun, RejectsBadArguments) {
  EXPECT_THROW(gd_run(ds, LossKind::Logistic, 0.0, 10, Vector::Zero(2), geo), Error);
  EXPECT_THROW(gd_run(ds, LossKind::Logistic, 1.0, 0, Vector::Zero(2), geo), Error);
  EXPECT_THROW(gd_run(ds, LossKind::Logistic, 1.0, 10, Vector::Zero(3), geo), Error);
}

TEST_F(TwoPointRun, TinyStepIsNearlyLinear) {
  const double eta = 1e-9;
  const Trajectory tr = gd_run(ds, LossKind::Logistic, eta, 10, Vector::Zero(2), geo);
  const Vector g0 = loss_and_grad(ds, LossKind::Logistic, Vector::Zero(2)).grad;
  EXPECT_LE((tr.records.back().w - 10.0 * eta * (-g0)).norm(), 1e-6);
}

TEST_F(TwoPointRun, RecordsAndDiagnostics) {
  const Trajectory tr = gd_run(ds, LossKind::Logistic, 2.0, 5000, Eigen::Vector2d(0, 1), geo);
  ASSERT_FALSE(tr.records.empty());
  EXPECT_EQ(tr.records.front().t, 0);
  EXPECT_EQ(tr.records.back().t, 5000);
  for (std::size_t i = 1; i < tr.records.size(); ++i) EXPECT_GT(tr.records[i].t, tr.records[i - 1].t);
  for (Index t = 0; t <= 1000; ++t) EXPECT_NE(tr.find(t), nullptr) << t;
  const auto geo_t = static_cast<Index>(std::ceil(std::pow(1.05, 150)));
  EXPECT_NE(tr.find(geo_t), nullptr);  // ceil(1.05^k) and its successor
  EXPECT_NE(tr.find(geo_t + 1), nullptr);
  for (const auto& r : tr.records) {
    EXPECT_NEAR(r.ns_norm, r.ns_coords.norm(), 1e-12);
    EXPECT_GE(r.loss, 0.0);
    EXPECT_DOUBLE_EQ(r.ns_sign, r.ns_coords(0));
    EXPECT_NEAR(r.proj_mm, project_mm(geo, r.w), 1e-12 * std::max(1.0, r.proj_mm));
    EXPECT_NEAR(r.eff_step, 2.0 * std::exp(-0.2 * r.proj_mm), 1e-15);
    EXPECT_TRUE(r.hess_top.has_value());
  }
}

TEST_F(TwoPointRun, DeterministicBitForBit) {
  const Trajectory a = gd_run(ds, LossKind::Logistic, 10.0, 3000, Eigen::Vector2d(0, 1), geo);
  const Trajectory b = gd_run(ds, LossKind::Logistic, 10.0, 3000, Eigen::Vector2d(0, 1), geo);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].w, b.records[i].w);
    EXPECT_EQ(a.records[i].loss, b.records[i].loss);
  }
}

TEST(Dynamics, PositiveAndMonotoneMaxMarginCoordinate) {
  for (std::uint64_t seed : {1, 3}) {
    const Dataset ds = gen_separable(20, 3, 0.3, seed);
    const MarginGeometry geo = solve_hard_margin(ds);
    for (double eta : {0.5, 20.0}) {
      const Trajectory tr = gd_run(ds, LossKind::Logistic, eta, 3000, Vector::Zero(3), geo);
      for (std::size_t i = 1; i < tr.records.size(); ++i) {
        EXPECT_GE(tr.records[i].proj_mm, 0.0);
        EXPECT_GE(tr.records[i].proj_mm, tr.records[i - 1].proj_mm - 1e-12);
      }
    }
  }
}

TEST(Dynamics, MaterializeReplaysFromCheckpoints) {
  const Dataset ds = gen_separable(10, 3, 0.3, 2);
  const MarginGeometry geo = solve_hard_margin(ds);
  RecordSchedule sched;
  sched.checkpoint_every = 64;
  const Trajectory tr = gd_run(ds, LossKind::Logistic, 3.0, 5000, Vector::Zero(3), geo, sched);
  for (const auto& r : tr.records) {
    if (r.t % 97 != 0 && r.t != 5000) continue;
    EXPECT_EQ(materialize(tr, ds, r.t), r.w) << r.t;
  }
  EXPECT_THROW(materialize(tr, ds, 5001), Error);
}

TEST(TrajectoryCsv, RoundTripAndRehydrate) {
  const Dataset ds = make_two_point(0.2);
  const MarginGeometry geo = solve_hard_margin(ds);
  RunOptions opt;
  opt.hess_iters = 0;
  const Trajectory tr = gd_run(ds, LossKind::Logistic, 2.0, 2000, Eigen::Vector2d(0, 1), geo, {}, opt);
  std::stringstream buf;
  write_trajectory_csv(tr, buf);
  std::string header;
  std::getline(std::stringstream(buf.str()), header);
  EXPECT_EQ(header, "t,loss,grad_norm,proj_mm,ns_norm,G_val,H_val,eff_step,hess_top,ns_sign");
  EXPECT_NE(buf.str().find(",nan,"), std::string::npos);

  Trajectory back = tr;
  back.records = read_trajectory_csv(buf);
  ASSERT_EQ(back.records.size(), tr.records.size());
  for (std::size_t i = 0; i < tr.records.size(); ++i) {
    EXPECT_EQ(back.records[i].t, tr.records[i].t);
    EXPECT_EQ(back.records[i].loss, tr.records[i].loss);  // shortest round-trip form
    EXPECT_EQ(back.records[i].ns_sign, tr.records[i].ns_sign);
    EXPECT_FALSE(back.records[i].hess_top.has_value());
    EXPECT_EQ(back.records[i].w.size(), 0);
  }
  rehydrate(back, ds, geo);
  for (std::size_t i = 0; i < tr.records.size(); ++i) EXPECT_EQ(back.records[i].w, tr.records[i].w);

  Trajectory wrong = back;
  wrong.eta = 2.5;
  EXPECT_THROW(rehydrate(wrong, ds, geo), Error);
}

TEST(TrajectoryCsv, RejectsBrokenInput) {
  std::stringstream bad_header("t,loss\n0,1\n");
  EXPECT_THROW(read_trajectory_csv(bad_header), Error);
  std::stringstream short_row("t,loss,grad_norm,proj_mm,ns_norm,G_val,H_val,eff_step,hess_top,ns_sign\n0,1,2\n");
  EXPECT_THROW(read_trajectory_csv(short_row), Error);
  std::stringstream backwards(
      "t,loss,grad_norm,proj_mm,ns_norm,G_val,H_val,eff_step,hess_top,ns_sign\n"
      "1,1,1,1,1,1,1,1,nan,0\n0,1,1,1,1,1,1,1,nan,0\n");
  EXPECT_THROW(read_trajectory_csv(backwards), Error);
}

}  // namespace
}  // namespace eoslab
