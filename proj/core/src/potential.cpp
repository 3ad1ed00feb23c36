// Copyright 2026 The eoslab Authors
// SPDX-License-Identifier: Apache-2.0

#include "eoslab/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace eoslab {

namespace {

constexpr double kExponentGuard = 700.0;

// log sum_i exp(c_i); -inf for an empty vector.
double log_sum_exp(const Vector& c) {
  if (c.size() == 0) return -std::numeric_limits<double>::infinity();
  const double hi = c.maxCoeff();
  if (!std::isfinite(hi)) return hi;
  return hi + std::log((c.array() - hi).exp().sum());
}

double power_top(const Matrix& sym, int iters) {
  const Index k = sym.rows();
  if (k == 0) return 0.0;
  Vector v = Vector::Ones(k) / std::sqrt(double(k));
  double rq = v.dot(sym * v);
  for (int i = 0; i < iters; ++i) {
    const Vector hv = sym * v;
    const double norm = hv.norm();
    if (norm == 0.0) return 0.0;
    v = hv / norm;
    rq = v.dot(sym * v);
  }
  return rq;
}

}  // namespace

double exp_sum(const Matrix& features, const Vector& v) {
  if (features.rows() == 0) return 0.0;
  return (-(features * v)).array().exp().sum();
}

double log_exp_sum(const Matrix& features, const Vector& v) {
  return log_sum_exp(-(features * v));
}

PotentialValue potential_eval(const PotentialContext& ctx, const Vector& v) {
  if (v.size() != ctx.dim())
    throw Error(fmt::format("dimension mismatch: {} vs {}", v.size(), ctx.dim()));
  const Vector expo = -(ctx.support_features * v);
  if (expo.size() > 0 && expo.maxCoeff() > kExponentGuard)
    throw Error(fmt::format("exponent {} exceeds guard", expo.maxCoeff()));
  const Vector weights = expo.array().exp();
  PotentialValue out;
  out.value = weights.sum();
  out.gradient = -(ctx.support_features.transpose() * weights);
  const Matrix hess = ctx.support_features.transpose() * weights.asDiagonal() * ctx.support_features;
  out.hessian_top = power_top(hess, 200);
  return out;
}

double potential_G(const PotentialContext& ctx, const Vector& v) {
  return exp_sum(ctx.support_features, v);
}

double potential_H(const PotentialContext& ctx, const Vector& v) {
  return exp_sum(ctx.nonsupport_features, v);
}

GMinimizer minimize_G(const Matrix& support_features) {
  const Index k = support_features.cols();
  GMinimizer out;
  out.w_star = Vector::Zero(k);
  const auto& a = support_features;
  auto value = [&](const Vector& v) { return exp_sum(a, v); };

  double g = value(out.w_star);
  for (int it = 0; it < 200; ++it) {
    out.iterations = it;
    // G < 1 means every <a_i, v> > 0: the features are separable and G has
    // no minimizer, only a ray along which it decays to 0.
    if (g < 1.0) break;
    const Vector weights = (-(a * out.w_star)).array().exp();
    const Vector grad = -(a.transpose() * weights);
    if (grad.norm() <= 1e-10) {
      out.G_min = g;
      return out;
    }
    const Matrix hess = a.transpose() * weights.asDiagonal() * a;
    Eigen::LDLT<Matrix> ldlt(hess);
    Vector step = ldlt.solve(-grad);
    if (ldlt.info() != Eigen::Success || !step.allFinite() || step.dot(grad) >= 0.0) step = -grad;

    // Backtracking: halve until G does not increase.
    double t = 1.0;
    bool moved = false;
    for (int h = 0; h < 60; ++h, t *= 0.5) {
      const Vector trial = out.w_star + t * step;
      const double gt = value(trial);
      if (std::isfinite(gt) && gt <= g) {
        out.w_star = trial;
        g = gt;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  throw Error("G minimization stalled");
}

PotentialContext make_potential_context(const Dataset& ds, const MarginGeometry& geo) {
  if (!geo.offset_valid()) throw Error("degenerate offset");
  PotentialContext ctx;
  ctx.support_features = support_ns_features(geo, ds);
  ctx.nonsupport_features = nonsupport_ns_features(geo, ds);
  ctx.nonsupport_margins = nonsupport_margins(geo, ds);
  const GMinimizer gm = minimize_G(ctx.support_features);
  ctx.w_star = gm.w_star;
  ctx.G_min = gm.G_min;
  ctx.offset_b = geo.offset_b;
  ctx.n = ds.n();
  return ctx;
}

double w_max(Index n, double b, double eta) {
  const double nn = double(n);
  if (std::isinf(b)) return eta * nn;
  return std::max(4.0 * nn / b, eta * nn * nn / b) + eta * nn;
}

BoundConstants bound_constants(Index n, double b, double eta, const PotentialContext& ctx) {
  BoundConstants out;
  out.W_max = w_max(n, b, eta);
  const Vector sup_norms = ctx.support_features.rowwise().norm();
  const Vector non_norms = ctx.nonsupport_features.rowwise().norm();
  out.log_G_max = log_sum_exp(out.W_max * sup_norms);
  out.log_H_max = log_sum_exp(out.W_max * non_norms);
  out.G_max = std::exp(out.log_G_max);
  out.H_max = std::exp(out.log_H_max);
  return out;
}

}  // namespace eoslab
