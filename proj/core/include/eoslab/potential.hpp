// Copyright 2026 The eoslab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "eoslab/data.hpp"
#include "eoslab/geometry.hpp"
#include "eoslab/types.hpp"

namespace eoslab {

/// sum_i exp(-<a_i, v>) over the rows a_i of `features`. Returns +inf on
/// overflow and 0 for an empty matrix.
double exp_sum(const Matrix& features, const Vector& v);

/// log(exp_sum(features, v)) computed without overflow; -inf when empty.
double log_exp_sum(const Matrix& features, const Vector& v);

/// The complement-subspace picture of a solved dataset: G over the support
/// vectors, H over the rest, and the minimizer of G.
struct PotentialContext {
  Matrix support_features;     // rows y_i P̄(x_i), i in S
  Matrix nonsupport_features;  // rows y_i P̄(x_i), i not in S
  Vector nonsupport_margins;   // y_i P(x_i), i not in S
  Vector w_star;
  double G_min = 0.0;
  double offset_b = 0.0;
  Index n = 0;

  Index dim() const { return support_features.cols(); }
};

struct PotentialValue {
  double value = 0.0;
  Vector gradient;
  double hessian_top = 0.0;
};

/// G, its gradient and the top Hessian eigenvalue (power iteration) at v.
/// Throws Error when an exponent exceeds 700.
PotentialValue potential_eval(const PotentialContext& ctx, const Vector& v);

double potential_G(const PotentialContext& ctx, const Vector& v);
double potential_H(const PotentialContext& ctx, const Vector& v);

struct GMinimizer {
  Vector w_star;
  double G_min = 0.0;
  int iterations = 0;
};

/// Damped Newton on G from the origin, stopping at ||grad G|| <= 1e-10.
/// Throws Error("G minimization stalled") after 200 iterations or once G
/// drops below 1, which only happens on separable features.
GMinimizer minimize_G(const Matrix& support_features);

/// Builds the context for a solved geometry; requires a valid offset.
PotentialContext make_potential_context(const Dataset& ds, const MarginGeometry& geo);

/// Bound constants for one stepsize. G_max and H_max are the per-term
/// majorants sum_i exp(W_max * ||a_i||); the log forms stay finite when the
/// plain values overflow.
struct BoundConstants {
  double W_max = 0.0;
  double G_max = 0.0;
  double H_max = 0.0;
  double log_G_max = 0.0;
  double log_H_max = 0.0;
};

/// max{4n/b, eta n^2/b} + eta n.
double w_max(Index n, double b, double eta);

BoundConstants bound_constants(Index n, double b, double eta, const PotentialContext& ctx);

}  // namespace eoslab
