// Copyright 2026 The eoslab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "eoslab/data.hpp"
#include "eoslab/types.hpp"

namespace eoslab {

/// Hard-margin geometry of a separable dataset.
///
/// `w_hat` is the minimum-norm vector with y_i <x_i, w> >= 1, so
/// ||w_hat|| = 1 / gamma. `basis` holds f_1..f_{d-1} as columns; together
/// with w_hat / ||w_hat|| they form an orthonormal basis of R^d.
///
/// `offset_b` is the margin offset of the support vectors' complement
/// features. When `offset_exact` is false (d - 1 > 3) it is a certified lower
/// bound and `offset_b_upper` holds the best value found by search. A value
/// <= solve_tol means the non-degeneracy assumption fails for this dataset;
/// solve_hard_margin still returns so the failure can be reported.
struct MarginGeometry {
  double gamma = 0.0;
  Vector w_hat;
  std::vector<Index> support;
  Vector alphas;
  std::optional<double> theta;
  Matrix basis;
  double offset_b = 0.0;
  double offset_b_upper = 0.0;
  bool offset_exact = true;
  double solve_tol = 1e-10;
  double support_tol = 1e-7;

  Index d() const { return w_hat.size(); }
  Vector direction() const { return w_hat / w_hat.norm(); }
  bool is_support(Index i) const;
  bool offset_valid() const { return offset_b > solve_tol; }
};

/// Solves the hard-margin SVM without bias. Throws Error("not separable")
/// when the origin lies in the convex hull of the signed features and
/// Error("no convergence") when the iteration cap is hit first.
MarginGeometry solve_hard_margin(const Dataset& ds, double tol = 1e-10);

double project_mm(const MarginGeometry& geo, const Vector& v);
Vector project_ns(const MarginGeometry& geo, const Vector& v);

/// Rows y_i * P̄(x_i) for i in the support set, in support order.
Matrix support_ns_features(const MarginGeometry& geo, const Dataset& ds);
/// Rows y_i * P̄(x_i) for i outside the support set, in index order.
Matrix nonsupport_ns_features(const MarginGeometry& geo, const Dataset& ds);
/// y_i * P(x_i) for i outside the support set, in index order.
Vector nonsupport_margins(const MarginGeometry& geo, const Dataset& ds);

/// Result of the offset computation on a set of complement features.
struct OffsetEstimate {
  double value = 0.0;  // exact, or certified lower bound when !exact
  double upper = 0.0;  // best search value; equals value when exact
  bool exact = true;
};

/// b = -max_{|u|=1} min_i <a_i, u> for the rows a_i of `features`. Never
/// throws; a non-positive value means the rows are separable.
OffsetEstimate estimate_offset(const Matrix& features, const Vector& weights);

/// Margin offset of the support set. Throws Error("degenerate offset") when
/// the computed b is not positive.
double margin_offset(const MarginGeometry& geo, const Dataset& ds);

/// For v orthogonal to w_hat, returns support indices (i, j) with
/// y_i <x_i, v> < 0 < y_j <x_j, v>. Throws Error("no witness pair") if none.
std::pair<Index, Index> nonseparability_witness(const MarginGeometry& geo,
                                                const Dataset& ds,
                                                const Vector& v);

/// Smallest normalized margin outside the support set; empty when every
/// sample is a support vector.
std::optional<double> second_margin(const MarginGeometry& geo, const Dataset& ds);

/// Export: gamma, w_hat, support (1-based), alphas, theta (nullable),
/// offset_b, basis (row-major).
nlohmann::json to_json(const MarginGeometry& geo);

}  // namespace eoslab
