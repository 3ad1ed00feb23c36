// Copyright 2026 The eoslab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "eoslab/data.hpp"
#include "eoslab/dynamics.hpp"
#include "eoslab/geometry.hpp"
#include "eoslab/potential.hpp"

namespace eoslab {

/// Outcome of one inequality check over a trajectory. `measured` and `bound`
/// are the two sides at `worst_t`, the step with the least slack.
struct CheckResult {
  std::string name;
  bool passed = false;
  Index worst_t = 0;
  double measured = 0.0;
  double bound = 0.0;
  std::string detail;
};

struct VerificationReport {
  std::string dataset;
  double eta = 0.0;
  LossKind loss = LossKind::Logistic;
  std::vector<CheckResult> checks;

  bool overall() const;
  const CheckResult* find(const std::string& name) const;
};

nlohmann::json to_json(const CheckResult& check);
nlohmann::json to_json(const VerificationReport& report);

// Absolute slack for the bounds that come with explicit constants.
inline constexpr double kExactTol = 1e-9;
// Gradient comparison slack, relative to the norms of the two gradients compared.
inline constexpr double kGradComparisonTol = 1e-12;
// Allowed growth of the running maximum from one decade to the next.
inline constexpr double kEnvelopeRatio = 1.05;
inline constexpr double kDualSpreadTol = 1.05;

/// Rate claims with non-explicit constants: the series sup_t f(t) is accepted
/// if its maximum over t >= t_min is attained by T/2, or if the maximum over
/// (T/10, T] exceeds the maximum over (T/100, T/10] by at most `ratio`.
CheckResult envelope_rule(std::string name,
                          const std::vector<std::pair<Index, double>>& series,
                          double ratio = kEnvelopeRatio);

CheckResult check_mm_lower(const Trajectory& traj, const MarginGeometry& geo);
CheckResult check_mm_upper(const Trajectory& traj, const MarginGeometry& geo,
                           const BoundConstants& bounds);
CheckResult check_ns_bounded(const Trajectory& traj, const BoundConstants& bounds);

/// t * L(w_t) over recorded t >= t_min. Fails outright on a run that was
/// stopped by overflow; throws Error on fewer than 100 records.
CheckResult check_risk_rate(const Trajectory& traj, Index t_min = 3);

/// log(t) * (G(P̄ w_t) - G_min) over recorded t >= t_min, plus net decrease
/// from t = 3 to the end.
CheckResult check_G_convergence(const Trajectory& traj, const PotentialContext& ctx,
                                Index t_min = 3);

/// Per-iterate gradients comparison at up to `samples` recorded steps.
CheckResult check_grad_comparison(const Trajectory& traj, const MarginGeometry& geo,
                                  const Dataset& ds, const PotentialContext& ctx,
                                  std::size_t samples = 100);

/// Modified descent inequality over up to `samples` consecutive record pairs.
CheckResult check_descent_G(const Trajectory& traj, const PotentialContext& ctx,
                            const MarginGeometry& geo, const BoundConstants& bounds,
                            std::size_t samples = 100);

/// Spread max/min of exp(-<a_i, P̄ w_T>) / alpha_i over the support set.
/// Throws Error when the run is shorter than `min_steps`.
CheckResult check_dual_proportionality(const Trajectory& traj, const MarginGeometry& geo,
                                       const Dataset& ds, Index min_steps = 1'000'000);

/// Divergence pattern of the exponential loss with large stepsize.
CheckResult check_exp_divergence(const Trajectory& traj, double gamma);

enum class OscillationMode { ExpectEos, ExpectStable, Observe };

std::string_view to_string(OscillationMode mode);

/// Looks for an ascent step L(w_{t+1}) > L(w_t) among dense records t < 1000
/// and for hess_top > 2 / eta. Observe mode always passes and only reports.
CheckResult check_oscillation(const Trajectory& traj, double eta, OscillationMode mode);

/// sin of the angle between w_t and w_hat at every recorded t >= 1.
std::vector<std::pair<Index, double>> angle_to_max_margin(const Trajectory& traj);

/// sin(angle) <= W_max / proj_mm at every recorded t >= 1, which gives the
/// O(1/log t) direction rate together with the lower bound on proj_mm. The
/// envelope rule on log(t) * sin(angle) is reported in `detail` only.
CheckResult check_angle_rate(const Trajectory& traj, const BoundConstants& bounds);

/// Everything a report needs besides the trajectory.
struct VerifyContext {
  const Dataset* ds = nullptr;
  const MarginGeometry* geo = nullptr;
  const PotentialContext* potential = nullptr;
  OscillationMode mode = OscillationMode::Observe;
  Index risk_t_min = 3;
};

/// Runs every check that applies to the trajectory's loss kind and length.
VerificationReport verify_trajectory(const Trajectory& traj, const VerifyContext& ctx);

}  // namespace eoslab
