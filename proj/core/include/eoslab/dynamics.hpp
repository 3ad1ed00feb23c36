// Copyright 2026 The eoslab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eoslab/data.hpp"
#include "eoslab/geometry.hpp"
#include "eoslab/types.hpp"

namespace eoslab {

enum class LossKind { Logistic, Exponential };

std::string_view to_string(LossKind kind);
LossKind parse_loss_kind(std::string_view text);

/// log(1 + e^{-m}), branching at |m| = 30.
double softplus_neg(double m);
/// 1 / (1 + e^{m}): the per-sample logistic gradient weight.
double sigmoid_neg(double m);

struct LossGrad {
  double loss = 0.0;
  Vector grad;
};

/// Risk and gradient at w. Under the exponential loss an overflowing term
/// yields +inf in the loss and non-finite gradient entries; callers decide.
LossGrad loss_and_grad(const Dataset& ds, LossKind kind, const Vector& w);

/// Largest Hessian eigenvalue at w by power iteration on exact
/// Hessian-vector products from the normalized all-ones vector.
/// Throws Error on non-finite Hessian weights or iters < 10.
double hessian_top_eig(const Dataset& ds, LossKind kind, const Vector& w, int iters);

/// Which steps get an IterateRecord: every t <= dense_until, then every
/// ceil(growth^k) together with its successor, then the final step.
/// Full iterates are checkpointed every `checkpoint_every` steps.
struct RecordSchedule {
  Index dense_until = 1000;
  double growth = 1.05;
  bool successor_pairs = true;
  Index checkpoint_every = Index{1} << 14;

  std::string describe() const;
};

struct IterateRecord {
  Index t = 0;
  Vector w;  // empty when the record was read back from CSV
  double loss = 0.0;
  double grad_norm = 0.0;
  double proj_mm = 0.0;
  Vector ns_coords;
  double ns_norm = 0.0;
  double G_val = 0.0;
  double H_val = 0.0;
  double eff_step = 0.0;
  std::optional<double> hess_top;
  double ns_sign = 0.0;
};

enum class Termination { Completed, Overflow, NonFinite };

std::string_view to_string(Termination kind);

struct TerminationStatus {
  Termination kind = Termination::Completed;
  Index step = 0;  // step at which the run stopped (== steps when completed)
};

struct Trajectory {
  std::vector<IterateRecord> records;
  double eta = 0.0;
  LossKind loss_kind = LossKind::Logistic;
  Vector w0;
  Index steps = 0;
  TerminationStatus terminated;
  RecordSchedule schedule;
  std::map<Index, Vector> checkpoints;

  const IterateRecord* find(Index t) const;
  Index last_t() const { return records.empty() ? 0 : records.back().t; }
};

struct RunOptions {
  int hess_iters = 20;  // 0 disables the Hessian diagnostic
  double overflow_limit = 1e300;
};

/// Constant-stepsize GD w_{t} = w_{t-1} - eta grad L(w_{t-1}) for `steps`
/// steps, recording diagnostics in the frame of `geo`. Stops early with an
/// Overflow or NonFinite status instead of throwing.
Trajectory gd_run(const Dataset& ds, LossKind kind, double eta, Index steps,
                  const Vector& w0, const MarginGeometry& geo,
                  const RecordSchedule& schedule = {}, const RunOptions& options = {});

/// Recomputes w_t by replaying GD from the nearest stored checkpoint.
Vector materialize(const Trajectory& traj, const Dataset& ds, Index t);

/// The stored iterate when present, else materialize().
Vector iterate_at(const Trajectory& traj, const Dataset& ds, const IterateRecord& rec);

/// CSV with header t,loss,grad_norm,proj_mm,ns_norm,G_val,H_val,eff_step,
/// hess_top,ns_sign; non-finite values as inf / nan.
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);

/// Reads the scalar columns back. Records carry no iterate vectors and no
/// ns_coords; see rehydrate().
std::vector<IterateRecord> read_trajectory_csv(std::istream& in);

/// Replays GD from traj.w0 and fills w, ns_coords and checkpoints of every
/// record. Throws Error if a replayed loss disagrees with the stored one
/// beyond 1e-9 relative (the trajectory came from other inputs).
void rehydrate(Trajectory& traj, const Dataset& ds, const MarginGeometry& geo);

}  // namespace eoslab
