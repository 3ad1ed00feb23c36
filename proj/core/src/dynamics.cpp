// Copyright 2026 The eoslab Authors
// SPDX-License-Identifier: Apache-2.0

#include "eoslab/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "eoslab/potential.hpp"

namespace eoslab {

std::string_view to_string(LossKind kind) {
  return kind == LossKind::Logistic ? "logistic" : "exponential";
}

LossKind parse_loss_kind(std::string_view text) {
  if (text == "logistic") return LossKind::Logistic;
  if (text == "exponential" || text == "exp") return LossKind::Exponential;
  throw Error(fmt::format("unknown loss kind '{}'", text));
}

std::string_view to_string(Termination kind) {
  switch (kind) {
    case Termination::Completed: return "completed";
    case Termination::Overflow: return "overflow";
    case Termination::NonFinite: return "non_finite";
  }
  return "unknown";
}

double softplus_neg(double m) {
  if (m > 30.0) return std::exp(-m);  // relative error below e^-30 / 2
  if (m < -30.0) return -m + std::exp(m);
  return std::log1p(std::exp(-m));
}

double sigmoid_neg(double m) {
  if (m >= 0.0) {
    const double e = std::exp(-m);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(m));
}

namespace {

// Loss and gradient on the signed features z. Buffers are reused across GD
// steps; the summation order is fixed, so replays are bit-identical.
struct Evaluator {
  const Matrix& z;
  LossKind kind;
  Vector margins;
  Vector weights;

  Evaluator(const Matrix& signed_features, LossKind k)
      : z(signed_features), kind(k), margins(signed_features.rows()),
        weights(signed_features.rows()) {}

  double operator()(const Vector& w, Vector& grad) {
    margins.noalias() = z * w;
    double loss = 0.0;
    if (kind == LossKind::Logistic) {
      for (Index i = 0; i < margins.size(); ++i) {
        loss += softplus_neg(margins(i));
        weights(i) = sigmoid_neg(margins(i));
      }
    } else {
      for (Index i = 0; i < margins.size(); ++i) {
        const double e = std::exp(-margins(i));
        loss += e;
        weights(i) = e;
      }
    }
    grad.noalias() = -(z.transpose() * weights);
    return loss;
  }
};

void step_in_place(Vector& w, double eta, const Vector& grad) { w.noalias() -= eta * grad; }

std::vector<Index> record_times(const RecordSchedule& schedule, Index steps) {
  if (!(schedule.growth > 1.0)) throw Error("record growth must exceed 1");
  std::vector<Index> times;
  for (Index t = 0; t <= std::min(schedule.dense_until, steps); ++t) times.push_back(t);
  for (int k = 0;; ++k) {
    const double raw = std::ceil(std::pow(schedule.growth, k));
    if (raw > double(steps)) break;
    const auto t = static_cast<Index>(raw);
    times.push_back(t);
    if (schedule.successor_pairs && t + 1 <= steps) times.push_back(t + 1);
  }
  times.push_back(steps);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  return times;
}

Index last_valid_step(const Trajectory& traj) {
  if (traj.terminated.kind == Termination::Completed) return traj.steps;
  return traj.last_t();
}

}  // namespace

std::string RecordSchedule::describe() const {
  return fmt::format("dense t<={}; ceil({}^k){}; final step; checkpoints every {}", dense_until,
                     growth, successor_pairs ? " and successor" : "", checkpoint_every);
}

const IterateRecord* Trajectory::find(Index t) const {
  const auto it = std::lower_bound(records.begin(), records.end(), t,
                                   [](const IterateRecord& r, Index v) { return r.t < v; });
  if (it == records.end() || it->t != t) return nullptr;
  return &*it;
}

LossGrad loss_and_grad(const Dataset& ds, LossKind kind, const Vector& w) {
  if (w.size() != ds.d())
    throw Error(fmt::format("dimension mismatch: {} vs {}", w.size(), ds.d()));
  const Matrix z = ds.signed_features();
  Evaluator eval(z, kind);
  LossGrad out;
  out.grad.resize(ds.d());
  out.loss = eval(w, out.grad);
  return out;
}

double hessian_top_eig(const Dataset& ds, LossKind kind, const Vector& w, int iters) {
  if (iters < 10) throw Error("hessian iterations must be >= 10");
  if (w.size() != ds.d()) throw Error("dimension mismatch");
  const Matrix z = ds.signed_features();
  const Vector margins = z * w;
  Vector h(margins.size());
  for (Index i = 0; i < margins.size(); ++i) {
    const double m = margins(i);
    h(i) = kind == LossKind::Logistic ? sigmoid_neg(m) * sigmoid_neg(-m) : std::exp(-m);
  }
  if (!h.allFinite()) throw Error("non-finite Hessian");
  Vector v = Vector::Ones(ds.d()) / std::sqrt(double(ds.d()));
  auto apply = [&](const Vector& x) -> Vector {
    return z.transpose() * (h.array() * (z * x).array()).matrix();
  };
  double rq = v.dot(apply(v));
  for (int k = 0; k < iters; ++k) {
    const Vector hv = apply(v);
    const double norm = hv.norm();
    if (norm == 0.0) return 0.0;
    v = hv / norm;
    rq = v.dot(apply(v));
  }
  if (!std::isfinite(rq)) throw Error("non-finite Hessian");
  return rq;
}

Trajectory gd_run(const Dataset& ds, LossKind kind, double eta, Index steps, const Vector& w0,
                  const MarginGeometry& geo, const RecordSchedule& schedule,
                  const RunOptions& options) {
  validate(ds);
  if (!(eta > 0.0) || !std::isfinite(eta)) throw Error("eta must be positive");
  if (steps < 1) throw Error("steps must be >= 1");
  if (w0.size() != ds.d())
    throw Error(fmt::format("w0 has dimension {}, dataset has {}", w0.size(), ds.d()));
  if (geo.d() != ds.d()) throw Error("geometry does not match dataset");
  if (schedule.checkpoint_every < 1) throw Error("checkpoint interval must be >= 1");

  Trajectory traj;
  traj.eta = eta;
  traj.loss_kind = kind;
  traj.w0 = w0;
  traj.steps = steps;
  traj.schedule = schedule;

  const Matrix z = ds.signed_features();
  const Vector dir = geo.direction();
  const Matrix sup = support_ns_features(geo, ds);
  const Matrix non = nonsupport_ns_features(geo, ds);
  const std::vector<Index> times = record_times(schedule, steps);

  Evaluator eval(z, kind);
  Vector w = w0;
  Vector grad(ds.d());
  double loss = eval(w, grad);

  auto record = [&](Index t) {
    IterateRecord rec;
    rec.t = t;
    rec.w = w;
    rec.loss = loss;
    rec.grad_norm = grad.norm();
    rec.proj_mm = w.dot(dir);
    rec.ns_coords = geo.basis.transpose() * w;
    rec.ns_norm = rec.ns_coords.norm();
    rec.G_val = exp_sum(sup, rec.ns_coords);
    rec.H_val = exp_sum(non, rec.ns_coords);
    rec.eff_step = eta * std::exp(-geo.gamma * rec.proj_mm);
    rec.ns_sign = rec.ns_coords.size() > 0 ? rec.ns_coords(0) : 0.0;
    if (options.hess_iters > 0) {
      try {
        rec.hess_top = hessian_top_eig(ds, kind, w, std::max(options.hess_iters, 10));
      } catch (const Error&) {
        rec.hess_top.reset();
      }
    }
    traj.records.push_back(std::move(rec));
  };

  traj.checkpoints[0] = w;
  record(0);
  std::size_t next = 1;
  traj.terminated = {Termination::Completed, steps};
  for (Index t = 1; t <= steps; ++t) {
    step_in_place(w, eta, grad);
    loss = eval(w, grad);
    if (w.hasNaN() || std::isnan(loss) || grad.hasNaN()) {
      traj.terminated = {Termination::NonFinite, t};
      break;
    }
    const bool blown = !std::isfinite(loss) || loss > options.overflow_limit ||
                       !w.allFinite() || w.cwiseAbs().maxCoeff() > options.overflow_limit ||
                       !grad.allFinite();
    if (blown) {
      traj.terminated = {Termination::Overflow, t};
      if (w.allFinite()) record(t);
      break;
    }
    if (t % schedule.checkpoint_every == 0) traj.checkpoints[t] = w;
    if (next < times.size() && times[next] == t) {
      record(t);
      ++next;
    }
  }
  return traj;
}

Vector materialize(const Trajectory& traj, const Dataset& ds, Index t) {
  if (t < 0 || t > last_valid_step(traj))
    throw Error(fmt::format("step {} outside the trajectory", t));
  Index start = 0;
  Vector w = traj.w0;
  auto it = traj.checkpoints.upper_bound(t);
  if (it != traj.checkpoints.begin()) {
    --it;
    start = it->first;
    w = it->second;
  }
  const Matrix z = ds.signed_features();
  Evaluator eval(z, traj.loss_kind);
  Vector grad(ds.d());
  for (Index s = start; s < t; ++s) {
    eval(w, grad);
    step_in_place(w, traj.eta, grad);
  }
  return w;
}

Vector iterate_at(const Trajectory& traj, const Dataset& ds, const IterateRecord& rec) {
  if (rec.w.size() == ds.d()) return rec.w;
  return materialize(traj, ds, rec.t);
}

void rehydrate(Trajectory& traj, const Dataset& ds, const MarginGeometry& geo) {
  if (traj.w0.size() != ds.d()) throw Error("w0 does not match dataset");
  const Matrix z = ds.signed_features();
  Evaluator eval(z, traj.loss_kind);
  Vector w = traj.w0;
  Vector grad(ds.d());
  double loss = eval(w, grad);
  traj.checkpoints.clear();
  Index t = 0;
  for (auto& rec : traj.records) {
    while (t < rec.t) {
      step_in_place(w, traj.eta, grad);
      loss = eval(w, grad);
      ++t;
      if (t % traj.schedule.checkpoint_every == 0) traj.checkpoints[t] = w;
    }
    if (t == 0) traj.checkpoints[0] = w;
    const bool same = (std::isinf(loss) && std::isinf(rec.loss)) ||
                      std::abs(loss - rec.loss) <= 1e-9 * std::max(1.0, std::abs(rec.loss));
    if (!same)
      throw Error(fmt::format("replay mismatch at t={}: loss {} vs stored {}", rec.t, loss, rec.loss));
    rec.w = w;
    rec.ns_coords = geo.basis.transpose() * w;
  }
}

}  // namespace eoslab
