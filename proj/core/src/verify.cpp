// Copyright 2026 The eoslab Authors
// SPDX-License-Identifier: Apache-2.0

#include "eoslab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace eoslab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

nlohmann::json number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

double log_add_exp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// Evenly spaced picks of `count` items out of `total`, first and last included.
std::vector<std::size_t> spread_indices(std::size_t total, std::size_t count) {
  std::vector<std::size_t> out;
  if (total == 0 || count == 0) return out;
  if (count >= total) {
    for (std::size_t i = 0; i < total; ++i) out.push_back(i);
    return out;
  }
  for (std::size_t k = 0; k < count; ++k) {
    const auto i = static_cast<std::size_t>(
        std::llround(double(k) * double(total - 1) / double(count - 1 > 0 ? count - 1 : 1)));
    if (out.empty() || out.back() != i) out.push_back(i);
  }
  return out;
}

// Tracks the step with the least slack (bound - measured).
struct Tightest {
  double slack = kInf;
  Index t = 0;
  double measured = 0.0;
  double bound = 0.0;
  bool seen = false;

  void offer(Index step, double m, double b) {
    const double s = b - m;
    if (!seen || s < slack || std::isnan(s)) {
      slack = s;
      t = step;
      measured = m;
      bound = b;
      seen = true;
    }
  }
  void fill(CheckResult& r) const {
    r.worst_t = t;
    r.measured = measured;
    r.bound = bound;
  }
};

Vector ns_of(const IterateRecord& rec, const Trajectory& traj, const Dataset& ds,
             const MarginGeometry& geo) {
  if (rec.ns_coords.size() == geo.basis.cols()) return rec.ns_coords;
  return project_ns(geo, iterate_at(traj, ds, rec));
}

}  // namespace

bool VerificationReport::overall() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

const CheckResult* VerificationReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

nlohmann::json to_json(const CheckResult& check) {
  return {{"name", check.name},         {"passed", check.passed},
          {"worst_t", check.worst_t},   {"measured", number(check.measured)},
          {"bound", number(check.bound)}, {"detail", check.detail}};
}

nlohmann::json to_json(const VerificationReport& report) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : report.checks) checks.push_back(to_json(c));
  return {{"dataset", report.dataset},
          {"eta", report.eta},
          {"loss", std::string(to_string(report.loss))},
          {"checks", checks},
          {"overall", report.overall()}};
}

CheckResult envelope_rule(std::string name, const std::vector<std::pair<Index, double>>& series,
                          double ratio) {
  CheckResult r;
  r.name = std::move(name);
  if (series.empty()) {
    r.detail = "no data";
    return r;
  }
  const Index T = series.back().first;
  double top = -kInf;
  Index top_t = 0;
  for (const auto& [t, f] : series) {
    if (!std::isfinite(f)) {
      r.worst_t = t;
      r.measured = f;
      r.bound = kInf;
      r.detail = fmt::format("non-finite value at t={}", t);
      return r;
    }
    if (f > top) {
      top = f;
      top_t = t;
    }
  }
  if (2 * top_t <= T) {
    r.passed = true;
    r.worst_t = top_t;
    r.measured = top;
    r.bound = top;
    r.detail = fmt::format("max {} attained at t={} <= T/2 (T={})", top, top_t, T);
    return r;
  }
  double last = -kInf;
  double prev = -kInf;
  Index last_t = 0;
  for (const auto& [t, f] : series) {
    if (10 * t > T && f > last) {
      last = f;
      last_t = t;
    } else if (10 * t <= T && 100 * t > T && f > prev) {
      prev = f;
    }
  }
  r.worst_t = last_t;
  r.measured = last;
  if (prev == -kInf) {
    r.bound = kInf;
    r.detail = fmt::format("no records in (T/100, T/10] (T={})", T);
    return r;
  }
  r.bound = ratio * prev;
  r.passed = last <= r.bound || (last <= 0.0 && prev <= 0.0);
  r.detail = fmt::format("last-decade max {} vs previous-decade max {} (ratio {}), T={}", last,
                         prev, prev != 0.0 ? last / prev : kInf, T);
  return r;
}

CheckResult check_mm_lower(const Trajectory& traj, const MarginGeometry& geo) {
  CheckResult r;
  r.name = "mm_lower";
  Tightest tight;
  const double g = geo.gamma;
  bool ok = true;
  for (const auto& rec : traj.records) {
    const double bound = std::log1p(traj.eta * g * g * double(rec.t) / 2.0) / g;
    // measured >= bound, so the slack is measured - bound
    tight.offer(rec.t, -rec.proj_mm, -bound);
    if (!(rec.proj_mm >= bound - kExactTol)) ok = false;
  }
  r.passed = ok && tight.seen;
  r.worst_t = tight.t;
  r.measured = -tight.measured;
  r.bound = -tight.bound;
  r.detail = fmt::format("proj_mm >= log(1 + eta*gamma^2*t/2)/gamma over {} records",
                         traj.records.size());
  return r;
}

CheckResult check_mm_upper(const Trajectory& traj, const MarginGeometry& geo,
                           const BoundConstants& bounds) {
  CheckResult r;
  r.name = "mm_upper";
  const double g = geo.gamma;
  // log(e*eta*gamma^2*G_max + e*eta*gamma*H_max)
  const double log_c = 1.0 + std::log(traj.eta) + std::log(g) +
                       log_add_exp(std::log(g) + bounds.log_G_max, bounds.log_H_max);
  Tightest tight;
  bool ok = true;
  for (const auto& rec : traj.records) {
    const double bound = (log_c + std::log(double(rec.t) + 1.0)) / g;
    tight.offer(rec.t, rec.proj_mm, bound);
    if (!(rec.proj_mm <= bound + kExactTol)) ok = false;
  }
  r.passed = ok && tight.seen;
  tight.fill(r);
  r.detail = fmt::format("log G_max = {}, log H_max = {}", bounds.log_G_max, bounds.log_H_max);
  return r;
}

CheckResult check_ns_bounded(const Trajectory& traj, const BoundConstants& bounds) {
  CheckResult r;
  r.name = "ns_bounded";
  Tightest tight;
  bool ok = true;
  for (const auto& rec : traj.records) {
    tight.offer(rec.t, rec.ns_norm, bounds.W_max);
    if (!(rec.ns_norm <= bounds.W_max + kExactTol)) ok = false;
  }
  r.passed = ok && tight.seen;
  tight.fill(r);
  r.detail = fmt::format("ns_norm <= W_max = {}", bounds.W_max);
  return r;
}

CheckResult check_risk_rate(const Trajectory& traj, Index t_min) {
  if (traj.terminated.kind != Termination::Completed) {
    CheckResult r;
    r.name = "risk_rate";
    r.worst_t = traj.terminated.step;
    r.measured = kInf;
    r.bound = kInf;
    r.detail = fmt::format("run stopped: {} at step {}", to_string(traj.terminated.kind),
                           traj.terminated.step);
    return r;
  }
  if (traj.records.size() < 100)
    throw Error(fmt::format("trajectory too short: {} records", traj.records.size()));
  std::vector<std::pair<Index, double>> series;
  for (const auto& rec : traj.records)
    if (rec.t >= t_min) series.emplace_back(rec.t, double(rec.t) * rec.loss);
  return envelope_rule("risk_rate", series);
}

CheckResult check_G_convergence(const Trajectory& traj, const PotentialContext& ctx,
                                Index t_min) {
  if (traj.records.size() < 100)
    throw Error(fmt::format("trajectory too short: {} records", traj.records.size()));
  std::vector<std::pair<Index, double>> series;
  for (const auto& rec : traj.records)
    if (rec.t >= std::max<Index>(t_min, 2))
      series.emplace_back(rec.t, std::log(double(rec.t)) * (rec.G_val - ctx.G_min));
  CheckResult r = envelope_rule("G_convergence", series);
  const IterateRecord* early = traj.find(3);
  if (early == nullptr) {
    r.passed = false;
    r.detail += "; no record at t=3";
    return r;
  }
  const double gap_end = traj.records.back().G_val - ctx.G_min;
  const double gap_3 = early->G_val - ctx.G_min;
  const bool decreased = gap_end <= gap_3 + kExactTol;
  r.detail += fmt::format("; gap at t=3 {}, at T {}", gap_3, gap_end);
  if (!decreased) {
    r.passed = false;
    r.worst_t = traj.records.back().t;
    r.measured = gap_end;
    r.bound = gap_3;
  }
  return r;
}

CheckResult check_grad_comparison(const Trajectory& traj, const MarginGeometry& geo,
                                  const Dataset& ds, const PotentialContext& ctx,
                                  std::size_t samples) {
  CheckResult r;
  r.name = "grad_comparison";
  if (ctx.nonsupport_features.rows() > 0 && !geo.theta)
    throw Error("second margin missing with a non-empty non-support set");
  const double g = geo.gamma;
  const double theta = geo.theta.value_or(0.0);
  const bool has_rest = ctx.nonsupport_features.rows() > 0;
  Tightest tight;
  bool ok = true;
  std::size_t checked = 0;
  for (std::size_t idx : spread_indices(traj.records.size(), samples)) {
    const IterateRecord& rec = traj.records[idx];
    if (!std::isfinite(rec.loss)) continue;
    const Vector w = iterate_at(traj, ds, rec);
    const LossGrad lg = loss_and_grad(ds, traj.loss_kind, w);
    const double wm = project_mm(geo, w);
    const Vector v = project_ns(geo, w);
    const Vector weights = (-(ctx.support_features * v)).array().exp();
    const Vector grad_G = -(ctx.support_features.transpose() * weights);
    const Vector ns_grad = geo.basis.transpose() * lg.grad;
    const Vector scaled_G = std::exp(-g * wm) * grad_G;
    const Vector diff = ns_grad - scaled_G;
    const double slack = kGradComparisonTol * (ns_grad.norm() + scaled_G.norm());
    const double G = weights.sum();
    double bound = std::exp(-2.0 * g * wm) * G * G;
    if (has_rest) bound += std::exp(-theta * wm) * potential_H(ctx, v);
    const double left = diff.norm();
    tight.offer(rec.t, left, bound);
    if (!(left <= bound + slack)) ok = false;
    ++checked;
  }
  r.passed = ok && checked > 0;
  tight.fill(r);
  r.detail = fmt::format("{} steps checked with per-iterate G and H", checked);
  return r;
}

CheckResult check_descent_G(const Trajectory& traj, const PotentialContext& ctx,
                            const MarginGeometry& geo, const BoundConstants& bounds,
                            std::size_t samples) {
  CheckResult r;
  r.name = "descent_G";
  std::vector<std::size_t> pairs;
  for (std::size_t i = 0; i + 1 < traj.records.size(); ++i)
    if (traj.records[i + 1].t == traj.records[i].t + 1) pairs.push_back(i);
  const double eta = traj.eta;
  const double g = geo.gamma;
  const bool has_rest = ctx.nonsupport_features.rows() > 0 && geo.theta.has_value();
  const double log_front = std::log(2.0 * (eta + eta * eta)) + bounds.log_G_max +
                           log_add_exp(2.0 * bounds.log_G_max, 2.0 * bounds.log_H_max);
  Tightest tight;
  bool ok = true;
  std::size_t checked = 0;
  for (std::size_t k : spread_indices(pairs.size(), samples)) {
    const IterateRecord& a = traj.records[pairs[k]];
    const IterateRecord& b = traj.records[pairs[k] + 1];
    double log_decay = -2.0 * g * a.proj_mm;
    if (has_rest) log_decay = log_add_exp(log_decay, -*geo.theta * a.proj_mm);
    const double bound = a.G_val + std::exp(log_front + log_decay);
    tight.offer(b.t, b.G_val, bound);
    if (!(b.G_val <= bound + kExactTol)) ok = false;
    ++checked;
  }
  r.passed = ok && checked > 0;
  tight.fill(r);
  r.detail = fmt::format("{} consecutive pairs checked", checked);
  if (checked == 0) r.detail = "no consecutive record pairs";
  return r;
}

CheckResult check_dual_proportionality(const Trajectory& traj, const MarginGeometry& geo,
                                       const Dataset& ds, Index min_steps) {
  if (traj.records.empty() || traj.last_t() < min_steps)
    throw Error(fmt::format("trajectory shorter than {} steps", min_steps));
  CheckResult r;
  r.name = "dual_proportionality";
  const IterateRecord& last = traj.records.back();
  const Vector v = ns_of(last, traj, ds, geo);
  const Matrix a = support_ns_features(geo, ds);
  double lo = kInf;
  double hi = 0.0;
  for (std::size_t k = 0; k < geo.support.size(); ++k) {
    const double alpha = geo.alphas(geo.support[k]);
    if (!(alpha > 0.0)) throw Error("non-positive dual coefficient on the support set");
    const double ratio = std::exp(-a.row(static_cast<Index>(k)).dot(v)) / alpha;
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  r.worst_t = last.t;
  r.measured = hi / lo;
  r.bound = kDualSpreadTol;
  r.passed = r.measured <= r.bound;
  r.detail = fmt::format("spread of exp(-<a_i, v_T>)/alpha_i over {} support vectors",
                         geo.support.size());
  return r;
}

CheckResult check_exp_divergence(const Trajectory& traj, double gamma) {
  if (traj.loss_kind != LossKind::Exponential)
    throw Error("divergence check needs an exponential-loss trajectory");
  CheckResult r;
  r.name = "exp_divergence";
  const auto& recs = traj.records;
  if (recs.size() < 2) {
    r.detail = "fewer than two records";
    return r;
  }
  std::string first_failure;
  Index fail_t = 0;
  auto fail = [&](Index t, std::string what) {
    if (first_failure.empty()) {
      first_failure = std::move(what);
      fail_t = t;
    }
  };
  double worst_ratio = kInf;  // min over t of |w̄_t| / (2 gamma w_t)
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& cur = recs[i];
    const double wbar = cur.ns_sign;
    if (!(std::abs(wbar) >= 2.0 * gamma * cur.proj_mm - kExactTol))
      fail(cur.t, fmt::format("|wbar| {} < 2*gamma*w {}", std::abs(wbar), 2.0 * gamma * cur.proj_mm));
    if (cur.proj_mm > 0.0) {
      const double ratio = std::abs(wbar) / (2.0 * gamma * cur.proj_mm);
      if (ratio < worst_ratio) {
        worst_ratio = ratio;
        r.worst_t = cur.t;
        r.measured = std::abs(wbar);
        r.bound = 2.0 * gamma * cur.proj_mm;
      }
    }
    if (!(std::abs(wbar) >= 1.0)) fail(cur.t, fmt::format("|wbar| = {} < 1", std::abs(wbar)));
    if (i + 1 == recs.size()) break;
    const auto& nxt = recs[i + 1];
    if (!(nxt.proj_mm > cur.proj_mm)) fail(nxt.t, "w_t not increasing");
    if (cur.t >= 1 && !(nxt.loss > cur.loss)) fail(nxt.t, "loss not increasing");
    if (nxt.t == cur.t + 1 && !(nxt.ns_sign * wbar < 0.0)) fail(nxt.t, "no sign flip");
  }
  r.passed = first_failure.empty();
  const bool pre = traj.w0.size() == 2 && recs.front().proj_mm >= 0.0 &&
                   recs.front().proj_mm <= 2.0 && std::abs(recs.front().ns_sign) >= 1.0 &&
                   gamma < 0.25 && traj.eta >= 4.0;
  r.detail = fmt::format("{} records, {} at step {}; divergence preconditions {}", recs.size(),
                         to_string(traj.terminated.kind), traj.terminated.step,
                         pre ? "met" : "not met");
  if (!r.passed) {
    r.worst_t = fail_t;
    r.detail = first_failure + "; " + r.detail;
  }
  return r;
}

std::string_view to_string(OscillationMode mode) {
  switch (mode) {
    case OscillationMode::ExpectEos: return "expect-eos";
    case OscillationMode::ExpectStable: return "expect-stable";
    case OscillationMode::Observe: return "observe";
  }
  return "observe";
}

CheckResult check_oscillation(const Trajectory& traj, double eta, OscillationMode mode) {
  std::size_t pairs = 0;
  Index ascents = 0;
  Index first_ascent = -1;
  double worst_jump = 0.0;
  for (std::size_t i = 0; i + 1 < traj.records.size(); ++i) {
    const auto& a = traj.records[i];
    const auto& b = traj.records[i + 1];
    if (a.t >= 1000 || b.t != a.t + 1) continue;
    ++pairs;
    if (b.loss > a.loss) {
      ++ascents;
      if (first_ascent < 0) first_ascent = a.t;
      worst_jump = std::max(worst_jump, b.loss - a.loss);
    }
  }
  if (pairs == 0) throw Error("insufficient density");
  Index sharp_t = -1;
  for (const auto& rec : traj.records) {
    if (rec.hess_top && *rec.hess_top > 2.0 / eta) {
      sharp_t = rec.t;
      break;
    }
  }
  CheckResult r;
  r.name = "oscillation";
  r.measured = double(ascents);
  r.bound = 0.0;
  r.worst_t = first_ascent < 0 ? 0 : first_ascent;
  switch (mode) {
    case OscillationMode::ExpectEos: r.passed = ascents > 0; break;
    case OscillationMode::ExpectStable: r.passed = ascents == 0; break;
    case OscillationMode::Observe: r.passed = true; break;
  }
  r.detail = fmt::format(
      "mode {}: {} ascent steps among {} dense pairs (largest jump {}); hess_top {} 2/eta",
      to_string(mode), ascents, pairs, worst_jump,
      sharp_t >= 0 ? fmt::format("first exceeds at t={}", sharp_t) : std::string("never exceeds"));
  return r;
}

std::vector<std::pair<Index, double>> angle_to_max_margin(const Trajectory& traj) {
  std::vector<std::pair<Index, double>> out;
  for (const auto& rec : traj.records) {
    if (rec.t < 1) continue;
    if (!(rec.proj_mm > 0.0)) throw Error(fmt::format("zero iterate at t={}", rec.t));
    out.emplace_back(rec.t, rec.ns_norm / std::hypot(rec.proj_mm, rec.ns_norm));
  }
  return out;
}

CheckResult check_angle_rate(const Trajectory& traj, const BoundConstants& bounds) {
  CheckResult r;
  r.name = "angle_rate";
  Tightest tight;
  bool ok = true;
  std::vector<std::pair<Index, double>> series;
  for (const auto& [t, s] : angle_to_max_margin(traj)) {
    const IterateRecord* rec = traj.find(t);
    const double bound = std::min(1.0, bounds.W_max / rec->proj_mm);
    tight.offer(t, s, bound);
    if (!(s <= bound + kExactTol)) ok = false;
    if (t >= 3) series.emplace_back(t, std::log(double(t)) * s);
  }
  r.passed = ok && tight.seen;
  tight.fill(r);
  const CheckResult env = envelope_rule("angle_envelope", series);
  r.detail = fmt::format("sin(angle) <= W_max / proj_mm; envelope of log(t)*sin: {} ({})",
                         env.passed ? "stable" : "not yet stable", env.detail);
  return r;
}

VerificationReport verify_trajectory(const Trajectory& traj, const VerifyContext& ctx) {
  if (ctx.ds == nullptr || ctx.geo == nullptr) throw Error("verify context incomplete");
  const Dataset& ds = *ctx.ds;
  const MarginGeometry& geo = *ctx.geo;
  VerificationReport report;
  report.dataset = ds.name;
  report.eta = traj.eta;
  report.loss = traj.loss_kind;

  if (traj.loss_kind == LossKind::Exponential) {
    report.checks.push_back(check_exp_divergence(traj, geo.gamma));
    return report;
  }

  const bool long_enough = traj.records.size() >= 100;
  if (!traj.records.empty() && traj.records.front().proj_mm == 0.0)
    report.checks.push_back(check_mm_lower(traj, geo));
  if (ctx.potential == nullptr) {
    CheckResult r;
    r.name = "offset";
    r.measured = geo.offset_b;
    r.bound = geo.solve_tol;
    r.detail = "degenerate offset: support features are separable in the complement";
    report.checks.push_back(r);
  } else {
    const PotentialContext& pot = *ctx.potential;
    const BoundConstants bounds = bound_constants(ds.n(), geo.offset_b, traj.eta, pot);
    report.checks.push_back(check_mm_upper(traj, geo, bounds));
    report.checks.push_back(check_ns_bounded(traj, bounds));
    if (long_enough) report.checks.push_back(check_G_convergence(traj, pot));
    report.checks.push_back(check_grad_comparison(traj, geo, ds, pot));
    report.checks.push_back(check_descent_G(traj, pot, geo, bounds));
    if (traj.records.size() >= 2) {
      try {
        report.checks.push_back(check_angle_rate(traj, bounds));
      } catch (const Error& e) {
        CheckResult r;
        r.name = "angle_rate";
        r.detail = e.what();
        report.checks.push_back(r);
      }
    }
  }
  if (long_enough) report.checks.push_back(check_risk_rate(traj, ctx.risk_t_min));
  if (traj.last_t() >= 1'000'000)
    report.checks.push_back(check_dual_proportionality(traj, geo, ds));
  if (traj.records.size() >= 2) report.checks.push_back(check_oscillation(traj, traj.eta, ctx.mode));
  return report;
}

}  // namespace eoslab
