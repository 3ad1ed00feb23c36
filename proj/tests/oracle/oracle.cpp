// Copyright 2026 The eoslab Authors
// SPDX-License-Identifier: Apache-2.0

#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace eoslab::oracle {

namespace {

template <class F>
void subsets(Index n, Index k, F&& visit) {
  std::vector<Index> idx(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
  while (true) {
    visit(idx);
    Index pos = k - 1;
    while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == n - k + pos) --pos;
    if (pos < 0) return;
    ++idx[static_cast<std::size_t>(pos)];
    for (Index j = pos + 1; j < k; ++j)
      idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
}

double min_dot(const Matrix& a, const Vector& u) { return (a * u).minCoeff(); }

Vector unit_from_angles(Index k, double s, double t) {
  Vector u(k);
  if (k == 1) {
    u(0) = s >= 0.0 ? 1.0 : -1.0;
  } else if (k == 2) {
    u << std::cos(s), std::sin(s);
  } else {
    u << std::sin(s) * std::cos(t), std::sin(s) * std::sin(t), std::cos(s);
  }
  return u;
}

}  // namespace

SvmSolution brute_svm(const Dataset& ds, const OracleConfig& cfg) {
  const Index n = ds.n();
  const Index d = ds.d();
  if (n > cfg.max_n || d > cfg.max_d) throw OracleError("oracle cap");
  Matrix z(n, d);
  for (Index i = 0; i < n; ++i) z.row(i) = ds.labels(i) * ds.features.row(i);

  double best = std::numeric_limits<double>::infinity();
  Vector best_w;
  for (Index k = 1; k <= std::min(n, d); ++k) {
    subsets(n, k, [&](const std::vector<Index>& s) {
      Matrix zs(k, d);
      for (Index r = 0; r < k; ++r) zs.row(r) = z.row(s[static_cast<std::size_t>(r)]);
      const Vector ones = Vector::Ones(k);
      const Vector w = zs.completeOrthogonalDecomposition().solve(ones);
      if ((zs * w - ones).cwiseAbs().maxCoeff() > 1e-9) return;
      if ((z * w).minCoeff() < 1.0 - 1e-9) return;
      if (w.norm() < best) {
        best = w.norm();
        best_w = w;
      }
    });
  }
  if (!std::isfinite(best)) throw OracleError("no feasible candidate");
  SvmSolution out;
  out.w_hat = best_w;
  out.gamma = 1.0 / best;
  const Vector m = z * best_w;
  for (Index i = 0; i < n; ++i)
    if (m(i) <= 1.0 + 1e-7) out.support.push_back(i);
  return out;
}

double brute_offset_b(const Matrix& features, const OracleConfig& cfg) {
  const Index k = features.cols();
  if (k < 1 || k > 3) throw OracleError("oracle cap");
  if (k == 1) return -std::max(features.col(0).minCoeff(), (-features.col(0)).minCoeff());

  const double pi = std::numbers::pi;
  const double step = cfg.grid_deg * pi / 180.0;
  struct Point {
    double value, s, t;
  };
  std::vector<Point> grid;
  if (k == 2) {
    for (double s = 0.0; s < 2.0 * pi; s += step)
      grid.push_back({min_dot(features, unit_from_angles(2, s, 0.0)), s, 0.0});
  } else {
    for (double s = 0.0; s <= pi + 1e-12; s += step)
      for (double t = 0.0; t < 2.0 * pi; t += step)
        grid.push_back({min_dot(features, unit_from_angles(3, s, t)), s, t});
  }
  const std::size_t keep = std::min<std::size_t>(8, grid.size());
  std::partial_sort(grid.begin(), grid.begin() + static_cast<std::ptrdiff_t>(keep), grid.end(),
                    [](const Point& a, const Point& b) { return a.value > b.value; });

  // Zoom: a 21-point (or 21x21) local grid around the incumbent, shrinking
  // five-fold per round.
  double best = grid.front().value;
  for (std::size_t g = 0; g < keep; ++g) {
    Point p = grid[g];
    double h = step;
    for (int round = 0; round < cfg.zoom_rounds; ++round) {
      Point local = p;
      const int span = 10;
      for (int i = -span; i <= span; ++i) {
        for (int j = (k == 3 ? -span : 0); j <= (k == 3 ? span : 0); ++j) {
          const double s = p.s + 2.0 * h * i / span;
          const double t = p.t + 2.0 * h * j / span;
          const double v = min_dot(features, unit_from_angles(k, s, t));
          if (v > local.value) local = {v, s, t};
        }
      }
      p = local;
      h /= 5.0;
    }
    best = std::max(best, p.value);
  }
  return -best;
}

Vector fd_grad(const std::function<double(const Vector&)>& fn, const Vector& v, double h) {
  if (!(h > 0.0)) throw OracleError("step must be positive");
  Vector g(v.size());
  Vector x = v;
  for (Index i = 0; i < v.size(); ++i) {
    x(i) = v(i) + h;
    const double up = fn(x);
    x(i) = v(i) - h;
    const double down = fn(x);
    x(i) = v(i);
    if (!std::isfinite(up) || !std::isfinite(down)) throw OracleError("non-finite evaluation");
    g(i) = (up - down) / (2.0 * h);
  }
  return g;
}

}  // namespace eoslab::oracle
