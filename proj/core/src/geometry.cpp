// Copyright 2026 The eoslab Authors
// SPDX-License-Identifier: Apache-2.0

#include "eoslab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

namespace eoslab {

Matrix householder_complement(const Vector& unit) {
  const Index d = unit.size();
  if (d <= 1) return Matrix::Zero(d, 0);
  Vector v = unit;
  v(0) += unit(0) >= 0.0 ? 1.0 : -1.0;
  const Matrix reflector = Matrix::Identity(d, d) - (2.0 / v.squaredNorm()) * v * v.transpose();
  return reflector.rightCols(d - 1);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Minimum-norm point of conv{z_i} (Wolfe's algorithm).
//
// For separable data the nearest point x* of the hull of the signed features
// to the origin is gamma^2 * w_hat, and its convex weights lambda give the
// hard-margin duals alpha = lambda / gamma^2. The origin lies in the hull
// exactly when the data is not separable, so the same routine decides
// separability in finitely many steps.

struct MinNormPoint {
  Vector x;
  Vector lambda;
  bool converged = false;
  Index iterations = 0;
};

// Minimizes ||sum mu_k z_k|| subject to sum mu_k = 1 over the active rows.
bool affine_minimizer(const Matrix& z, const std::vector<Index>& active, Vector& mu) {
  const auto m = static_cast<Index>(active.size());
  Matrix kkt = Matrix::Zero(m + 1, m + 1);
  for (Index a = 0; a < m; ++a) {
    for (Index b = a; b < m; ++b) {
      const double g = z.row(active[a]).dot(z.row(active[b]));
      kkt(a, b) = g;
      kkt(b, a) = g;
    }
    kkt(a, m) = 1.0;
    kkt(m, a) = 1.0;
  }
  Vector rhs = Vector::Zero(m + 1);
  rhs(m) = 1.0;
  Eigen::FullPivLU<Matrix> lu(kkt);
  lu.setThreshold(1e-13);
  if (!lu.isInvertible()) return false;
  const Vector sol = lu.solve(rhs);
  if (!sol.allFinite()) return false;
  mu = sol.head(m);
  return true;
}

MinNormPoint min_norm_point(const Matrix& z, double tol, Index max_major) {
  const Index n = z.rows();
  const Vector norms2 = z.rowwise().squaredNorm();
  const double scale = std::max(norms2.maxCoeff(), std::numeric_limits<double>::min());
  constexpr double kPositive = 1e-14;

  Index start = 0;
  norms2.minCoeff(&start);
  std::vector<Index> active{start};
  std::vector<double> lam{1.0};
  Vector x = z.row(start).transpose();

  MinNormPoint out;
  for (Index major = 0; major < max_major; ++major) {
    out.iterations = major + 1;
    const Vector dots = z * x;
    Index entering = 0;
    dots.minCoeff(&entering);
    if (x.squaredNorm() - dots(entering) <= tol * scale) {
      out.converged = true;
      break;
    }
    if (std::find(active.begin(), active.end(), entering) != active.end()) {
      out.converged = true;  // no further progress possible in floating point
      break;
    }
    active.push_back(entering);
    lam.push_back(0.0);

    bool stalled = false;
    for (std::size_t minor = 0; minor <= active.size() + 1; ++minor) {
      Vector mu;
      if (!affine_minimizer(z, active, mu)) {
        // Affinely dependent active set: drop the newcomer and stop.
        const auto it = std::find(active.begin(), active.end(), entering);
        if (it != active.end()) {
          lam.erase(lam.begin() + (it - active.begin()));
          active.erase(it);
        }
        stalled = true;
        break;
      }
      if ((mu.array() > kPositive).all()) {
        for (std::size_t k = 0; k < active.size(); ++k) lam[k] = mu(static_cast<Index>(k));
        break;
      }
      double step = 2.0;
      std::size_t blocking = 0;
      for (std::size_t k = 0; k < active.size(); ++k) {
        const double muk = mu(static_cast<Index>(k));
        if (muk <= kPositive) {
          const double denom = lam[k] - muk;
          const double ratio = denom > 0.0 ? lam[k] / denom : 0.0;
          if (ratio < step) {
            step = ratio;
            blocking = k;
          }
        }
      }
      step = std::min(step, 1.0);
      for (std::size_t k = 0; k < active.size(); ++k)
        lam[k] += step * (mu(static_cast<Index>(k)) - lam[k]);
      lam[blocking] = 0.0;
      std::vector<Index> keep_idx;
      std::vector<double> keep_lam;
      for (std::size_t k = 0; k < active.size(); ++k) {
        if (lam[k] > kPositive) {
          keep_idx.push_back(active[k]);
          keep_lam.push_back(lam[k]);
        }
      }
      active = std::move(keep_idx);
      lam = std::move(keep_lam);
      if (active.empty()) {
        stalled = true;
        break;
      }
    }

    double total = 0.0;
    for (double l : lam) total += l;
    x.setZero(z.cols());
    for (std::size_t k = 0; k < active.size(); ++k) {
      lam[k] /= total;
      x += lam[k] * z.row(active[k]).transpose();
    }
    if (stalled) {
      out.converged = true;
      break;
    }
  }

  out.x = x;
  out.lambda = Vector::Zero(n);
  for (std::size_t k = 0; k < active.size(); ++k) out.lambda(active[k]) = lam[k];
  return out;
}

// ---------------------------------------------------------------------------
// Margin offset: b = min_{|u|=1} max_i <a_i, u>. When the origin is interior
// to conv{a_i} this is the distance from the origin to the nearest facet of
// the hull.

double support_value(const Matrix& a, const Vector& u) { return (a * u).maxCoeff(); }

// Distance to the hyperplane through the given rows if it supports the hull
// (all rows on the origin side); +inf otherwise.
double facet_distance(const Matrix& a, const std::vector<Index>& rows) {
  const Index k = a.cols();
  Matrix sub(k, k);
  for (Index r = 0; r < k; ++r) sub.row(r) = a.row(rows[static_cast<std::size_t>(r)]);
  Eigen::FullPivLU<Matrix> lu(sub);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) return kInf;
  const Vector normal = lu.solve(Vector::Ones(k));
  if (!normal.allFinite()) return kInf;
  const double slack = 1e-10 * std::max(1.0, normal.norm() * a.rowwise().norm().maxCoeff());
  if ((a * normal).maxCoeff() > 1.0 + slack) return kInf;
  return 1.0 / normal.norm();
}

template <class Fn>
void for_each_subset(Index m, Index k, std::vector<Index>& current, Index first, Fn&& fn) {
  if (static_cast<Index>(current.size()) == k) {
    fn(current);
    return;
  }
  for (Index i = first; i < m; ++i) {
    current.push_back(i);
    for_each_subset(m, k, current, i + 1, fn);
    current.pop_back();
  }
}

double binomial(Index m, Index k) {
  double c = 1.0;
  for (Index i = 0; i < k; ++i) c = c * double(m - i) / double(i + 1);
  return c;
}

std::vector<Vector> sphere_grid(Index k, double step_deg) {
  const double step = step_deg * std::numbers::pi / 180.0;
  std::vector<Vector> dirs;
  if (k == 2) {
    const auto count = static_cast<Index>(std::llround(360.0 / step_deg));
    dirs.reserve(static_cast<std::size_t>(count));
    for (Index j = 0; j < count; ++j) {
      Vector u(2);
      u << std::cos(double(j) * step), std::sin(double(j) * step);
      dirs.push_back(u);
    }
  } else if (k == 3) {
    const auto polar = static_cast<Index>(std::llround(180.0 / step_deg));
    const auto azim = static_cast<Index>(std::llround(360.0 / step_deg));
    dirs.reserve(static_cast<std::size_t>((polar + 1) * azim));
    for (Index p = 0; p <= polar; ++p) {
      const double phi = double(p) * step;
      const Index ring = (p == 0 || p == polar) ? 1 : azim;
      for (Index q = 0; q < ring; ++q) {
        const double th = double(q) * step;
        Vector u(3);
        u << std::sin(phi) * std::cos(th), std::sin(phi) * std::sin(th), std::cos(phi);
        dirs.push_back(u);
      }
    }
  }
  return dirs;
}

OffsetEstimate offset_low_dim(const Matrix& a) {
  const Index m = a.rows();
  const Index k = a.cols();
  OffsetEstimate est;
  if (k == 1) {
    est.value = std::min(a.col(0).maxCoeff(), (-a.col(0)).maxCoeff());
    est.upper = est.value;
    return est;
  }

  constexpr double kGridDeg = 0.2;
  const auto dirs = sphere_grid(k, kGridDeg);
  std::vector<std::pair<double, std::size_t>> values;
  values.reserve(dirs.size());
  for (std::size_t j = 0; j < dirs.size(); ++j) values.emplace_back(support_value(a, dirs[j]), j);
  const std::size_t keep = std::min<std::size_t>(24, values.size());
  std::partial_sort(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(keep), values.end());
  const double grid_best = values.front().first;
  if (grid_best <= 0.0) {
    est.value = grid_best;
    est.upper = grid_best;
    return est;
  }

  // Polish: hyperplanes through rows that are nearly active at the best grid
  // directions. Any valid facet distance is attained by some direction, so it
  // can only improve on the grid value.
  const double max_norm = a.rowwise().norm().maxCoeff();
  const double band = 4.0 * std::sin(kGridDeg * std::numbers::pi / 180.0) * max_norm + 1e-12;
  double polished = kInf;
  for (std::size_t c = 0; c < keep; ++c) {
    const Vector& u = dirs[values[c].second];
    const Vector s = a * u;
    const double top = s.maxCoeff();
    std::vector<Index> near;
    for (Index i = 0; i < m; ++i)
      if (s(i) >= top - band) near.push_back(i);
    if (near.size() > 12) continue;
    std::vector<Index> pick;
    for_each_subset(static_cast<Index>(near.size()), k, pick, 0, [&](const std::vector<Index>& sub) {
      std::vector<Index> rows;
      for (Index i : sub) rows.push_back(near[static_cast<std::size_t>(i)]);
      polished = std::min(polished, facet_distance(a, rows));
    });
  }
  // Exhaustive facet scan when it is cheap; certifies the polished value.
  if (binomial(m, k) <= 2e5) {
    std::vector<Index> pick;
    for_each_subset(m, k, pick, 0, [&](const std::vector<Index>& rows) {
      polished = std::min(polished, facet_distance(a, rows));
    });
  }
  est.value = std::min(grid_best, polished);
  est.upper = est.value;
  return est;
}

// Lower bound from a positive dependency sum_i c_i a_i = 0: for any unit u
// with s = A u, the largest s_i is at least sigma_min(A) / (C * |1/c|_2).
double offset_lower_bound(const Matrix& a, const Vector& weights) {
  std::vector<Index> rows;
  for (Index i = 0; i < a.rows(); ++i)
    if (weights(i) > 0.0) rows.push_back(i);
  if (static_cast<Index>(rows.size()) < a.cols()) return 0.0;
  Matrix sub(static_cast<Index>(rows.size()), a.cols());
  Vector c(static_cast<Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    sub.row(static_cast<Index>(r)) = a.row(rows[r]);
    c(static_cast<Index>(r)) = weights(rows[r]);
  }
  const double total = c.sum();
  const Vector resid = sub.transpose() * c;
  if (resid.norm() > 1e-8 * total * std::max(1.0, sub.rowwise().norm().maxCoeff())) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(sub);
  const double sigma_min = svd.singularValues()(svd.singularValues().size() - 1);
  const double inv_norm = c.cwiseInverse().norm();
  return sigma_min / (total * inv_norm);
}

// Best value of max_i <a_i, u> found by multi-start projected subgradient.
double offset_search(const Matrix& a) {
  const Index k = a.cols();
  std::mt19937_64 rng(0x5eed0ffULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  double best = kInf;
  constexpr int kStarts = 64;
  constexpr int kIters = 600;
  for (int s = 0; s < kStarts; ++s) {
    Vector u(k);
    if (s < a.rows()) {
      u = -a.row(s).transpose();
    } else {
      for (Index j = 0; j < k; ++j) u(j) = normal(rng);
    }
    if (u.norm() == 0.0) continue;
    u.normalize();
    double step = 0.5;
    for (int it = 0; it < kIters; ++it) {
      const Vector sv = a * u;
      Index top = 0;
      const double val = sv.maxCoeff(&top);
      best = std::min(best, val);
      Vector g = a.row(top).transpose();
      g -= g.dot(u) * u;  // tangent component
      if (g.norm() < 1e-15) break;
      u = (u - step * g / g.norm()).normalized();
      step *= 0.985;
    }
    best = std::min(best, support_value(a, u));
  }
  return best;
}

}  // namespace

bool MarginGeometry::is_support(Index i) const {
  return std::binary_search(support.begin(), support.end(), i);
}

OffsetEstimate estimate_offset(const Matrix& features, const Vector& weights) {
  const Index k = features.cols();
  OffsetEstimate est;
  if (k == 0) {
    est.value = est.upper = kInf;
    return est;
  }
  if (features.rows() == 0) {
    est.value = est.upper = -kInf;
    return est;
  }
  if (k <= 3) return offset_low_dim(features);
  est.exact = false;
  est.upper = offset_search(features);
  est.value = est.upper <= 0.0 ? est.upper : std::min(est.upper, offset_lower_bound(features, weights));
  return est;
}

MarginGeometry solve_hard_margin(const Dataset& ds, double tol) {
  validate(ds);
  if (!(tol > 0.0)) throw Error("solve tolerance must be positive");
  const Matrix z = ds.signed_features();
  const Index n = ds.n();

  const MinNormPoint mnp = min_norm_point(z, tol, 1'000'000);
  const double scale = std::sqrt(z.rowwise().squaredNorm().maxCoeff());
  const double gamma = mnp.x.norm();
  if (!(gamma > 1e-9 * scale)) throw Error("not separable");

  MarginGeometry geo;
  geo.solve_tol = tol;
  geo.support_tol = std::max(1e-7, 10.0 * tol);
  geo.gamma = gamma;
  geo.w_hat = mnp.x / (gamma * gamma);
  geo.alphas = mnp.lambda / (gamma * gamma);

  const Vector margins = z * geo.w_hat;
  const double violation = 1.0 - margins.minCoeff();
  if (!mnp.converged && violation > tol) throw Error("no convergence");
  if (violation > geo.support_tol) throw Error("no convergence");

  for (Index i = 0; i < n; ++i)
    if (margins(i) <= 1.0 + geo.support_tol) geo.support.push_back(i);
  for (Index i = 0; i < n; ++i)
    if (!geo.is_support(i)) geo.alphas(i) = 0.0;

  geo.basis = householder_complement(geo.direction());
  geo.theta = second_margin(geo, ds);

  const Matrix feats = support_ns_features(geo, ds);
  Vector weights(static_cast<Index>(geo.support.size()));
  for (std::size_t k = 0; k < geo.support.size(); ++k)
    weights(static_cast<Index>(k)) = geo.alphas(geo.support[k]);
  const OffsetEstimate est = estimate_offset(feats, weights);
  geo.offset_b = est.value;
  geo.offset_b_upper = est.upper;
  geo.offset_exact = est.exact;
  return geo;
}

double project_mm(const MarginGeometry& geo, const Vector& v) {
  if (v.size() != geo.d())
    throw Error(fmt::format("dimension mismatch: {} vs {}", v.size(), geo.d()));
  return v.dot(geo.w_hat) / geo.w_hat.norm();
}

Vector project_ns(const MarginGeometry& geo, const Vector& v) {
  if (v.size() != geo.d())
    throw Error(fmt::format("dimension mismatch: {} vs {}", v.size(), geo.d()));
  return geo.basis.transpose() * v;
}

Matrix support_ns_features(const MarginGeometry& geo, const Dataset& ds) {
  Matrix out(static_cast<Index>(geo.support.size()), geo.basis.cols());
  for (std::size_t k = 0; k < geo.support.size(); ++k) {
    const Index i = geo.support[k];
    out.row(static_cast<Index>(k)) = ds.labels(i) * (ds.features.row(i) * geo.basis);
  }
  return out;
}

Matrix nonsupport_ns_features(const MarginGeometry& geo, const Dataset& ds) {
  const Index rest = ds.n() - static_cast<Index>(geo.support.size());
  Matrix out(rest, geo.basis.cols());
  Index r = 0;
  for (Index i = 0; i < ds.n(); ++i) {
    if (geo.is_support(i)) continue;
    out.row(r++) = ds.labels(i) * (ds.features.row(i) * geo.basis);
  }
  return out;
}

Vector nonsupport_margins(const MarginGeometry& geo, const Dataset& ds) {
  const Index rest = ds.n() - static_cast<Index>(geo.support.size());
  Vector out(rest);
  const Vector dir = geo.direction();
  Index r = 0;
  for (Index i = 0; i < ds.n(); ++i) {
    if (geo.is_support(i)) continue;
    out(r++) = ds.labels(i) * ds.features.row(i).dot(dir);
  }
  return out;
}

double margin_offset(const MarginGeometry& geo, const Dataset& ds) {
  const Matrix feats = support_ns_features(geo, ds);
  Vector weights(static_cast<Index>(geo.support.size()));
  for (std::size_t k = 0; k < geo.support.size(); ++k)
    weights(static_cast<Index>(k)) = geo.alphas(geo.support[k]);
  const OffsetEstimate est = estimate_offset(feats, weights);
  if (!(est.value > geo.solve_tol)) throw Error("degenerate offset");
  return est.value;
}

std::pair<Index, Index> nonseparability_witness(const MarginGeometry& geo, const Dataset& ds,
                                                const Vector& v) {
  if (v.size() != geo.d()) throw Error("dimension mismatch");
  const double norm = v.norm();
  if (norm == 0.0) throw Error("witness direction must be nonzero");
  if (std::abs(v.dot(geo.direction())) > 1e-8 * norm)
    throw Error("witness direction is not orthogonal to w_hat");
  Index neg = -1;
  Index pos = -1;
  double lo = 0.0;
  double hi = 0.0;
  for (Index i : geo.support) {
    const double s = ds.labels(i) * ds.features.row(i).dot(v);
    if (s < lo) {
      lo = s;
      neg = i;
    }
    if (s > hi) {
      hi = s;
      pos = i;
    }
  }
  if (neg < 0 || pos < 0) throw Error("no witness pair");
  return {neg, pos};
}

std::optional<double> second_margin(const MarginGeometry& geo, const Dataset& ds) {
  if (static_cast<Index>(geo.support.size()) == ds.n()) return std::nullopt;
  const Vector margins = nonsupport_margins(geo, ds);
  const double theta = margins.minCoeff();
  if (!(theta > geo.gamma))
    throw std::logic_error(fmt::format("second margin {} not above gamma {}", theta, geo.gamma));
  return theta;
}

nlohmann::json to_json(const MarginGeometry& geo) {
  auto finite_or_null = [](double x) -> nlohmann::json {
    if (std::isfinite(x)) return x;
    return nullptr;
  };
  nlohmann::json j;
  j["gamma"] = geo.gamma;
  j["w_hat"] = std::vector<double>(geo.w_hat.data(), geo.w_hat.data() + geo.w_hat.size());
  std::vector<Index> support_1based;
  for (Index i : geo.support) support_1based.push_back(i + 1);
  j["support"] = support_1based;
  j["alphas"] = std::vector<double>(geo.alphas.data(), geo.alphas.data() + geo.alphas.size());
  j["theta"] = geo.theta ? nlohmann::json(*geo.theta) : nlohmann::json(nullptr);
  j["offset_b"] = finite_or_null(geo.offset_b);
  j["offset_b_upper"] = finite_or_null(geo.offset_b_upper);
  j["offset_exact"] = geo.offset_exact;
  nlohmann::json basis = nlohmann::json::array();
  for (Index r = 0; r < geo.basis.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(geo.basis.cols()));
    for (Index c = 0; c < geo.basis.cols(); ++c) row[static_cast<std::size_t>(c)] = geo.basis(r, c);
    basis.push_back(row);
  }
  j["basis"] = basis;
  j["solve_tol"] = geo.solve_tol;
  return j;
}

}  // namespace eoslab
