// Copyright 2026 The eoslab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <random>

#include "eoslab/data.hpp"

namespace eoslab::testing {

// Gaussian points labelled by a random hyperplane through the origin, with a
// small dead zone so the margin stays away from zero.
inline Dataset random_separable(Index n, Index d, std::mt19937_64& rng, double dead_zone = 0.05) {
  std::normal_distribution<double> normal;
  Vector u(d);
  for (Index j = 0; j < d; ++j) u(j) = normal(rng);
  u.normalize();
  Dataset ds;
  ds.features.resize(n, d);
  ds.labels.resize(n);
  ds.name = "random";
  for (Index i = 0; i < n; ++i) {
    Vector x(d);
    do {
      for (Index j = 0; j < d; ++j) x(j) = normal(rng);
    } while (std::abs(x.dot(u)) < dead_zone * x.norm());
    ds.features.row(i) = x.transpose();
    ds.labels(i) = x.dot(u) > 0.0 ? 1.0 : -1.0;
  }
  return ds;
}

inline Vector random_vector(Index d, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Vector v(d);
  for (Index j = 0; j < d; ++j) v(j) = normal(rng);
  return v;
}

inline Matrix random_rotation(Index d, std::mt19937_64& rng) {
  Matrix a(d, d);
  for (Index j = 0; j < d; ++j) a.col(j) = random_vector(d, rng);
  Eigen::HouseholderQR<Matrix> qr(a);
  return qr.householderQ() * Matrix::Identity(d, d);
}

inline Dataset make_dataset(const Matrix& x, const Vector& y, const char* name = "fixture") {
  Dataset ds;
  ds.features = x;
  ds.labels = y;
  ds.name = name;
  return ds;
}

}  // namespace eoslab::testing
