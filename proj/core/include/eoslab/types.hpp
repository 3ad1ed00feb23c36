// Copyright 2026 The eoslab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace eoslab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Every recoverable failure in the library is reported through this type; the
// message carries the short reason string ("not separable", "degenerate
// offset", ...) that callers and the CLI surface verbatim.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Orthonormal basis (as columns) of the orthogonal complement of `unit`,
// built from a single Householder reflector. Deterministic in `unit`.
Matrix householder_complement(const Vector& unit);

}  // namespace eoslab
