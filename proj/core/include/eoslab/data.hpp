// Copyright 2026 The eoslab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "eoslab/types.hpp"

namespace eoslab {

struct MarginGeometry;

/// A binary classification dataset. Row i of `features` is x_i; `labels`
/// holds y_i as exactly -1.0 or +1.0.
struct Dataset {
  Matrix features;
  Vector labels;
  std::string name;
  bool normalized = false;

  Index n() const { return features.rows(); }
  Index d() const { return features.cols(); }

  /// Rows y_i * x_i. Every loss and margin in the library is a function of
  /// these signed features only.
  Matrix signed_features() const;

  double max_row_norm() const;
};

/// Throws Error if the dataset violates its invariants (shape, labels, the
/// normalized flag).
void validate(const Dataset& ds);

/// Loads a CSV with a header row. The column named `label_column` must hold
/// exactly two distinct values; the lexicographically smaller one maps to -1.
/// All other columns are features, in file order. No normalization.
Dataset load_csv(const std::filesystem::path& path,
                 const std::string& label_column = "label");

/// Writes `ds` as CSV (columns x1..xd,label) plus a sidecar
/// `<path>.meta.json` holding the name and normalized flag.
void save_csv(const Dataset& ds, const std::filesystem::path& path);

/// load_csv followed by applying the sidecar metadata when present.
Dataset load_dataset(const std::filesystem::path& path,
                     const std::string& label_column = "label");

/// Divides every row by max(1, max_i ||x_i||). Idempotent bit-for-bit.
Dataset normalize(const Dataset& ds);

/// The two-sample dataset x1 = (gamma, 1), x2 = (gamma, -1), y1 = y2 = +1.
/// Left unnormalized.
Dataset make_two_point(double gamma);

/// Synthetic separable data whose max-margin equals `margin` exactly, with
/// d support vectors in general position and strictly positive duals.
/// Deterministic in `seed`.
Dataset gen_separable(Index n, Index d, double margin, std::uint64_t seed);

/// Numerical rank via singular values thresholded at rel_tol * sigma_max.
Index numeric_rank(const Matrix& m, double rel_tol = 1e-10);

struct AssumptionReport {
  bool separable = false;
  Vector witness;
  bool norms_ok = false;
  bool full_rank = false;
  Index rank = 0;
  bool support_spans = false;
  Index support_rank = 0;
  bool duals_positive = false;
  double min_support_alpha = 0.0;

  bool all() const {
    return separable && norms_ok && full_rank && support_spans && duals_positive;
  }
};

/// Report-only check of separability, bounded norms, full rank, support
/// spanning and positive duals.
AssumptionReport check_assumptions(const Dataset& ds, const MarginGeometry& geo);

}  // namespace eoslab
