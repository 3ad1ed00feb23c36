// Copyright 2026 The eoslab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace eoslab::cli {

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;  // (x, y)
  bool dashed = false;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = true;
};

// Log-x line plot. Points with x <= 0 or non-finite y (or y <= 0 on a log-y
// axis) are dropped. `stamp` goes into a leading comment and is the only
// part of the output that is not a function of the data.
std::string render_plot(const PlotSpec& spec, const std::vector<Series>& series,
                        std::string_view stamp);

}  // namespace eoslab::cli
