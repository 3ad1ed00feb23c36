// Copyright 2026 The eoslab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "eoslab/data.hpp"
#include "eoslab/dynamics.hpp"
#include "eoslab/verify.hpp"

namespace eoslab::cli {

// Where a dataset comes from. Stored in every report so `verify` can
// rebuild the data without extra flags.
struct DatasetSource {
  enum class Kind { TwoPoint, Csv, Gen };
  Kind kind = Kind::TwoPoint;
  double gamma = 0.2;
  std::string path;
  std::string label_column = "label";
  Index n = 0;
  Index d = 0;
  double margin = 0.0;
  std::uint64_t seed = 0;
  bool normalize = false;

  nlohmann::json to_json() const;
  static DatasetSource from_json(const nlohmann::json& j);
};

Dataset load_source(const DatasetSource& src);

enum class Mode { ExpectEos, ExpectStable, Observe, ExpDivergence };

struct RunConfig {
  DatasetSource source;
  LossKind loss = LossKind::Logistic;
  std::vector<double> etas;
  Index steps = 100000;
  std::vector<double> w0;      // empty: zero vector
  double ns0 = 0.0;            // added along the first complement direction
  RecordSchedule schedule;
  int hess_iters = 20;
  std::string out_dir = "out";
  Mode mode = Mode::Observe;
  int jobs = 1;
  Index risk_t_min = 3;
};

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_geometry(const DatasetSource& source, const std::string& out_path, std::ostream& out,
                 std::ostream& err);
int cmd_verify(const std::string& traj_path, const std::string& meta_path,
               const std::optional<DatasetSource>& source, std::optional<Mode> mode,
               const std::string& out_path, std::ostream& out, std::ostream& err);
int cmd_gen(const DatasetSource& source, const std::string& out_path, std::ostream& out,
            std::ostream& err);

// Full command line: parse errors exit 2, runtime failures exit 1.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace eoslab::cli
