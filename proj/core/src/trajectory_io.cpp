// Copyright 2026 The eoslab Authors
// SPDX-License-Identifier: Apache-2.0

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "eoslab/dynamics.hpp"

namespace eoslab {

namespace {

constexpr const char* kHeader = "t,loss,grad_norm,proj_mm,ns_norm,G_val,H_val,eff_step,hess_top,ns_sign";

// Shortest round-trip form; fmt spells non-finite values inf, -inf and nan.
std::string num(double x) { return fmt::format("{}", x); }

double parse_cell(const std::string& cell, std::size_t line) {
  if (cell == "inf") return std::numeric_limits<double>::infinity();
  if (cell == "-inf") return -std::numeric_limits<double>::infinity();
  if (cell == "nan" || cell == "-nan") return std::numeric_limits<double>::quiet_NaN();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(cell.c_str(), &end);
  if (cell.empty() || end != cell.c_str() + cell.size())
    throw Error(fmt::format("line {}: bad number '{}'", line, cell));
  return v;
}

}  // namespace

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  out << kHeader << '\n';
  for (const auto& r : traj.records) {
    out << r.t << ',' << num(r.loss) << ',' << num(r.grad_norm) << ',' << num(r.proj_mm) << ','
        << num(r.ns_norm) << ',' << num(r.G_val) << ',' << num(r.H_val) << ','
        << num(r.eff_step) << ','
        << (r.hess_top ? num(*r.hess_top) : std::string("nan")) << ',' << num(r.ns_sign)
        << '\n';
  }
}

std::vector<IterateRecord> read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error("empty trajectory file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader) throw Error(fmt::format("unexpected trajectory header '{}'", line));
  std::vector<IterateRecord> records;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 10)
      throw Error(fmt::format("line {}: expected 10 columns, found {}", lineno, cells.size()));
    IterateRecord r;
    r.t = static_cast<Index>(parse_cell(cells[0], lineno));
    r.loss = parse_cell(cells[1], lineno);
    r.grad_norm = parse_cell(cells[2], lineno);
    r.proj_mm = parse_cell(cells[3], lineno);
    r.ns_norm = parse_cell(cells[4], lineno);
    r.G_val = parse_cell(cells[5], lineno);
    r.H_val = parse_cell(cells[6], lineno);
    r.eff_step = parse_cell(cells[7], lineno);
    const double h = parse_cell(cells[8], lineno);
    if (!std::isnan(h)) r.hess_top = h;
    r.ns_sign = parse_cell(cells[9], lineno);
    if (!records.empty() && r.t <= records.back().t)
      throw Error(fmt::format("line {}: steps not increasing", lineno));
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace eoslab
