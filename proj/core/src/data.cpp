// Copyright 2026 The eoslab Authors
// SPDX-License-Identifier: Apache-2.0

#include "eoslab/data.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string_view>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "eoslab/geometry.hpp"

namespace eoslab {
namespace {

constexpr double kNormSlack = 1e-12;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    const auto cell = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
    cells.emplace_back(trim(cell));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

bool parse_double(const std::string& text, double& out) {
  if (text.empty()) return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtod(text.c_str(), &end);
  return end == text.c_str() + text.size() && errno != ERANGE;
}

Vector random_unit(std::mt19937_64& rng, Index dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(dim);
  do {
    for (Index i = 0; i < dim; ++i) v(i) = normal(rng);
  } while (v.norm() < 1e-6);
  return v.normalized();
}

Matrix random_orthogonal(std::mt19937_64& rng, Index dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(dim, dim);
  for (Index j = 0; j < dim; ++j)
    for (Index i = 0; i < dim; ++i) g(i, j) = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(dim, dim);
  // Fix column signs so the result does not depend on QR sign conventions.
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < dim; ++j)
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  return q;
}

// Vertices (as rows) of a regular simplex with `count` vertices centred at
// the origin of R^{count-1}, each at unit distance from the centre.
Matrix regular_simplex(Index count) {
  const Index dim = count - 1;
  if (dim == 0) return Matrix::Zero(1, 0);
  const Vector centre_dir = Vector::Constant(count, 1.0 / std::sqrt(double(count)));
  const Matrix frame = householder_complement(centre_dir);  // count x dim
  Matrix vertices(count, dim);
  for (Index k = 0; k < count; ++k) {
    Vector e = Vector::Constant(count, -1.0 / double(count));
    e(k) += 1.0;
    vertices.row(k) = (frame.transpose() * e).transpose();
    vertices.row(k).normalize();
  }
  return vertices;
}

Dataset build_separable(Index n, Index d, double margin, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit01(0.0, 1.0);
  const Vector u = random_unit(rng, d);
  const Matrix complement = householder_complement(u);  // d x (d-1)

  // Support vectors: gamma*u plus the vertices of a rotated, radially
  // perturbed simplex around the origin of the complement. The origin stays
  // strictly inside, so the duals are unique and positive and every
  // complement direction misclassifies some support vector.
  const double radius = 0.95 * std::sqrt(1.0 - margin * margin);
  Matrix simplex = regular_simplex(d);
  if (d > 2) simplex = simplex * random_orthogonal(rng, d - 1);

  Matrix signed_rows(n, d);
  for (Index k = 0; k < d; ++k) {
    const double scale = radius * (0.4 + 0.6 * unit01(rng));
    const Vector comp = complement * (simplex.row(k).transpose() * scale);
    signed_rows.row(k) = (margin * u + comp).transpose();
  }
  // Remaining points sit at margin >= 1.5 * margin inside the unit ball.
  const double lo = 1.5 * margin;
  for (Index i = d; i < n; ++i) {
    const double along = lo + (1.0 - lo) * unit01(rng) * 0.999;
    const double room = std::sqrt(std::max(0.0, 1.0 - along * along));
    Vector comp = Vector::Zero(d);
    if (d > 1) {
      const Vector dir = random_unit(rng, d - 1);
      comp = complement * (dir * room * unit01(rng));
    }
    signed_rows.row(i) = (along * u + comp).transpose();
  }

  Vector labels(n);
  std::bernoulli_distribution coin(0.5);
  for (Index i = 0; i < n; ++i) labels(i) = coin(rng) ? 1.0 : -1.0;
  labels(0) = 1.0;
  if (n > 1) labels(1) = -1.0;

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), rng);

  Dataset ds;
  ds.features.resize(n, d);
  ds.labels.resize(n);
  for (Index i = 0; i < n; ++i) {
    const Index src = order[static_cast<std::size_t>(i)];
    ds.labels(i) = labels(src);
    ds.features.row(i) = labels(src) * signed_rows.row(src);
  }
  ds.normalized = ds.max_row_norm() <= 1.0 + kNormSlack;
  return ds;
}

}  // namespace

Matrix Dataset::signed_features() const {
  return labels.asDiagonal() * features;
}

double Dataset::max_row_norm() const {
  if (features.rows() == 0) return 0.0;
  return features.rowwise().norm().maxCoeff();
}

void validate(const Dataset& ds) {
  if (ds.n() < 1 || ds.d() < 1) throw Error("dataset must have n >= 1 and d >= 1");
  if (ds.labels.size() != ds.n()) throw Error("label count does not match row count");
  for (Index i = 0; i < ds.n(); ++i)
    if (ds.labels(i) != 1.0 && ds.labels(i) != -1.0)
      throw Error(fmt::format("label {} at row {} is not -1 or +1", ds.labels(i), i));
  if (!ds.features.allFinite()) throw Error("non-finite feature value");
  if (ds.normalized && ds.max_row_norm() > 1.0 + kNormSlack)
    throw Error("dataset flagged normalized but has a row norm above 1");
}

Dataset load_csv(const std::filesystem::path& path, const std::string& label_column) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("missing file: {}", path.string()));

  std::string line;
  if (!std::getline(in, line)) throw Error(fmt::format("empty file: {}", path.string()));
  const auto header = split_csv_line(line);
  const auto label_it = std::find(header.begin(), header.end(), label_column);
  if (label_it == header.end())
    throw Error(fmt::format("label column '{}' not found in {}", label_column, path.string()));
  const auto label_idx = static_cast<std::size_t>(label_it - header.begin());
  const std::size_t n_cols = header.size();
  if (n_cols < 2) throw Error("need at least one feature column");

  std::vector<std::vector<double>> rows;
  std::vector<std::string> raw_labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != n_cols)
      throw Error(fmt::format("line {}: expected {} cells, found {}", line_no, n_cols, cells.size()));
    std::vector<double> row;
    row.reserve(n_cols - 1);
    for (std::size_t c = 0; c < n_cols; ++c) {
      if (c == label_idx) continue;
      double value = 0.0;
      if (!parse_double(cells[c], value) || !std::isfinite(value))
        throw Error(fmt::format("line {}: non-numeric feature cell '{}' in column '{}'",
                                line_no, cells[c], header[c]));
      row.push_back(value);
    }
    rows.push_back(std::move(row));
    raw_labels.push_back(cells[label_idx]);
  }
  if (rows.empty()) throw Error(fmt::format("no data rows in {}", path.string()));

  const std::set<std::string> distinct(raw_labels.begin(), raw_labels.end());
  if (distinct.size() < 2) throw Error("degenerate labels");
  if (distinct.size() > 2)
    throw Error(fmt::format("expected two label values, found {}", distinct.size()));
  const std::string& negative = *distinct.begin();

  Dataset ds;
  const auto n = static_cast<Index>(rows.size());
  const auto d = static_cast<Index>(n_cols - 1);
  ds.features.resize(n, d);
  ds.labels.resize(n);
  for (Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    for (Index j = 0; j < d; ++j) ds.features(i, j) = row[static_cast<std::size_t>(j)];
    ds.labels(i) = raw_labels[static_cast<std::size_t>(i)] == negative ? -1.0 : 1.0;
  }
  ds.name = path.stem().string();
  ds.normalized = false;
  return ds;
}

void save_csv(const Dataset& ds, const std::filesystem::path& path) {
  validate(ds);
  std::ofstream out(path);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  for (Index j = 0; j < ds.d(); ++j) out << 'x' << (j + 1) << ',';
  out << "label\n";
  for (Index i = 0; i < ds.n(); ++i) {
    for (Index j = 0; j < ds.d(); ++j) out << fmt::format("{},", ds.features(i, j));
    out << (ds.labels(i) > 0 ? "1" : "-1") << '\n';
  }
  nlohmann::json meta = {{"name", ds.name}, {"normalized", ds.normalized}};
  std::ofstream side(path.string() + ".meta.json");
  side << meta.dump(2) << '\n';
}

Dataset load_dataset(const std::filesystem::path& path, const std::string& label_column) {
  Dataset ds = load_csv(path, label_column);
  const std::filesystem::path side = path.string() + ".meta.json";
  if (std::filesystem::exists(side)) {
    std::ifstream in(side);
    const auto meta = nlohmann::json::parse(in);
    ds.name = meta.value("name", ds.name);
    ds.normalized = meta.value("normalized", false) && ds.max_row_norm() <= 1.0 + kNormSlack;
  }
  validate(ds);
  return ds;
}

Dataset normalize(const Dataset& ds) {
  if (ds.n() < 1) throw Error("cannot normalize an empty dataset");
  const double scale = ds.max_row_norm();
  if (scale == 0.0) throw Error("all-zero feature matrix");
  Dataset out = ds;
  if (scale > 1.0 + kNormSlack) out.features /= scale;
  out.normalized = true;
  return out;
}

Dataset make_two_point(double gamma) {
  if (!(gamma > 0.0)) throw Error("two-point dataset needs gamma > 0");
  Dataset ds;
  ds.features.resize(2, 2);
  ds.features << gamma, 1.0, gamma, -1.0;
  ds.labels = Vector::Ones(2);
  ds.name = fmt::format("two_point_{}", gamma);
  ds.normalized = ds.max_row_norm() <= 1.0 + kNormSlack;
  return ds;
}

Dataset gen_separable(Index n, Index d, double margin, std::uint64_t seed) {
  if (d < 2 || n < d) throw Error("gen_separable needs n >= d >= 2");
  if (!(margin > 0.0 && margin < 1.0)) throw Error("gen_separable needs 0 < margin < 1");
  if (n > d && 1.5 * margin >= 1.0)
    throw Error("infeasible: non-support points need 1.5 * margin < 1");

  std::mt19937_64 rng(seed);
  constexpr int kRounds = 8;
  for (int round = 0; round < kRounds; ++round) {
    Dataset ds = build_separable(n, d, margin, rng);
    ds.name = fmt::format("sep_n{}_d{}_m{}_s{}", n, d, margin, seed);
    try {
      const MarginGeometry geo = solve_hard_margin(ds);
      const AssumptionReport report = check_assumptions(ds, geo);
      if (report.all() && geo.offset_valid()) return ds;
    } catch (const Error&) {
      // rejected; draw again
    }
  }
  throw Error(fmt::format("infeasible: no valid dataset after {} rounds", kRounds));
}

Index numeric_rank(const Matrix& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  const double threshold = rel_tol * s(0);
  return static_cast<Index>((s.array() > threshold).count());
}

AssumptionReport check_assumptions(const Dataset& ds, const MarginGeometry& geo) {
  AssumptionReport report;
  const Matrix z = ds.signed_features();
  const Vector margins = z * geo.w_hat;
  report.witness = geo.w_hat;
  report.separable = geo.w_hat.size() == ds.d() && margins.minCoeff() >= 1.0 - geo.solve_tol * 10.0 &&
                     margins.minCoeff() > 0.0;
  report.norms_ok = ds.max_row_norm() <= 1.0 + kNormSlack;
  report.rank = numeric_rank(ds.features);
  report.full_rank = report.rank == ds.d();

  Matrix support_rows(static_cast<Index>(geo.support.size()), ds.d());
  for (std::size_t k = 0; k < geo.support.size(); ++k)
    support_rows.row(static_cast<Index>(k)) = ds.features.row(geo.support[k]);
  report.support_rank = numeric_rank(support_rows);
  report.support_spans = report.support_rank == report.rank;

  double min_alpha = std::numeric_limits<double>::infinity();
  for (Index i : geo.support) min_alpha = std::min(min_alpha, geo.alphas(i));
  report.min_support_alpha = geo.support.empty() ? 0.0 : min_alpha;
  report.duals_positive = !geo.support.empty() && min_alpha > geo.solve_tol;
  return report;
}

}  // namespace eoslab
