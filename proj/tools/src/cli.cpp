// Copyright 2026 The eoslab Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/chrono.h>
#include <fmt/format.h>

#include "config_file.hpp"
#include "eoslab/geometry.hpp"
#include "eoslab/potential.hpp"
#include "svg.hpp"

namespace eoslab::cli {

namespace fs = std::filesystem;

namespace {

std::string_view mode_name(Mode m) {
  switch (m) {
    case Mode::ExpectEos: return "expect-eos";
    case Mode::ExpectStable: return "expect-stable";
    case Mode::Observe: return "observe";
    case Mode::ExpDivergence: return "exp-divergence";
  }
  return "observe";
}

Mode parse_mode(const std::string& s) {
  if (s == "expect-eos") return Mode::ExpectEos;
  if (s == "expect-stable") return Mode::ExpectStable;
  if (s == "observe") return Mode::Observe;
  if (s == "exp-divergence") return Mode::ExpDivergence;
  throw UsageError(fmt::format("unknown mode '{}'", s));
}

OscillationMode oscillation_mode(Mode m) {
  switch (m) {
    case Mode::ExpectEos: return OscillationMode::ExpectEos;
    case Mode::ExpectStable: return OscillationMode::ExpectStable;
    default: return OscillationMode::Observe;
  }
}

std::string utc_stamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(now));
}

std::string eta_tag(double eta) { return fmt::format("{}", eta); }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  out << text;
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("missing file: {}", path.string()));
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

nlohmann::json assumptions_json(const AssumptionReport& a) {
  return {{"separable", a.separable},
          {"witness", to_std(a.witness)},
          {"norms_ok", a.norms_ok},
          {"full_rank", a.full_rank},
          {"rank", a.rank},
          {"support_spans", a.support_spans},
          {"support_rank", a.support_rank},
          {"duals_positive", a.duals_positive},
          {"min_support_alpha", a.min_support_alpha},
          {"all", a.all()}};
}

nlohmann::json schedule_json(const RecordSchedule& s) {
  return {{"dense_until", s.dense_until},
          {"growth", s.growth},
          {"successor_pairs", s.successor_pairs},
          {"checkpoint_every", s.checkpoint_every},
          {"describe", s.describe()}};
}

RecordSchedule schedule_from_json(const nlohmann::json& j) {
  RecordSchedule s;
  s.dense_until = j.at("dense_until").get<Index>();
  s.growth = j.at("growth").get<double>();
  s.successor_pairs = j.at("successor_pairs").get<bool>();
  s.checkpoint_every = j.at("checkpoint_every").get<Index>();
  return s;
}

void warn_unnormalized(const Dataset& ds, std::ostream& err) {
  const double norm = ds.max_row_norm();
  if (norm > 1.0 + 1e-12)
    err << fmt::format("warning: dataset {} has max row norm {} > 1 (pass --normalize to rescale)\n",
                       ds.name, norm);
}

// First failing check of a report as "name: detail".
std::string first_failure(const VerificationReport& report) {
  for (const auto& c : report.checks)
    if (!c.passed) return fmt::format("check '{}' failed: {}", c.name, c.detail);
  return {};
}

struct Outcome {
  Trajectory traj;
  VerificationReport report;
  std::string error;
};

}  // namespace

nlohmann::json DatasetSource::to_json() const {
  nlohmann::json j;
  switch (kind) {
    case Kind::TwoPoint:
      j = {{"kind", "two_point"}, {"gamma", gamma}};
      break;
    case Kind::Csv:
      j = {{"kind", "csv"}, {"path", path}, {"label_column", label_column}};
      break;
    case Kind::Gen:
      j = {{"kind", "gen"}, {"n", n}, {"d", d}, {"margin", margin}, {"seed", seed}};
      break;
  }
  j["normalize"] = normalize;
  return j;
}

DatasetSource DatasetSource::from_json(const nlohmann::json& j) {
  DatasetSource s;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "two_point") {
    s.kind = Kind::TwoPoint;
    s.gamma = j.at("gamma").get<double>();
  } else if (kind == "csv") {
    s.kind = Kind::Csv;
    s.path = j.at("path").get<std::string>();
    s.label_column = j.value("label_column", std::string("label"));
  } else if (kind == "gen") {
    s.kind = Kind::Gen;
    s.n = j.at("n").get<Index>();
    s.d = j.at("d").get<Index>();
    s.margin = j.at("margin").get<double>();
    s.seed = j.at("seed").get<std::uint64_t>();
  } else {
    throw Error(fmt::format("unknown dataset kind '{}'", kind));
  }
  s.normalize = j.value("normalize", false);
  return s;
}

Dataset load_source(const DatasetSource& src) {
  Dataset ds;
  switch (src.kind) {
    case DatasetSource::Kind::TwoPoint: ds = make_two_point(src.gamma); break;
    case DatasetSource::Kind::Csv: ds = load_dataset(src.path, src.label_column); break;
    case DatasetSource::Kind::Gen: ds = gen_separable(src.n, src.d, src.margin, src.seed); break;
  }
  return src.normalize ? normalize(ds) : ds;
}

int cmd_geometry(const DatasetSource& source, const std::string& out_path, std::ostream& out,
                 std::ostream& err) {
  const Dataset ds = load_source(source);
  warn_unnormalized(ds, err);
  const MarginGeometry geo = solve_hard_margin(ds);
  if (!geo.offset_valid())
    err << fmt::format("warning: degenerate offset b = {}\n", geo.offset_b);
  nlohmann::json j = {{"dataset", ds.name},
                      {"n", ds.n()},
                      {"d", ds.d()},
                      {"normalized", ds.normalized},
                      {"source", source.to_json()},
                      {"geometry", to_json(geo)},
                      {"assumptions", assumptions_json(check_assumptions(ds, geo))}};
  const std::string text = j.dump(2) + "\n";
  out << text;
  if (!out_path.empty()) write_text(out_path, text);
  return 0;
}

int cmd_gen(const DatasetSource& source, const std::string& out_path, std::ostream& out,
            std::ostream&) {
  if (source.kind != DatasetSource::Kind::Gen) throw UsageError("gen needs --gen n,d,margin");
  const Dataset ds = load_source(source);
  save_csv(ds, out_path);
  out << fmt::format("wrote {} ({} x {}, {})\n", out_path, ds.n(), ds.d(), ds.name);
  return 0;
}

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  if (config.etas.empty()) throw UsageError("--eta needs at least one value");
  if (std::set<double>(config.etas.begin(), config.etas.end()).size() != config.etas.size())
    throw UsageError("--eta values must be distinct");
  for (double eta : config.etas)
    if (!(eta > 0.0)) throw UsageError(fmt::format("eta must be positive, got {}", eta));
  if (config.steps < 1) throw UsageError("--steps must be >= 1");
  if (config.jobs < 1) throw UsageError("--jobs must be >= 1");
  if (config.mode == Mode::ExpDivergence && config.loss != LossKind::Exponential)
    throw UsageError("mode exp-divergence needs --loss exponential");

  const Dataset ds = load_source(config.source);
  warn_unnormalized(ds, err);
  const MarginGeometry geo = solve_hard_margin(ds);
  std::optional<PotentialContext> pot;
  if (geo.offset_valid()) {
    pot = make_potential_context(ds, geo);
  } else {
    err << fmt::format("warning: degenerate offset b = {}; potential checks will fail\n",
                       geo.offset_b);
  }

  Vector w0 = Vector::Zero(ds.d());
  if (!config.w0.empty()) {
    if (static_cast<Index>(config.w0.size()) != ds.d())
      throw UsageError(fmt::format("--w0 has {} entries, dataset has d = {}", config.w0.size(), ds.d()));
    for (Index i = 0; i < ds.d(); ++i) w0(i) = config.w0[static_cast<std::size_t>(i)];
  }
  if (config.ns0 != 0.0) {
    if (ds.d() < 2) throw UsageError("--ns0 needs d >= 2");
    w0 += config.ns0 * geo.basis.col(0);
  }

  const fs::path dir(config.out_dir);
  fs::create_directories(dir);
  nlohmann::json geo_doc = {{"dataset", ds.name},
                            {"geometry", to_json(geo)},
                            {"assumptions", assumptions_json(check_assumptions(ds, geo))}};
  write_text(dir / "geometry.json", geo_doc.dump(2) + "\n");

  RunOptions options;
  options.hess_iters = config.hess_iters;
  std::vector<Outcome> outcomes(config.etas.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < config.etas.size(); i = next++) {
      Outcome& o = outcomes[i];
      const double eta = config.etas[i];
      try {
        o.traj = gd_run(ds, config.loss, eta, config.steps, w0, geo, config.schedule, options);
        VerifyContext vctx;
        vctx.ds = &ds;
        vctx.geo = &geo;
        vctx.potential = pot ? &*pot : nullptr;
        vctx.mode = oscillation_mode(config.mode);
        vctx.risk_t_min = config.risk_t_min;
        o.report = verify_trajectory(o.traj, vctx);

        std::ostringstream csv;
        write_trajectory_csv(o.traj, csv);
        write_text(dir / fmt::format("traj_eta{}.csv", eta_tag(eta)), csv.str());
        nlohmann::json doc = to_json(o.report);
        doc["run"] = {{"source", config.source.to_json()},
                      {"loss", std::string(to_string(config.loss))},
                      {"eta", eta},
                      {"steps", config.steps},
                      {"w0", to_std(w0)},
                      {"terminated",
                       {{"kind", std::string(to_string(o.traj.terminated.kind))},
                        {"step", o.traj.terminated.step}}},
                      {"schedule", schedule_json(config.schedule)},
                      {"hess_iters", config.hess_iters},
                      {"mode", std::string(mode_name(config.mode))},
                      {"risk_t_min", config.risk_t_min}};
        write_text(dir / fmt::format("report_eta{}.json", eta_tag(eta)), doc.dump(2) + "\n");
      } catch (const std::exception& e) {
        o.error = e.what();
      }
    }
  };
  const auto nthreads = std::min<std::size_t>(static_cast<std::size_t>(config.jobs), config.etas.size());
  std::vector<std::thread> pool;
  for (std::size_t k = 1; k < nthreads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::vector<Series> loss_series;
  std::vector<Series> sharp_series;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& recs = outcomes[i].traj.records;
    Series loss{fmt::format("eta={}", eta_tag(config.etas[i])), {}, false};
    Series grad{fmt::format("|grad| eta={}", eta_tag(config.etas[i])), {}, false};
    Series hess{fmt::format("hess eta={}", eta_tag(config.etas[i])), {}, true};
    for (const auto& r : recs) {
      loss.points.emplace_back(double(r.t), r.loss);
      grad.points.emplace_back(double(r.t), r.grad_norm);
      if (r.hess_top) hess.points.emplace_back(double(r.t), *r.hess_top);
    }
    loss_series.push_back(std::move(loss));
    sharp_series.push_back(std::move(grad));
    if (!hess.points.empty()) sharp_series.push_back(std::move(hess));
  }
  const std::string stamp = utc_stamp();
  write_text(dir / "loss_vs_t.svg",
             render_plot({fmt::format("training loss ({}, {})", to_string(config.loss), ds.name),
                          "step t", "L(w_t)", true},
                         loss_series, stamp));
  write_text(dir / "sharpness_vs_t.svg",
             render_plot({"sharpness: |grad L| solid, top Hessian eigenvalue dashed", "step t",
                          "sharpness", true},
                         sharp_series, stamp));

  std::string failure;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& o = outcomes[i];
    const double eta = config.etas[i];
    if (!o.error.empty()) {
      out << fmt::format("eta={} ERROR {}\n", eta_tag(eta), o.error);
      if (failure.empty()) failure = fmt::format("eta={}: {}", eta_tag(eta), o.error);
      continue;
    }
    const bool ok = o.report.overall();
    out << fmt::format("eta={} {} terminated={}({}) checks={}\n", eta_tag(eta), ok ? "PASS" : "FAIL",
                       to_string(o.traj.terminated.kind), o.traj.terminated.step,
                       o.report.checks.size());
    if (!ok && failure.empty())
      failure = fmt::format("eta={}: {}", eta_tag(eta), first_failure(o.report));
  }
  if (!failure.empty()) {
    err << failure << "\n";
    return 1;
  }
  return 0;
}

int cmd_verify(const std::string& traj_path, const std::string& meta_path,
               const std::optional<DatasetSource>& source, std::optional<Mode> mode,
               const std::string& out_path, std::ostream& out, std::ostream& err) {
  fs::path meta(meta_path);
  if (meta.empty()) {
    const fs::path tp(traj_path);
    std::string name = tp.filename().string();
    if (name.rfind("traj_", 0) != 0)
      throw UsageError("cannot derive the report path; pass --meta");
    name.replace(0, 5, "report_");
    meta = tp.parent_path() / fs::path(name).replace_extension(".json");
  }
  const nlohmann::json doc = read_json(meta);
  if (!doc.contains("run")) throw Error(fmt::format("{} has no run section", meta.string()));
  const nlohmann::json& run = doc.at("run");

  const DatasetSource src = source ? *source : DatasetSource::from_json(run.at("source"));
  const Dataset ds = load_source(src);
  const MarginGeometry geo = solve_hard_margin(ds);
  std::optional<PotentialContext> pot;
  if (geo.offset_valid()) pot = make_potential_context(ds, geo);

  Trajectory traj;
  traj.eta = run.at("eta").get<double>();
  traj.loss_kind = parse_loss_kind(run.at("loss").get<std::string>());
  traj.steps = run.at("steps").get<Index>();
  const auto w0 = run.at("w0").get<std::vector<double>>();
  traj.w0 = Eigen::Map<const Vector>(w0.data(), static_cast<Index>(w0.size()));
  const std::string term = run.at("terminated").at("kind").get<std::string>();
  traj.terminated.kind = term == "completed"  ? Termination::Completed
                         : term == "overflow" ? Termination::Overflow
                                              : Termination::NonFinite;
  traj.terminated.step = run.at("terminated").at("step").get<Index>();
  traj.schedule = schedule_from_json(run.at("schedule"));
  {
    std::ifstream in(traj_path);
    if (!in) throw Error(fmt::format("missing file: {}", traj_path));
    traj.records = read_trajectory_csv(in);
  }
  rehydrate(traj, ds, geo);

  const Mode m = mode ? *mode : parse_mode(run.value("mode", std::string("observe")));
  VerifyContext vctx;
  vctx.ds = &ds;
  vctx.geo = &geo;
  vctx.potential = pot ? &*pot : nullptr;
  vctx.mode = oscillation_mode(m);
  vctx.risk_t_min = run.value("risk_t_min", Index{3});
  const VerificationReport report = verify_trajectory(traj, vctx);
  const std::string text = to_json(report).dump(2) + "\n";
  out << text;
  if (!out_path.empty()) write_text(out_path, text);
  if (!report.overall()) {
    err << first_failure(report) << "\n";
    return 1;
  }
  return 0;
}

namespace {

struct DatasetFlags {
  std::optional<double> two_point;
  std::string csv;
  std::string label_column = "label";
  std::string gen;
  std::optional<std::uint64_t> seed;
  bool normalize = false;
};

void add_dataset_flags(CLI::App* sub, DatasetFlags& f) {
  sub->add_option("--two-point", f.two_point, "two-sample dataset (gamma,1),(gamma,-1)");
  sub->add_option("--csv", f.csv, "CSV file with a header row");
  sub->add_option("--label-column", f.label_column, "label column of --csv")->capture_default_str();
  sub->add_option("--gen", f.gen, "synthetic separable data: n,d,margin");
  sub->add_option("--seed", f.seed, "generator seed (default: $EOSLAB_SEED, else 0)");
  sub->add_flag("--normalize", f.normalize, "divide rows by max(1, max row norm)");
}

std::uint64_t default_seed() {
  const char* env = std::getenv("EOSLAB_SEED");
  if (env == nullptr || *env == '\0') return 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (*end != '\0') throw UsageError(fmt::format("EOSLAB_SEED='{}' is not an integer", env));
  return v;
}

std::optional<DatasetSource> to_source(const DatasetFlags& f, bool required) {
  const int count = int(f.two_point.has_value()) + int(!f.csv.empty()) + int(!f.gen.empty());
  if (count == 0) {
    if (required) throw UsageError("give one of --two-point, --csv, --gen");
    return std::nullopt;
  }
  if (count > 1) throw UsageError("--two-point, --csv and --gen are mutually exclusive");
  DatasetSource s;
  s.normalize = f.normalize;
  if (f.two_point) {
    s.kind = DatasetSource::Kind::TwoPoint;
    s.gamma = *f.two_point;
  } else if (!f.csv.empty()) {
    s.kind = DatasetSource::Kind::Csv;
    s.path = f.csv;
    s.label_column = f.label_column;
  } else {
    s.kind = DatasetSource::Kind::Gen;
    std::vector<std::string> parts;
    std::stringstream ss(f.gen);
    std::string item;
    while (std::getline(ss, item, ',')) parts.push_back(item);
    if (parts.size() != 3) throw UsageError(fmt::format("--gen expects n,d,margin, got '{}'", f.gen));
    try {
      std::size_t pos = 0;
      s.n = std::stol(parts[0], &pos);
      if (pos != parts[0].size()) throw std::invalid_argument("n");
      s.d = std::stol(parts[1], &pos);
      if (pos != parts[1].size()) throw std::invalid_argument("d");
      s.margin = std::stod(parts[2], &pos);
      if (pos != parts[2].size()) throw std::invalid_argument("margin");
    } catch (const std::exception&) {
      throw UsageError(fmt::format("--gen expects n,d,margin, got '{}'", f.gen));
    }
    s.seed = f.seed ? *f.seed : default_seed();
  }
  return s;
}

// Appends `--key value` for config entries whose flag is absent from args.
void merge_config(CLI::App* sub, std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return;
  auto given = [&](const std::string& key) {
    for (const auto& a : args)
      if (a == "--" + key || a.rfind("--" + key + "=", 0) == 0) return true;
    return false;
  };
  for (const auto& entry : read_config_file(path)) {
    if (entry.key == "config") throw UsageError(fmt::format("{}:{}: nested config", path, entry.line));
    const CLI::Option* opt = sub->get_option_no_throw("--" + entry.key);
    if (opt == nullptr)
      throw UsageError(fmt::format("{}:{}: unknown key '{}'", path, entry.line, entry.key));
    if (given(entry.key)) continue;
    if (opt->get_expected_max() == 0) {
      if (entry.value == "true" || entry.value == "1" || entry.value == "yes") args.push_back("--" + entry.key);
      else if (!(entry.value == "false" || entry.value == "0" || entry.value == "no"))
        throw UsageError(fmt::format("{}:{}: '{}' expects true or false", path, entry.line, entry.key));
    } else {
      args.push_back("--" + entry.key);
      args.push_back(entry.value);
    }
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"eoslab: constant-stepsize gradient descent on separable data, with checks"};
  app.require_subcommand(1);
  app.name("eoslab");

  DatasetFlags run_data;
  RunConfig rc;
  std::string loss_name = "logistic";
  std::string mode_text = "observe";
  std::string config_path;
  auto* run = app.add_subcommand("run", "run GD for each eta, verify, write CSV/JSON/SVG");
  add_dataset_flags(run, run_data);
  run->add_option("--loss", loss_name, "logistic or exponential")
      ->check(CLI::IsMember({"logistic", "exponential"}))
      ->capture_default_str();
  run->add_option("--eta", rc.etas, "comma-separated stepsizes")->required()->delimiter(',')
      ->check(CLI::PositiveNumber);
  run->add_option("--steps", rc.steps, "GD steps")->check(CLI::PositiveNumber)->capture_default_str();
  run->add_option("--w0", rc.w0, "initial iterate, comma-separated")->delimiter(',');
  run->add_option("--ns0", rc.ns0, "added to w0 along the first complement direction");
  run->add_option("--dense", rc.schedule.dense_until, "record every step up to this one")
      ->capture_default_str();
  run->add_option("--growth", rc.schedule.growth, "geometric record ratio")->capture_default_str();
  run->add_option("--hess-iters", rc.hess_iters, "power iterations for the Hessian (0: off)")
      ->capture_default_str();
  run->add_option("--out", rc.out_dir, "output directory")->capture_default_str();
  run->add_option("--mode", mode_text, "expect-eos | expect-stable | observe | exp-divergence")
      ->check(CLI::IsMember({"expect-eos", "expect-stable", "observe", "exp-divergence"}))
      ->capture_default_str();
  run->add_option("--jobs", rc.jobs, "concurrent eta runs")->check(CLI::PositiveNumber)
      ->capture_default_str();
  run->add_option("--risk-t-min", rc.risk_t_min, "first step of the risk envelope")
      ->capture_default_str();
  run->add_option("--config", config_path, "key=value file; command-line flags win");

  DatasetFlags geo_data;
  std::string geo_out;
  auto* geometry = app.add_subcommand("geometry", "solve the hard-margin geometry and print JSON");
  add_dataset_flags(geometry, geo_data);
  geometry->add_option("--out", geo_out, "also write the JSON here");
  geometry->add_option("--config", config_path, "key=value file; command-line flags win");

  DatasetFlags ver_data;
  std::string traj_path, meta_path, ver_out, ver_mode;
  auto* verify = app.add_subcommand("verify", "re-check a stored trajectory");
  add_dataset_flags(verify, ver_data);
  verify->add_option("--traj", traj_path, "trajectory CSV written by run")->required();
  verify->add_option("--meta", meta_path, "report JSON of the run (default: alongside --traj)");
  verify->add_option("--mode", ver_mode, "override the oscillation mode")
      ->check(CLI::IsMember({"expect-eos", "expect-stable", "observe", "exp-divergence"}));
  verify->add_option("--out", ver_out, "also write the report here");
  verify->add_option("--config", config_path, "key=value file; command-line flags win");

  DatasetFlags gen_data;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen", "write a synthetic separable dataset as CSV");
  add_dataset_flags(gen, gen_data);
  gen->add_option("--out", gen_out, "CSV path (a .meta.json sidecar is written too)")->required();
  gen->add_option("--config", config_path, "key=value file; command-line flags win");

  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  CLI::App* active = nullptr;
  try {
    if (!args.empty()) {
      for (CLI::App* sub : {run, geometry, verify, gen})
        if (sub->get_name() == args.front()) active = sub;
      if (active != nullptr) merge_config(active, args);
    }
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << (active ? active->help() : app.help());
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << (active ? active->help() : app.help());
    return 2;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n" << (active ? active->help() : app.help());
    return 2;
  }

  try {
    if (run->parsed()) {
      rc.source = *to_source(run_data, true);
      rc.loss = parse_loss_kind(loss_name);
      rc.mode = parse_mode(mode_text);
      return cmd_run(rc, out, err);
    }
    if (geometry->parsed()) return cmd_geometry(*to_source(geo_data, true), geo_out, out, err);
    if (verify->parsed()) {
      std::optional<Mode> m;
      if (!ver_mode.empty()) m = parse_mode(ver_mode);
      return cmd_verify(traj_path, meta_path, to_source(ver_data, false), m, ver_out, out, err);
    }
    if (gen->parsed()) return cmd_gen(*to_source(gen_data, true), gen_out, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n" << (active ? active->help() : app.help());
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace eoslab::cli
