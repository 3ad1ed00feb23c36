// Copyright 2026 The eoslab Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "cli.hpp"

namespace eoslab::cli {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "eoslab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(int(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& tag) {
  const char* base = std::getenv("EOSLAB_TEST_TMP");
  const fs::path dir = fs::path(base ? base : fs::temp_directory_path().string()) / ("cli_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

TEST(Cli, UsageErrorsExitTwo) {
  const Result missing_eta = invoke({"run", "--two-point", "0.2"});
  EXPECT_EQ(missing_eta.code, 2);
  EXPECT_NE(missing_eta.err.find("--eta"), std::string::npos);
  EXPECT_NE(missing_eta.err.find("Usage"), std::string::npos);
  EXPECT_EQ(invoke({}).code, 2);
  EXPECT_EQ(invoke({"frobnicate"}).code, 2);
  EXPECT_EQ(invoke({"run", "--two-point", "0.2", "--eta", "1", "--bogus"}).code, 2);
  EXPECT_EQ(invoke({"run", "--two-point", "0.2", "--eta", "0,1"}).code, 2);
  EXPECT_EQ(invoke({"run", "--two-point", "0.2", "--eta", "1,1"}).code, 2);
  EXPECT_EQ(invoke({"run", "--eta", "1"}).code, 2);  // no dataset
  EXPECT_EQ(invoke({"run", "--two-point", "0.2", "--csv", "x.csv", "--eta", "1"}).code, 2);
  EXPECT_EQ(invoke({"run", "--two-point", "0.2", "--eta", "4", "--mode", "exp-divergence"}).code, 2);
  EXPECT_EQ(invoke({"run", "--two-point", "0.2", "--eta", "1", "--w0", "1,2,3"}).code, 2);
  EXPECT_EQ(invoke({"gen", "--gen", "20,3", "--out", "x.csv"}).code, 2);
}

TEST(Cli, HelpExitsZero) {
  const Result r = invoke({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("run"), std::string::npos);
  EXPECT_EQ(invoke({"run", "--help"}).code, 0);
}

TEST(Cli, ExponentialDivergenceRun) {
  const fs::path dir = fresh_dir("exp");
  const Result r = invoke({"run", "--two-point", "0.2", "--loss", "exponential", "--eta", "4", "--w0", "0,1",
                           "--steps", "200", "--mode", "exp-divergence", "--out", dir.string()});
  EXPECT_EQ(r.code, 0) << r.err;
  const nlohmann::json rep = read_json(dir / "report_eta4.json");
  EXPECT_EQ(rep.at("overall"), true);
  EXPECT_EQ(rep.at("run").at("terminated").at("kind"), "overflow");
  EXPECT_EQ(rep.at("checks").size(), 1u);
  EXPECT_TRUE(fs::exists(dir / "traj_eta4.csv"));
}

TEST(Cli, SweepWritesEveryArtifact) {
  const fs::path dir = fresh_dir("sweep");
  const Result r = invoke({"run", "--two-point", "0.2", "--loss", "logistic", "--eta", "0.01,0.1,1,10", "--w0",
                           "0,1", "--steps", "100000", "--out", dir.string(), "--jobs", "2"});
  EXPECT_EQ(r.code, 0) << r.err;
  for (const char* eta : {"0.01", "0.1", "1", "10"}) {
    EXPECT_TRUE(fs::exists(dir / (std::string("traj_eta") + eta + ".csv"))) << eta;
    EXPECT_TRUE(fs::exists(dir / (std::string("report_eta") + eta + ".json"))) << eta;
  }
  EXPECT_TRUE(fs::exists(dir / "loss_vs_t.svg"));
  EXPECT_TRUE(fs::exists(dir / "sharpness_vs_t.svg"));
  EXPECT_NE(r.err.find("warning"), std::string::npos);  // two-point rows exceed unit norm
  const nlohmann::json small = read_json(dir / "report_eta0.01.json");
  for (const auto& c : small.at("checks"))
    if (c.at("name") == "oscillation") EXPECT_EQ(c.at("measured").get<double>(), 0.0);
}

TEST(Cli, FailingCheckIsNamedAndExitsOne) {
  const fs::path dir = fresh_dir("fail");
  const Result r = invoke({"run", "--two-point", "0.2", "--eta", "100", "--w0", "0,1", "--steps", "2000",
                           "--mode", "expect-stable", "--out", dir.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("check 'oscillation' failed"), std::string::npos) << r.err;
}

TEST(Cli, OutputsAreByteReproducible) {
  const fs::path a = fresh_dir("repro_a");
  const fs::path b = fresh_dir("repro_b");
  const std::vector<std::string> base{"run", "--gen", "20,3,0.3", "--seed", "4", "--eta", "1,10", "--steps", "20000"};
  auto with_out = [&](const fs::path& d, const char* jobs) {
    auto v = base;
    v.insert(v.end(), {"--out", d.string(), "--jobs", jobs});
    return v;
  };
  const int first = invoke(with_out(a, "1")).code;
  ASSERT_NE(first, 2);
  ASSERT_EQ(invoke(with_out(b, "2")).code, first);
  for (const char* f : {"traj_eta1.csv", "traj_eta10.csv", "report_eta1.json", "report_eta10.json", "geometry.json"})
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  const std::regex stamp("<!-- generated [^>]* -->");
  for (const char* f : {"loss_vs_t.svg", "sharpness_vs_t.svg"})
    EXPECT_EQ(std::regex_replace(slurp(a / f), stamp, ""), std::regex_replace(slurp(b / f), stamp, "")) << f;
}

TEST(Cli, GeometryCommand) {
  const fs::path dir = fresh_dir("geometry");
  const Result r = invoke({"geometry", "--two-point", "0.2", "--out", (dir / "g.json").string()});
  EXPECT_EQ(r.code, 0) << r.err;
  const nlohmann::json j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j.at("geometry").at("gamma").get<double>(), 0.2, 1e-10);
  EXPECT_NEAR(j.at("geometry").at("offset_b").get<double>(), 1.0, 1e-9);
  EXPECT_EQ(j.at("assumptions").at("separable"), true);
  EXPECT_EQ(read_json(dir / "g.json"), j);

  std::ofstream(dir / "bad.csv") << "a,b,label\n1,0,x\n-1,0,x\n0.5,0.5,y\n-0.5,-0.5,y\n";
  const Result bad = invoke({"geometry", "--csv", (dir / "bad.csv").string()});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.err.find("not separable"), std::string::npos);
  EXPECT_EQ(invoke({"geometry", "--csv", (dir / "missing.csv").string()}).code, 1);
}

TEST(Cli, GenHonoursSeedEnvironment) {
  const fs::path dir = fresh_dir("gen");
  ASSERT_EQ(invoke({"gen", "--gen", "12,3,0.3", "--seed", "9", "--out", (dir / "a.csv").string()}).code, 0);
  ::setenv("EOSLAB_SEED", "9", 1);
  const Result env = invoke({"gen", "--gen", "12,3,0.3", "--out", (dir / "b.csv").string()});
  ::unsetenv("EOSLAB_SEED");
  ASSERT_EQ(env.code, 0) << env.err;
  EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
  EXPECT_TRUE(fs::exists(dir / "a.csv.meta.json"));
  // The written file feeds straight back into geometry.
  EXPECT_EQ(invoke({"geometry", "--csv", (dir / "a.csv").string()}).code, 0);
}

TEST(Cli, ConfigFileMergesAndFlagsWin) {
  const fs::path dir = fresh_dir("config");
  std::ofstream(dir / "run.cfg") << "# sweep\ntwo-point = 0.2\nsteps = 500\neta = 1\nw0 = 0,0\nnormalize = true\n";
  const Result r = invoke({"run", "--config", (dir / "run.cfg").string(), "--steps", "20000", "--out",
                           (dir / "out").string()});
  EXPECT_EQ(r.code, 0) << r.err;
  const nlohmann::json rep = read_json(dir / "out" / "report_eta1.json");
  EXPECT_EQ(rep.at("run").at("steps"), 20000);
  EXPECT_EQ(rep.at("run").at("source").at("normalize"), true);
  EXPECT_EQ(r.err.find("warning"), std::string::npos);  // normalized, so no norm warning

  std::ofstream(dir / "bad.cfg") << "two-point = 0.2\neta = 1\ncolour = blue\n";
  const Result bad = invoke({"run", "--config", (dir / "bad.cfg").string()});
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("colour"), std::string::npos);
  EXPECT_EQ(invoke({"run", "--config", (dir / "absent.cfg").string()}).code, 2);
}

TEST(Cli, VerifyRoundTrip) {
  const fs::path dir = fresh_dir("verify");
  ASSERT_EQ(invoke({"run", "--two-point", "0.2", "--eta", "2", "--w0", "0,1", "--steps", "20000", "--out",
                    dir.string()})
                .code,
            0);
  const fs::path traj = dir / "traj_eta2.csv";
  const Result ok = invoke({"verify", "--traj", traj.string()});
  EXPECT_EQ(ok.code, 0) << ok.err;
  EXPECT_EQ(nlohmann::json::parse(ok.out).at("checks"), read_json(dir / "report_eta2.json").at("checks"));

  const Result stable = invoke({"verify", "--traj", traj.string(), "--mode", "expect-eos"});
  EXPECT_EQ(nlohmann::json::parse(stable.out).at("overall"), stable.code == 0);

  std::string text = slurp(traj);
  const auto row = text.find("\n5,");
  ASSERT_NE(row, std::string::npos);
  const auto comma = text.find(',', row + 3);
  text.replace(row + 3, comma - row - 3, "123.5");
  std::ofstream(dir / "traj_eta2.csv", std::ios::binary) << text;
  const Result tampered = invoke({"verify", "--traj", traj.string()});
  EXPECT_EQ(tampered.code, 1);
  EXPECT_NE(tampered.err.find("replay mismatch"), std::string::npos) << tampered.err;

  EXPECT_EQ(invoke({"verify", "--traj", (dir / "traj_eta9.csv").string()}).code, 1);
}

}  // namespace
}  // namespace eoslab::cli
