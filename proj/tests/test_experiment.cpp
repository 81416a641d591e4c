/*
 * Copyright 2026 The ginoe-lab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "ginoe/experiment.hpp"

namespace ginoe {
namespace {

ExperimentConfig config(Subcommand s) {
  ExperimentConfig c;
  c.subcommand = s;
  return c;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

TEST(Parse, PointSets) {
  const auto p = parse_point_sets("0,0.5; -1, 2,3.5");
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p[0], (std::vector<double>{0.0, 0.5}));
  EXPECT_EQ(p[1], (std::vector<double>{-1.0, 2.0, 3.5}));
  EXPECT_TRUE(parse_point_sets("").empty());
  EXPECT_THROW(parse_point_sets("0,abc"), UsageError);
  EXPECT_THROW(parse_point_sets("0,1;;2,3"), UsageError);
  EXPECT_THROW(parse_point_sets("0,inf"), UsageError);
}

TEST(Parse, RealListBinsFormat) {
  EXPECT_EQ(parse_real_list("0.5,1,2", "--t-grid"), (std::vector<double>{0.5, 1.0, 2.0}));
  const auto b = parse_bins("-1:0:4,0.5:1.5:2");
  ASSERT_EQ(b.size(), 2u);
  EXPECT_EQ(b[0].edges(), (std::vector<double>{-1.0, -0.75, -0.5, -0.25, 0.0}));
  EXPECT_EQ(b[1].count, 2);
  EXPECT_THROW(parse_bins("0:1"), UsageError);
  EXPECT_THROW(parse_bins("1:0:3"), UsageError);
  EXPECT_THROW(parse_bins("0:1:x"), UsageError);
  EXPECT_EQ(parse_format("json"), OutputFormat::Json);
  EXPECT_THROW(parse_format("xml"), UsageError);
}

TEST(Parse, Subcommands) {
  for (const auto& [id, name] : subcommand_names()) {
    EXPECT_EQ(parse_subcommand(name), id);
    EXPECT_EQ(to_string(id), name);
  }
  EXPECT_EQ(subcommand_names().size(), 8u);
  EXPECT_THROW(parse_subcommand("nope"), UsageError);
}

TEST(Output, CsvAndJsonMirrorEachOther) {
  Table t{"demo/v1", {"a", "b", "c"}, {}};
  t.add({1.5, std::int64_t{3}, std::string("x y")});
  t.add({0.1, std::int64_t{-2}, std::string("q\"r")});
  EXPECT_THROW(t.add({1.0}), Error);
  const auto csv = to_csv(t);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "# ginoe-lab demo/v1");
  EXPECT_NE(csv.find("\na,b,c\n"), std::string::npos);
  EXPECT_NE(csv.find("0.10000000000000001"), std::string::npos);
  const auto j = nlohmann::json::parse(to_json(t));
  EXPECT_EQ(j["schema"], "ginoe-lab demo/v1");
  ASSERT_EQ(j["rows"].size(), 2u);
  EXPECT_EQ(j["rows"][0]["a"].get<double>(), 1.5);
  EXPECT_EQ(j["rows"][1]["b"].get<int>(), -2);
  EXPECT_EQ(j["rows"][1]["c"], "q\"r");
}

TEST(Run, PfaffianSelftestPasses) {
  auto c = config(Subcommand::PfaffianSelftest);
  c.seed = 7;
  const auto r = run(c);
  EXPECT_TRUE(r.manifest.passed()) << r.manifest.failure;
  EXPECT_FALSE(r.table.rows.empty());
  EXPECT_EQ(r.manifest.config["seed"], 7);
}

TEST(Run, KernelTableAndStationaryPhaseAndHeatCheckPass) {
  for (auto s : {Subcommand::KernelTable, Subcommand::StationaryPhase, Subcommand::HeatCheck}) {
    auto c = config(s);
    c.samples = 100;
    const auto r = run(c);
    EXPECT_TRUE(r.manifest.passed()) << to_string(s) << " " << r.manifest.failure;
    for (const auto& ch : r.manifest.checks) EXPECT_TRUE(ch.passed) << ch.name << " = " << ch.measured;
  }
}

TEST(Run, MatrixIntegralTwoPoint) {
  auto c = config(Subcommand::MatrixIntegral);
  c.samples = 500;
  const auto r = run(c);
  EXPECT_TRUE(r.manifest.passed()) << r.manifest.failure;
  EXPECT_EQ(r.table.rows.size(), 25u);
}

TEST(Run, McSpinsIsThreadIndependent) {
  auto c = config(Subcommand::McSpins);
  c.n = 16;
  c.samples = 600;
  const auto a = to_csv(run(c).table);
  c.threads = 3;
  const auto b = to_csv(run(c).table);
  EXPECT_EQ(a, b);
  c.seed = 99;
  EXPECT_NE(to_csv(run(c).table), a);
}

TEST(Run, McDensitySmallGrid) {
  auto c = config(Subcommand::McDensity);
  c.n = 30;
  c.samples = 1000;
  c.bins = parse_bins("-1:-0.2:2,0.2:1:2");
  const auto r = run(c);
  EXPECT_EQ(r.table.rows.size(), 4u);
  EXPECT_TRUE(r.manifest.failure.empty());
}

TEST(Run, UsageErrorsPropagate) {
  auto density = config(Subcommand::McDensity);
  density.bins = parse_bins("0:1:2,0.5:1.5:2");
  density.samples = 200;
  EXPECT_THROW(run(density), UsageError);
  auto mi = config(Subcommand::MatrixIntegral);
  mi.k = 3;
  EXPECT_THROW(run(mi), UsageError);
  auto lem = config(Subcommand::Lemma1);
  lem.points = {{1.0, 0.0}};
  EXPECT_THROW(run(lem), UsageError);
  auto heat = config(Subcommand::HeatCheck);
  heat.t_grid = {-1.0};
  EXPECT_THROW(run(heat), UsageError);
  auto spins = config(Subcommand::McSpins);
  spins.samples = 10;
  EXPECT_THROW(run(spins), UsageError);
}

TEST(Run, NumericalFailureIsRecorded) {
  auto c = config(Subcommand::Lemma1);
  c.n = 6;
  c.samples = 200;
  c.points = {{4.0, 4.5}};
  const auto r = run(c);
  EXPECT_FALSE(r.manifest.passed());
  EXPECT_NE(r.manifest.failure.find("samples are needed"), std::string::npos);
}

TEST(Run, WritesResultAndManifest) {
  const auto dir = std::filesystem::temp_directory_path() / "ginoe_experiment_test";
  std::filesystem::create_directories(dir);
  auto c = config(Subcommand::KernelTable);
  c.format = OutputFormat::Json;
  c.out_path = (dir / "kernel.json").string();
  const auto r = run(c);
  EXPECT_EQ(write_outputs(c, r), c.out_path);
  const auto table = nlohmann::json::parse(slurp(c.out_path));
  EXPECT_EQ(table["rows"].size(), r.table.rows.size());
  const auto manifest = nlohmann::json::parse(slurp(c.out_path + ".manifest.json"));
  EXPECT_EQ(manifest["config"]["subcommand"], "kernel-table");
  EXPECT_EQ(manifest["config"]["entry_variance"], 0.5);
  EXPECT_EQ(manifest["passed"], true);
  EXPECT_EQ(manifest["checks"].size(), r.manifest.checks.size());
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace ginoe
