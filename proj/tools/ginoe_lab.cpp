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

// ginoe_lab: one subcommand per verification campaign.
//
// Exit status: 0 all checks passed, 1 numerical failure, 2 usage error.
// Every flag can also be set through GINOE_<FLAG> (e.g. GINOE_SEED);
// a flag on the command line wins over the environment.

#include <cstdio>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "ginoe/experiment.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitNumerical = 1;
constexpr int kExitUsage = 2;

struct RawFlags {
  std::uint64_t seed = ginoe::kDefaultSeed;
  std::uint64_t samples = 0;
  int n = 0;
  int k = 0;
  std::string points, t_grid, bins, out, format = "csv";
  unsigned threads = 1;
};

void add_flags(CLI::App& app, RawFlags& f) {
  app.add_option("--seed", f.seed, "RNG seed")->envname("GINOE_SEED");
  app.add_option("--samples", f.samples, "Monte Carlo samples (or trials)")->envname("GINOE_SAMPLES");
  app.add_option("--n", f.n, "matrix size N")->envname("GINOE_N");
  app.add_option("--k", f.k, "number of points K")->envname("GINOE_K");
  app.add_option("--points", f.points, "comma-separated points; ';' separates configurations")->envname("GINOE_POINTS");
  app.add_option("--t-grid", f.t_grid, "comma-separated positive times")->envname("GINOE_T_GRID");
  app.add_option("--bins", f.bins, "lo:hi:count per coordinate, comma-separated")->envname("GINOE_BINS");
  app.add_option("--out", f.out, "result file; the manifest goes to <out>.manifest.json")->envname("GINOE_OUT");
  app.add_option("--format", f.format, "csv or json")->envname("GINOE_FORMAT");
  app.add_option("--threads", f.threads, "worker threads, 0 = all cores")->envname("GINOE_THREADS");
}

ginoe::ExperimentConfig to_config(const std::string& sub, const CLI::App& app, const RawFlags& f) {
  ginoe::ExperimentConfig c;
  c.subcommand = ginoe::parse_subcommand(sub);
  c.seed = f.seed;
  if (!app.get_option("--samples")->empty()) c.samples = f.samples;
  if (!app.get_option("--n")->empty()) c.n = f.n;
  if (!app.get_option("--k")->empty()) c.k = f.k;
  if (c.samples && *c.samples < 1) throw ginoe::UsageError("--samples must be >= 1");
  c.points = ginoe::parse_point_sets(f.points);
  c.t_grid = ginoe::parse_real_list(f.t_grid, "--t-grid");
  c.bins = ginoe::parse_bins(f.bins);
  c.out_path = f.out;
  c.format = ginoe::parse_format(f.format);
  c.threads = f.threads;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ginoe-lab: real Ginibre spin statistics, Pfaffian kernels and matrix integrals"};
  app.set_version_flag("--version", GINOE_VERSION);
  app.require_subcommand(1, 1);
  RawFlags flags;
  std::vector<std::pair<std::string, CLI::App*>> subs;
  const std::map<std::string, std::string> about = {
      {"pfaffian-selftest", "Pf^2 = det and matchings-sum agreement on random skew matrices"},
      {"kernel-table", "tabulate F, spin moments and two-point densities of the bulk kernel"},
      {"mc-spins", "Monte Carlo spin product moments of GinOE(n) against the Pfaffian closed form"},
      {"mc-density", "binned spin-weighted density of GinOE(n) against the modified density"},
      {"lemma1", "spin-weighted density against the determinant-moment formula at finite n"},
      {"matrix-integral", "Gaussian integral over U(K) against its Pfaffian shape (K = 2 or 4)"},
      {"stationary-phase", "critical matchings: signatures, Hessian determinants, matchings sum"},
      {"heat-check", "heat-equation residuals, small-time pairings and projector solutions"},
  };
  for (const auto& [id, name] : ginoe::subcommand_names()) {
    auto* s = app.add_subcommand(name, about.at(name));
    add_flags(*s, flags);
    subs.emplace_back(name, s);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  try {
    std::string chosen;
    CLI::App* sub = nullptr;
    for (const auto& [name, s] : subs)
      if (s->parsed()) {
        chosen = name;
        sub = s;
      }
    const auto config = to_config(chosen, *sub, flags);
    const auto result = ginoe::run(config);
    const auto path = ginoe::write_outputs(config, result);

    std::cout << chosen << ": wrote " << path << " (" << result.table.rows.size() << " rows)\n";
    for (const auto& c : result.manifest.checks) {
      std::printf("%s %s measured=%.6g %s %.6g\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.measured,
                  c.comparison.c_str(), c.tolerance);
    }
    if (!result.manifest.failure.empty()) std::printf("FAIL numerical error: %s\n", result.manifest.failure.c_str());
    return result.manifest.passed() ? kExitPass : kExitNumerical;
  } catch (const ginoe::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }
}
