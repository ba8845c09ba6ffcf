/*
 * Copyright 2026 The seirgame Authors
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
#include "core/io.hpp"
#include "core/scenario.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace seirgame
{
namespace
{

namespace fs = std::filesystem;

const char* kTwoRegions = R"(
name: pair
regions: {names: [A, B], populations: [1.0e6, 2.0e6]}
travel: {matrix: [[0.9, 0.1], [0.1, 0.9]]}
epidemic:
  calibration: {r0: 2.2, infectious_days: 13, ifr: 0.0065, latent_days: 5}
  theta: 0.9
  sigma_s: 1.0e-4
  sigma_e: 1.0e-4
cost: {w: 100, chi: 1.0e6, p: 0.002, c: 5000, a: 10, r: 0, eta: 0, horizon: 90}
grid: {steps: 20}
initial: {s: [0.98, 0.99], e: [0.01, 0.005], i: [0.01, 0.005]}
solver: {stages: 3, batch: 8}
)";

const char* kTwoRegionsReordered = R"(
solver: {batch: 8, stages: 3}
initial: {i: [0.01, 0.005], e: [0.01, 0.005], s: [0.98, 0.99]}
grid: {steps: 20}
cost: {horizon: 90, eta: 0, r: 0, a: 10, c: 5000, p: 0.002, chi: 1.0e6, w: 100}
epidemic:
  sigma_e: 1.0e-4
  sigma_s: 1.0e-4
  theta: 0.9
  calibration: {latent_days: 5, ifr: 0.0065, infectious_days: 13, r0: 2.2}
travel: {matrix: [[0.9, 0.1], [0.1, 0.9]]}
regions: {populations: [1.0e6, 2.0e6], names: [A, B]}
name: pair
)";

Scenario parse(const std::string& text) { return resolve_scenario(parse_scenario_tree(text)); }

TEST(Scenario, ResolvesCalibratedRates)
{
    const Scenario s = parse(kTwoRegions);
    EXPECT_EQ(s.name, "pair");
    EXPECT_EQ(s.params.regions_count(), 2);
    EXPECT_DOUBLE_EQ(s.params.epi.gamma, 0.2);
    EXPECT_NEAR(s.params.epi.kappa, 5e-4, 1e-18);
    EXPECT_NEAR(s.params.epi.beta_matrix(0, 1), 2.2 / 13.0 * 0.18 * 2.0, 1e-15);
    ASSERT_TRUE(s.initial.has_value());
    EXPECT_DOUBLE_EQ((*s.initial)[2], 0.01);
    EXPECT_EQ(s.grid.steps, 20);
    EXPECT_EQ(s.solver.stages, 3);
    EXPECT_EQ(s.solver.batch, 8);
}

TEST(Scenario, DigestIgnoresKeyOrder)
{
    EXPECT_EQ(parse(kTwoRegions).digest, parse(kTwoRegionsReordered).digest);
    EXPECT_EQ(parse(kTwoRegions).digest.size(), 16u);
}

TEST(Scenario, DigestTracksGameNotSolver)
{
    YAML::Node tree = parse_scenario_tree(kTwoRegions);
    const std::string base = resolve_scenario(tree).digest;
    set_tree_value(tree, "solver.batch", "64");
    EXPECT_EQ(resolve_scenario(tree).digest, base);
    set_tree_value(tree, "cost.a", "11");
    EXPECT_NE(resolve_scenario(tree).digest, base);
}

TEST(Scenario, OverrideSequenceValue)
{
    YAML::Node tree = parse_scenario_tree(kTwoRegions);
    set_tree_value(tree, "initial.s", "[0.97, 0.99]");
    EXPECT_DOUBLE_EQ((*resolve_scenario(tree).initial)[0], 0.97);
}

TEST(Scenario, MissingInitialIsOptional)
{
    YAML::Node tree = parse_scenario_tree(kTwoRegions);
    tree.remove("initial");
    EXPECT_FALSE(resolve_scenario(tree).initial.has_value());
}

TEST(Scenario, MissingSectionNamesField)
{
    YAML::Node tree = parse_scenario_tree(kTwoRegions);
    tree.remove("cost");
    try {
        resolve_scenario(tree);
        FAIL() << "expected ModelError";
    }
    catch (const ModelError& e) {
        EXPECT_EQ(e.field().rfind("cost", 0), 0u) << e.what();
    }
}

TEST(Scenario, MalformedTravelRowRejected)
{
    YAML::Node tree = parse_scenario_tree(kTwoRegions);
    set_tree_value(tree, "travel.matrix", "[[0.9, 0.1], [0.6, 0.6]]");
    try {
        resolve_scenario(tree);
        FAIL() << "expected ModelError";
    }
    catch (const ModelError& e) {
        EXPECT_NE(std::string(e.what()).find("travel.matrix[1]"), std::string::npos) << e.what();
    }
}

TEST(Scenario, ExtendsMergesOverBase)
{
    const fs::path dir = fs::temp_directory_path() / "seirgame-scenario-test";
    fs::create_directories(dir);
    {
        std::ofstream(dir / "base.yaml") << kTwoRegions;
        std::ofstream(dir / "child.yaml") << "extends: base.yaml\nname: child\ncost: {a: 3}\n";
    }
    const Scenario child = load_scenario((dir / "child.yaml").string());
    EXPECT_EQ(child.name, "child");
    EXPECT_DOUBLE_EQ(child.params.cost.a, 3.0);
    EXPECT_DOUBLE_EQ(child.params.cost.w, 100.0);
    fs::remove_all(dir);
}

TEST(Scenario, ShippedNortheastResolves)
{
    const Scenario s = load_scenario(std::string(SEIRGAME_SCENARIO_DIR) + "/ny-nj-pa.yaml");
    EXPECT_FALSE(s.initial.has_value());
    EXPECT_NEAR(s.params.epi.beta_matrix(0, 0), 0.1370769, 5e-8);
    EXPECT_NEAR(s.params.epi.lambda, 0.076923, 5e-7);
    const std::string resolved = emit_yaml(resolved_tree(s));
    EXPECT_NE(resolved.find("gamma: 0.2"), std::string::npos) << resolved;
    EXPECT_NE(resolved.find("kappa: 0.0005"), std::string::npos) << resolved;
}

TEST(Digest, FnvKnownValues)
{
    EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Csv, PreambleAndNumbers)
{
    std::ostringstream out;
    write_csv_preamble(out, CsvContext{"cost", "0123456789abcdef", 9, {}});
    EXPECT_EQ(out.str(), "# seirgame-csv v1 kind=cost digest=0123456789abcdef seed=9\n");
    EXPECT_EQ(format_number(0.1), "0.1");
    EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333333333");
}

TEST(Csv, PathsHaveOneRowPerPathNodeRegion)
{
    const PathBatch batch = simulate(testing::northeast(), PolicyProfile::constant(3, 0.1, 180.0),
                                     testing::northeast_start(), TimeGrid{180.0, 4}, 5, 1);
    std::ostringstream out;
    write_paths_csv(out, batch, CsvContext{"paths", "d", 1, {"NY", "NJ", "PA"}});
    std::istringstream lines(out.str());
    std::string line;
    int rows = 0;
    while (std::getline(lines, line)) {
        ++rows;
    }
    EXPECT_EQ(rows, 2 + 5 * 5 * 3);
}

TEST(Checkpoint, RoundTripPreservesNetworks)
{
    const ModelParams p = testing::northeast();
    SolverConfig config;
    config.width = 6;
    config.hidden_layers = 1;
    Checkpoint ckpt;
    ckpt.state = initial_stage_state(p, config);
    ckpt.state.stage = 4;
    ckpt.state.players[1].value_opt.step = 12;
    ckpt.config_digest = "feedfacecafebeef";
    ckpt.seed = 99;
    ckpt.horizon = 180.0;
    const Checkpoint back = checkpoint_from_json(nlohmann::json::parse(checkpoint_json(ckpt).dump()));
    EXPECT_EQ(back.state.stage, 4);
    EXPECT_EQ(back.config_digest, ckpt.config_digest);
    EXPECT_EQ(back.seed, 99u);
    EXPECT_EQ(back.state.players[1].value_opt.step, 12);
    for (int n = 0; n < 3; ++n) {
        EXPECT_EQ(back.state.players[n].value.parameters(), ckpt.state.players[n].value.parameters());
        EXPECT_EQ(back.state.players[n].policy.parameters(), ckpt.state.players[n].policy.parameters());
        EXPECT_EQ(back.state.players[n].policy.head(), OutputHead::logistic);
    }
    const PolicyProfile profile = back.profile();
    EXPECT_EQ(profile.stage, 4);
    EXPECT_EQ(profile.size(), 3);
}

TEST(Checkpoint, RejectsUnknownVersion)
{
    const ModelParams p = testing::northeast();
    SolverConfig config;
    config.width = 4;
    config.hidden_layers = 1;
    Checkpoint ckpt;
    ckpt.state = initial_stage_state(p, config);
    nlohmann::ordered_json node = checkpoint_json(ckpt);
    node["version"] = 999;
    EXPECT_ANY_THROW(checkpoint_from_json(nlohmann::json::parse(node.dump())));
}

} // namespace
} // namespace seirgame
