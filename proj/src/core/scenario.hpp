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
#pragma once

// Scenario files (YAML).
//
//   extends: base.yaml          # optional, resolved relative to this file
//   name: ny-nj-pa
//   regions:    { names: [..], populations: [..] }
//   travel:     { matrix: [[..], ..] }  or  { home_fraction: 0.9 }
//               allow_outside: false
//   epidemic:   calibration: { r0, infectious_days, ifr, latent_days }
//               or explicit beta, gamma, lambda, kappa (beta_matrix optional)
//               theta, sigma_s, sigma_e (scalar or per region), vaccination
//   cost:       { w, chi, p, c, a, r, eta, horizon }
//   grid:       { steps }
//   initial:    { s: [..], e: [..], i: [..] }   # optional
//   solver:     SolverConfig fields plus checkpoint_every
//   evaluation: { paths, seed, threshold, nash_tolerance }
//
// Mappings from `extends` are merged key by key; sequences and scalars in
// the child replace the parent's.

#include "core/model.hpp"
#include "core/sde.hpp"
#include "core/solver.hpp"

#include <yaml-cpp/yaml.h>

#include <optional>
#include <string>
#include <vector>

namespace seirgame
{

struct EvaluationSettings {
    int paths = 256;
    std::uint64_t seed = 2;
    double threshold = 0.5;
    double nash_tolerance = 0.01;
};

struct Scenario {
    std::string name;
    ModelParams params;
    TimeGrid grid;
    std::optional<VectorXd> initial;
    SolverConfig solver;
    int checkpoint_every = 10;
    EvaluationSettings evaluation;
    std::vector<std::string> warnings;

    YAML::Node tree; ///< merged document after overrides
    std::string digest; ///< over the sections that define the game
};

/// Reads a file, following `extends` chains.
YAML::Node load_scenario_tree(const std::string& path);
YAML::Node parse_scenario_tree(const std::string& text);

/// Deep merge: mappings merge recursively, everything else is replaced.
YAML::Node merge_trees(const YAML::Node& base, const YAML::Node& overlay);

/// Sets a dotted key ("cost.a") to a scalar given as YAML text.
void set_tree_value(YAML::Node& tree, const std::string& dotted_key, const std::string& yaml_value);

/// Builds and validates a scenario. Throws ModelError naming the field.
Scenario resolve_scenario(const YAML::Node& tree);
Scenario load_scenario(const std::string& path);

/// FNV-1a 64 over the canonical JSON of the regions, travel, epidemic,
/// cost, grid and initial sections (keys sorted, numbers normalized).
std::string scenario_digest(const YAML::Node& tree);
std::string canonical_json(const YAML::Node& node);
std::uint64_t fnv1a64(const std::string& bytes);

/// Resolved parameter document: explicit rates and the expanded beta
/// matrix in place of calibration inputs.
YAML::Node resolved_tree(const Scenario& scenario);
std::string emit_yaml(const YAML::Node& node);

} // namespace seirgame
