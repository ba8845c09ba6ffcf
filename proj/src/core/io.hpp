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

// File formats.
//
// CSV files start with one comment line
//     # seirgame-csv v1 kind=<kind> digest=<config digest> seed=<seed>
// followed by a header row. Numbers are written with %.15g.
//
// Checkpoints are JSON with this exact field order:
//     format ("seirgame-checkpoint"), version (1), stage, config_digest,
//     seed, horizon, players[]
// and for each player:
//     player, value, policy, value_optimizer, policy_optimizer
// where a network is {head, dims, parameters} and an optimizer is
// {step, learning_rate, beta1, beta2, epsilon, first_moment, second_moment}.
// Parameters are flattened layer by layer, each weight matrix column-major
// followed by its bias.

#include "core/evaluation.hpp"
#include "core/sde.hpp"
#include "core/solver.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace seirgame
{

inline constexpr int kCsvVersion = 1;
inline constexpr int kCheckpointVersion = 1;

struct CsvContext {
    std::string kind;
    std::string digest;
    std::uint64_t seed = 0;
    std::vector<std::string> region_names;
};

std::string format_number(double value);

void write_csv_preamble(std::ostream& out, const CsvContext& ctx);

/// path_id, t, region, S, E, I, R, ell, stepwise_cost
void write_paths_csv(std::ostream& out, const PathBatch& batch, const CsvContext& ctx);
/// t, region, then mean/lo95/lo50/hi50/hi95 for S, E, I, R and ell.
void write_summary_csv(std::ostream& out, const TrajectorySummary& summary, const CsvContext& ctx);
/// player, mean_cost, stderr, B, seed
void write_cost_csv(std::ostream& out, const CostReport& report, const CsvContext& ctx);
/// player, deviation, cost, reduction, stderr, tolerance, within_tolerance
void write_probe_csv(std::ostream& out, const std::vector<ProbeReport>& reports,
                     const CsvContext& ctx);
/// region, initial_s, terminal_s, threshold, label
void write_classification_csv(std::ostream& out, const EquilibriumLabel& label,
                              const CsvContext& ctx);

/// stage, player, train_loss_mean, validation_loss, convergence_metric,
/// wall_time. Without `timing` the wall_time column is written as 0 so that
/// reruns are byte-identical.
void write_diagnostics_header(std::ostream& out, const CsvContext& ctx);
void write_diagnostics_rows(std::ostream& out, const std::vector<StageRecord>& records,
                            bool timing);

struct Checkpoint {
    StageState state;
    std::string config_digest;
    std::uint64_t seed = 0;
    double horizon = 0.0;

    PolicyProfile profile() const;
};

nlohmann::ordered_json network_json(const Mlp& net);
Mlp network_from_json(const nlohmann::json& node);

nlohmann::ordered_json checkpoint_json(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_json(const nlohmann::json& node);

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::string& path);

/// Writes text to `path` through a temporary file and a rename.
void write_file_atomically(const std::string& path, const std::string& contents);

} // namespace seirgame
