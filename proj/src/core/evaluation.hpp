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

// Monte Carlo assessment of policy profiles.

#include "core/model.hpp"
#include "core/policy.hpp"
#include "core/sde.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace seirgame
{

struct CostReport {
    std::vector<double> mean;      ///< $ per player
    std::vector<double> std_error; ///< $ per player
    int paths = 0;
    int failed_paths = 0;
    std::uint64_t seed = 0;
};

/// Mean and standard error of the accumulated per-path costs. Failed paths
/// are excluded from the statistics but counted.
CostReport cost_report(const PathBatch& batch);

CostReport estimate_cost(const PolicyProfile& profile, const ModelParams& params,
                         const VectorXd& x0, const TimeGrid& grid, int paths, std::uint64_t seed);

struct Deviation {
    std::string label;
    PlayerPolicy policy;
};

/// Constant lockdowns 0, 0.1, ..., 1 followed by the player's own policy.
std::vector<Deviation> default_deviations(const PolicyProfile& profile, int n);

struct DeviationOutcome {
    std::string label;
    double cost = 0.0;
    double reduction = 0.0; ///< baseline cost minus deviation cost
    double std_error = 0.0; ///< of the paired difference
    bool within_tolerance = true;
};

struct ProbeReport {
    int player = 0;
    double baseline_cost = 0.0;
    double baseline_std_error = 0.0;
    double tolerance = 0.0; ///< absolute, $
    std::vector<DeviationOutcome> deviations;

    double max_reduction() const;
    /// Standard error attached to the largest reduction.
    double max_reduction_std_error() const;
    bool passes() const;
};

/// Unilateral deviations of player n with common random numbers: every run
/// reuses the increments of (seed, simulation stream). A deviation is
/// acceptable when its reduction is at most relative_tolerance * baseline
/// + 2 standard errors of the paired difference.
ProbeReport exploitability_probe(const PolicyProfile& profile, int n,
                                 const std::vector<Deviation>& alternatives,
                                 const ModelParams& params, const VectorXd& x0,
                                 const TimeGrid& grid, int paths, std::uint64_t seed,
                                 double relative_tolerance = 0.01);

/// Per-node mean and empirical quantile bands (linear interpolation between
/// order statistics).
struct SeriesBand {
    VectorXd mean;
    VectorXd lower95;
    VectorXd lower50;
    VectorXd upper50;
    VectorXd upper95;
};

struct RegionSummary {
    SeriesBand s;
    SeriesBand e;
    SeriesBand i;
    SeriesBand r;
    SeriesBand ell;
};

struct TrajectorySummary {
    VectorXd times;
    std::vector<RegionSummary> regions;
    int paths = 0; ///< paths that entered the statistics
};

double empirical_quantile(std::vector<double> values, double level);

TrajectorySummary summarize(const PathBatch& batch, int min_paths = 40);

enum class Outcome { controlled, out_of_control };
const char* to_string(Outcome outcome);

struct EquilibriumLabel {
    Outcome outcome = Outcome::controlled;
    std::vector<double> initial_s;
    std::vector<double> terminal_s; ///< mean over paths
    double threshold = 0.5;
};

/// Controlled iff mean terminal S is at least threshold * initial S in every
/// region.
EquilibriumLabel classify(const PathBatch& batch, double threshold = 0.5);

/// Average lockdown over paths and the left-endpoint nodes 0..N_T-1.
std::vector<double> mean_lockdown(const PathBatch& batch);

} // namespace seirgame
