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

// Euler-Maruyama simulation of the joint SEIR system and of the per-player
// reduced forward process used by the stage BSDE. Policies are evaluated at
// the left end of each step.

#include "core/model.hpp"
#include "core/policy.hpp"
#include "core/rng.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace seirgame
{

struct TimeGrid {
    double horizon = 180.0;
    int steps = 40;

    double dt() const { return horizon / steps; }
    double node(int k) const { return horizon * k / steps; }
    void validate() const;
};

/// Simulated ensemble. Per-node arrays are laid out [path][node][component].
struct PathBatch {
    int paths = 0;
    int steps = 0;
    int regions = 0;
    double horizon = 0.0;
    std::uint64_t seed = 0;
    StreamId stream;

    std::vector<double> states;        ///< 3N per node, nodes 0..steps
    IncrementArray increments;         ///< 2N per step
    std::vector<double> lockdown;      ///< N per node (policy at each node)
    std::vector<double> removed;       ///< N per node, R accumulated step by step
    std::vector<double> stepwise_cost; ///< N per node, f^n dt (zero at the last node)
    std::vector<double> total_cost;    ///< N per path, left-endpoint quadrature of J^n
    std::vector<char> failed;          ///< per path: non-finite state met

    int nodes() const { return steps + 1; }
    double dt() const { return horizon / steps; }
    double time(int k) const { return horizon * k / steps; }

    double state(int path, int node, int component) const
    {
        return states[(static_cast<std::size_t>(path) * nodes() + node) * 3 * regions + component];
    }
    double s(int path, int node, int n) const { return state(path, node, n); }
    double e(int path, int node, int n) const { return state(path, node, regions + n); }
    double i(int path, int node, int n) const { return state(path, node, 2 * regions + n); }
    double r(int path, int node, int n) const { return at(removed, path, node, n); }
    double ell(int path, int node, int n) const { return at(lockdown, path, node, n); }
    double cost_step(int path, int node, int n) const { return at(stepwise_cost, path, node, n); }
    double cost(int path, int n) const
    {
        return total_cost[static_cast<std::size_t>(path) * regions + n];
    }

    /// All 3N states of one node, one column per path.
    MatrixXd node_states(int node) const;
    int failed_count() const;

private:
    double at(const std::vector<double>& v, int path, int node, int n) const
    {
        return v[(static_cast<std::size_t>(path) * nodes() + node) * regions + n];
    }
};

/// Full dynamics under a joint profile. Increments come from
/// (seed, stream); identical arguments give bitwise identical batches.
PathBatch simulate(const ModelParams& params, const PolicyProfile& profile, const VectorXd& x0,
                   const TimeGrid& grid, int paths, std::uint64_t seed,
                   const StreamId& stream = StreamId{});

/// Player n's reduced forward process: drift mu^n (own lockdown removed),
/// the other players following `others`.
PathBatch simulate_reduced(int n, const ModelParams& params, const PolicyProfile& others,
                           const TimeGrid& grid, int paths, std::uint64_t seed, const VectorXd& x0,
                           const StreamId& stream = StreamId{});

/// Reduced-process states in solver layout: states[k] is 3N x B for nodes
/// k = 0..steps; others[k] is N x B (row n zero) for k = 0..steps-1.
/// `initial` holds one starting state per column.
struct ReducedPaths {
    std::vector<MatrixXd> states;
    std::vector<MatrixXd> others;
    std::vector<char> failed;
};

ReducedPaths reduced_paths(int n, const ModelParams& params, const PolicyProfile& others,
                           const TimeGrid& grid, const MatrixXd& initial,
                           const IncrementArray& increments);

// Versioned binary cache (little-endian):
//   char[8] "SGPATHS\0", u32 version (=1), u32 regions, u32 paths, u32 steps,
//   f64 horizon, u64 seed, i32 stream.player, i32 stream.stage,
//   u32 stream.purpose, u32 stream.step,
//   then f64 arrays states, increments, lockdown, removed, stepwise_cost,
//   total_cost and u8 failed, each in PathBatch layout.
inline constexpr std::uint32_t kPathCacheVersion = 1;
void write_path_cache(std::ostream& out, const PathBatch& batch);
PathBatch read_path_cache(std::istream& in);

} // namespace seirgame
