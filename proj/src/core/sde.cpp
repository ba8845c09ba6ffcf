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
#include "core/sde.hpp"

#include "core/hamiltonian.hpp"

#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace seirgame
{

void TimeGrid::validate() const
{
    if (steps <= 0 || !(horizon > 0.0)) {
        throw ModelError("grid", "need a positive horizon and step count");
    }
}

MatrixXd PathBatch::node_states(int node) const
{
    const int dim = 3 * regions;
    MatrixXd out(dim, paths);
    for (int p = 0; p < paths; ++p) {
        for (int c = 0; c < dim; ++c) {
            out(c, p) = state(p, node, c);
        }
    }
    return out;
}

int PathBatch::failed_count() const
{
    int count = 0;
    for (char f : failed) {
        count += f != 0;
    }
    return count;
}

namespace
{

void check_initial(const VectorXd& x0, const ModelParams& params)
{
    if (x0.size() != params.state_dim()) {
        throw ModelError("initial", "initial state must have length 3N");
    }
    const auto problems = StateVector(x0).check();
    if (!problems.empty()) {
        throw ModelError("initial", problems.front());
    }
}

PathBatch allocate(const ModelParams& params, const TimeGrid& grid, int paths,
                   std::uint64_t seed, const StreamId& stream)
{
    if (paths <= 0) {
        throw std::invalid_argument("simulate: need at least one path");
    }
    const int n = params.regions_count();
    PathBatch batch;
    batch.paths = paths;
    batch.steps = grid.steps;
    batch.regions = n;
    batch.horizon = grid.horizon;
    batch.seed = seed;
    batch.stream = stream;
    const std::size_t node_count = static_cast<std::size_t>(paths) * (grid.steps + 1);
    batch.states.assign(node_count * 3 * n, 0.0);
    batch.lockdown.assign(node_count * n, 0.0);
    batch.removed.assign(node_count * n, 0.0);
    batch.stepwise_cost.assign(node_count * n, 0.0);
    batch.total_cost.assign(static_cast<std::size_t>(paths) * n, 0.0);
    batch.failed.assign(paths, 0);
    batch.increments = brownian_increments(seed, stream, paths, grid.steps, 2 * n, grid.dt());
    return batch;
}

// Shared Euler-Maruyama loop. With `reduced_player` >= 0 the drift is the
// reduced drift of that player and no costs are accumulated.
PathBatch run(const ModelParams& params, const PolicyProfile& profile, const VectorXd& x0,
              const TimeGrid& grid, int paths, std::uint64_t seed, const StreamId& stream,
              int reduced_player)
{
    params.validate();
    grid.validate();
    check_initial(x0, params);
    if (profile.size() != params.regions_count()) {
        throw ModelError("profile", "one policy per region required");
    }
    PathBatch batch = allocate(params, grid, paths, seed, stream);
    const int n = params.regions_count();
    const int dim = 3 * n;
    const double dt = grid.dt();

    MatrixXd x = x0.replicate(1, paths);
    MatrixXd removed(n, paths);
    for (int j = 0; j < n; ++j) {
        removed.row(j).setConstant(1.0 - x0[j] - x0[n + j] - x0[2 * n + j]);
    }

    for (int k = 0; k <= grid.steps; ++k) {
        const double t = grid.node(k);
        MatrixXd lockdown = profile.evaluate(t, x);
        if (reduced_player >= 0) {
            lockdown.row(reduced_player).setZero();
        }
        for (int p = 0; p < paths; ++p) {
            const std::size_t node = static_cast<std::size_t>(p) * (grid.steps + 1) + k;
            std::memcpy(&batch.states[node * dim], x.col(p).data(), sizeof(double) * dim);
            for (int j = 0; j < n; ++j) {
                batch.lockdown[node * n + j] = lockdown(j, p);
                batch.removed[node * n + j] = removed(j, p);
            }
        }
        if (k == grid.steps) {
            break;
        }
        for (int p = 0; p < paths; ++p) {
            if (batch.failed[p]) {
                continue;
            }
            const auto xp = x.col(p);
            const std::size_t node = static_cast<std::size_t>(p) * (grid.steps + 1) + k;
            if (reduced_player < 0) {
                for (int j = 0; j < n; ++j) {
                    const double step_cost = running_cost(j, t, xp, lockdown(j, p), 0.0, params) * dt;
                    batch.stepwise_cost[node * n + j] = step_cost;
                    batch.total_cost[static_cast<std::size_t>(p) * n + j] += step_cost;
                }
            }
            const Eigen::Map<const VectorXd> dW(batch.increments.at(p, k), 2 * n);
            const VectorXd b = reduced_player >= 0
                                   ? reduced_drift(reduced_player, t, xp, lockdown.col(p), params)
                                   : drift(t, xp, lockdown.col(p), params);
            const VectorXd next = xp + b * dt + diffusion_apply(xp, dW, params);
            if (!next.allFinite()) {
                batch.failed[p] = 1;
                continue;
            }
            for (int j = 0; j < n; ++j) {
                removed(j, p) +=
                    (params.epi.lambda * xp[2 * n + j] + params.epi.vaccination * xp[j]) * dt;
            }
            x.col(p) = next;
        }
    }
    return batch;
}

template <typename T>
void put(std::ostream& out, const T& value)
{
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in)
{
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) {
        throw std::runtime_error("path cache: truncated file");
    }
    return value;
}

void put_array(std::ostream& out, const std::vector<double>& values)
{
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(double)));
}

void get_array(std::istream& in, std::vector<double>& values, std::size_t count)
{
    values.resize(count);
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) {
        throw std::runtime_error("path cache: truncated file");
    }
}

constexpr char kPathCacheMagic[8] = {'S', 'G', 'P', 'A', 'T', 'H', 'S', '\0'};

} // namespace

PathBatch simulate(const ModelParams& params, const PolicyProfile& profile, const VectorXd& x0,
                   const TimeGrid& grid, int paths, std::uint64_t seed, const StreamId& stream)
{
    return run(params, profile, x0, grid, paths, seed, stream, -1);
}

PathBatch simulate_reduced(int n, const ModelParams& params, const PolicyProfile& others,
                           const TimeGrid& grid, int paths, std::uint64_t seed, const VectorXd& x0,
                           const StreamId& stream)
{
    if (n < 0 || n >= params.regions_count()) {
        throw std::out_of_range("simulate_reduced: player index out of range");
    }
    return run(params, others, x0, grid, paths, seed, stream, n);
}

ReducedPaths reduced_paths(int n, const ModelParams& params, const PolicyProfile& others,
                           const TimeGrid& grid, const MatrixXd& initial,
                           const IncrementArray& increments)
{
    const int regions = params.regions_count();
    const auto paths = static_cast<int>(initial.cols());
    if (increments.paths != paths || increments.steps != grid.steps ||
        increments.dim != 2 * regions) {
        throw std::invalid_argument("reduced_paths: increment array shape mismatch");
    }
    const double dt = grid.dt();
    ReducedPaths out;
    out.states.reserve(grid.steps + 1);
    out.others.reserve(grid.steps);
    out.failed.assign(paths, 0);
    out.states.push_back(initial);
    for (int k = 0; k < grid.steps; ++k) {
        const double t = grid.node(k);
        const MatrixXd& x = out.states.back();
        MatrixXd lockdown = others.evaluate(t, x);
        lockdown.row(n).setZero();
        MatrixXd next(x.rows(), paths);
        for (int p = 0; p < paths; ++p) {
            const Eigen::Map<const VectorXd> dW(increments.at(p, k), 2 * regions);
            next.col(p) = x.col(p) + reduced_drift(n, t, x.col(p), lockdown.col(p), params) * dt +
                          diffusion_apply(x.col(p), dW, params);
            if (!next.col(p).allFinite()) {
                out.failed[p] = 1;
                next.col(p) = x.col(p);
            }
        }
        out.others.push_back(std::move(lockdown));
        out.states.push_back(std::move(next));
    }
    return out;
}

void write_path_cache(std::ostream& out, const PathBatch& batch)
{
    out.write(kPathCacheMagic, sizeof(kPathCacheMagic));
    put<std::uint32_t>(out, kPathCacheVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(batch.regions));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(batch.paths));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(batch.steps));
    put<double>(out, batch.horizon);
    put<std::uint64_t>(out, batch.seed);
    put<std::int32_t>(out, batch.stream.player);
    put<std::int32_t>(out, batch.stream.stage);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(batch.stream.purpose));
    put<std::uint32_t>(out, batch.stream.step);
    put_array(out, batch.states);
    put_array(out, batch.increments.values);
    put_array(out, batch.lockdown);
    put_array(out, batch.removed);
    put_array(out, batch.stepwise_cost);
    put_array(out, batch.total_cost);
    out.write(batch.failed.data(), static_cast<std::streamsize>(batch.failed.size()));
}

PathBatch read_path_cache(std::istream& in)
{
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kPathCacheMagic, sizeof(magic)) != 0) {
        throw std::runtime_error("path cache: bad magic");
    }
    const auto version = get<std::uint32_t>(in);
    if (version != kPathCacheVersion) {
        throw std::runtime_error("path cache: unsupported version " + std::to_string(version));
    }
    PathBatch batch;
    batch.regions = static_cast<int>(get<std::uint32_t>(in));
    batch.paths = static_cast<int>(get<std::uint32_t>(in));
    batch.steps = static_cast<int>(get<std::uint32_t>(in));
    batch.horizon = get<double>(in);
    batch.seed = get<std::uint64_t>(in);
    batch.stream.player = get<std::int32_t>(in);
    batch.stream.stage = get<std::int32_t>(in);
    batch.stream.purpose = static_cast<StreamPurpose>(get<std::uint32_t>(in));
    batch.stream.step = get<std::uint32_t>(in);
    const std::size_t nodes = static_cast<std::size_t>(batch.paths) * (batch.steps + 1);
    const auto n = static_cast<std::size_t>(batch.regions);
    get_array(in, batch.states, nodes * 3 * n);
    batch.increments.paths = batch.paths;
    batch.increments.steps = batch.steps;
    batch.increments.dim = 2 * batch.regions;
    batch.increments.dt = batch.horizon / batch.steps;
    get_array(in, batch.increments.values,
              static_cast<std::size_t>(batch.paths) * batch.steps * 2 * n);
    get_array(in, batch.lockdown, nodes * n);
    get_array(in, batch.removed, nodes * n);
    get_array(in, batch.stepwise_cost, nodes * n);
    get_array(in, batch.total_cost, static_cast<std::size_t>(batch.paths) * n);
    batch.failed.resize(batch.paths);
    in.read(batch.failed.data(), batch.paths);
    if (!in) {
        throw std::runtime_error("path cache: truncated file");
    }
    return batch;
}

} // namespace seirgame
