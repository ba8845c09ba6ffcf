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

// Enhanced deep fictitious play.
//
// Each player owns one value network V^n(t,x) and one policy network
// l^n(t,x). A stage freezes every policy network, then for each player runs
// SGD on the deep-BSDE loss
//
//     E[ |Y_T|^2 + tau sum_k |alpha_k - policy(t_k, X_k)|^2 dt ]
//
// along the reduced forward process X driven by the frozen policies of the
// other players. Y_0 = V(0, X_0), Z_k = Sigma(X_k)^T grad_x V(t_k, X_k) and
// alpha_k is the closed-form best response at Z_k. Networks are warm-started
// from the previous stage; only the latest policy networks are ever consulted,
// so the work per stage does not grow with the stage index.
//
// Value networks are trained in a per-player money unit (see money_unit) so
// that their outputs stay O(1); best responses are invariant to this scaling.

#include "core/model.hpp"
#include "core/neural.hpp"
#include "core/policy.hpp"
#include "core/sde.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace seirgame
{

struct SolverConfig {
    int stages = 250;
    int sgd_per_stage = 100;
    int batch = 256;
    int time_steps = 40;
    double learning_rate = 5e-4;
    double tau = 1e-3 / 180.0; ///< policy-matching weight, taken literally (1/day)
    double convergence_threshold = 1e-4; ///< 0 disables early stopping
    std::uint64_t seed = 1;
    int validation_paths = 256;
    int probe_points = 512;
    int width = 40;
    int hidden_layers = 3;
    double x0_box = 0.0; ///< >0: per-path x0 jittered uniformly by +-x0_box
    bool zero_init = false; ///< start from all-zero parameters instead of Glorot
    int workers = 1;
    double divergence_factor = 1e3;
    int divergence_patience = 3;

    void validate() const;
};

struct PlayerNets {
    Mlp value;
    Mlp policy;
    OptimizerState value_opt;
    OptimizerState policy_opt;
};

struct StageState {
    int stage = 0; ///< last completed stage
    std::vector<PlayerNets> players;

    int retained_network_count() const { return 2 * static_cast<int>(players.size()); }
    PolicyProfile profile(double horizon) const;
};

/// Fresh networks for every player (stage 0).
StageState initial_stage_state(const ModelParams& params, const SolverConfig& config);

/// Population times horizon times productivity (population times horizon
/// when w = 0).
double money_unit(int n, const ModelParams& params);
/// Player n's cost of inaction (all lockdowns zero) along the noise-free
/// Euler path from x0.
double inaction_cost(int n, const ModelParams& params, const VectorXd& x0, int steps);
/// Cost unit of player n's value network: the larger of the two above, so
/// the value at x0 starts out of order one.
double money_unit(int n, const ModelParams& params, const VectorXd& x0, int steps);
/// Model with every cost divided by `unit`.
ModelParams with_money_unit(const ModelParams& params, double unit);
/// with_money_unit(params, money_unit(n, params)).
ModelParams player_params(int n, const ModelParams& params);

/// One batch of stage-BSDE trajectories for player n. Matrices over
/// (step, path) use one column per path; Y has steps+1 columns per path row.
struct Rollout {
    std::vector<MatrixXd> states; ///< 3N x B per node, nodes 0..steps
    std::vector<MatrixXd> z;      ///< 2N x B per step
    MatrixXd y;                   ///< B x (steps+1)
    MatrixXd alpha;               ///< steps x B, best responses
    MatrixXd alpha_tilde;         ///< steps x B, policy network
    std::vector<char> flagged;    ///< per path: non-finite Y or Z

    VectorXd terminal() const { return y.col(y.cols() - 1); }
    bool any_flagged() const;
};

/// `scaled` is the model in player n's money unit; `others` supplies the frozen policies
/// of the other players; `initial` holds one start state per column.
Rollout rollout(int n, const PlayerNets& nets, const PolicyProfile& others, const ModelParams& scaled,
                const IncrementArray& increments, const MatrixXd& initial, const TimeGrid& grid);

double stage_loss(const Rollout& rollout, double tau, double dt);

/// Loss of one batch and its exact gradients with respect to both networks.
struct BatchGradients {
    double loss = 0.0;
    bool finite = true;
    VectorXd value_grad;
    VectorXd policy_grad;
};

BatchGradients batch_gradients(int n, const PlayerNets& nets, const PolicyProfile& others,
                               const ModelParams& scaled, const IncrementArray& increments,
                               const MatrixXd& initial, const TimeGrid& grid, double tau);

struct StageTrainingReport {
    std::vector<double> losses; ///< one per SGD step (NaN for skipped steps)
    int skipped_steps = 0;
    bool diverged = false;
    std::vector<std::string> incidents;
};

StageTrainingReport train_stage(int n, int stage, PlayerNets& nets, const PolicyProfile& others,
                                const ModelParams& params, const VectorXd& x0,
                                const SolverConfig& config);

double validation_loss(int n, int stage, const PlayerNets& nets, const PolicyProfile& others,
                       const ModelParams& params, const VectorXd& x0, const SolverConfig& config);

/// Probe points (t, x) sampled once per run: times in column 0 of the
/// returned pair's first member, states as columns of the second.
struct ProbeSet {
    VectorXd times;
    MatrixXd states;
};

ProbeSet make_probe_set(const ModelParams& params, const SolverConfig& config);

/// max over players of the relative L2 change of policy and value outputs
/// on the probe set; the denominator is floored at 1e-8.
double convergence_metric(const std::vector<const Mlp*>& prev_values,
                          const std::vector<const Mlp*>& prev_policies,
                          const std::vector<const Mlp*>& new_values,
                          const std::vector<const Mlp*>& new_policies, const ProbeSet& probe,
                          double horizon);

struct StageRecord {
    int stage = 0;
    int player = 0;
    double train_loss_mean = 0.0;
    double validation_loss = 0.0;
    double convergence_metric = 0.0;
    double wall_time = 0.0; ///< seconds spent on this player's stage
};

struct SolverDiagnostics {
    std::vector<StageRecord> records;
    std::vector<std::string> incidents;
    std::vector<double> stage_wall_times;
    std::vector<double> stage_cpu_times; ///< process CPU seconds per stage
    long peak_live_networks = 0;
    int retained_networks = 0;
    bool early_stopped = false;
    bool aborted = false;
    std::string abort_reason;
};

struct SolverCallbacks {
    /// Called after every completed stage.
    std::function<void(const StageState&, const std::vector<StageRecord>&)> on_stage;
    std::function<void(const std::string&)> log;
};

struct SolverResult {
    PolicyProfile profile;
    StageState state;
    SolverDiagnostics diagnostics;
};

/// Runs config.stages stages starting after `start.stage` (pass
/// initial_stage_state for a fresh run).
SolverResult run_solver(const SolverConfig& config, const ModelParams& params, const VectorXd& x0,
                        StageState start, const SolverCallbacks& callbacks = {});

SolverResult run_solver(const SolverConfig& config, const ModelParams& params, const VectorXd& x0,
                        const SolverCallbacks& callbacks = {});

} // namespace seirgame
