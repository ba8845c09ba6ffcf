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
#include "core/solver.hpp"

#include "core/hamiltonian.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace seirgame
{

void SolverConfig::validate() const
{
    auto positive = [](int value, const char* name) {
        if (value <= 0) {
            throw ModelError(std::string("solver.") + name, "must be positive");
        }
    };
    positive(stages, "stages");
    positive(sgd_per_stage, "sgd_per_stage");
    positive(batch, "batch");
    positive(time_steps, "time_steps");
    positive(validation_paths, "validation_paths");
    positive(probe_points, "probe_points");
    positive(width, "width");
    positive(hidden_layers, "hidden_layers");
    positive(workers, "workers");
    positive(divergence_patience, "divergence_patience");
    if (!(learning_rate > 0.0)) {
        throw ModelError("solver.learning_rate", "must be positive");
    }
    if (!(tau >= 0.0)) {
        throw ModelError("solver.tau", "must be non-negative");
    }
    if (!(convergence_threshold >= 0.0)) {
        throw ModelError("solver.convergence_threshold", "must be non-negative");
    }
    if (!(x0_box >= 0.0)) {
        throw ModelError("solver.x0_box", "must be non-negative");
    }
    if (!(divergence_factor > 1.0)) {
        throw ModelError("solver.divergence_factor", "must exceed 1");
    }
}

PolicyProfile StageState::profile(double horizon) const
{
    PolicyProfile out;
    out.horizon = horizon;
    out.stage = stage;
    for (const PlayerNets& nets : players) {
        out.players.push_back(PlayerPolicy::network(nets.policy));
    }
    return out;
}

StageState initial_stage_state(const ModelParams& params, const SolverConfig& config)
{
    const int regions = params.regions_count();
    const std::vector<int> dims = default_layer_dims(regions, config.width, config.hidden_layers);
    StageState state;
    state.players.reserve(regions);
    for (int n = 0; n < regions; ++n) {
        PlayerNets nets;
        if (config.zero_init) {
            nets.value = Mlp(dims, OutputHead::identity);
            nets.policy = Mlp(dims, OutputHead::logistic);
        }
        else {
            nets.value = Mlp::glorot(dims, OutputHead::identity, config.seed,
                                     StreamId{n, 0, StreamPurpose::initialization, 0});
            nets.policy = Mlp::glorot(dims, OutputHead::logistic, config.seed,
                                      StreamId{n, 0, StreamPurpose::initialization, 1});
        }
        nets.value_opt = OptimizerState::for_parameters(nets.value.parameter_count(),
                                                        config.learning_rate);
        nets.policy_opt = OptimizerState::for_parameters(nets.policy.parameter_count(),
                                                         config.learning_rate);
        state.players.push_back(std::move(nets));
    }
    return state;
}

double money_unit(int n, const ModelParams& params)
{
    const double base = params.regions.populations.at(n) * params.cost.horizon;
    return params.cost.w > 0.0 ? base * params.cost.w : base;
}

double inaction_cost(int n, const ModelParams& params, const VectorXd& x0, int steps)
{
    const TimeGrid grid{params.cost.horizon, steps};
    const double dt = grid.dt();
    const VectorXd idle = VectorXd::Zero(params.regions_count());
    VectorXd x = x0;
    double total = 0.0;
    for (int k = 0; k < steps; ++k) {
        const double t = grid.node(k);
        total += running_cost(n, t, x, 0.0, 0.0, params) * dt;
        x += drift(t, x, idle, params) * dt;
    }
    return total;
}

double money_unit(int n, const ModelParams& params, const VectorXd& x0, int steps)
{
    const double inaction = inaction_cost(n, params, x0, steps);
    return std::max(money_unit(n, params), std::isfinite(inaction) ? inaction : 0.0);
}

ModelParams with_money_unit(const ModelParams& params, double unit)
{
    ModelParams scaled = params;
    scaled.cost = params.cost.in_money_unit(unit);
    return scaled;
}

ModelParams player_params(int n, const ModelParams& params)
{
    return with_money_unit(params, money_unit(n, params));
}

bool Rollout::any_flagged() const
{
    return std::any_of(flagged.begin(), flagged.end(), [](char f) { return f != 0; });
}

namespace
{

// Everything the forward pass produces; columns are ordered (step, path),
// i.e. column k * B + b.
struct Forward {
    int regions = 0;
    int paths = 0;
    int steps = 0;
    double dt = 0.0;
    ReducedPaths reduced;
    MatrixXd inputs;
    MlpTape value_tape;
    MlpTape policy_tape;
    MatrixXd z;            // 2N x KB
    RowVectorXd alpha;     // KB
    RowVectorXd alpha_tilde;
    MatrixXd dg_dz;        // 2N x KB
    MatrixXd dalpha_dz;    // 2N x KB
    MatrixXd y;            // B x (K+1)
    std::vector<char> flagged;
};

Forward forward_pass(int n, const PlayerNets& nets, const PolicyProfile& others,
                     const ModelParams& scaled, const IncrementArray& increments,
                     const MatrixXd& initial, const TimeGrid& grid)
{
    Forward f;
    f.regions = scaled.regions_count();
    f.paths = static_cast<int>(initial.cols());
    f.steps = grid.steps;
    f.dt = grid.dt();
    const int dim = 3 * f.regions;
    const int noise = 2 * f.regions;
    const int cols = f.paths * f.steps;

    f.reduced = reduced_paths(n, scaled, others, grid, initial, increments);

    f.inputs.resize(dim + 1, cols);
    for (int k = 0; k < f.steps; ++k) {
        f.inputs.block(0, k * f.paths, 1, f.paths).setConstant(grid.node(k) / grid.horizon);
        f.inputs.block(1, k * f.paths, dim, f.paths) = f.reduced.states[k];
    }
    f.value_tape = nets.value.record(f.inputs);
    f.policy_tape = nets.policy.record(f.inputs);
    const MatrixXd grad = nets.value.input_gradient(f.value_tape);
    f.alpha_tilde = f.policy_tape.output();

    f.z.resize(noise, cols);
    f.alpha.resize(cols);
    f.dg_dz.resize(noise, cols);
    f.dalpha_dz.resize(noise, cols);
    f.y.resize(f.paths, f.steps + 1);
    f.flagged = f.reduced.failed;

    const RowVectorXd values = f.value_tape.output();
    f.y.col(0) = values.head(f.paths).transpose();
    for (int k = 0; k < f.steps; ++k) {
        const double t = grid.node(k);
        for (int b = 0; b < f.paths; ++b) {
            const int c = k * f.paths + b;
            const auto x = f.reduced.states[k].col(b);
            f.z.col(c) = diffusion_transpose_apply(x, grad.col(c).tail(dim), scaled);
            const DriverEvaluation d =
                evaluate_driver(n, t, x, f.z.col(c), f.reduced.others[k].col(b), scaled);
            f.alpha[c] = d.lockdown;
            f.dg_dz.col(c) = d.dg_dz;
            f.dalpha_dz.col(c) = d.dlockdown_dz;
            const Eigen::Map<const VectorXd> dW(increments.at(b, k), noise);
            f.y(b, k + 1) = f.y(b, k) - d.g * f.dt + f.z.col(c).dot(dW);
            if (!std::isfinite(f.y(b, k + 1)) || !f.z.col(c).allFinite()) {
                f.flagged[b] = 1;
            }
        }
    }
    return f;
}

double forward_loss(const Forward& f, double tau)
{
    const VectorXd terminal = f.y.col(f.steps);
    const double mismatch = (f.alpha - f.alpha_tilde).squaredNorm();
    return terminal.squaredNorm() / f.paths + tau * mismatch * f.dt / f.paths;
}

void check_batch(const MatrixXd& initial, const IncrementArray& increments, const TimeGrid& grid,
                 const ModelParams& params)
{
    if (initial.rows() != params.state_dim() || initial.cols() == 0) {
        throw std::invalid_argument("rollout: initial states must be 3N x B");
    }
    if (increments.paths != initial.cols() || increments.steps != grid.steps ||
        increments.dim != params.noise_dim()) {
        throw std::invalid_argument("rollout: increment array does not match the batch");
    }
}

MatrixXd initial_batch(const VectorXd& x0, int paths, double box, std::uint64_t seed,
                       const StreamId& stream)
{
    MatrixXd initial = x0.replicate(1, paths);
    if (box <= 0.0) {
        return initial;
    }
    const CounterRng rng(seed, StreamId{stream.player, stream.stage,
                                        StreamPurpose::initialization,
                                        stream.step + 1000000u});
    const auto dim = static_cast<int>(x0.size());
    const int regions = dim / 3;
    std::uint64_t index = 0;
    for (int b = 0; b < paths; ++b) {
        for (int c = 0; c < dim; ++c) {
            const double u = rng.uniform(index++);
            initial(c, b) = std::clamp(x0[c] + box * (2.0 * u - 1.0), 0.0, 1.0);
        }
        for (int j = 0; j < regions; ++j) {
            const double total = initial(j, b) + initial(regions + j, b) + initial(2 * regions + j, b);
            if (total > 1.0) {
                initial(j, b) /= total;
                initial(regions + j, b) /= total;
                initial(2 * regions + j, b) /= total;
            }
        }
    }
    return initial;
}

std::string describe(int n, int stage, int step, const std::string& what)
{
    std::ostringstream out;
    out << "stage " << stage << " player " << n << " step " << step << ": " << what;
    return out.str();
}

} // namespace

Rollout rollout(int n, const PlayerNets& nets, const PolicyProfile& others, const ModelParams& scaled,
                const IncrementArray& increments, const MatrixXd& initial, const TimeGrid& grid)
{
    check_batch(initial, increments, grid, scaled);
    Forward f = forward_pass(n, nets, others, scaled, increments, initial, grid);
    Rollout out;
    out.states = std::move(f.reduced.states);
    out.z.reserve(f.steps);
    out.alpha.resize(f.steps, f.paths);
    out.alpha_tilde.resize(f.steps, f.paths);
    for (int k = 0; k < f.steps; ++k) {
        out.z.push_back(f.z.middleCols(k * f.paths, f.paths));
        out.alpha.row(k) = f.alpha.segment(k * f.paths, f.paths);
        out.alpha_tilde.row(k) = f.alpha_tilde.segment(k * f.paths, f.paths);
    }
    out.y = std::move(f.y);
    out.flagged = std::move(f.flagged);
    return out;
}

double stage_loss(const Rollout& rollout, double tau, double dt)
{
    const auto paths = static_cast<double>(rollout.y.rows());
    const VectorXd terminal = rollout.terminal();
    const double mismatch = (rollout.alpha - rollout.alpha_tilde).squaredNorm();
    return terminal.squaredNorm() / paths + tau * mismatch * dt / paths;
}

BatchGradients batch_gradients(int n, const PlayerNets& nets, const PolicyProfile& others,
                               const ModelParams& scaled, const IncrementArray& increments,
                               const MatrixXd& initial, const TimeGrid& grid, double tau)
{
    check_batch(initial, increments, grid, scaled);
    const Forward f = forward_pass(n, nets, others, scaled, increments, initial, grid);
    BatchGradients out;
    out.loss = forward_loss(f, tau);
    if (!std::isfinite(out.loss) ||
        std::any_of(f.flagged.begin(), f.flagged.end(), [](char c) { return c != 0; })) {
        out.finite = false;
        return out;
    }

    const int dim = 3 * f.regions;
    const int noise = 2 * f.regions;
    const int cols = f.paths * f.steps;
    const double inv_paths = 1.0 / f.paths;
    const VectorXd d_terminal = 2.0 * inv_paths * f.y.col(f.steps);
    const RowVectorXd d_match = 2.0 * tau * f.dt * inv_paths * (f.alpha - f.alpha_tilde);

    RowVectorXd d_value = RowVectorXd::Zero(cols);
    d_value.head(f.paths) = d_terminal.transpose();
    MatrixXd d_input = MatrixXd::Zero(dim + 1, cols);
    for (int k = 0; k < f.steps; ++k) {
        for (int b = 0; b < f.paths; ++b) {
            const int c = k * f.paths + b;
            const Eigen::Map<const VectorXd> dW(increments.at(b, k), noise);
            const VectorXd dz =
                d_terminal[b] * (dW - f.dt * f.dg_dz.col(c)) + d_match[c] * f.dalpha_dz.col(c);
            d_input.col(c).tail(dim) = diffusion_apply(f.reduced.states[k].col(b), dz, scaled);
        }
    }
    out.value_grad = nets.value.param_gradient(f.value_tape, d_value, &d_input);
    out.policy_grad = nets.policy.param_gradient(f.policy_tape, -d_match);
    out.finite = out.value_grad.allFinite() && out.policy_grad.allFinite();
    return out;
}

StageTrainingReport train_stage(int n, int stage, PlayerNets& nets, const PolicyProfile& others,
                                const ModelParams& params, const VectorXd& x0,
                                const SolverConfig& config)
{
    const ModelParams scaled =
        with_money_unit(params, money_unit(n, params, x0, config.time_steps));
    const TimeGrid grid{params.cost.horizon, config.time_steps};
    const int noise = params.noise_dim();

    StageTrainingReport report;
    report.losses.reserve(config.sgd_per_stage);
    nets.value_opt.learning_rate = config.learning_rate;
    nets.policy_opt.learning_rate = config.learning_rate;
    double initial_loss = std::numeric_limits<double>::quiet_NaN();

    for (int step = 0; step < config.sgd_per_stage; ++step) {
        const StreamId stream{n, stage, StreamPurpose::training, static_cast<std::uint32_t>(step)};
        const IncrementArray increments =
            brownian_increments(config.seed, stream, config.batch, grid.steps, noise, grid.dt());
        const MatrixXd initial = initial_batch(x0, config.batch, config.x0_box, config.seed, stream);
        const BatchGradients g =
            batch_gradients(n, nets, others, scaled, increments, initial, grid, config.tau);
        if (!g.finite) {
            report.losses.push_back(std::numeric_limits<double>::quiet_NaN());
            ++report.skipped_steps;
            report.incidents.push_back(
                describe(n, stage, step, "non-finite Y or Z, step skipped"));
            continue;
        }
        report.losses.push_back(g.loss);
        if (std::isnan(initial_loss)) {
            initial_loss = g.loss;
        }
        else if (!report.diverged && g.loss > config.divergence_factor * initial_loss) {
            report.diverged = true;
            nets.value_opt.learning_rate *= 0.5;
            nets.policy_opt.learning_rate *= 0.5;
            report.incidents.push_back(
                describe(n, stage, step, "loss exceeded the divergence bound, learning rate halved"));
        }
        optimizer_step(nets.value.parameters(), g.value_grad, nets.value_opt);
        optimizer_step(nets.policy.parameters(), g.policy_grad, nets.policy_opt);
    }
    nets.value_opt.learning_rate = config.learning_rate;
    nets.policy_opt.learning_rate = config.learning_rate;
    return report;
}

double validation_loss(int n, int stage, const PlayerNets& nets, const PolicyProfile& others,
                       const ModelParams& params, const VectorXd& x0, const SolverConfig& config)
{
    const ModelParams scaled =
        with_money_unit(params, money_unit(n, params, x0, config.time_steps));
    const TimeGrid grid{params.cost.horizon, config.time_steps};
    const StreamId stream{n, stage, StreamPurpose::validation, 0};
    const IncrementArray increments = brownian_increments(
        config.seed, stream, config.validation_paths, grid.steps, params.noise_dim(), grid.dt());
    const MatrixXd initial = x0.replicate(1, config.validation_paths);
    return stage_loss(rollout(n, nets, others, scaled, increments, initial, grid), config.tau,
                      grid.dt());
}

ProbeSet make_probe_set(const ModelParams& params, const SolverConfig& config)
{
    const int regions = params.regions_count();
    const CounterRng rng(config.seed, StreamId{-1, 0, StreamPurpose::probe_set, 0});
    ProbeSet probe;
    probe.times.resize(config.probe_points);
    probe.states.resize(3 * regions, config.probe_points);
    std::uint64_t index = 0;
    for (int p = 0; p < config.probe_points; ++p) {
        probe.times[p] = params.cost.horizon * rng.uniform(index++);
        for (int j = 0; j < regions; ++j) {
            double s = 0.0;
            double e = 0.0;
            double i = 0.0;
            do {
                s = rng.uniform(index++);
                e = rng.uniform(index++);
                i = rng.uniform(index++);
            } while (s + e + i > 1.0);
            probe.states(j, p) = s;
            probe.states(regions + j, p) = e;
            probe.states(2 * regions + j, p) = i;
        }
    }
    return probe;
}

double convergence_metric(const std::vector<const Mlp*>& prev_values,
                          const std::vector<const Mlp*>& prev_policies,
                          const std::vector<const Mlp*>& new_values,
                          const std::vector<const Mlp*>& new_policies, const ProbeSet& probe,
                          double horizon)
{
    if (prev_values.size() != new_values.size() || prev_policies.size() != new_policies.size()) {
        throw std::invalid_argument("convergence_metric: network sets differ in size");
    }
    const MatrixXd inputs = network_inputs(probe.times / horizon, probe.states);
    auto relative = [&](const Mlp* before, const Mlp* after) {
        const RowVectorXd old_out = before->forward(inputs);
        const RowVectorXd new_out = after->forward(inputs);
        return (new_out - old_out).norm() / std::max(old_out.norm(), 1e-8);
    };
    double metric = 0.0;
    for (std::size_t n = 0; n < prev_values.size(); ++n) {
        metric = std::max(metric, relative(prev_values[n], new_values[n]));
    }
    for (std::size_t n = 0; n < prev_policies.size(); ++n) {
        metric = std::max(metric, relative(prev_policies[n], new_policies[n]));
    }
    return metric;
}

SolverResult run_solver(const SolverConfig& config, const ModelParams& params, const VectorXd& x0,
                        StageState start, const SolverCallbacks& callbacks)
{
    using clock = std::chrono::steady_clock;
    config.validate();
    params.validate();
    if (!(params.epi.sigma_s.array() > 0.0).all()) {
        throw ModelError("epidemic.sigma_s", "the solver requires sigma_s > 0 in every region");
    }
    if (x0.size() != params.state_dim()) {
        throw ModelError("initial", "initial state must have length 3N");
    }
    if (const auto problems = StateVector(x0).check(); !problems.empty()) {
        throw ModelError("initial", problems.front());
    }
    const int regions = params.regions_count();
    if (static_cast<int>(start.players.size()) != regions) {
        throw std::invalid_argument("run_solver: start state has the wrong number of players");
    }
    auto log = [&](const std::string& line) {
        if (callbacks.log) {
            callbacks.log(line);
        }
    };

    SolverResult result;
    result.state = std::move(start);
    SolverDiagnostics& diag = result.diagnostics;
    const ProbeSet probe = make_probe_set(params, config);
    const double horizon = params.cost.horizon;
    std::vector<int> divergent_run(regions, 0);
    diag.peak_live_networks = Mlp::live_count();

    const int first = result.state.stage + 1;
    const int last = result.state.stage + config.stages;
    for (int stage = first; stage <= last; ++stage) {
        const auto stage_begin = clock::now();
        const std::clock_t cpu_begin = std::clock();
        // Frozen policies of the previous stage and the value nets they came
        // with; both are released at the end of the stage.
        const PolicyProfile frozen = result.state.profile(horizon);
        std::vector<Mlp> prev_values;
        prev_values.reserve(regions);
        for (const PlayerNets& nets : result.state.players) {
            prev_values.push_back(nets.value);
        }

        std::vector<StageTrainingReport> reports(regions);
        std::vector<double> validation(regions, 0.0);
        std::vector<double> seconds(regions, 0.0);
        auto work = [&](int n) {
            const auto begin = clock::now();
            reports[n] =
                train_stage(n, stage, result.state.players[n], frozen, params, x0, config);
            validation[n] =
                validation_loss(n, stage, result.state.players[n], frozen, params, x0, config);
            seconds[n] = std::chrono::duration<double>(clock::now() - begin).count();
        };
        const int workers = std::min(config.workers, regions);
        if (workers <= 1) {
            for (int n = 0; n < regions; ++n) {
                work(n);
            }
        }
        else {
            std::vector<std::thread> pool;
            std::vector<std::exception_ptr> errors(workers);
            for (int w = 0; w < workers; ++w) {
                pool.emplace_back([&, w] {
                    try {
                        for (int n = w; n < regions; n += workers) {
                            work(n);
                        }
                    }
                    catch (...) {
                        errors[w] = std::current_exception();
                    }
                });
            }
            for (auto& thread : pool) {
                thread.join();
            }
            for (const auto& error : errors) {
                if (error) {
                    std::rethrow_exception(error);
                }
            }
        }
        diag.peak_live_networks = std::max(diag.peak_live_networks, Mlp::live_count());

        std::vector<const Mlp*> old_values;
        std::vector<const Mlp*> old_policies;
        std::vector<const Mlp*> new_values;
        std::vector<const Mlp*> new_policies;
        for (int n = 0; n < regions; ++n) {
            old_values.push_back(&prev_values[n]);
            old_policies.push_back(&*frozen.players[n].net);
            new_values.push_back(&result.state.players[n].value);
            new_policies.push_back(&result.state.players[n].policy);
        }
        const double metric =
            convergence_metric(old_values, old_policies, new_values, new_policies, probe, horizon);
        result.state.stage = stage;

        std::vector<StageRecord> records;
        for (int n = 0; n < regions; ++n) {
            StageRecord record;
            record.stage = stage;
            record.player = n;
            double sum = 0.0;
            int count = 0;
            for (double loss : reports[n].losses) {
                if (std::isfinite(loss)) {
                    sum += loss;
                    ++count;
                }
            }
            record.train_loss_mean =
                count > 0 ? sum / count : std::numeric_limits<double>::quiet_NaN();
            record.validation_loss = validation[n];
            record.convergence_metric = metric;
            record.wall_time = seconds[n];
            records.push_back(record);
            for (const std::string& incident : reports[n].incidents) {
                diag.incidents.push_back(incident);
                log(incident);
            }
            divergent_run[n] = reports[n].diverged ? divergent_run[n] + 1 : 0;
        }
        diag.records.insert(diag.records.end(), records.begin(), records.end());
        diag.stage_wall_times.push_back(
            std::chrono::duration<double>(clock::now() - stage_begin).count());
        diag.stage_cpu_times.push_back(static_cast<double>(std::clock() - cpu_begin) /
                                       CLOCKS_PER_SEC);
        {
            std::ostringstream line;
            line << "stage " << stage << " metric " << metric;
            for (const StageRecord& record : records) {
                line << " | p" << record.player << " train " << record.train_loss_mean << " val "
                     << record.validation_loss;
            }
            log(line.str());
        }
        if (callbacks.on_stage) {
            callbacks.on_stage(result.state, records);
        }

        for (int n = 0; n < regions; ++n) {
            if (divergent_run[n] >= config.divergence_patience) {
                diag.aborted = true;
                diag.abort_reason = "player " + std::to_string(n) + " diverged in " +
                                    std::to_string(divergent_run[n]) + " consecutive stages";
                log(diag.abort_reason);
                break;
            }
        }
        if (diag.aborted) {
            break;
        }
        if (config.convergence_threshold > 0.0 && metric < config.convergence_threshold) {
            diag.early_stopped = true;
            log("converged at stage " + std::to_string(stage));
            break;
        }
    }
    diag.retained_networks = result.state.retained_network_count();
    result.profile = result.state.profile(horizon);
    result.profile.seed = config.seed;
    return result;
}

SolverResult run_solver(const SolverConfig& config, const ModelParams& params, const VectorXd& x0,
                        const SolverCallbacks& callbacks)
{
    return run_solver(config, params, x0, initial_stage_state(params, config), callbacks);
}

} // namespace seirgame
