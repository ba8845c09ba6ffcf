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
#include "core/verify.hpp"

#include "core/hamiltonian.hpp"
#include "core/model.hpp"
#include "core/neural.hpp"
#include "core/rng.hpp"
#include "core/sde.hpp"
#include "core/solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace seirgame
{

namespace
{

class Draws
{
public:
    Draws(std::uint64_t seed, std::uint32_t salt)
        : rng_(seed, StreamId{-1, 0, StreamPurpose::test, salt})
    {
    }
    double uniform(double lo, double hi) { return lo + (hi - lo) * rng_.uniform(index_++); }
    double normal() { return rng_.normal(index_++); }
    int integer(int lo, int hi) // inclusive
    {
        return std::min(hi, lo + static_cast<int>(uniform(0.0, 1.0) * (hi - lo + 1)));
    }

private:
    CounterRng rng_;
    std::uint64_t index_ = 0;
};

CheckResult make(const std::string& suite, const std::string& check, double measured,
                 double tolerance, const std::string& detail = {})
{
    CheckResult r;
    r.suite = suite;
    r.check = check;
    r.measured = measured;
    r.tolerance = tolerance;
    r.passed = std::isfinite(measured) && measured <= tolerance;
    r.detail = detail;
    return r;
}

double relative(double a, double b)
{
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

ModelParams case_study(double a, double theta)
{
    ModelParams p;
    p.regions.names = {"NY", "NJ", "PA"};
    p.regions.populations = {19.54e6, 8.91e6, 12.81e6};
    p.travel.fractions = MatrixXd::Constant(3, 3, 0.05);
    p.travel.fractions.diagonal().setConstant(0.9);
    const Calibration c = calibrate(2.2, 13.0, 0.0065, 5.0);
    p.epi.beta = c.beta;
    p.epi.gamma = c.gamma;
    p.epi.lambda = c.lambda;
    p.epi.kappa = c.kappa;
    p.epi.theta = theta;
    p.epi.beta_matrix = build_transmission_matrix(c.beta, p.travel, p.regions);
    p.epi.sigma_s = VectorXd::Constant(3, 2e-4);
    p.epi.sigma_e = VectorXd::Constant(3, 2e-4);
    p.cost = {172.6, 1.95e6, 228.7e-5, 73300.0 / 13.0, a, 0.0, 0.0, 180.0};
    return p;
}

/// Random model in money units (costs O(1)), with N in [1,4].
ModelParams random_model(Draws& d)
{
    const int n = d.integer(1, 4);
    ModelParams p;
    for (int j = 0; j < n; ++j) {
        p.regions.names.push_back("r" + std::to_string(j));
        p.regions.populations.push_back(d.uniform(1e6, 2e7));
    }
    const double home = d.uniform(0.8, 0.97);
    p.travel.fractions = MatrixXd::Constant(n, n, n > 1 ? (1.0 - home) / (n - 1) : 0.0);
    p.travel.fractions.diagonal().setConstant(n > 1 ? home : 1.0);
    p.epi.beta = d.uniform(0.1, 0.4);
    p.epi.beta_matrix = build_transmission_matrix(p.epi.beta, p.travel, p.regions);
    p.epi.gamma = d.uniform(0.1, 0.3);
    p.epi.lambda = d.uniform(0.05, 0.1);
    p.epi.kappa = d.uniform(1e-4, 1e-3);
    p.epi.theta = d.uniform(0.5, 1.0);
    p.epi.sigma_s = VectorXd::NullaryExpr(n, [&] { return d.uniform(1e-4, 1e-2); });
    p.epi.sigma_e = VectorXd::NullaryExpr(n, [&] { return d.uniform(1e-4, 1e-2); });
    p.epi.vaccination = d.uniform(0.0, 1e-3);
    p.cost = {172.6, 1.95e6, 228.7e-5, 73300.0 / 13.0, d.uniform(1.0, 100.0),
              d.uniform(0.0, 1e-3), 0.0, 180.0};
    return player_params(d.integer(0, n - 1), p);
}

VectorXd random_state(Draws& d, int n, double min_infected)
{
    VectorXd x(3 * n);
    for (int j = 0; j < n; ++j) {
        const double i = d.uniform(min_infected, 0.3);
        const double e = d.uniform(0.0, 0.2);
        const double s = d.uniform(0.05, 1.0 - i - e);
        x[j] = s;
        x[n + j] = e;
        x[2 * n + j] = i;
    }
    return x;
}

// Gradient with the sign convention of a cost-to-go: exposed states cost
// more than susceptible ones in most draws, but both signs occur.
VectorXd random_gradient(Draws& d, int n)
{
    VectorXd p(3 * n);
    for (int j = 0; j < n; ++j) {
        p[j] = d.uniform(-5.0, 5.0);
        p[n + j] = p[j] + d.uniform(-10.0, 50.0);
        p[2 * n + j] = p[n + j] + d.uniform(-10.0, 50.0);
    }
    return p;
}

VectorXd random_lockdown(Draws& d, int n)
{
    return VectorXd::NullaryExpr(n, [&] { return d.uniform(0.0, 1.0); });
}

std::vector<CheckResult> suite_beta_matrix()
{
    const ModelParams p = case_study(100.0, 0.99);
    const MatrixXd computed = build_transmission_matrix(p.epi.beta, p.travel, p.regions);
    const double beta = 2.2 / 13.0;
    const double pop[3] = {19.54e6, 8.91e6, 12.81e6};
    double worst = 0.0;
    for (int n = 0; n < 3; ++n) {
        for (int k = 0; k < 3; ++k) {
            const double expected = n == k ? beta * 0.9 * 0.9
                                           : beta * (0.05 * 0.9 + 0.05 * 0.9) * pop[k] / pop[n];
            worst = std::max(worst, relative(computed(n, k), expected));
        }
    }
    std::ostringstream detail;
    detail.precision(10);
    detail << "beta11=" << computed(0, 0) << " beta12=" << computed(0, 1);
    return {make("beta-matrix", "hand arithmetic, 3x3", worst, 1e-12, detail.str()),
            make("beta-matrix", "beta11 = 0.1370769", std::abs(computed(0, 0) - 0.1370769), 5e-8),
            make("beta-matrix", "beta12 = 6.9450e-3", std::abs(computed(0, 1) - 6.9450e-3), 5e-8)};
}

std::vector<CheckResult> suite_calibration()
{
    const Calibration c = calibrate(2.2, 13.0, 0.0065, 5.0);
    return {make("calibration", "gamma = 0.2", std::abs(c.gamma - 0.2), 1e-15),
            make("calibration", "lambda = 1/13", std::abs(c.lambda - 1.0 / 13.0), 1e-15),
            make("calibration", "kappa = 0.0005", std::abs(c.kappa - 0.0005), 1e-15),
            make("calibration", "beta = 2.2/13", std::abs(c.beta - 2.2 / 13.0), 1e-15)};
}

std::vector<CheckResult> suite_conservation(const VerifyOptions& options)
{
    const ModelParams p = case_study(100.0, 0.99);
    VectorXd x0(9);
    x0 << 0.98, 0.985, 0.99, 0.01, 0.008, 0.005, 0.01, 0.007, 0.005;
    const TimeGrid grid{180.0, 40};
    const PolicyProfile profile = PolicyProfile::constant(3, 0.3, grid.horizon);
    const PathBatch batch = simulate(p, profile, x0, grid, 10000, options.seed);
    double worst = 0.0;
    bool removed_monotone = true;
    for (int path = 0; path < batch.paths; ++path) {
        for (int k = 0; k <= batch.steps; ++k) {
            for (int n = 0; n < 3; ++n) {
                const double total =
                    batch.s(path, k, n) + batch.e(path, k, n) + batch.i(path, k, n) + batch.r(path, k, n);
                worst = std::max(worst, std::abs(total - 1.0));
                if (k > 0 && batch.r(path, k, n) < batch.r(path, k - 1, n)) {
                    removed_monotone = false;
                }
            }
        }
    }
    return {make("conservation", "max |S+E+I+R-1| over 1e4 paths", worst, 1e-10),
            make("conservation", "R non-decreasing", removed_monotone ? 0.0 : 1.0, 0.0)};
}

std::vector<CheckResult> suite_best_response(const VerifyOptions& options)
{
    Draws d(options.seed, 11);
    double worst_regular = 0.0;
    int regular = 0;
    int degenerate = 0;
    int degenerate_mismatch = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const ModelParams p = random_model(d);
        const int n_regions = p.regions_count();
        const int n = d.integer(0, n_regions - 1);
        const bool force_degenerate = trial % 5 == 0;
        VectorXd x = random_state(d, n_regions, 0.005);
        VectorXd grad = random_gradient(d, n_regions);
        if (force_degenerate) {
            // No own infections, or no penalty for exposure: A <= 0.
            if (trial % 10 == 0) {
                x[2 * n_regions + n] = 0.0;
            }
            else {
                grad[n_regions + n] = grad[n] - d.uniform(0.0, 5.0);
            }
        }
        const VectorXd others = random_lockdown(d, n_regions);
        const double t = d.uniform(0.0, p.cost.horizon);
        const GradientView view = GradientView::from_full(x, grad, p);
        const double closed = best_response(n, t, x, view, others, p);
        const ResponseCoefficients coeff =
            response_coefficients(n, t, x, view.z, others, p);
        if (2.0 * coeff.theta * coeff.a > kDegenerateCurvature) {
            ++regular;
            const double oracle = grid_argmin_oracle(n, t, x, grad, others, p, 1e-3, 2);
            worst_regular = std::max(worst_regular, std::abs(closed - oracle));
        }
        else {
            ++degenerate;
            const double oracle = grid_argmin_oracle(n, t, x, grad, others, p, 1.0);
            if (closed != oracle) {
                ++degenerate_mismatch;
            }
        }
    }
    std::ostringstream detail;
    detail << regular << " regular, " << degenerate << " degenerate instances";
    return {make("best-response", "|closed form - grid argmin| (regular)", worst_regular, 1e-4,
                 detail.str()),
            make("best-response", "endpoint mismatches (degenerate)", degenerate_mismatch, 0.0,
                 detail.str())};
}

std::vector<CheckResult> suite_splitting(const VerifyOptions& options)
{
    Draws d(options.seed, 12);
    const bool flip = options.fault == "mu-sign";
    double worst = 0.0;
    for (int trial = 0; trial < 500; ++trial) {
        const ModelParams p = random_model(d);
        const int n_regions = p.regions_count();
        const int n = d.integer(0, n_regions - 1);
        const VectorXd x = random_state(d, n_regions, 0.0);
        const VectorXd grad = random_gradient(d, n_regions);
        VectorXd lockdown = random_lockdown(d, n_regions);
        const double t = d.uniform(0.0, p.cost.horizon);
        const GradientView view = GradientView::from_full(x, grad, p);
        lockdown[n] = best_response(n, t, x, view, lockdown, p);
        const double lhs = hamiltonian_value(n, t, x, lockdown, grad, p);
        VectorXd mu = reduced_drift(n, t, x, lockdown, p);
        if (flip) {
            mu = -mu;
        }
        const double transport = mu.dot(grad);
        const double driver = bsde_driver(n, t, x, view.z, lockdown, p);
        const double scale = std::abs(transport) + std::abs(driver);
        const double err = scale == 0.0 ? std::abs(lhs) : std::abs(lhs - transport - driver) / scale;
        worst = std::max(worst, err);
    }
    return {make("splitting", "min H = mu.grad V + g, 500 instances", worst, 1e-8,
                 flip ? "fault mu-sign injected" : "")};
}

// Central differences of a scalar function of a parameter vector.
VectorXd central_difference(const std::function<double(const VectorXd&)>& f, VectorXd at,
                            double h)
{
    VectorXd out(at.size());
    for (Eigen::Index k = 0; k < at.size(); ++k) {
        const double keep = at[k];
        at[k] = keep + h;
        const double up = f(at);
        at[k] = keep - h;
        const double down = f(at);
        at[k] = keep;
        out[k] = (up - down) / (2.0 * h);
    }
    return out;
}

double vector_error(const VectorXd& a, const VectorXd& b)
{
    return (a - b).norm() / std::max(b.norm(), 1e-10);
}

std::vector<CheckResult> suite_gradients(const VerifyOptions& options)
{
    Draws d(options.seed, 13);
    double worst_input = 0.0;
    double worst_param = 0.0;
    double worst_second = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const int regions = d.integer(1, 3);
        const int width = d.integer(3, 8);
        const OutputHead head = trial % 2 == 0 ? OutputHead::identity : OutputHead::logistic;
        const std::vector<int> dims{1 + 3 * regions, width, width, 1};
        const Mlp net = Mlp::glorot(dims, head, options.seed,
                                    StreamId{-1, trial, StreamPurpose::test, 99});
        const int batch = 3;
        MatrixXd inputs(dims.front(), batch);
        for (Eigen::Index k = 0; k < inputs.size(); ++k) {
            inputs.data()[k] = d.uniform(0.0, 1.0);
        }

        // Input gradient of one sample.
        const MatrixXd grads = net.input_gradient(inputs);
        const VectorXd fd_input = central_difference(
            [&](const VectorXd& v) { return net.forward(v); }, inputs.col(0), 1e-5);
        worst_input = std::max(worst_input, vector_error(grads.col(0), fd_input));

        // Parameter gradient of sum u_b out_b + c_b . grad_in out_b.
        const RowVectorXd u = RowVectorXd::NullaryExpr(batch, [&] { return d.normal(); });
        MatrixXd c(dims.front(), batch);
        for (Eigen::Index k = 0; k < c.size(); ++k) {
            c.data()[k] = d.normal();
        }
        Mlp probe = net;
        auto objective = [&](const VectorXd& params, bool with_second) {
            probe.set_parameters(params);
            double total = u.dot(probe.forward(inputs));
            if (with_second) {
                total += (c.array() * probe.input_gradient(inputs).array()).sum();
            }
            return total;
        };
        const MlpTape tape = net.record(inputs);
        const VectorXd first = net.param_gradient(tape, u);
        const VectorXd second = net.param_gradient(tape, u, &c);
        worst_param = std::max(
            worst_param,
            vector_error(first, central_difference([&](const VectorXd& v) { return objective(v, false); },
                                                   net.parameters(), 1e-6)));
        worst_second = std::max(
            worst_second,
            vector_error(second, central_difference([&](const VectorXd& v) { return objective(v, true); },
                                                    net.parameters(), 1e-6)));
    }

    // The full stage loss, whose Z path runs through Sigma^T grad V.
    double worst_bsde = 0.0;
    for (int trial = 0; trial < 4; ++trial) {
        const ModelParams p = random_model(d);
        const int regions = p.regions_count();
        const int n = d.integer(0, regions - 1);
        const std::vector<int> dims{1 + 3 * regions, 6, 6, 1};
        PlayerNets nets;
        nets.value = Mlp::glorot(dims, OutputHead::identity, options.seed,
                                 StreamId{n, trial, StreamPurpose::test, 7});
        nets.policy = Mlp::glorot(dims, OutputHead::logistic, options.seed,
                                  StreamId{n, trial, StreamPurpose::test, 8});
        // Scale up the value net so Z is not negligible next to the driver.
        nets.value.parameters() *= 3.0;
        PolicyProfile others;
        others.horizon = p.cost.horizon;
        for (int j = 0; j < regions; ++j) {
            others.players.push_back(PlayerPolicy::network(Mlp::glorot(
                dims, OutputHead::logistic, options.seed, StreamId{j, trial, StreamPurpose::test, 9})));
        }
        const TimeGrid grid{p.cost.horizon, 3};
        const IncrementArray inc = brownian_increments(
            options.seed, StreamId{n, trial, StreamPurpose::test, 10}, 4, grid.steps, 2 * regions, grid.dt());
        const MatrixXd initial = random_state(d, regions, 0.01).replicate(1, 4);
        const double tau = 0.5;
        const BatchGradients g = batch_gradients(n, nets, others, p, inc, initial, grid, tau);
        PlayerNets work = nets;
        auto value_loss = [&](const VectorXd& v) {
            work.value.set_parameters(v);
            return stage_loss(rollout(n, work, others, p, inc, initial, grid), tau, grid.dt());
        };
        const VectorXd fd_value = central_difference(value_loss, nets.value.parameters(), 1e-6);
        work = nets;
        auto policy_loss = [&](const VectorXd& v) {
            work.policy.set_parameters(v);
            return stage_loss(rollout(n, work, others, p, inc, initial, grid), tau, grid.dt());
        };
        // The policy enters only through a small penalty, so roundoff needs a wider step.
        const VectorXd fd_policy = central_difference(policy_loss, nets.policy.parameters(), 1e-5);
        worst_bsde = std::max({worst_bsde, vector_error(g.value_grad, fd_value),
                               vector_error(g.policy_grad, fd_policy)});
    }

    return {make("gradients", "input gradient vs central differences", worst_input, 1e-6),
            make("gradients", "parameter gradient vs central differences", worst_param, 1e-5),
            make("gradients", "second-order parameter gradient", worst_second, 1e-4),
            make("gradients", "stage-loss gradient through Sigma^T grad V", worst_bsde, 1e-4)};
}

std::vector<CheckResult> suite_degenerate_solver(const VerifyOptions& options)
{
    ModelParams p = case_study(0.0, 0.99);
    p.cost.w = 0.0;
    p.cost.eta = 0.0;
    VectorXd x0(9);
    x0 << 0.98, 0.98, 0.98, 0.01, 0.01, 0.01, 0.01, 0.01, 0.01;
    SolverConfig config;
    config.stages = 1;
    config.sgd_per_stage = 200;
    config.batch = 64;
    config.learning_rate = 0.2;
    config.zero_init = true;
    config.seed = options.seed;
    config.convergence_threshold = 0.0;
    const SolverResult result = run_solver(config, p, x0);
    double worst_loss = 0.0;
    for (const StageRecord& r : result.diagnostics.records) {
        worst_loss = std::max(worst_loss, r.validation_loss);
    }
    double worst_value = 0.0;
    for (const PlayerNets& nets : result.state.players) {
        VectorXd input(x0.size() + 1);
        input << 0.0, x0;
        worst_value = std::max(worst_value, std::abs(nets.value.forward(input)));
    }
    return {make("degenerate-solver", "stage loss after one stage", worst_loss, 1e-6),
            make("degenerate-solver", "|V(0,x0)| after one stage", worst_value, 1e-3)};
}

using SuiteFn = std::function<std::vector<CheckResult>(const VerifyOptions&)>;

const std::vector<std::pair<SuiteInfo, SuiteFn>>& registry()
{
    static const std::vector<std::pair<SuiteInfo, SuiteFn>> suites = {
        {{"beta-matrix", "transmission matrix of the NY-NJ-PA case vs hand arithmetic"},
         [](const VerifyOptions&) { return suite_beta_matrix(); }},
        {{"calibration", "rates derived from R0, infectious period, IFR and latent period"},
         [](const VerifyOptions&) { return suite_calibration(); }},
        {{"conservation", "S+E+I+R = 1 along 1e4 simulated paths"}, suite_conservation},
        {{"best-response", "closed-form lockdown vs brute-force grid argmin, 1000 instances"},
         suite_best_response},
        {{"splitting", "minimized Hamiltonian = reduced transport + driver, 500 instances"},
         suite_splitting},
        {{"gradients", "network and stage-loss derivatives vs central differences"},
         suite_gradients},
        {{"degenerate-solver", "zero-cost game trains to V = 0 within one stage"},
         suite_degenerate_solver},
    };
    return suites;
}

} // namespace

const std::vector<SuiteInfo>& verification_suites()
{
    static const std::vector<SuiteInfo> infos = [] {
        std::vector<SuiteInfo> out;
        for (const auto& entry : registry()) {
            out.push_back(entry.first);
        }
        return out;
    }();
    return infos;
}

std::vector<std::string> known_faults()
{
    return {"mu-sign"};
}

std::vector<CheckResult> run_verification(const std::string& suite, const VerifyOptions& options)
{
    if (!options.fault.empty()) {
        const auto faults = known_faults();
        if (std::find(faults.begin(), faults.end(), options.fault) == faults.end()) {
            throw std::invalid_argument("unknown fault: " + options.fault);
        }
    }
    std::vector<CheckResult> out;
    bool found = false;
    for (const auto& [info, fn] : registry()) {
        if (suite == "all" || suite == info.name) {
            found = true;
            for (CheckResult& r : fn(options)) {
                out.push_back(std::move(r));
            }
        }
    }
    if (!found) {
        throw std::invalid_argument("unknown suite: " + suite);
    }
    return out;
}

} // namespace seirgame
