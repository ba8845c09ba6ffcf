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
#include "core/hamiltonian.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace seirgame
{
namespace
{

using testing::northeast;
using testing::seir;
using testing::single_region;

VectorXd vec3(double a, double b, double c) { return seir(a, b, c); }

struct RandomInstance {
    VectorXd x;
    VectorXd grad;
    VectorXd others;
};

RandomInstance draw(std::mt19937_64& gen, int regions)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> g(0.0, 1.0);
    RandomInstance r;
    r.x.resize(3 * regions);
    r.grad.resize(3 * regions);
    r.others.resize(regions);
    for (int n = 0; n < regions; ++n) {
        const double s = 0.3 + 0.69 * u(gen);
        const double e = (1.0 - s) * 0.5 * u(gen);
        const double i = (1.0 - s - e) * (0.05 + 0.9 * u(gen));
        r.x[n] = s;
        r.x[regions + n] = e;
        r.x[2 * regions + n] = i;
        r.grad[n] = g(gen);
        r.grad[regions + n] = r.grad[n] + std::abs(g(gen)) * 0.5;
        r.grad[2 * regions + n] = r.grad[regions + n] + g(gen) * 0.5;
        r.others[n] = u(gen);
    }
    return r;
}

/// Model whose costs are O(1) so the lockdown trade-off is interior.
ModelParams scaled_northeast()
{
    ModelParams p = northeast();
    p.cost = p.cost.in_money_unit(19.54e6 * 172.6 * 180.0);
    return p;
}

TEST(HamiltonianValue, ZeroGradientNoInfectionNoLockdown)
{
    const ModelParams p = single_region();
    EXPECT_EQ(hamiltonian_value(0, 0.0, vec3(0.9, 0.1, 0.0), VectorXd::Zero(1), VectorXd::Zero(3), p),
              0.0);
}

TEST(HamiltonianValue, SingleRegionHandCase)
{
    const ModelParams p = single_region();
    const VectorXd x = vec3(0.99, 0.0, 0.01);
    const double expected = -1.683e-3 * 1.0 + 1.683e-3 * 2.0 - 0.01 / 13.0 * 3.0 +
                            running_cost(0, 0.0, x, 0.0, 0.0, p);
    EXPECT_NEAR(hamiltonian_value(0, 0.0, x, VectorXd::Zero(1), vec3(1, 2, 3), p), expected,
                1e-9 * std::abs(expected));
}

TEST(HamiltonianValue, QuadraticLeadingCoefficient)
{
    const ModelParams p = scaled_northeast();
    std::mt19937_64 gen(5);
    const RandomInstance r = draw(gen, 3);
    const int n = 1;
    auto h = [&](double ell) {
        VectorXd all = r.others;
        all[n] = ell;
        return hamiltonian_value(n, 0.0, r.x, all, r.grad, p);
    };
    const double second = (h(0.0) - 2.0 * h(0.5) + h(1.0)) / (2.0 * 0.25);
    const double d = r.grad[3 + n] - r.grad[n];
    const double expected = p.epi.theta * p.epi.theta * p.epi.beta_matrix(n, n) * r.x[n] * r.x[6 + n] * d;
    EXPECT_NEAR(second / expected, 1.0, 1e-7);
}

TEST(BestResponse, NoInfectionMeansNoLockdown)
{
    const ModelParams p = scaled_northeast();
    VectorXd x = VectorXd::Zero(9);
    x.head(3).setConstant(0.9);
    x.segment(3, 3).setConstant(0.05);
    const VectorXd grad = VectorXd::LinSpaced(9, 1.0, 9.0);
    EXPECT_EQ(best_response(0, 0.0, x, GradientView::from_full(x, grad, p), VectorXd::Zero(3), p), 0.0);
}

TEST(BestResponse, FreeLockdownIsFull)
{
    ModelParams p = scaled_northeast();
    p.cost.w = 0.0;
    std::mt19937_64 gen(9);
    for (int trial = 0; trial < 50; ++trial) {
        const RandomInstance r = draw(gen, 3);
        const double ell = best_response(trial % 3, 0.0, r.x, GradientView::from_full(r.x, r.grad, p),
                                         r.others, p);
        EXPECT_EQ(ell, 1.0) << trial;
    }
}

TEST(BestResponse, InteriorMinimumMatchesConstruction)
{
    ModelParams p = single_region();
    p.regions.populations = {1.0};
    p.epi.theta = 1.0;
    p.cost.a = 0.0;
    // A = beta s i D = 0.017 and W = 0.8 w, so 1 - W / (2A) = 0.37.
    p.cost.w = 0.63 * 0.034 / 0.8;
    const VectorXd x = vec3(0.5, 0.1, 0.2);
    const VectorXd grad = vec3(0.0, 1.0, 0.0);
    const double closed = best_response(0, 0.0, x, GradientView::from_full(x, grad, p), VectorXd::Zero(1), p);
    EXPECT_NEAR(closed, 0.37, 1e-12);
    EXPECT_NEAR(grid_argmin_oracle(0, 0.0, x, grad, VectorXd::Zero(1), p, 1e-3), 0.37, 1e-3);
}

TEST(GridOracle, FlatHamiltonianTiesToZero)
{
    ModelParams p = single_region();
    p.cost.w = 0.0;
    EXPECT_EQ(grid_argmin_oracle(0, 0.0, vec3(0.9, 0.1, 0.0), vec3(1, 2, 3), VectorXd::Zero(1), p, 1e-2),
              0.0);
}

TEST(BestResponse, MatchesGridOracleOnRandomInstances)
{
    const ModelParams p = scaled_northeast();
    std::mt19937_64 gen(17);
    for (int trial = 0; trial < 200; ++trial) {
        const RandomInstance r = draw(gen, 3);
        const int n = trial % 3;
        const double closed =
            best_response(n, 0.0, r.x, GradientView::from_full(r.x, r.grad, p), r.others, p);
        ASSERT_GE(closed, 0.0);
        ASSERT_LE(closed, 1.0);
        const double grid = grid_argmin_oracle(n, 0.0, r.x, r.grad, r.others, p, 1e-3, 2);
        EXPECT_NEAR(closed, grid, 1e-4) << "trial " << trial;
    }
}

TEST(BestResponse, GradientAndZViewsAgree)
{
    const ModelParams p = scaled_northeast();
    std::mt19937_64 gen(23);
    const RandomInstance r = draw(gen, 3);
    const GradientView full = GradientView::from_full(r.x, r.grad, p);
    const GradientView from_z = GradientView::from_z(diffusion_transpose_apply(r.x, r.grad, p));
    EXPECT_NEAR(best_response(0, 0.0, r.x, full, r.others, p),
                best_response(0, 0.0, r.x, from_z, r.others, p), 1e-9);
}

TEST(ReducedDrift, SingleRegionFormula)
{
    const ModelParams p = single_region();
    const VectorXd x = vec3(0.8, 0.1, 0.05);
    const VectorXd mu = reduced_drift(0, 0.0, x, VectorXd::Zero(1), p);
    const double flux = 0.17 * 0.8 * 0.05;
    EXPECT_NEAR(mu[0], -flux, 1e-17);
    EXPECT_NEAR(mu[1], flux - 0.2 * 0.1, 1e-17);
    EXPECT_NEAR(mu[2], 0.2 * 0.1 - 0.05 / 13.0, 1e-17);
}

TEST(ReducedDrift, NoInfectionLeavesProgression)
{
    const ModelParams p = northeast();
    VectorXd x = VectorXd::Zero(9);
    x.head(3).setConstant(0.9);
    x.segment(3, 3) << 0.01, 0.02, 0.03;
    const VectorXd mu = reduced_drift(1, 0.0, x, VectorXd::Constant(3, 0.5), p);
    for (int n = 0; n < 3; ++n) {
        EXPECT_EQ(mu[n], 0.0);
        EXPECT_NEAR(mu[3 + n], -0.2 * x[3 + n], 1e-17);
        EXPECT_NEAR(mu[6 + n], 0.2 * x[3 + n], 1e-17);
    }
}

TEST(BsdeDriver, VanishesWithoutInfection)
{
    const ModelParams p = northeast();
    VectorXd x = VectorXd::Zero(9);
    x.head(3).setConstant(0.95);
    EXPECT_EQ(bsde_driver(0, 0.0, x, VectorXd::Zero(6), VectorXd::Zero(3), p), 0.0);
}

TEST(BsdeDriver, ZeroSensitivityLeavesHealthCost)
{
    const ModelParams p = northeast();
    const VectorXd x = testing::northeast_start();
    const double i = 0.01;
    const double expected = 19.54e6 * 100.0 * (5e-4 * i * 1.95e6 + 228.7e-5 * i * 73300.0 / 13.0);
    EXPECT_NEAR(bsde_driver(0, 0.0, x, VectorXd::Zero(6), VectorXd::Zero(3), p) / expected, 1.0,
                1e-12);
}

TEST(SplittingIdentity, MinimumEqualsReducedDriftPlusDriver)
{
    const ModelParams p = scaled_northeast();
    std::mt19937_64 gen(31);
    for (int trial = 0; trial < 100; ++trial) {
        const RandomInstance r = draw(gen, 3);
        const int n = trial % 3;
        const double ell =
            best_response(n, 0.0, r.x, GradientView::from_full(r.x, r.grad, p), r.others, p);
        VectorXd all = r.others;
        all[n] = ell;
        const double h = hamiltonian_value(n, 0.0, r.x, all, r.grad, p);
        VectorXd others = r.others;
        others[n] = 0.0;
        const double split = reduced_drift(n, 0.0, r.x, others, p).dot(r.grad) +
                             bsde_driver(n, 0.0, r.x, diffusion_transpose_apply(r.x, r.grad, p), others, p);
        EXPECT_NEAR(split, h, 1e-8 * std::max(1.0, std::abs(h))) << "trial " << trial;
    }
}

TEST(DriverEvaluation, SensitivityMatchesFiniteDifferences)
{
    const ModelParams p = scaled_northeast();
    std::mt19937_64 gen(41);
    const RandomInstance r = draw(gen, 3);
    const VectorXd z = diffusion_transpose_apply(r.x, r.grad, p);
    const DriverEvaluation ev = evaluate_driver(2, 0.0, r.x, z, r.others, p);
    for (int k = 0; k < z.size(); ++k) {
        const double h = 1e-4 * std::abs(z[k]) + 1e-12;
        VectorXd up = z;
        VectorXd down = z;
        up[k] += h;
        down[k] -= h;
        const double fd = (bsde_driver(2, 0.0, r.x, up, r.others, p) -
                           bsde_driver(2, 0.0, r.x, down, r.others, p)) /
                          (2.0 * h);
        EXPECT_NEAR(ev.dg_dz[k], fd, 1e-6 * std::max(1.0, std::abs(fd))) << k;
    }
}

} // namespace
} // namespace seirgame
