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
#include "core/sde.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

namespace seirgame
{
namespace
{

using testing::northeast;
using testing::northeast_start;
using testing::seir;
using testing::single_region;

TEST(Simulate, DeterministicSingleStep)
{
    const ModelParams p = single_region(0.0);
    const TimeGrid grid{4.5, 1};
    const PathBatch batch =
        simulate(p, PolicyProfile::constant(1, 0.0, 4.5), seir(0.99, 0.0, 0.01), grid, 2, 1);
    EXPECT_EQ(batch.s(0, 1, 0), 0.99 - 0.17 * 0.99 * 0.01 * 4.5);
    EXPECT_EQ(batch.s(1, 1, 0), batch.s(0, 1, 0));
    EXPECT_NEAR(batch.e(0, 1, 0), 1.683e-3 * 4.5, 1e-17);
    EXPECT_NEAR(batch.r(0, 1, 0), 0.01 / 13.0 * 4.5, 1e-17);
}

TEST(Simulate, DiseaseFreeStateIsAbsorbing)
{
    ModelParams p = northeast();
    p.epi.sigma_s.setZero();
    VectorXd x0 = VectorXd::Zero(9);
    x0.head(3).setConstant(1.0);
    const PathBatch batch =
        simulate(p, PolicyProfile::constant(3, 0.3, 180.0), x0, TimeGrid{}, 8, 5);
    for (int path = 0; path < 8; ++path) {
        for (int k = 0; k < batch.nodes(); ++k) {
            for (int n = 0; n < 3; ++n) {
                ASSERT_EQ(batch.s(path, k, n), 1.0);
                ASSERT_EQ(batch.e(path, k, n), 0.0);
                ASSERT_EQ(batch.i(path, k, n), 0.0);
            }
        }
    }
}

TEST(Simulate, ConservationAndMonotoneRemoved)
{
    const ModelParams p = northeast();
    const PathBatch batch =
        simulate(p, PolicyProfile::constant(3, 0.2, 180.0), northeast_start(), TimeGrid{}, 500, 9);
    ASSERT_EQ(batch.failed_count(), 0);
    double worst = 0.0;
    for (int path = 0; path < batch.paths; ++path) {
        for (int k = 0; k < batch.nodes(); ++k) {
            for (int n = 0; n < 3; ++n) {
                const double total =
                    batch.s(path, k, n) + batch.e(path, k, n) + batch.i(path, k, n) + batch.r(path, k, n);
                worst = std::max(worst, std::abs(total - 1.0));
                if (k > 0) {
                    ASSERT_GE(batch.r(path, k, n), batch.r(path, k - 1, n));
                }
            }
        }
    }
    EXPECT_LE(worst, 1e-10);
}

TEST(Simulate, SameSeedIsBitwiseIdentical)
{
    const ModelParams p = northeast();
    const PolicyProfile profile = PolicyProfile::constant(3, 0.5, 180.0);
    const PathBatch a = simulate(p, profile, northeast_start(), TimeGrid{}, 32, 77);
    const PathBatch b = simulate(p, profile, northeast_start(), TimeGrid{}, 32, 77);
    EXPECT_EQ(a.states, b.states);
    EXPECT_EQ(a.total_cost, b.total_cost);
}

TEST(Simulate, CostIsLeftEndpointQuadrature)
{
    const ModelParams p = single_region(0.0);
    const TimeGrid grid{180.0, 2};
    const PathBatch batch =
        simulate(p, PolicyProfile::constant(1, 0.4, 180.0), seir(0.95, 0.03, 0.02), grid, 1, 1);
    double expected = 0.0;
    for (int k = 0; k < 2; ++k) {
        const VectorXd x = seir(batch.s(0, k, 0), batch.e(0, k, 0), batch.i(0, k, 0));
        expected += running_cost(0, grid.node(k), x, 0.4, 0.0, p) * grid.dt();
    }
    EXPECT_NEAR(batch.cost(0, 0) / expected - 1.0, 0.0, 1e-14);
}

TEST(SimulateReduced, SingleRegionDropsOwnLockdown)
{
    const ModelParams p = single_region(0.0);
    const TimeGrid grid{4.5, 1};
    const PathBatch batch = simulate_reduced(0, p, PolicyProfile::constant(1, 0.9, 4.5), grid, 1, 1,
                                             seir(0.99, 0.0, 0.01));
    EXPECT_EQ(batch.s(0, 1, 0), 0.99 - 0.17 * 0.99 * 0.01 * 4.5);
}

TEST(SimulateReduced, ConstantWithoutInfection)
{
    ModelParams p = northeast();
    p.epi.sigma_s.setZero();
    p.epi.sigma_e.setZero();
    VectorXd x0 = VectorXd::Zero(9);
    x0.head(3) << 0.9, 0.95, 0.99;
    const PathBatch batch =
        simulate_reduced(1, p, PolicyProfile::constant(3, 0.5, 180.0), TimeGrid{}, 2, 3, x0);
    for (int k = 0; k < batch.nodes(); ++k) {
        for (int c = 0; c < 9; ++c) {
            ASSERT_EQ(batch.state(1, k, c), x0[c]);
        }
    }
}

TEST(SimulateReduced, StepUsesReducedDrift)
{
    ModelParams p = northeast();
    p.epi.sigma_s.setZero();
    p.epi.sigma_e.setZero();
    const VectorXd x0 = northeast_start();
    const PolicyProfile others = PolicyProfile::constant(3, 0.35, 180.0);
    const TimeGrid grid{180.0, 40};
    const PathBatch batch = simulate_reduced(2, p, others, grid, 1, 3, x0);
    VectorXd ell = VectorXd::Constant(3, 0.35);
    ell[2] = 0.0;
    const VectorXd expected = x0 + reduced_drift(2, 0.0, x0, ell, p) * grid.dt();
    for (int c = 0; c < 9; ++c) {
        EXPECT_NEAR(batch.state(0, 1, c), expected[c], 1e-16);
    }
}

TEST(PathCache, RoundTrip)
{
    const ModelParams p = northeast();
    const PathBatch batch = simulate(p, PolicyProfile::constant(3, 0.1, 180.0), northeast_start(),
                                     TimeGrid{180.0, 8}, 5, 4);
    std::stringstream buffer;
    write_path_cache(buffer, batch);
    const PathBatch back = read_path_cache(buffer);
    EXPECT_EQ(back.states, batch.states);
    EXPECT_EQ(back.increments.values, batch.increments.values);
    EXPECT_EQ(back.total_cost, batch.total_cost);
    EXPECT_EQ(back.seed, batch.seed);
}

TEST(PathCache, RejectsForeignBytes)
{
    std::stringstream buffer("not a cache file at all");
    EXPECT_ANY_THROW(read_path_cache(buffer));
}

} // namespace
} // namespace seirgame
