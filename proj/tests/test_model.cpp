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
#include "core/model.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace seirgame
{
namespace
{

using testing::northeast;
using testing::seir;
using testing::single_region;

TEST(Calibration, NortheastConstants)
{
    const Calibration c = calibrate(2.2, 13.0, 0.0065, 5.0);
    EXPECT_NEAR(c.beta, 0.169231, 5e-7);
    EXPECT_DOUBLE_EQ(c.lambda, 1.0 / 13.0);
    EXPECT_NEAR(c.kappa, 0.0005, 1e-16);
    EXPECT_DOUBLE_EQ(c.gamma, 0.2);
}

TEST(Calibration, PointEstimateFatality)
{
    EXPECT_NEAR(calibrate(2.2, 13.0, 0.0068, 5.0).kappa, 5.231e-4, 5e-8);
}

TEST(Calibration, RejectsNonPositiveDurations)
{
    EXPECT_THROW(calibrate(2.2, 0.0, 0.0065, 5.0), ModelError);
    EXPECT_THROW(calibrate(2.2, 13.0, 0.0065, -1.0), ModelError);
}

TEST(TransmissionMatrix, TwoEqualRegions)
{
    RegionSet regions{{"a", "b"}, {1e6, 1e6}};
    TravelMatrix travel;
    travel.fractions.resize(2, 2);
    travel.fractions << 0.9, 0.1, 0.1, 0.9;
    const MatrixXd m = build_transmission_matrix(1.0, travel, regions);
    EXPECT_NEAR(m(0, 0), 0.81, 1e-15);
    EXPECT_NEAR(m(0, 1), 0.18, 1e-15);
    EXPECT_NEAR(m(1, 0), 0.18, 1e-15);
}

TEST(TransmissionMatrix, NortheastEntries)
{
    const ModelParams p = northeast();
    const double beta = 2.2 / 13.0;
    const double pop[3] = {19.54, 8.91, 12.81};
    for (int n = 0; n < 3; ++n) {
        for (int k = 0; k < 3; ++k) {
            const double expected = n == k ? beta * 0.81 : beta * 0.09 * pop[k] / pop[n];
            EXPECT_NEAR(p.epi.beta_matrix(n, k) / expected - 1.0, 0.0, 1e-12) << n << "," << k;
        }
    }
    EXPECT_NEAR(p.epi.beta_matrix(0, 0), 0.1370769, 5e-8);
    EXPECT_NEAR(p.epi.beta_matrix(0, 1), 6.9450e-3, 5e-8);
}

TEST(TransmissionMatrix, DimensionMismatchThrows)
{
    RegionSet regions{{"a", "b"}, {1.0, 1.0}};
    TravelMatrix travel;
    travel.fractions = MatrixXd::Identity(3, 3);
    EXPECT_THROW(build_transmission_matrix(0.17, travel, regions), ModelError);
}

TEST(TravelMatrix, RowSumAboveOneNamesRow)
{
    TravelMatrix travel;
    travel.fractions.resize(2, 2);
    travel.fractions << 0.9, 0.1, 0.6, 0.6;
    try {
        travel.validate();
        FAIL() << "expected ModelError";
    }
    catch (const ModelError& e) {
        EXPECT_NE(std::string(e.what()).find("travel.matrix[1]"), std::string::npos) << e.what();
    }
}

TEST(Drift, SingleRegionHandCase)
{
    const ModelParams p = single_region();
    const VectorXd b = drift(0.0, seir(0.99, 0.0, 0.01), VectorXd::Zero(1), p);
    EXPECT_NEAR(b[0], -1.683e-3, 1e-15);
    EXPECT_NEAR(b[1], 1.683e-3, 1e-15);
    EXPECT_NEAR(b[2], -0.01 / 13.0, 1e-15);
}

TEST(Drift, NoInfectionNoFlux)
{
    const ModelParams p = northeast();
    VectorXd x(9);
    x << 0.9, 0.8, 0.7, 0.05, 0.02, 0.01, 0.0, 0.0, 0.0;
    const VectorXd b = drift(3.0, x, VectorXd::Constant(3, 0.4), p);
    for (int n = 0; n < 3; ++n) {
        EXPECT_EQ(b[n], 0.0);
        EXPECT_NEAR(b[3 + n], -0.2 * x[3 + n], 1e-16);
    }
}

TEST(Drift, FullLockdownWithPerfectEffectivenessStopsInfection)
{
    ModelParams p = northeast(100.0, 1.0);
    const VectorXd x = testing::northeast_start();
    const VectorXd b = drift(0.0, x, VectorXd::Ones(3), p);
    for (int n = 0; n < 3; ++n) {
        EXPECT_EQ(b[n], 0.0);
    }
}

TEST(Drift, ComponentsSumToRemovalFlux)
{
    ModelParams p = northeast();
    p.epi.vaccination = 0.01;
    VectorXd x(9);
    x << 0.7, 0.8, 0.9, 0.1, 0.05, 0.02, 0.08, 0.03, 0.01;
    VectorXd ell(3);
    ell << 0.2, 0.7, 0.0;
    const VectorXd b = drift(0.0, x, ell, p);
    double removal = 0.0;
    for (int n = 0; n < 3; ++n) {
        removal += p.epi.lambda * x[6 + n] + p.epi.vaccination * x[n];
    }
    EXPECT_NEAR(b.sum(), -removal, 1e-17);
}

TEST(Diffusion, SingleRegionExample)
{
    const ModelParams p = single_region(2e-4);
    VectorXd dw(2);
    dw << 1.0, 1.0;
    const VectorXd d = diffusion_apply(seir(0.5, 0.2, 0.1), dw, p);
    EXPECT_NEAR(d[0], -1e-4, 1e-18);
    EXPECT_NEAR(d[1], 1e-4 - 4e-5, 1e-18);
    EXPECT_NEAR(d[2], 4e-5, 1e-18);
}

TEST(Diffusion, ZeroNoiseIsZero)
{
    const ModelParams p = single_region(0.0);
    VectorXd dw(2);
    dw << 0.3, -1.2;
    EXPECT_EQ(diffusion_apply(seir(0.5, 0.2, 0.1), dw, p).norm(), 0.0);
}

TEST(Diffusion, ColumnsSumToZeroAndTransposeMatches)
{
    const ModelParams p = northeast();
    VectorXd x(9);
    x << 0.7, 0.8, 0.9, 0.1, 0.05, 0.02, 0.08, 0.03, 0.01;
    const MatrixXd sigma = diffusion_matrix(x, p);
    ASSERT_EQ(sigma.rows(), 9);
    ASSERT_EQ(sigma.cols(), 6);
    EXPECT_EQ(sigma.colwise().sum().cwiseAbs().maxCoeff(), 0.0);
    VectorXd dw(6);
    dw << 0.4, -1.1, 2.0, 0.3, -0.2, 0.9;
    EXPECT_NEAR((diffusion_apply(x, dw, p) - sigma * dw).norm(), 0.0, 1e-18);
    VectorXd q(9);
    q << 1, 2, 3, 4, 5, 6, 7, 8, 9;
    EXPECT_NEAR((diffusion_transpose_apply(x, q, p) - sigma.transpose() * q).norm(), 0.0, 1e-16);
}

TEST(RunningCost, NortheastHandValue)
{
    const ModelParams p = single_region();
    const double cost = running_cost(0, 0.0, seir(0.9, 0.09, 0.01), 0.5, 0.0, p);
    const double lockdown = 19.54e6 * 1.0 * 0.5 * 172.6;
    const double health = 19.54e6 * 100.0 * (5e-4 * 0.01 * 1.95e6 + 228.7e-5 * 0.01 * 73300.0 / 13.0);
    EXPECT_NEAR(cost / (lockdown + health) - 1.0, 0.0, 1e-14);
    EXPECT_NEAR(cost, 2.0990e10, 0.0001e10);
}

TEST(RunningCost, LinearInAttentionWeight)
{
    ModelParams p = single_region();
    const VectorXd x = seir(0.9, 0.05, 0.05);
    p.cost.w = 0.0;
    p.cost.a = 1.0;
    const double one = running_cost(0, 0.0, x, 0.3, 0.0, p);
    p.cost.a = 7.0;
    EXPECT_NEAR(running_cost(0, 0.0, x, 0.3, 0.0, p) / one, 7.0, 1e-14);
}

TEST(RunningCost, Discounting)
{
    ModelParams p = single_region();
    const VectorXd x = seir(0.9, 0.05, 0.05);
    const double undiscounted = running_cost(0, 10.0, x, 0.3, 0.0, p);
    p.cost.r = 0.01;
    EXPECT_NEAR(running_cost(0, 10.0, x, 0.3, 0.0, p) / undiscounted, std::exp(-0.1), 1e-14);
}

TEST(RecoveredSeries, Reconstruction)
{
    MatrixXd states(3, 2);
    states << 0.9, 1.0, 0.05, 0.0, 0.03, 0.0;
    const MatrixXd r = recovered_series(states);
    EXPECT_NEAR(r(0, 0), 0.02, 1e-15);
    EXPECT_EQ(r(0, 1), 0.0);
}

TEST(StateVector, FlagsNegativeAndOvershoot)
{
    EXPECT_TRUE(StateVector(seir(0.5, 0.2, 0.1)).check().empty());
    EXPECT_FALSE(StateVector(seir(-0.01, 0.2, 0.1)).check().empty());
    EXPECT_FALSE(StateVector(seir(0.8, 0.2, 0.1)).check().empty());
}

TEST(ModelParams, NortheastValidates)
{
    EXPECT_NO_THROW(northeast().validate());
    ModelParams bad = northeast();
    bad.epi.theta = 1.5;
    EXPECT_THROW(bad.validate(), ModelError);
}

} // namespace
} // namespace seirgame
