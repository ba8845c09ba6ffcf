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
#include "core/evaluation.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace seirgame
{
namespace
{

using testing::northeast;
using testing::northeast_start;
using testing::seir;
using testing::single_region;

VectorXd disease_free()
{
    VectorXd x0 = VectorXd::Zero(9);
    x0.head(3).setConstant(1.0);
    return x0;
}

ModelParams quiet_northeast()
{
    ModelParams p = northeast();
    p.epi.sigma_s.setZero();
    p.epi.sigma_e.setZero();
    return p;
}

TEST(CostReport, DiseaseFreeInactionCostsNothing)
{
    const CostReport report = estimate_cost(PolicyProfile::constant(3, 0.0, 180.0), quiet_northeast(),
                                            disease_free(), TimeGrid{}, 4, 1);
    for (int n = 0; n < 3; ++n) {
        EXPECT_EQ(report.mean[n], 0.0);
        EXPECT_EQ(report.std_error[n], 0.0);
    }
}

TEST(CostReport, TwoStepHandQuadrature)
{
    const ModelParams p = single_region(0.0);
    const TimeGrid grid{180.0, 2};
    const double ell = 0.6;
    VectorXd x = seir(0.95, 0.03, 0.02);
    double expected = 0.0;
    for (int k = 0; k < 2; ++k) {
        expected += running_cost(0, grid.node(k), x, ell, 0.0, p) * grid.dt();
        x += drift(grid.node(k), x, VectorXd::Constant(1, ell), p) * grid.dt();
    }
    const CostReport report =
        estimate_cost(PolicyProfile::constant(1, ell, 180.0), p, seir(0.95, 0.03, 0.02), grid, 3, 1);
    EXPECT_NEAR(report.mean[0] / expected, 1.0, 1e-14);
}

TEST(CostReport, StandardErrorShrinksWithBatch)
{
    const ModelParams p = northeast();
    const PolicyProfile profile = PolicyProfile::constant(3, 0.2, 180.0);
    double ratio = 0.0;
    const int reps = 10;
    for (int rep = 0; rep < reps; ++rep) {
        const CostReport small = estimate_cost(profile, p, northeast_start(), TimeGrid{}, 200, 100 + rep);
        const CostReport large = estimate_cost(profile, p, northeast_start(), TimeGrid{}, 400, 200 + rep);
        ratio += small.std_error[0] / large.std_error[0];
    }
    EXPECT_NEAR(ratio / reps, std::sqrt(2.0), 0.2 * std::sqrt(2.0));
}

TEST(Probe, InactionIsUnbeatableWithoutDisease)
{
    const ModelParams p = quiet_northeast();
    const PolicyProfile profile = PolicyProfile::constant(3, 0.0, 180.0);
    const ProbeReport report = exploitability_probe(profile, 0, default_deviations(profile, 0), p,
                                                    disease_free(), TimeGrid{}, 8, 3);
    EXPECT_LE(report.max_reduction(), 0.0);
    EXPECT_TRUE(report.passes());
}

TEST(Probe, FullLockdownWithoutDiseaseWastesWages)
{
    const ModelParams p = quiet_northeast();
    const PolicyProfile profile = PolicyProfile::constant(3, 1.0, 180.0);
    const ProbeReport report = exploitability_probe(profile, 1, default_deviations(profile, 1), p,
                                                    disease_free(), TimeGrid{}, 8, 3);
    const double wages = 8.91e6 * 172.6 * 180.0;
    EXPECT_NEAR(report.max_reduction() / wages, 1.0, 1e-12);
    EXPECT_FALSE(report.passes());
    EXPECT_EQ(report.deviations.front().label, "constant:0.0");
}

TEST(Probe, SelfDeviationIsZero)
{
    const ModelParams p = northeast();
    const PolicyProfile profile = PolicyProfile::constant(3, 0.4, 180.0);
    const std::vector<Deviation> self = {{"learned", profile.players[2]}};
    const ProbeReport report =
        exploitability_probe(profile, 2, self, p, northeast_start(), TimeGrid{}, 16, 5);
    EXPECT_EQ(report.max_reduction(), 0.0);
}

TEST(Quantile, LinearInterpolation)
{
    EXPECT_DOUBLE_EQ(empirical_quantile({5, 1, 3, 2, 4}, 0.5), 3.0);
    EXPECT_DOUBLE_EQ(empirical_quantile({1, 2, 3, 4, 5}, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(empirical_quantile({1, 2, 3, 4, 5}, 1.0), 5.0);
    EXPECT_DOUBLE_EQ(empirical_quantile({1, 2}, 0.25), 1.25);
}

TEST(Summary, NoiseFreeBandsCollapse)
{
    const PathBatch batch = simulate(quiet_northeast(), PolicyProfile::constant(3, 0.3, 180.0),
                                     northeast_start(), TimeGrid{}, 40, 1);
    const TrajectorySummary summary = summarize(batch);
    for (const RegionSummary& region : summary.regions) {
        EXPECT_NEAR((region.i.lower95 - region.i.mean).cwiseAbs().maxCoeff(), 0.0, 1e-15);
        EXPECT_NEAR((region.i.upper95 - region.i.mean).cwiseAbs().maxCoeff(), 0.0, 1e-15);
    }
}

TEST(Summary, BandsOrderedAndRemovedMonotone)
{
    const PathBatch batch = simulate(northeast(), PolicyProfile::constant(3, 0.3, 180.0),
                                     northeast_start(), TimeGrid{}, 256, 2);
    const TrajectorySummary summary = summarize(batch);
    ASSERT_EQ(summary.times.size(), 41);
    for (const RegionSummary& region : summary.regions) {
        for (const SeriesBand* b : {&region.s, &region.e, &region.i, &region.r, &region.ell}) {
            EXPECT_TRUE((b->lower95.array() <= b->mean.array() + 1e-15).all());
            EXPECT_TRUE((b->upper95.array() >= b->mean.array() - 1e-15).all());
            EXPECT_TRUE((b->lower95.array() <= b->lower50.array()).all());
            EXPECT_TRUE((b->upper50.array() <= b->upper95.array()).all());
        }
        for (Eigen::Index k = 1; k < region.r.mean.size(); ++k) {
            EXPECT_GE(region.r.mean[k], region.r.mean[k - 1]);
        }
    }
}

TEST(Summary, TooFewPathsRejected)
{
    const PathBatch batch = simulate(northeast(), PolicyProfile::constant(3, 0.3, 180.0),
                                     northeast_start(), TimeGrid{}, 10, 2);
    EXPECT_THROW(summarize(batch), std::invalid_argument);
}

PathBatch two_node_batch(double terminal_s0, double terminal_s1)
{
    PathBatch b;
    b.paths = 1;
    b.steps = 1;
    b.regions = 2;
    b.horizon = 1.0;
    b.states = {0.9, 0.8, 0.05, 0.05, 0.05, 0.05, terminal_s0, terminal_s1, 0.0, 0.0, 0.0, 0.0};
    b.lockdown.assign(4, 0.0);
    b.removed.assign(4, 0.0);
    b.stepwise_cost.assign(4, 0.0);
    b.total_cost.assign(2, 0.0);
    b.failed.assign(1, 0);
    return b;
}

TEST(Classify, ConstantPathsAreControlled)
{
    EXPECT_EQ(classify(two_node_batch(0.9, 0.8)).outcome, Outcome::controlled);
}

TEST(Classify, CollapseInOneRegionIsOutOfControl)
{
    const EquilibriumLabel label = classify(two_node_batch(0.9, 0.08));
    EXPECT_EQ(label.outcome, Outcome::out_of_control);
    EXPECT_NEAR(label.terminal_s[1], 0.08, 1e-15);
    EXPECT_STREQ(to_string(label.outcome), "out_of_control");
}

TEST(Classify, InactionLetsEpidemicRun)
{
    const PathBatch batch = simulate(northeast(), PolicyProfile::constant(3, 0.0, 180.0),
                                     northeast_start(), TimeGrid{}, 64, 3);
    EXPECT_EQ(classify(batch).outcome, Outcome::out_of_control);
}

} // namespace
} // namespace seirgame
