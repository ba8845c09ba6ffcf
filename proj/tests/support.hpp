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

#include "core/model.hpp"

namespace seirgame::testing
{

/// Three-region northeast case with calibrated rates and 2e-4 noise.
inline ModelParams northeast(double a = 100.0, double theta = 0.99)
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

inline VectorXd northeast_start()
{
    VectorXd x0(9);
    x0 << 0.98, 0.98, 0.98, 0.01, 0.01, 0.01, 0.01, 0.01, 0.01;
    return x0;
}

/// One isolated region with beta11 = 0.17, gamma = 0.2, lambda = 1/13.
inline ModelParams single_region(double sigma = 0.0)
{
    ModelParams p;
    p.regions.names = {"solo"};
    p.regions.populations = {19.54e6};
    p.travel.fractions = MatrixXd::Ones(1, 1);
    p.epi.beta = 0.17;
    p.epi.beta_matrix = MatrixXd::Constant(1, 1, 0.17);
    p.epi.gamma = 0.2;
    p.epi.lambda = 1.0 / 13.0;
    p.epi.kappa = 5e-4;
    p.epi.theta = 0.99;
    p.epi.sigma_s = VectorXd::Constant(1, sigma);
    p.epi.sigma_e = VectorXd::Constant(1, sigma);
    p.cost = {172.6, 1.95e6, 228.7e-5, 73300.0 / 13.0, 100.0, 0.0, 0.0, 180.0};
    return p;
}

inline VectorXd seir(double s, double e, double i)
{
    VectorXd x(3);
    x << s, e, i;
    return x;
}

} // namespace seirgame::testing
