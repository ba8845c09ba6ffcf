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
#include "core/neural.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace seirgame
{
namespace
{

Mlp random_net(std::uint64_t seed, OutputHead head = OutputHead::identity)
{
    return Mlp::glorot(default_layer_dims(3, 12, 2), head, seed,
                       StreamId{0, 0, StreamPurpose::test, 0});
}

MatrixXd random_inputs(std::uint64_t seed, int dim, int count)
{
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    MatrixXd x(dim, count);
    for (int c = 0; c < count; ++c) {
        for (int r = 0; r < dim; ++r) {
            x(r, c) = u(gen);
        }
    }
    return x;
}

// Plain loop-based forward pass used as an independent reference.
double reference_forward(const Mlp& net, const VectorXd& input)
{
    std::vector<double> a(input.data(), input.data() + input.size());
    for (int l = 0; l < net.layers(); ++l) {
        const auto w = net.weight(l);
        const auto b = net.bias(l);
        std::vector<double> next(static_cast<std::size_t>(w.rows()));
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            double sum = b[r];
            for (Eigen::Index c = 0; c < w.cols(); ++c) {
                sum += w(r, c) * a[static_cast<std::size_t>(c)];
            }
            const bool last = l == net.layers() - 1;
            if (!last) {
                sum = std::tanh(sum);
            }
            else if (net.head() == OutputHead::logistic) {
                sum = 1.0 / (1.0 + std::exp(-sum));
            }
            next[static_cast<std::size_t>(r)] = sum;
        }
        a = std::move(next);
    }
    return a[0];
}

TEST(Mlp, DefaultDimensions)
{
    EXPECT_EQ(default_layer_dims(3), (std::vector<int>{10, 40, 40, 40, 1}));
}

TEST(Mlp, ZeroNetOutputs)
{
    const Mlp identity(default_layer_dims(3, 8, 2), OutputHead::identity);
    const Mlp logistic(default_layer_dims(3, 8, 2), OutputHead::logistic);
    const MatrixXd x = random_inputs(1, 10, 5);
    EXPECT_EQ(identity.forward(x).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ((logistic.forward(x).array() - 0.5).abs().maxCoeff(), 0.0);
    EXPECT_EQ(identity.input_gradient(x).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Mlp, ForwardMatchesReference)
{
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const Mlp net = random_net(seed, seed % 2 ? OutputHead::identity : OutputHead::logistic);
        const MatrixXd x = random_inputs(seed + 100, 10, 7);
        const Eigen::RowVectorXd out = net.forward(x);
        for (int c = 0; c < x.cols(); ++c) {
            EXPECT_NEAR(out[c], reference_forward(net, x.col(c)), 1e-12);
        }
    }
}

TEST(Mlp, RejectsNonFiniteInput)
{
    const Mlp net = random_net(3);
    MatrixXd x = random_inputs(3, 10, 2);
    x(4, 1) = std::nan("");
    EXPECT_ANY_THROW(net.forward(x));
}

TEST(Mlp, LogisticOutputsStayInsideUnitInterval)
{
    const Mlp net = random_net(8, OutputHead::logistic);
    const Eigen::RowVectorXd out = net.forward(MatrixXd(random_inputs(8, 10, 200) * 20.0));
    EXPECT_GT(out.minCoeff(), 0.0);
    EXPECT_LT(out.maxCoeff(), 1.0);
}

TEST(Mlp, InputGradientMatchesCentralDifferences)
{
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const Mlp net = random_net(seed);
        const VectorXd x = random_inputs(seed + 7, 10, 1).col(0);
        const VectorXd grad = net.input_gradient(MatrixXd(x)).col(0);
        for (int k = 0; k < x.size(); ++k) {
            VectorXd up = x;
            VectorXd down = x;
            up[k] += 1e-5;
            down[k] -= 1e-5;
            const double fd = (net.forward(up) - net.forward(down)) / 2e-5;
            EXPECT_NEAR(grad[k], fd, 1e-6 * std::max(1.0, std::abs(fd))) << seed << ":" << k;
        }
    }
}

TEST(Mlp, LinearLayerGradientIsWeightRow)
{
    Mlp net({4, 1}, OutputHead::identity);
    net.weight(0) << 0.5, -1.5, 2.0, 0.25;
    net.bias(0) << 3.0;
    const MatrixXd grad = net.input_gradient(random_inputs(2, 4, 3));
    for (int c = 0; c < 3; ++c) {
        EXPECT_EQ(grad.col(c).transpose(), net.weight(0).row(0));
    }
}

VectorXd finite_difference_parameters(Mlp net, const std::function<double(const Mlp&)>& loss)
{
    VectorXd grad(net.parameter_count());
    for (Eigen::Index k = 0; k < grad.size(); ++k) {
        const double keep = net.parameters()[k];
        const double h = 1e-6;
        net.parameters()[k] = keep + h;
        const double up = loss(net);
        net.parameters()[k] = keep - h;
        const double down = loss(net);
        net.parameters()[k] = keep;
        grad[k] = (up - down) / (2.0 * h);
    }
    return grad;
}

double relative_error(const VectorXd& a, const VectorXd& b)
{
    return (a - b).norm() / std::max(1e-12, b.norm());
}

TEST(LossGradients, SquaredOutputAtOnePoint)
{
    const Mlp net = random_net(4);
    const MatrixXd x = random_inputs(4, 10, 1);
    const LossEvaluator square = [](const PointEvaluation& p) {
        LossCotangents c;
        c.loss = p.outputs.squaredNorm();
        c.d_outputs = 2.0 * p.outputs;
        return c;
    };
    const LossAndGradient exact = loss_and_param_gradients(net, x, square);
    const VectorXd fd = finite_difference_parameters(
        net, [&](const Mlp& m) { return m.forward(x).squaredNorm(); });
    EXPECT_LE(relative_error(exact.gradient, fd), 1e-5);
}

TEST(LossGradients, InputGradientNormIsSecondOrderExact)
{
    for (std::uint64_t seed = 10; seed < 14; ++seed) {
        const Mlp net = random_net(seed);
        const MatrixXd x = random_inputs(seed, 10, 3);
        const LossEvaluator grad_norm = [](const PointEvaluation& p) {
            LossCotangents c;
            c.loss = p.input_gradients.squaredNorm();
            c.d_outputs = Eigen::RowVectorXd::Zero(p.outputs.size());
            c.d_input_gradients = 2.0 * p.input_gradients;
            return c;
        };
        const LossAndGradient exact = loss_and_param_gradients(net, x, grad_norm);
        const VectorXd fd = finite_difference_parameters(
            net, [&](const Mlp& m) { return m.input_gradient(x).squaredNorm(); });
        EXPECT_LE(relative_error(exact.gradient, fd), 1e-4) << seed;
    }
}

TEST(LossGradients, UnusedLayerHasZeroGradient)
{
    Mlp net = random_net(6);
    net.weight(net.layers() - 1).setZero();
    net.bias(net.layers() - 1).setZero();
    const MatrixXd x = random_inputs(6, 10, 4);
    const Eigen::RowVectorXd cot = Eigen::RowVectorXd::Ones(4);
    const VectorXd grad = net.param_gradient(net.record(x), cot);
    // With a zero output layer no hidden parameter reaches the output.
    const Eigen::Index hidden = net.parameter_count() - net.dims()[net.layers() - 1] - 1;
    EXPECT_EQ(grad.head(hidden).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_GT(grad.tail(net.dims()[net.layers() - 1] + 1).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Optimizer, ZeroGradientKeepsParameters)
{
    VectorXd params = VectorXd::LinSpaced(5, -1.0, 1.0);
    const VectorXd before = params;
    OptimizerState state = OptimizerState::for_parameters(5, 5e-4);
    optimizer_step(params, VectorXd::Zero(5), state);
    EXPECT_EQ(params, before);
}

TEST(Optimizer, StepDescendsParabola)
{
    VectorXd theta = VectorXd::Ones(1);
    OptimizerState state = OptimizerState::for_parameters(1, 1e-2);
    optimizer_step(theta, 2.0 * theta, state);
    EXPECT_LT(std::abs(theta[0]), 1.0);
}

TEST(Optimizer, ConvergesOnQuadratic)
{
    VectorXd target(2);
    target << 0.3, -0.7;
    VectorXd theta = VectorXd::Zero(2);
    OptimizerState state = OptimizerState::for_parameters(2, 0.05);
    for (int k = 0; k < 200; ++k) {
        VectorXd grad(2);
        grad << 2.0 * (theta[0] - target[0]), 8.0 * (theta[1] - target[1]);
        optimizer_step(theta, grad, state);
    }
    EXPECT_LE((theta - target).norm(), 1e-3);
}

TEST(Mlp, LiveCountTracksCopies)
{
    const long before = Mlp::live_count();
    {
        const Mlp a = random_net(1);
        const Mlp b = a;
        EXPECT_EQ(Mlp::live_count(), before + 2);
    }
    EXPECT_EQ(Mlp::live_count(), before);
}

} // namespace
} // namespace seirgame
