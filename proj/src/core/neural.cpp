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

#include <cmath>
#include <stdexcept>

namespace seirgame
{

std::atomic<long> Mlp::live_{0};

namespace
{

enum class Activation { tanh, identity, logistic };

// Activation applied in place, and its first/second derivatives expressed
// through the activation output a.
void activate(Activation act, MatrixXd& z)
{
    switch (act) {
    case Activation::tanh:
        z = z.array().tanh();
        break;
    case Activation::logistic:
        z = (1.0 / (1.0 + (-z.array()).exp())).matrix();
        break;
    case Activation::identity:
        break;
    }
}

MatrixXd first_derivative(Activation act, const MatrixXd& a)
{
    switch (act) {
    case Activation::tanh:
        return (1.0 - a.array().square()).matrix();
    case Activation::logistic:
        return (a.array() * (1.0 - a.array())).matrix();
    case Activation::identity:
        break;
    }
    return MatrixXd::Ones(a.rows(), a.cols());
}

MatrixXd second_derivative(Activation act, const MatrixXd& a)
{
    switch (act) {
    case Activation::tanh:
        return (-2.0 * a.array() * (1.0 - a.array().square())).matrix();
    case Activation::logistic:
        return (a.array() * (1.0 - a.array()) * (1.0 - 2.0 * a.array())).matrix();
    case Activation::identity:
        break;
    }
    return MatrixXd::Zero(a.rows(), a.cols());
}

} // namespace

const char* to_string(OutputHead head)
{
    return head == OutputHead::identity ? "identity" : "logistic";
}

OutputHead output_head_from_string(const std::string& name)
{
    if (name == "identity") {
        return OutputHead::identity;
    }
    if (name == "logistic") {
        return OutputHead::logistic;
    }
    throw std::invalid_argument("unknown output head '" + name + "'");
}

Mlp::Mlp(std::vector<int> dims, OutputHead head)
    : dims_(std::move(dims))
    , head_(head)
{
    if (dims_.size() < 2 || dims_.back() != 1) {
        throw std::invalid_argument("Mlp: need at least input and scalar output dimensions");
    }
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
        if (dims_[l] <= 0 || dims_[l + 1] <= 0) {
            throw std::invalid_argument("Mlp: layer widths must be positive");
        }
        offsets_.push_back(total);
        total += static_cast<std::size_t>(dims_[l + 1]) * (dims_[l] + 1);
    }
    params_ = VectorXd::Zero(static_cast<Eigen::Index>(total));
    ++live_;
}

Mlp::Mlp(const Mlp& other)
    : dims_(other.dims_)
    , head_(other.head_)
    , offsets_(other.offsets_)
    , params_(other.params_)
{
    if (!dims_.empty()) {
        ++live_;
    }
}

Mlp::Mlp(Mlp&& other) noexcept
    : dims_(std::move(other.dims_))
    , head_(other.head_)
    , offsets_(std::move(other.offsets_))
    , params_(std::move(other.params_))
{
    // The moved-from object no longer owns a network.
    other.dims_.clear();
}

Mlp& Mlp::operator=(const Mlp& other)
{
    if (this != &other) {
        if (dims_.empty() && !other.dims_.empty()) {
            ++live_;
        }
        else if (!dims_.empty() && other.dims_.empty()) {
            --live_;
        }
        dims_ = other.dims_;
        head_ = other.head_;
        offsets_ = other.offsets_;
        params_ = other.params_;
    }
    return *this;
}

Mlp& Mlp::operator=(Mlp&& other) noexcept
{
    if (this != &other) {
        if (!dims_.empty()) {
            --live_;
        }
        dims_ = std::move(other.dims_);
        head_ = other.head_;
        offsets_ = std::move(other.offsets_);
        params_ = std::move(other.params_);
        other.dims_.clear();
    }
    return *this;
}

Mlp::~Mlp()
{
    if (!dims_.empty()) {
        --live_;
    }
}

long Mlp::live_count()
{
    return live_.load();
}

Mlp Mlp::glorot(std::vector<int> dims, OutputHead head, std::uint64_t seed, const StreamId& stream)
{
    Mlp net(std::move(dims), head);
    CounterRng rng(seed, stream);
    std::uint64_t index = 0;
    for (int l = 0; l < net.layers(); ++l) {
        const double limit = std::sqrt(6.0 / (net.dims_[l] + net.dims_[l + 1]));
        auto w = net.weight(l);
        for (Eigen::Index col = 0; col < w.cols(); ++col) {
            for (Eigen::Index row = 0; row < w.rows(); ++row) {
                w(row, col) = limit * (2.0 * rng.uniform(index++) - 1.0);
            }
        }
    }
    return net;
}

void Mlp::set_parameters(const VectorXd& params)
{
    if (params.size() != params_.size()) {
        throw std::invalid_argument("Mlp::set_parameters: size mismatch");
    }
    if (!params.allFinite()) {
        throw std::invalid_argument("Mlp::set_parameters: non-finite parameter");
    }
    params_ = params;
}

Eigen::Map<const MatrixXd> Mlp::weight(int layer) const
{
    return {params_.data() + weight_offset(layer), dims_[layer + 1], dims_[layer]};
}

Eigen::Map<MatrixXd> Mlp::weight(int layer)
{
    return {params_.data() + weight_offset(layer), dims_[layer + 1], dims_[layer]};
}

Eigen::Map<const VectorXd> Mlp::bias(int layer) const
{
    return {params_.data() + bias_offset(layer), dims_[layer + 1]};
}

Eigen::Map<VectorXd> Mlp::bias(int layer)
{
    return {params_.data() + bias_offset(layer), dims_[layer + 1]};
}

void Mlp::check_inputs(const MatrixXd& inputs) const
{
    if (dims_.empty()) {
        throw std::logic_error("Mlp: network is empty");
    }
    if (inputs.rows() != input_dim()) {
        throw std::invalid_argument("Mlp: input has " + std::to_string(inputs.rows()) +
                                    " rows, expected " + std::to_string(input_dim()));
    }
    if (!inputs.allFinite()) {
        throw std::invalid_argument("Mlp: non-finite input");
    }
}

MlpTape Mlp::record(const MatrixXd& inputs) const
{
    check_inputs(inputs);
    MlpTape tape;
    tape.activations.reserve(dims_.size());
    tape.activations.push_back(inputs);
    for (int l = 0; l < layers(); ++l) {
        MatrixXd z = weight(l) * tape.activations.back();
        z.colwise() += bias(l);
        const Activation act = !is_output(l) ? Activation::tanh
                               : head_ == OutputHead::logistic ? Activation::logistic
                                                                : Activation::identity;
        activate(act, z);
        tape.activations.push_back(std::move(z));
    }
    return tape;
}

RowVectorXd Mlp::forward(const MatrixXd& inputs) const
{
    return record(inputs).output();
}

double Mlp::forward(const VectorXd& input) const
{
    return forward(MatrixXd(input))(0);
}

MatrixXd Mlp::input_gradient(const MlpTape& tape) const
{
    const auto activation_of = [this](int l) {
        return !is_output(l) ? Activation::tanh
               : head_ == OutputHead::logistic ? Activation::logistic
                                                : Activation::identity;
    };
    MatrixXd delta = first_derivative(activation_of(layers() - 1), tape.activations.back());
    for (int l = layers() - 1; l >= 0; --l) {
        MatrixXd back = weight(l).transpose() * delta;
        if (l == 0) {
            return back;
        }
        delta = back.cwiseProduct(first_derivative(activation_of(l - 1), tape.activations[l]));
    }
    return {};
}

MatrixXd Mlp::input_gradient(const MatrixXd& inputs) const
{
    return input_gradient(record(inputs));
}

VectorXd Mlp::param_gradient(const MlpTape& tape, const RowVectorXd& out_cotangent,
                             const MatrixXd* input_cotangent) const
{
    const int n_layers = layers();
    const auto batch = tape.activations.front().cols();
    if (out_cotangent.size() != batch) {
        throw std::invalid_argument("Mlp::param_gradient: cotangent size mismatch");
    }
    const bool second_order = input_cotangent != nullptr;
    if (second_order &&
        (input_cotangent->rows() != input_dim() || input_cotangent->cols() != batch)) {
        throw std::invalid_argument("Mlp::param_gradient: input cotangent shape mismatch");
    }
    const auto activation_of = [this](int l) {
        return !is_output(l) ? Activation::tanh
               : head_ == OutputHead::logistic ? Activation::logistic
                                                : Activation::identity;
    };

    // Tangent pass: z_dot[l] = W_l a_dot[l], a_dot[l+1] = phi'(a[l+1]) * z_dot[l].
    std::vector<MatrixXd> a_dot;
    std::vector<MatrixXd> z_dot;
    std::vector<MatrixXd> d1(n_layers);
    for (int l = 0; l < n_layers; ++l) {
        d1[l] = first_derivative(activation_of(l), tape.activations[l + 1]);
    }
    if (second_order) {
        a_dot.reserve(n_layers + 1);
        z_dot.reserve(n_layers);
        a_dot.push_back(*input_cotangent);
        for (int l = 0; l < n_layers; ++l) {
            z_dot.push_back(weight(l) * a_dot.back());
            a_dot.push_back(d1[l].cwiseProduct(z_dot.back()));
        }
    }

    VectorXd grad = VectorXd::Zero(params_.size());
    MatrixXd a_bar = out_cotangent;
    MatrixXd a_dot_bar;
    if (second_order) {
        a_dot_bar = MatrixXd::Ones(1, batch);
    }
    for (int l = n_layers - 1; l >= 0; --l) {
        MatrixXd z_bar = a_bar.cwiseProduct(d1[l]);
        MatrixXd z_dot_bar;
        if (second_order) {
            const MatrixXd d2 = second_derivative(activation_of(l), tape.activations[l + 1]);
            z_bar += a_dot_bar.cwiseProduct(z_dot[l]).cwiseProduct(d2);
            z_dot_bar = a_dot_bar.cwiseProduct(d1[l]);
        }
        Eigen::Map<MatrixXd> g_w(grad.data() + weight_offset(l), dims_[l + 1], dims_[l]);
        Eigen::Map<VectorXd> g_b(grad.data() + bias_offset(l), dims_[l + 1]);
        g_w.noalias() = z_bar * tape.activations[l].transpose();
        g_b = z_bar.rowwise().sum();
        if (second_order) {
            g_w.noalias() += z_dot_bar * a_dot[l].transpose();
        }
        if (l > 0) {
            a_bar = weight(l).transpose() * z_bar;
            if (second_order) {
                a_dot_bar = weight(l).transpose() * z_dot_bar;
            }
        }
    }
    return grad;
}

std::vector<int> default_layer_dims(int regions, int width, int hidden_layers)
{
    std::vector<int> dims{1 + 3 * regions};
    for (int h = 0; h < hidden_layers; ++h) {
        dims.push_back(width);
    }
    dims.push_back(1);
    return dims;
}

MatrixXd network_inputs(const VectorXd& normalized_times, const MatrixXd& states)
{
    if (normalized_times.size() != states.cols()) {
        throw std::invalid_argument("network_inputs: one time per state column required");
    }
    MatrixXd inputs(states.rows() + 1, states.cols());
    inputs.row(0) = normalized_times.transpose();
    inputs.bottomRows(states.rows()) = states;
    return inputs;
}

MatrixXd network_inputs(double normalized_time, const MatrixXd& states)
{
    return network_inputs(VectorXd::Constant(states.cols(), normalized_time), states);
}

LossAndGradient loss_and_param_gradients(const Mlp& net, const MatrixXd& inputs,
                                         const LossEvaluator& evaluator)
{
    const MlpTape tape = net.record(inputs);
    PointEvaluation eval;
    eval.outputs = tape.output();
    eval.input_gradients = net.input_gradient(tape);
    const LossCotangents cot = evaluator(eval);
    LossAndGradient result;
    result.loss = cot.loss;
    const bool uses_gradients = cot.d_input_gradients.size() > 0;
    RowVectorXd d_out = cot.d_outputs.size() > 0 ? cot.d_outputs
                                                  : RowVectorXd::Zero(inputs.cols());
    result.gradient =
        net.param_gradient(tape, d_out, uses_gradients ? &cot.d_input_gradients : nullptr);
    return result;
}

OptimizerState OptimizerState::for_parameters(Eigen::Index count, double learning_rate)
{
    OptimizerState state;
    state.first_moment = VectorXd::Zero(count);
    state.second_moment = VectorXd::Zero(count);
    state.learning_rate = learning_rate;
    return state;
}

void optimizer_step(VectorXd& params, const VectorXd& grads, OptimizerState& state)
{
    if (grads.size() != params.size() || state.first_moment.size() != params.size() ||
        state.second_moment.size() != params.size()) {
        throw std::invalid_argument("optimizer_step: shape mismatch");
    }
    ++state.step;
    state.first_moment = state.beta1 * state.first_moment + (1.0 - state.beta1) * grads;
    state.second_moment =
        state.beta2 * state.second_moment + (1.0 - state.beta2) * grads.cwiseAbs2();
    const double correction1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double correction2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    const double step_size = state.learning_rate * std::sqrt(correction2) / correction1;
    params.array() -= step_size * state.first_moment.array() /
                      (state.second_moment.array().sqrt() + state.epsilon * std::sqrt(correction2));
}

} // namespace seirgame
