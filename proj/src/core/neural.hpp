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

// Small fully connected networks with exact first and second order
// derivatives.
//
// Networks are evaluated on batches stored column-wise: an input matrix has
// one sample per column, first row the normalized time t/T, remaining rows
// the state. Besides plain backpropagation, `Mlp::param_gradient` returns the
// parameter gradient of
//
//     sum_b  u_b * out(in_b)  +  c_b . grad_in out(in_b)
//
// which is what a loss containing input gradients of the network (the Z
// process of a deep BSDE) needs. The second term is a directional derivative
// along c_b; it is differentiated by running the tangent forward alongside
// the primal pass and reversing both.

#include "core/rng.hpp"

#include <Eigen/Dense>

#include <atomic>
#include <functional>
#include <string>
#include <vector>

namespace seirgame
{

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

enum class OutputHead { identity, logistic };

const char* to_string(OutputHead head);
OutputHead output_head_from_string(const std::string& name);

/// Forward activations of one batch, kept for derivative passes.
struct MlpTape {
    std::vector<MatrixXd> activations; ///< a_0 (inputs) .. a_L (outputs)
    RowVectorXd output() const { return activations.back().row(0); }
};

class Mlp
{
public:
    Mlp() = default;
    /// Zero parameters. `dims` = {inputs, hidden..., 1}.
    Mlp(std::vector<int> dims, OutputHead head);
    Mlp(const Mlp& other);
    Mlp(Mlp&& other) noexcept;
    Mlp& operator=(const Mlp& other);
    Mlp& operator=(Mlp&& other) noexcept;
    ~Mlp();

    /// Weights uniform in +-sqrt(6/(fan_in+fan_out)), biases zero.
    static Mlp glorot(std::vector<int> dims, OutputHead head, std::uint64_t seed,
                      const StreamId& stream);

    const std::vector<int>& dims() const { return dims_; }
    OutputHead head() const { return head_; }
    int input_dim() const { return dims_.front(); }
    int layers() const { return static_cast<int>(dims_.size()) - 1; }
    Eigen::Index parameter_count() const { return params_.size(); }

    /// Flattened parameters: for each layer, the weight matrix
    /// (out x in, column-major) followed by its bias.
    const VectorXd& parameters() const { return params_; }
    VectorXd& parameters() { return params_; }
    void set_parameters(const VectorXd& params);

    Eigen::Map<const MatrixXd> weight(int layer) const;
    Eigen::Map<MatrixXd> weight(int layer);
    Eigen::Map<const VectorXd> bias(int layer) const;
    Eigen::Map<VectorXd> bias(int layer);

    MlpTape record(const MatrixXd& inputs) const;
    RowVectorXd forward(const MatrixXd& inputs) const;
    double forward(const VectorXd& input) const;

    /// Gradient of the output with respect to every input row (including
    /// the time row), one column per sample.
    MatrixXd input_gradient(const MlpTape& tape) const;
    MatrixXd input_gradient(const MatrixXd& inputs) const;

    /// Parameter gradient of sum_b out_cotangent_b * out_b
    /// + input_cotangent(:,b) . grad_in out_b. `input_cotangent` may be null.
    VectorXd param_gradient(const MlpTape& tape, const RowVectorXd& out_cotangent,
                            const MatrixXd* input_cotangent = nullptr) const;

    /// Number of Mlp objects alive in the process.
    static long live_count();

private:
    std::size_t weight_offset(int layer) const { return offsets_[layer]; }
    std::size_t bias_offset(int layer) const
    {
        return offsets_[layer] + static_cast<std::size_t>(dims_[layer + 1]) * dims_[layer];
    }
    bool is_output(int layer) const { return layer == layers() - 1; }
    void check_inputs(const MatrixXd& inputs) const;

    std::vector<int> dims_;
    OutputHead head_ = OutputHead::identity;
    std::vector<std::size_t> offsets_;
    VectorXd params_;

    static std::atomic<long> live_;
};

/// Default architecture: 1+3N inputs, three hidden tanh layers of `width`.
std::vector<int> default_layer_dims(int regions, int width = 40, int hidden_layers = 3);

/// Stacks (t/T, x) columns into a network input matrix.
MatrixXd network_inputs(const VectorXd& normalized_times, const MatrixXd& states);
MatrixXd network_inputs(double normalized_time, const MatrixXd& states);

/// Generic loss assembly: the evaluator receives outputs and input gradients
/// at the given points and returns the loss with its cotangents.
struct PointEvaluation {
    RowVectorXd outputs;
    MatrixXd input_gradients;
};

struct LossCotangents {
    double loss = 0.0;
    RowVectorXd d_outputs;
    MatrixXd d_input_gradients; ///< empty when the loss ignores input gradients
};

using LossEvaluator = std::function<LossCotangents(const PointEvaluation&)>;

struct LossAndGradient {
    double loss = 0.0;
    VectorXd gradient;
};

LossAndGradient loss_and_param_gradients(const Mlp& net, const MatrixXd& inputs,
                                         const LossEvaluator& evaluator);

/// Adam moments for one parameter vector.
struct OptimizerState {
    VectorXd first_moment;
    VectorXd second_moment;
    long step = 0;
    double learning_rate = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    static OptimizerState for_parameters(Eigen::Index count, double learning_rate);
};

void optimizer_step(VectorXd& params, const VectorXd& grads, OptimizerState& state);

} // namespace seirgame
