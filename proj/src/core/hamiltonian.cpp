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

#include <algorithm>
#include <cmath>

namespace seirgame
{

namespace
{

// Shared assembly of A, S, W and the health cost from the products s_j D_j.
ResponseCoefficients assemble(int n, double t, const Eigen::Ref<const VectorXd>& x,
                              const VectorXd& scaled_differences,
                              const Eigen::Ref<const VectorXd>& others, const ModelParams& params)
{
    const int regions = params.regions_count();
    const MatrixXd& beta = params.epi.beta_matrix;
    const double theta = params.epi.theta;
    const double s_n = x[n];
    const double e_n = x[regions + n];
    const double i_n = x[2 * regions + n];
    const double discount = std::exp(-params.cost.r * t);
    const double population = params.regions.populations[n];

    ResponseCoefficients coeff;
    coeff.theta = theta;
    coeff.a = beta(n, n) * i_n * scaled_differences[n];
    for (int j = 0; j < regions; ++j) {
        if (j == n) {
            continue;
        }
        const double i_j = x[2 * regions + j];
        coeff.s += (1.0 - theta * others[j]) *
                   (beta(j, n) * i_n * scaled_differences[j] +
                    beta(n, j) * i_j * scaled_differences[n]);
    }
    coeff.wage = discount * population * (s_n + e_n + i_n) * params.cost.w;
    coeff.health = discount * population * params.cost.a *
                   (params.epi.kappa * i_n * params.cost.chi + params.cost.p * i_n * params.cost.c);
    return coeff;
}

void require_sigma(const ModelParams& params)
{
    if (!(params.epi.sigma_s.array() > 0.0).all()) {
        throw ModelError("epidemic.sigma_s",
                         "must be positive: the BSDE driver recovers D_j from z_j / sigma_{s_j}");
    }
}

} // namespace

GradientView GradientView::from_full(const Eigen::Ref<const VectorXd>& x, const VectorXd& grad,
                                     const ModelParams& params)
{
    GradientView view;
    view.full = grad;
    view.z = diffusion_transpose_apply(x, grad, params);
    return view;
}

GradientView GradientView::from_z(VectorXd z)
{
    GradientView view;
    view.z = std::move(z);
    return view;
}

VectorXd GradientView::differences(const Eigen::Ref<const VectorXd>& x,
                                   const ModelParams& params) const
{
    const int regions = params.regions_count();
    VectorXd d(regions);
    for (int j = 0; j < regions; ++j) {
        if (full) {
            d[j] = (*full)[regions + j] - (*full)[j];
        }
        else {
            const double scale = params.epi.sigma_s[j] * x[j];
            d[j] = scale != 0.0 ? z[j] / scale : 0.0;
        }
    }
    return d;
}

ResponseCoefficients response_coefficients(int n, double t, const Eigen::Ref<const VectorXd>& x,
                                           const Eigen::Ref<const VectorXd>& z,
                                           const Eigen::Ref<const VectorXd>& others,
                                           const ModelParams& params)
{
    require_sigma(params);
    const int regions = params.regions_count();
    VectorXd scaled(regions);
    for (int j = 0; j < regions; ++j) {
        scaled[j] = z[j] / params.epi.sigma_s[j];
    }
    return assemble(n, t, x, scaled, others, params);
}

double minimize_response(const ResponseCoefficients& coeff)
{
    const double denominator = 2.0 * coeff.theta * coeff.a;
    if (denominator > kDegenerateCurvature) {
        const double critical =
            (2.0 * coeff.a + coeff.s - coeff.wage / coeff.theta) / denominator;
        return std::clamp(critical, 0.0, 1.0);
    }
    // Affine or concave in l: the minimum sits at an endpoint.
    return coeff.quadratic(1.0) < coeff.quadratic(0.0) ? 1.0 : 0.0;
}

double hamiltonian_value(int n, double t, const Eigen::Ref<const VectorXd>& x,
                         const Eigen::Ref<const VectorXd>& lockdown_all, const VectorXd& grad,
                         const ModelParams& params)
{
    return drift(t, x, lockdown_all, params).dot(grad) +
           running_cost(n, t, x, lockdown_all[n], 0.0, params);
}

double best_response(int n, double t, const Eigen::Ref<const VectorXd>& x,
                     const GradientView& grad, const Eigen::Ref<const VectorXd>& others,
                     const ModelParams& params)
{
    if (grad.full) {
        const int regions = params.regions_count();
        VectorXd scaled = grad.differences(x, params);
        for (int j = 0; j < regions; ++j) {
            scaled[j] *= x[j];
        }
        return minimize_response(assemble(n, t, x, scaled, others, params));
    }
    return minimize_response(response_coefficients(n, t, x, grad.z, others, params));
}

double grid_argmin_oracle(int n, double t, const Eigen::Ref<const VectorXd>& x,
                          const VectorXd& grad, const Eigen::Ref<const VectorXd>& others,
                          const ModelParams& params, double resolution, int refinements)
{
    if (!(resolution > 0.0)) {
        throw std::invalid_argument("grid_argmin_oracle: resolution must be positive");
    }
    VectorXd lockdown = others;
    auto value_at = [&](double ell) {
        lockdown[n] = ell;
        return hamiltonian_value(n, t, x, lockdown, grad, params);
    };
    auto search = [&](double lo, double hi, double step) {
        const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
        double best = lo;
        double best_value = value_at(lo);
        for (long k = 1; k <= count + 1; ++k) {
            const double ell = std::min(lo + k * step, hi);
            const double value = value_at(ell);
            if (value < best_value) {
                best_value = value;
                best = ell;
            }
            if (ell >= hi) {
                break;
            }
        }
        return best;
    };
    double step = resolution;
    double best = search(0.0, 1.0, step);
    for (int level = 0; level < refinements; ++level) {
        const double lo = std::max(0.0, best - step);
        const double hi = std::min(1.0, best + step);
        step /= 100.0;
        best = search(lo, hi, step);
    }
    return best;
}

VectorXd reduced_drift(int n, double t, const Eigen::Ref<const VectorXd>& x,
                       const Eigen::Ref<const VectorXd>& others, const ModelParams& params)
{
    VectorXd lockdown = others;
    lockdown[n] = 0.0;
    return drift(t, x, lockdown, params);
}

double bsde_driver(int n, double t, const Eigen::Ref<const VectorXd>& x,
                   const Eigen::Ref<const VectorXd>& z, const Eigen::Ref<const VectorXd>& others,
                   const ModelParams& params)
{
    const ResponseCoefficients coeff = response_coefficients(n, t, x, z, others, params);
    return coeff.quadratic(minimize_response(coeff)) + coeff.health;
}

DriverEvaluation evaluate_driver(int n, double t, const Eigen::Ref<const VectorXd>& x,
                                 const Eigen::Ref<const VectorXd>& z,
                                 const Eigen::Ref<const VectorXd>& others,
                                 const ModelParams& params)
{
    const ResponseCoefficients coeff = response_coefficients(n, t, x, z, others, params);
    const int regions = params.regions_count();
    const MatrixXd& beta = params.epi.beta_matrix;
    const double theta = coeff.theta;
    const double i_n = x[2 * regions + n];

    DriverEvaluation out;
    out.lockdown = minimize_response(coeff);
    out.g = coeff.quadratic(out.lockdown) + coeff.health;
    out.dg_dz = VectorXd::Zero(2 * regions);
    out.dlockdown_dz = VectorXd::Zero(2 * regions);

    // Partial derivatives of A and S with respect to z; g is differentiated at
    // fixed l (at an interior optimum dq/dl = 0, elsewhere l is locally flat).
    const double sigma_n = params.epi.sigma_s[n];
    const double da_dzn = beta(n, n) * i_n / sigma_n;
    double ds_dzn = 0.0;
    VectorXd ds_dz = VectorXd::Zero(regions);
    for (int j = 0; j < regions; ++j) {
        if (j == n) {
            continue;
        }
        const double open = 1.0 - theta * others[j];
        ds_dzn += open * beta(n, j) * x[2 * regions + j] / sigma_n;
        ds_dz[j] = open * beta(j, n) * i_n / params.epi.sigma_s[j];
    }
    ds_dz[n] = ds_dzn;

    const double ell = out.lockdown;
    for (int j = 0; j < regions; ++j) {
        out.dg_dz[j] = -theta * ell * ds_dz[j];
    }
    out.dg_dz[n] += (theta * theta * ell * ell - 2.0 * theta * ell) * da_dzn;

    const double denominator = 2.0 * theta * coeff.a;
    if (denominator > kDegenerateCurvature) {
        const double critical = (2.0 * coeff.a + coeff.s - coeff.wage / theta) / denominator;
        if (critical > 0.0 && critical < 1.0) {
            for (int j = 0; j < regions; ++j) {
                out.dlockdown_dz[j] = ds_dz[j] / denominator;
            }
            out.dlockdown_dz[n] += 2.0 * da_dzn / denominator - critical * da_dzn / coeff.a;
        }
    }
    return out;
}

} // namespace seirgame
