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

// Closed-form pieces of one fictitious-play stage for player n.
//
// With the other players' lockdowns frozen, the Hamiltonian
// H^n = b(t,x,l) . p + f^n is a quadratic in player n's own lockdown l:
//
//     H^n(l) = mu^n . p + theta^2 A l^2 - 2 theta A l - theta S l + W l + health cost
//
// where D_j = p_{e_j} - p_{s_j} and
//     A  = beta^{nn} s_n i_n D_n,
//     S  = sum_{j != n} (1 - theta l^j) (beta^{jn} s_j i_n D_j + beta^{nj} s_n i_j D_n),
//     W  = e^{-rt} P^n (s_n + e_n + i_n) w.
// mu^n is the drift with player n's lockdown removed, and the BSDE driver
// g^n is the minimized l-dependent part plus the health cost. Because
// z = Sigma(x)^T p has z_j = sigma_{s_j} s_j D_j, every product s_j D_j above
// can be written as z_j / sigma_{s_j}; the driver is evaluated in that form.
//
// Entry n of an `others` lockdown vector is ignored everywhere.

#include "core/model.hpp"

#include <optional>

namespace seirgame
{

/// Degeneracy threshold on the denominator 2 theta A.
inline constexpr double kDegenerateCurvature = 1e-12;

/// Gradient information for one player: z = Sigma(x)^T grad V, optionally
/// with the full gradient it came from.
struct GradientView {
    std::optional<VectorXd> full;
    VectorXd z;

    static GradientView from_full(const Eigen::Ref<const VectorXd>& x, const VectorXd& grad,
                                  const ModelParams& params);
    static GradientView from_z(VectorXd z);

    /// D_j = z_j / (sigma_{s_j} s_j); zero when s_j or sigma_{s_j} is zero.
    VectorXd differences(const Eigen::Ref<const VectorXd>& x, const ModelParams& params) const;
};

/// Coefficients of the quadratic in the player's own lockdown.
struct ResponseCoefficients {
    double theta = 0.0;
    double a = 0.0;     ///< A
    double s = 0.0;     ///< S
    double wage = 0.0;  ///< W
    double health = 0.0; ///< e^{-rt} P^n a (kappa i chi + p i c)

    /// l-dependent part theta^2 A l^2 - 2 theta A l - theta S l + W l.
    double quadratic(double ell) const
    {
        return theta * theta * a * ell * ell - 2.0 * theta * a * ell - theta * s * ell + wage * ell;
    }
};

ResponseCoefficients response_coefficients(int n, double t, const Eigen::Ref<const VectorXd>& x,
                                           const Eigen::Ref<const VectorXd>& z,
                                           const Eigen::Ref<const VectorXd>& others,
                                           const ModelParams& params);

/// Minimizer of the quadratic over [0,1] (clipped critical point, or the
/// better endpoint when 2 theta A <= kDegenerateCurvature; ties go to 0).
double minimize_response(const ResponseCoefficients& coeff);

double hamiltonian_value(int n, double t, const Eigen::Ref<const VectorXd>& x,
                         const Eigen::Ref<const VectorXd>& lockdown_all, const VectorXd& grad,
                         const ModelParams& params);

double best_response(int n, double t, const Eigen::Ref<const VectorXd>& x,
                     const GradientView& grad, const Eigen::Ref<const VectorXd>& others,
                     const ModelParams& params);

/// Brute-force argmin of hamiltonian_value over the uniform grid of step
/// `resolution` on [0,1]; the smallest l wins ties. Each refinement level
/// re-grids [best - step, best + step] with a step 100 times finer.
double grid_argmin_oracle(int n, double t, const Eigen::Ref<const VectorXd>& x,
                          const VectorXd& grad, const Eigen::Ref<const VectorXd>& others,
                          const ModelParams& params, double resolution, int refinements = 0);

VectorXd reduced_drift(int n, double t, const Eigen::Ref<const VectorXd>& x,
                       const Eigen::Ref<const VectorXd>& others, const ModelParams& params);

double bsde_driver(int n, double t, const Eigen::Ref<const VectorXd>& x,
                   const Eigen::Ref<const VectorXd>& z, const Eigen::Ref<const VectorXd>& others,
                   const ModelParams& params);

/// Driver value together with the derivatives the solver needs.
struct DriverEvaluation {
    double g = 0.0;
    double lockdown = 0.0;   ///< best response l*
    VectorXd dg_dz;          ///< 2N
    VectorXd dlockdown_dz;   ///< 2N, zero unless l* is an interior critical point
};

DriverEvaluation evaluate_driver(int n, double t, const Eigen::Ref<const VectorXd>& x,
                                 const Eigen::Ref<const VectorXd>& z,
                                 const Eigen::Ref<const VectorXd>& others,
                                 const ModelParams& params);

} // namespace seirgame
