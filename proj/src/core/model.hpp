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

// Multi-region stochastic SEIR model: parameters and coefficient functions.
//
// Units are fixed throughout the library: time in days, money in dollars,
// compartments as fractions of the regional population. The state of N
// regions is the 3N-vector x = (s_1..s_N, e_1..e_N, i_1..i_N); the noise is
// a 2N-dimensional Brownian motion (W^{s_1}..W^{s_N}, W^{e_1}..W^{e_N}).

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace seirgame
{

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Raised for any invalid model input. `field()` names the offending item
/// (a config path such as "travel.matrix[1]" when known).
class ModelError : public std::invalid_argument
{
public:
    ModelError(std::string field, const std::string& what)
        : std::invalid_argument(field.empty() ? what : field + ": " + what)
        , field_(std::move(field))
    {
    }
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

struct RegionSet {
    std::vector<std::string> names;
    std::vector<double> populations; ///< persons

    int count() const { return static_cast<int>(populations.size()); }
    void validate() const;
};

/// f(n,k): fraction of the people from region n currently present in region k.
struct TravelMatrix {
    MatrixXd fractions;
    /// Accept rows summing to less than one; the residual is "outside and
    /// uninfectable".
    bool allow_outside = false;

    /// Throws on entries outside [0,1] or bad row sums. Returns warnings
    /// (diagonal dominance violations) instead of throwing for those.
    std::vector<std::string> validate(double tol = 1e-9) const;
};

struct EpiParams {
    double beta = 0.0;   ///< base transmission rate, 1/day
    MatrixXd beta_matrix; ///< beta^{nk}, 1/day
    double gamma = 0.0;  ///< latent exit rate, 1/day
    double lambda = 0.0; ///< removal rate (recovery + death), 1/day
    double kappa = 0.0;  ///< death rate, 1/day
    double theta = 0.0;  ///< lockdown effectiveness in [0,1]
    VectorXd sigma_s;    ///< 1/sqrt(day)
    VectorXd sigma_e;    ///< 1/sqrt(day)
    double vaccination = 0.0; ///< v, 1/day

    void validate(int regions) const;
};

struct CostParams {
    double w = 0.0;       ///< productivity, $/person/day
    double chi = 0.0;     ///< value of statistical life, $/person
    double p = 0.0;       ///< hospitalization rate
    double c = 0.0;       ///< inpatient cost, $/person/day
    double a = 0.0;       ///< attention weight
    double r = 0.0;       ///< discount rate, 1/day
    double eta = 0.0;     ///< health-effort weight, $
    double horizon = 0.0; ///< T, days

    void validate() const;

    /// Same parameters with every money amount divided by `unit`.
    /// Costs (and hence value functions) scale by 1/unit; optimal policies
    /// are unchanged.
    CostParams in_money_unit(double unit) const;
};

struct ModelParams {
    RegionSet regions;
    TravelMatrix travel;
    EpiParams epi;
    CostParams cost;

    int regions_count() const { return regions.count(); }
    int state_dim() const { return 3 * regions.count(); }
    int noise_dim() const { return 2 * regions.count(); }
    void validate() const;
};

/// Block view of a 3N state vector. Components are never clamped; use
/// `check` to report excursions outside the admissible box.
class StateVector
{
public:
    StateVector() = default;
    explicit StateVector(VectorXd values);
    static StateVector from_blocks(const VectorXd& s, const VectorXd& e, const VectorXd& i);

    int regions() const { return static_cast<int>(values_.size() / 3); }
    double s(int n) const { return values_[n]; }
    double e(int n) const { return values_[n + regions()]; }
    double i(int n) const { return values_[n + 2 * regions()]; }
    const VectorXd& values() const { return values_; }

    /// Human-readable violations of: every component in [-delta, 1+delta],
    /// s+e+i <= 1+delta per region, all finite. Empty when valid.
    std::vector<std::string> check(double delta = 1e-6) const;

private:
    VectorXd values_;
};

struct PolicyVector {
    VectorXd lockdown; ///< l^n in [0,1]
    VectorXd health;   ///< h^n in [0,1]

    static PolicyVector lockdown_only(VectorXd ell);
    void validate(int regions) const;
};

/// Disease parameters derived from the basic reproduction number.
struct Calibration {
    double beta;
    double lambda;
    double kappa;
    double gamma;
};

Calibration calibrate(double r0, double infectious_days, double ifr, double latent_days);

/// beta^{nn} = beta (f^{nn})^2,
/// beta^{nk} = beta (f^{nk} f^{kk} + f^{kn} f^{nn}) P^k / P^n for k != n.
MatrixXd build_transmission_matrix(double beta, const TravelMatrix& travel,
                                   const RegionSet& regions);

// Coefficient functions. `x` has length 3N, `lockdown` length N.

/// Infection flux into E^j for every region j.
VectorXd infection_flux(const Eigen::Ref<const VectorXd>& x,
                        const Eigen::Ref<const VectorXd>& lockdown, const ModelParams& params);

VectorXd drift(double t, const Eigen::Ref<const VectorXd>& x, const PolicyVector& policy,
               const ModelParams& params);
VectorXd drift(double t, const Eigen::Ref<const VectorXd>& x,
               const Eigen::Ref<const VectorXd>& lockdown, const ModelParams& params);

/// Sigma(x) dW for a 2N increment.
VectorXd diffusion_apply(const Eigen::Ref<const VectorXd>& x,
                         const Eigen::Ref<const VectorXd>& dW, const ModelParams& params);

/// Sigma(x)^T p for a 3N vector p.
VectorXd diffusion_transpose_apply(const Eigen::Ref<const VectorXd>& x,
                                   const Eigen::Ref<const VectorXd>& p, const ModelParams& params);

/// Dense Sigma(x), 3N x 2N. Mostly for tests.
MatrixXd diffusion_matrix(const Eigen::Ref<const VectorXd>& x, const ModelParams& params);

/// f^n in $/day.
double running_cost(int n, double t, const Eigen::Ref<const VectorXd>& x, double lockdown,
                    double health, const ModelParams& params);

/// R^n_t = 1 - s - e - i, per region. `states` holds one 3N state per column;
/// the result holds one N-vector of removed fractions per column.
MatrixXd recovered_series(const MatrixXd& states);

} // namespace seirgame
