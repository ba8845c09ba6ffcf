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

#include <cmath>
#include <sstream>

namespace seirgame
{

namespace
{

std::string indexed(const char* name, int i)
{
    return std::string(name) + "[" + std::to_string(i) + "]";
}

void require_nonnegative(double value, const char* name)
{
    if (!(value >= 0.0) || !std::isfinite(value)) {
        throw ModelError(name, "must be a finite value >= 0");
    }
}

} // namespace

void RegionSet::validate() const
{
    if (populations.empty()) {
        throw ModelError("regions.populations", "at least one region is required");
    }
    if (!names.empty() && names.size() != populations.size()) {
        throw ModelError("regions.names", "length must match regions.populations");
    }
    for (int n = 0; n < count(); ++n) {
        if (!(populations[n] > 0.0) || !std::isfinite(populations[n])) {
            throw ModelError(indexed("regions.populations", n), "must be positive");
        }
    }
}

std::vector<std::string> TravelMatrix::validate(double tol) const
{
    std::vector<std::string> warnings;
    if (fractions.rows() != fractions.cols() || fractions.rows() == 0) {
        throw ModelError("travel.matrix", "must be a non-empty square matrix");
    }
    const auto n = fractions.rows();
    for (Eigen::Index row = 0; row < n; ++row) {
        for (Eigen::Index col = 0; col < n; ++col) {
            const double f = fractions(row, col);
            if (!(f >= 0.0 && f <= 1.0)) {
                throw ModelError(indexed("travel.matrix", static_cast<int>(row)),
                                 "entries must lie in [0,1]");
            }
        }
        const double sum = fractions.row(row).sum();
        const bool ok = allow_outside ? sum <= 1.0 + tol : std::abs(sum - 1.0) <= tol;
        if (!ok) {
            std::ostringstream msg;
            msg << "row sums to " << sum << (allow_outside ? ", must be <= 1" : ", must be 1");
            throw ModelError(indexed("travel.matrix", static_cast<int>(row)), msg.str());
        }
        for (Eigen::Index col = 0; col < n; ++col) {
            if (col != row && !(fractions(row, row) > fractions(row, col))) {
                std::ostringstream msg;
                msg << "travel.matrix[" << row << "]: diagonal " << fractions(row, row)
                    << " does not dominate entry " << col;
                warnings.push_back(msg.str());
            }
        }
    }
    return warnings;
}

void EpiParams::validate(int regions) const
{
    require_nonnegative(beta, "epidemic.beta");
    require_nonnegative(gamma, "epidemic.gamma");
    require_nonnegative(lambda, "epidemic.lambda");
    require_nonnegative(kappa, "epidemic.kappa");
    require_nonnegative(vaccination, "epidemic.vaccination");
    if (!(theta >= 0.0 && theta <= 1.0)) {
        throw ModelError("epidemic.theta", "must lie in [0,1]");
    }
    if (beta_matrix.rows() != regions || beta_matrix.cols() != regions) {
        throw ModelError("epidemic.beta_matrix", "must be N x N");
    }
    if (!(beta_matrix.array() >= 0.0).all() || !beta_matrix.allFinite()) {
        throw ModelError("epidemic.beta_matrix", "entries must be finite and >= 0");
    }
    if (sigma_s.size() != regions || sigma_e.size() != regions) {
        throw ModelError("epidemic.sigma_s", "noise levels must have one entry per region");
    }
    if (!(sigma_s.array() >= 0.0).all() || !(sigma_e.array() >= 0.0).all()) {
        throw ModelError("epidemic.sigma_s", "noise levels must be >= 0");
    }
}

void CostParams::validate() const
{
    require_nonnegative(w, "cost.w");
    require_nonnegative(chi, "cost.chi");
    require_nonnegative(p, "cost.p");
    require_nonnegative(c, "cost.c");
    require_nonnegative(a, "cost.a");
    require_nonnegative(r, "cost.r");
    require_nonnegative(eta, "cost.eta");
    require_nonnegative(horizon, "cost.horizon");
}

CostParams CostParams::in_money_unit(double unit) const
{
    if (!(unit > 0.0)) {
        throw ModelError("money unit", "must be positive");
    }
    CostParams scaled = *this;
    scaled.w /= unit;
    scaled.chi /= unit;
    scaled.c /= unit;
    scaled.eta /= unit;
    return scaled;
}

void ModelParams::validate() const
{
    regions.validate();
    const int n = regions.count();
    if (travel.fractions.rows() != 0 && travel.fractions.rows() != n) {
        throw ModelError("travel.matrix", "dimension does not match the region count");
    }
    epi.validate(n);
    cost.validate();
}

StateVector::StateVector(VectorXd values)
    : values_(std::move(values))
{
    if (values_.size() % 3 != 0 || values_.size() == 0) {
        throw ModelError("state", "length must be a positive multiple of 3");
    }
}

StateVector StateVector::from_blocks(const VectorXd& s, const VectorXd& e, const VectorXd& i)
{
    if (s.size() != e.size() || s.size() != i.size()) {
        throw ModelError("state", "s, e, i blocks must have equal length");
    }
    VectorXd x(3 * s.size());
    x << s, e, i;
    return StateVector(std::move(x));
}

std::vector<std::string> StateVector::check(double delta) const
{
    std::vector<std::string> problems;
    static const char* block_names[] = {"s", "e", "i"};
    const int n_regions = regions();
    for (Eigen::Index k = 0; k < values_.size(); ++k) {
        const double value = values_[k];
        const char* block = block_names[k / n_regions];
        const int region = static_cast<int>(k % n_regions);
        if (!std::isfinite(value)) {
            problems.push_back(indexed(block, region) + " is not finite");
        }
        else if (value < -delta || value > 1.0 + delta) {
            std::ostringstream msg;
            msg << indexed(block, region) << " = " << value << " outside [0,1]";
            problems.push_back(msg.str());
        }
    }
    for (int n = 0; n < n_regions; ++n) {
        const double total = s(n) + e(n) + i(n);
        if (total > 1.0 + delta) {
            std::ostringstream msg;
            msg << "region " << n << ": s+e+i = " << total << " exceeds 1";
            problems.push_back(msg.str());
        }
    }
    return problems;
}

PolicyVector PolicyVector::lockdown_only(VectorXd ell)
{
    PolicyVector policy;
    policy.health = VectorXd::Zero(ell.size());
    policy.lockdown = std::move(ell);
    return policy;
}

void PolicyVector::validate(int regions) const
{
    if (lockdown.size() != regions || (health.size() != 0 && health.size() != regions)) {
        throw ModelError("policy", "one lockdown (and health) level per region required");
    }
    auto in_box = [](const VectorXd& v) {
        return ((v.array() >= 0.0) && (v.array() <= 1.0)).all();
    };
    if (!in_box(lockdown) || !in_box(health)) {
        throw ModelError("policy", "policy levels must lie in [0,1]");
    }
}

Calibration calibrate(double r0, double infectious_days, double ifr, double latent_days)
{
    if (!(r0 > 0.0)) {
        throw ModelError("epidemic.R0", "must be positive");
    }
    if (!(infectious_days > 0.0)) {
        throw ModelError("epidemic.infectious_days", "must be positive");
    }
    if (!(latent_days > 0.0)) {
        throw ModelError("epidemic.latent_days", "must be positive");
    }
    if (!(ifr >= 0.0 && ifr <= 1.0)) {
        throw ModelError("epidemic.ifr", "must lie in [0,1]");
    }
    return Calibration{r0 / infectious_days, 1.0 / infectious_days, ifr / infectious_days,
                       1.0 / latent_days};
}

MatrixXd build_transmission_matrix(double beta, const TravelMatrix& travel,
                                   const RegionSet& regions)
{
    const int n = regions.count();
    const MatrixXd& f = travel.fractions;
    if (f.rows() != n || f.cols() != n) {
        throw ModelError("travel.matrix", "dimension does not match the region count");
    }
    if (!(beta >= 0.0)) {
        throw ModelError("epidemic.beta", "must be >= 0");
    }
    MatrixXd result(n, n);
    for (int row = 0; row < n; ++row) {
        for (int col = 0; col < n; ++col) {
            if (row == col) {
                result(row, col) = beta * f(row, row) * f(row, row);
            }
            else {
                result(row, col) = beta * (f(row, col) * f(col, col) + f(col, row) * f(row, row)) *
                                   regions.populations[col] / regions.populations[row];
            }
        }
    }
    return result;
}

VectorXd infection_flux(const Eigen::Ref<const VectorXd>& x,
                        const Eigen::Ref<const VectorXd>& lockdown, const ModelParams& params)
{
    const int n = params.regions_count();
    const double theta = params.epi.theta;
    const auto s = x.segment(0, n);
    const auto i = x.segment(2 * n, n);
    const VectorXd open = (1.0 - theta * lockdown.array()).matrix();
    const VectorXd pressure = params.epi.beta_matrix * i.cwiseProduct(open);
    return s.cwiseProduct(open).cwiseProduct(pressure);
}

VectorXd drift(double t, const Eigen::Ref<const VectorXd>& x, const PolicyVector& policy,
               const ModelParams& params)
{
    // v and lambda are constants, so the health channel does not enter the drift.
    return drift(t, x, policy.lockdown, params);
}

VectorXd drift(double /*t*/, const Eigen::Ref<const VectorXd>& x,
               const Eigen::Ref<const VectorXd>& lockdown, const ModelParams& params)
{
    const int n = params.regions_count();
    const VectorXd flux = infection_flux(x, lockdown, params);
    const auto s = x.segment(0, n);
    const auto e = x.segment(n, n);
    const auto i = x.segment(2 * n, n);
    VectorXd b(3 * n);
    b.segment(0, n) = -flux - params.epi.vaccination * s;
    b.segment(n, n) = flux - params.epi.gamma * e;
    b.segment(2 * n, n) = params.epi.gamma * e - params.epi.lambda * i;
    return b;
}

VectorXd diffusion_apply(const Eigen::Ref<const VectorXd>& x, const Eigen::Ref<const VectorXd>& dW,
                         const ModelParams& params)
{
    const int n = params.regions_count();
    if (dW.size() != 2 * n) {
        throw ModelError("dW", "Brownian increment must have length 2N");
    }
    VectorXd out(3 * n);
    for (int j = 0; j < n; ++j) {
        const double ds = params.epi.sigma_s[j] * x[j] * dW[j];
        const double de = params.epi.sigma_e[j] * x[n + j] * dW[n + j];
        out[j] = -ds;
        out[n + j] = ds - de;
        out[2 * n + j] = de;
    }
    return out;
}

VectorXd diffusion_transpose_apply(const Eigen::Ref<const VectorXd>& x,
                                   const Eigen::Ref<const VectorXd>& p, const ModelParams& params)
{
    const int n = params.regions_count();
    VectorXd z(2 * n);
    for (int j = 0; j < n; ++j) {
        z[j] = params.epi.sigma_s[j] * x[j] * (p[n + j] - p[j]);
        z[n + j] = params.epi.sigma_e[j] * x[n + j] * (p[2 * n + j] - p[n + j]);
    }
    return z;
}

MatrixXd diffusion_matrix(const Eigen::Ref<const VectorXd>& x, const ModelParams& params)
{
    const int n = params.regions_count();
    MatrixXd sigma = MatrixXd::Zero(3 * n, 2 * n);
    for (int j = 0; j < n; ++j) {
        sigma(j, j) = -params.epi.sigma_s[j] * x[j];
        sigma(j + n, j) = params.epi.sigma_s[j] * x[j];
        sigma(j + n, j + n) = -params.epi.sigma_e[j] * x[n + j];
        sigma(j + 2 * n, j + n) = params.epi.sigma_e[j] * x[n + j];
    }
    return sigma;
}

double running_cost(int n, double t, const Eigen::Ref<const VectorXd>& x, double lockdown,
                    double health, const ModelParams& params)
{
    const int regions = params.regions_count();
    const CostParams& cost = params.cost;
    const double s = x[n];
    const double e = x[regions + n];
    const double i = x[2 * regions + n];
    const double discount = std::exp(-cost.r * t);
    const double population = params.regions.populations[n];
    const double economic = (s + e + i) * lockdown * cost.w;
    const double health_loss = cost.a * (params.epi.kappa * i * cost.chi + cost.p * i * cost.c);
    return discount * population * (economic + health_loss) + discount * cost.eta * health * health;
}

MatrixXd recovered_series(const MatrixXd& states)
{
    const auto n = states.rows() / 3;
    MatrixXd removed(n, states.cols());
    for (Eigen::Index col = 0; col < states.cols(); ++col) {
        for (Eigen::Index j = 0; j < n; ++j) {
            removed(j, col) = 1.0 - states(j, col) - states(n + j, col) - states(2 * n + j, col);
        }
    }
    return removed;
}

} // namespace seirgame
