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
#include "core/policy.hpp"

#include <stdexcept>

namespace seirgame
{

PlayerPolicy PlayerPolicy::fixed(double level)
{
    if (!(level >= 0.0 && level <= 1.0)) {
        throw std::invalid_argument("constant lockdown must lie in [0,1]");
    }
    PlayerPolicy policy;
    policy.constant = level;
    return policy;
}

PlayerPolicy PlayerPolicy::network(Mlp net)
{
    PlayerPolicy policy;
    policy.net = std::move(net);
    return policy;
}

PolicyProfile PolicyProfile::constant(int regions, double level, double horizon)
{
    PolicyProfile profile;
    profile.players.assign(regions, PlayerPolicy::fixed(level));
    profile.horizon = horizon;
    return profile;
}

RowVectorXd PolicyProfile::evaluate_player(int n, double t, const MatrixXd& states) const
{
    const PlayerPolicy& player = players.at(n);
    if (player.net) {
        return player.net->forward(network_inputs(t / horizon, states));
    }
    return RowVectorXd::Constant(states.cols(), player.constant);
}

MatrixXd PolicyProfile::evaluate(double t, const MatrixXd& states) const
{
    MatrixXd out(size(), states.cols());
    for (int n = 0; n < size(); ++n) {
        out.row(n) = evaluate_player(n, t, states);
    }
    return out;
}

PolicyProfile PolicyProfile::with_player(int n, PlayerPolicy policy) const
{
    PolicyProfile copy = *this;
    copy.players.at(n) = std::move(policy);
    return copy;
}

} // namespace seirgame
