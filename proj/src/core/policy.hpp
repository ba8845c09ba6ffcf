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

#include "core/neural.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace seirgame
{

/// Lockdown rule of one player: a policy network l(t,x) or a constant.
struct PlayerPolicy {
    std::optional<Mlp> net;
    double constant = 0.0;

    static PlayerPolicy fixed(double level);
    static PlayerPolicy network(Mlp net);
};

/// Joint Markovian lockdown policy for all players.
struct PolicyProfile {
    std::vector<PlayerPolicy> players;
    double horizon = 1.0; ///< networks receive t / horizon

    // Provenance.
    int stage = 0;
    std::string config_digest;
    std::uint64_t seed = 0;

    int size() const { return static_cast<int>(players.size()); }

    static PolicyProfile constant(int regions, double level, double horizon);

    /// Lockdown of player n at (t, x) for each state column.
    RowVectorXd evaluate_player(int n, double t, const MatrixXd& states) const;
    /// All players: N x B.
    MatrixXd evaluate(double t, const MatrixXd& states) const;

    /// Copy with player n replaced (a unilateral deviation).
    PolicyProfile with_player(int n, PlayerPolicy policy) const;
};

} // namespace seirgame
