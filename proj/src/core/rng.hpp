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

// Counter-based random streams.
//
// Every draw is a pure function of (seed, stream, index), so results do not
// depend on call order or on how work is split across workers. The engine is
// Philox4x32 with 10 rounds; the stream identifier occupies the upper half of
// the 128-bit counter and the draw index the lower half.

#include <array>
#include <cstdint>
#include <vector>

namespace seirgame
{

using Philox4x32Counter = std::array<std::uint32_t, 4>;
using Philox4x32Key = std::array<std::uint32_t, 2>;

Philox4x32Counter philox4x32(Philox4x32Counter counter, Philox4x32Key key);

enum class StreamPurpose : std::uint32_t {
    training = 1,
    validation = 2,
    simulation = 3,
    initialization = 4,
    probe_set = 5,
    test = 6,
};

/// Names one independent stream. `player` is -1 for streams shared by all
/// players; `step` distinguishes draws inside a stage (an SGD step index).
struct StreamId {
    int player = -1;
    int stage = 0;
    StreamPurpose purpose = StreamPurpose::simulation;
    std::uint32_t step = 0;

    std::uint64_t hash() const;
};

/// Random access into one stream: uniform and standard normal draws by index.
class CounterRng
{
public:
    CounterRng(std::uint64_t seed, const StreamId& stream);

    /// Uniform on (0,1), 53 bits.
    double uniform(std::uint64_t index) const;
    /// Standard normal (Box-Muller on the two halves of one Philox block).
    double normal(std::uint64_t index) const;

    void fill_uniform(std::vector<double>& out, std::uint64_t first_index = 0) const;
    void fill_normal(std::vector<double>& out, std::uint64_t first_index = 0) const;

private:
    Philox4x32Counter block(std::uint64_t block_index) const;

    Philox4x32Key key_;
    std::uint64_t stream_;
};

/// Gaussian(0, dt) increments laid out [path][step][dim] (row-major).
struct IncrementArray {
    int paths = 0;
    int steps = 0;
    int dim = 0;
    double dt = 0.0;
    std::vector<double> values;

    double operator()(int path, int step, int d) const
    {
        return values[(static_cast<std::size_t>(path) * steps + step) * dim + d];
    }
    const double* at(int path, int step) const
    {
        return values.data() + (static_cast<std::size_t>(path) * steps + step) * dim;
    }
};

IncrementArray brownian_increments(std::uint64_t seed, const StreamId& stream, int paths, int steps,
                                   int dim, double dt);

} // namespace seirgame
