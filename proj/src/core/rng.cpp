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
#include "core/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace seirgame
{

namespace
{

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo)
{
    const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(product >> 32);
    lo = static_cast<std::uint32_t>(product);
}

std::uint64_t splitmix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline double to_unit_open(std::uint32_t hi, std::uint32_t lo)
{
    // 53 random bits mapped to (0,1): (k + 0.5) / 2^53.
    const std::uint64_t bits =
        ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

} // namespace

Philox4x32Counter philox4x32(Philox4x32Counter ctr, Philox4x32Key key)
{
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
        mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kPhiloxW0;
        key[1] += kPhiloxW1;
    }
    return ctr;
}

std::uint64_t StreamId::hash() const
{
    std::uint64_t h = splitmix64(static_cast<std::uint64_t>(static_cast<std::uint32_t>(player)));
    h = splitmix64(h ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(stage)));
    h = splitmix64(h ^ static_cast<std::uint64_t>(purpose));
    h = splitmix64(h ^ step);
    return h;
}

CounterRng::CounterRng(std::uint64_t seed, const StreamId& stream)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}
    , stream_(stream.hash())
{
}

Philox4x32Counter CounterRng::block(std::uint64_t block_index) const
{
    return philox4x32({static_cast<std::uint32_t>(block_index),
                       static_cast<std::uint32_t>(block_index >> 32),
                       static_cast<std::uint32_t>(stream_),
                       static_cast<std::uint32_t>(stream_ >> 32)},
                      key_);
}

double CounterRng::uniform(std::uint64_t index) const
{
    const auto r = block(index / 2);
    return index % 2 == 0 ? to_unit_open(r[0], r[1]) : to_unit_open(r[2], r[3]);
}

double CounterRng::normal(std::uint64_t index) const
{
    const auto r = block(index / 2);
    const double u1 = to_unit_open(r[0], r[1]);
    const double u2 = to_unit_open(r[2], r[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return index % 2 == 0 ? radius * std::cos(angle) : radius * std::sin(angle);
}

void CounterRng::fill_uniform(std::vector<double>& out, std::uint64_t first_index) const
{
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = uniform(first_index + k);
    }
}

void CounterRng::fill_normal(std::vector<double>& out, std::uint64_t first_index) const
{
    std::size_t k = 0;
    // An odd first index is the second half of a block.
    if (first_index % 2 == 1 && !out.empty()) {
        out[k++] = normal(first_index);
    }
    for (; k + 1 < out.size(); k += 2) {
        const auto r = block((first_index + k) / 2);
        const double u1 = to_unit_open(r[0], r[1]);
        const double u2 = to_unit_open(r[2], r[3]);
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        out[k] = radius * std::cos(angle);
        out[k + 1] = radius * std::sin(angle);
    }
    if (k < out.size()) {
        out[k] = normal(first_index + k);
    }
}

IncrementArray brownian_increments(std::uint64_t seed, const StreamId& stream, int paths, int steps,
                                   int dim, double dt)
{
    if (paths < 0 || steps < 0 || dim < 0 || !(dt > 0.0)) {
        throw std::invalid_argument("brownian_increments: invalid shape or step");
    }
    IncrementArray inc;
    inc.paths = paths;
    inc.steps = steps;
    inc.dim = dim;
    inc.dt = dt;
    inc.values.resize(static_cast<std::size_t>(paths) * steps * dim);
    CounterRng rng(seed, stream);
    rng.fill_normal(inc.values);
    const double scale = std::sqrt(dt);
    for (double& v : inc.values) {
        v *= scale;
    }
    return inc;
}

} // namespace seirgame
