//  Copyright 2026 The perivec Authors.
//
//  Licensed under the Apache License, Version 2.0 (the "License");
//  you may not use this file except in compliance with the License.
//  You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
//  Unless required by applicable law or agreed to in writing, software
//  distributed under the License is distributed on an "AS IS" BASIS,
//  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//  See the License for the specific language governing permissions and
//  limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace perivec {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Deterministic random stream. All randomness in the library flows through
// this wrapper so that sampling is reproducible for a fixed seed; the raw
// mt19937_64 output sequence is pinned by the standard and the helpers below
// avoid the implementation-defined std distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Unbiased uniform draw in [0, n) by rejection.
    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % n;
    }

    std::size_t index(std::size_t n) { return static_cast<std::size_t>(below(n)); }

    // Uniform in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Box-Muller; the second variate is discarded to keep the state simple.
    double normal() {
        double u1 = 1.0 - next_double();
        double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    bool chance(double p) { return next_double() < p; }

private:
    std::mt19937_64 gen_;
};

// Derives an independent stream from (seed, stage tag, worker index).
// Documented derivation: the tag is hashed and mixed with the seed and the
// worker index through splitmix64 before seeding the stream.
inline Rng derive_rng(std::uint64_t seed, std::string_view stage, std::uint64_t worker = 0) {
    std::uint64_t state = seed ^ fnv1a64(stage);
    splitmix64(state);
    state += worker;
    std::uint64_t derived = splitmix64(state);
    return Rng(derived);
}

}  // namespace perivec
