//
//  rng.hpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#pragma once

#include <cstdint>
#include <string_view>

namespace classroom::dsp {

/// Counter-based generator. Draw i of a stream is a pure function of
/// (key, i), so a labeled sub-stream such as "room/17/trajectory/0" yields the
/// same sequence no matter which other streams were consumed before it or on
/// which thread. Distributions are computed from raw bits here rather than
/// through <random> so sequences are identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept;

    Rng stream(std::string_view label) const noexcept;
    Rng stream(std::string_view label, std::uint64_t index) const noexcept;

    std::uint64_t key() const noexcept { return key_; }
    std::uint64_t counter() const noexcept { return counter_; }

    std::uint64_t next_u64() noexcept;
    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept;
    double uniform(double lo, double hi) noexcept;
    /// Uniform on [0, n); n must be > 0.
    std::uint64_t below(std::uint64_t n) noexcept;
    /// Uniform on the closed range [lo, hi].
    std::int64_t integer(std::int64_t lo, std::int64_t hi) noexcept;
    double normal() noexcept;
    bool coin() noexcept { return (next_u64() >> 63) != 0; }

private:
    Rng(std::uint64_t key, std::uint64_t counter) noexcept : key_(key), counter_(counter) {}

    std::uint64_t key_;
    std::uint64_t counter_;
};

} // namespace classroom::dsp
