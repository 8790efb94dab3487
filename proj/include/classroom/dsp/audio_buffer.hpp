//
//  audio_buffer.hpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace classroom::dsp {

inline constexpr double kCorpusRate = 16000.0;

/// Mono signal at a fixed sample rate. Samples are full-scale amplitudes
/// (nominally within +-1) held in double precision.
class AudioBuffer {
public:
    AudioBuffer() = default;
    AudioBuffer(double rate, std::size_t length);
    AudioBuffer(double rate, std::vector<double> samples);

    double rate() const noexcept { return rate_; }
    std::size_t size() const noexcept { return samples_.size(); }
    bool empty() const noexcept { return samples_.empty(); }
    double duration() const noexcept { return static_cast<double>(samples_.size()) / rate_; }

    std::span<const double> samples() const noexcept { return samples_; }
    std::span<double> samples() noexcept { return samples_; }
    const std::vector<double>& vector() const noexcept { return samples_; }

    double operator[](std::size_t i) const noexcept { return samples_[i]; }
    double& operator[](std::size_t i) noexcept { return samples_[i]; }

    double energy() const noexcept;
    double mean_power() const noexcept;
    double rms() const noexcept;
    double peak() const noexcept;

    /// Copy of [begin, end); positions past the end read as zero.
    AudioBuffer slice(std::size_t begin, std::size_t end) const;
    /// Truncate or zero-pad to exactly `length` samples.
    void resize(std::size_t length);
    void scale(double gain) noexcept;
    AudioBuffer scaled(double gain) const;

    /// Throws InvalidInput if any sample is NaN or infinite.
    void check_finite() const;

    AudioBuffer& operator+=(const AudioBuffer& other);
    AudioBuffer& operator-=(const AudioBuffer& other);
    friend AudioBuffer operator+(AudioBuffer a, const AudioBuffer& b) { return a += b; }
    friend AudioBuffer operator-(AudioBuffer a, const AudioBuffer& b) { return a -= b; }
    bool operator==(const AudioBuffer&) const = default;

private:
    double rate_ = kCorpusRate;
    std::vector<double> samples_;
};

/// Left/right ear pair with matching rate and length.
class BinauralBuffer {
public:
    BinauralBuffer() = default;
    BinauralBuffer(double rate, std::size_t length);
    BinauralBuffer(AudioBuffer left, AudioBuffer right);

    const AudioBuffer& left() const noexcept { return left_; }
    const AudioBuffer& right() const noexcept { return right_; }
    AudioBuffer& left() noexcept { return left_; }
    AudioBuffer& right() noexcept { return right_; }
    const AudioBuffer& ear(int e) const noexcept { return e == 0 ? left_ : right_; }
    AudioBuffer& ear(int e) noexcept { return e == 0 ? left_ : right_; }

    double rate() const noexcept { return left_.rate(); }
    std::size_t size() const noexcept { return left_.size(); }

    /// Mean power pooled over both ears.
    double pooled_power() const noexcept;
    double peak() const noexcept;

    void resize(std::size_t length);
    void scale(double gain) noexcept;
    BinauralBuffer scaled(double gain) const;
    /// Left and right exchanged.
    BinauralBuffer swapped() const { return {right_, left_}; }

    BinauralBuffer& operator+=(const BinauralBuffer& other);
    BinauralBuffer& operator-=(const BinauralBuffer& other);
    friend BinauralBuffer operator+(BinauralBuffer a, const BinauralBuffer& b) { return a += b; }
    friend BinauralBuffer operator-(BinauralBuffer a, const BinauralBuffer& b) { return a -= b; }
    bool operator==(const BinauralBuffer&) const = default;

private:
    AudioBuffer left_;
    AudioBuffer right_;
};

} // namespace classroom::dsp
