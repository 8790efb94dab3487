//
//  audio_buffer.cpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#include <classroom/dsp/audio_buffer.hpp>
#include <classroom/errors.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace classroom::dsp {

namespace {

void require_rate(double rate) {
    if (!(rate > 0.0) || !std::isfinite(rate)) {
        throw InvalidInput("sample rate must be positive, got " + std::to_string(rate));
    }
}

void require_compatible(const AudioBuffer& a, const AudioBuffer& b) {
    if (a.rate() != b.rate() || a.size() != b.size()) {
        throw InvalidInput("buffers differ in rate or length");
    }
}

} // namespace

AudioBuffer::AudioBuffer(double rate, std::size_t length) : rate_(rate), samples_(length, 0.0) {
    require_rate(rate);
}

AudioBuffer::AudioBuffer(double rate, std::vector<double> samples)
    : rate_(rate), samples_(std::move(samples)) {
    require_rate(rate);
    check_finite();
}

double AudioBuffer::energy() const noexcept {
    double e = 0.0;
    for (double v : samples_) e += v * v;
    return e;
}

double AudioBuffer::mean_power() const noexcept {
    return samples_.empty() ? 0.0 : energy() / static_cast<double>(samples_.size());
}

double AudioBuffer::rms() const noexcept { return std::sqrt(mean_power()); }

double AudioBuffer::peak() const noexcept {
    double p = 0.0;
    for (double v : samples_) p = std::max(p, std::abs(v));
    return p;
}

AudioBuffer AudioBuffer::slice(std::size_t begin, std::size_t end) const {
    AudioBuffer out(rate_, end > begin ? end - begin : 0);
    for (std::size_t i = begin; i < end && i < samples_.size(); ++i) out.samples_[i - begin] = samples_[i];
    return out;
}

void AudioBuffer::resize(std::size_t length) { samples_.resize(length, 0.0); }

void AudioBuffer::scale(double gain) noexcept {
    for (double& v : samples_) v *= gain;
}

AudioBuffer AudioBuffer::scaled(double gain) const {
    AudioBuffer out = *this;
    out.scale(gain);
    return out;
}

void AudioBuffer::check_finite() const {
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        if (!std::isfinite(samples_[i])) {
            throw InvalidInput("non-finite sample at index " + std::to_string(i));
        }
    }
}

AudioBuffer& AudioBuffer::operator+=(const AudioBuffer& other) {
    require_compatible(*this, other);
    for (std::size_t i = 0; i < samples_.size(); ++i) samples_[i] += other.samples_[i];
    return *this;
}

AudioBuffer& AudioBuffer::operator-=(const AudioBuffer& other) {
    require_compatible(*this, other);
    for (std::size_t i = 0; i < samples_.size(); ++i) samples_[i] -= other.samples_[i];
    return *this;
}

BinauralBuffer::BinauralBuffer(double rate, std::size_t length)
    : left_(rate, length), right_(rate, length) {}

BinauralBuffer::BinauralBuffer(AudioBuffer left, AudioBuffer right)
    : left_(std::move(left)), right_(std::move(right)) {
    require_compatible(left_, right_);
}

double BinauralBuffer::pooled_power() const noexcept {
    const std::size_t n = left_.size() + right_.size();
    return n == 0 ? 0.0 : (left_.energy() + right_.energy()) / static_cast<double>(n);
}

double BinauralBuffer::peak() const noexcept { return std::max(left_.peak(), right_.peak()); }

void BinauralBuffer::resize(std::size_t length) {
    left_.resize(length);
    right_.resize(length);
}

void BinauralBuffer::scale(double gain) noexcept {
    left_.scale(gain);
    right_.scale(gain);
}

BinauralBuffer BinauralBuffer::scaled(double gain) const {
    BinauralBuffer out = *this;
    out.scale(gain);
    return out;
}

BinauralBuffer& BinauralBuffer::operator+=(const BinauralBuffer& other) {
    left_ += other.left_;
    right_ += other.right_;
    return *this;
}

BinauralBuffer& BinauralBuffer::operator-=(const BinauralBuffer& other) {
    left_ -= other.left_;
    right_ -= other.right_;
    return *this;
}

} // namespace classroom::dsp
