//
//  wav.hpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#pragma once

#include <classroom/dsp/audio_buffer.hpp>

#include <cstdint>
#include <filesystem>
#include <vector>

namespace classroom::dsp {

enum class SampleFormat { Pcm16, Float32 };

struct WavInfo {
    double rate = 0.0;
    int channels = 0;
    std::size_t frames = 0;
    SampleFormat format = SampleFormat::Float32;
};

/// Reads PCM16 / float32 files, including WAVE_FORMAT_EXTENSIBLE, with any
/// channel count and rate. One AudioBuffer per channel.
std::vector<AudioBuffer> read_wav(const std::filesystem::path& path);
WavInfo read_wav_info(const std::filesystem::path& path);

/// Writes interleaved channels of equal length and rate. PCM16 output is
/// clipped to full scale.
void write_wav(const std::filesystem::path& path, const std::vector<AudioBuffer>& channels,
               SampleFormat format = SampleFormat::Float32);
void write_wav(const std::filesystem::path& path, const BinauralBuffer& stereo,
               SampleFormat format = SampleFormat::Float32);

/// In-memory encoding used by write_wav; exposed for hashing and tests.
std::vector<std::uint8_t> encode_wav(const std::vector<AudioBuffer>& channels, SampleFormat format);
std::vector<AudioBuffer> decode_wav(const std::vector<std::uint8_t>& bytes);

BinauralBuffer read_binaural_wav(const std::filesystem::path& path);

} // namespace classroom::dsp
