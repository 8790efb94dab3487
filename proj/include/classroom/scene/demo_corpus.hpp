//
//  demo_corpus.hpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#pragma once

#include <classroom/dsp/audio_buffer.hpp>
#include <classroom/scene/corpus.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace classroom::scene {

/// Voiced, syllable-modulated harmonic signals standing in for a speech
/// corpus. Children get f0 in 230-330 Hz, adults 95-180 Hz.
struct DemoCorpusOptions {
    std::vector<std::string> splits{"train", "val", "test"};
    int speakersPerGroup = 6;
    int utterancesPerSpeaker = 4;
    double minSeconds = 2.6;
    double maxSeconds = 3.6;
    /// Per-speaker count of extra utterances that are too short to be used.
    int shortPerSpeaker = 0;
    double rate = 16000.0;
    std::uint64_t seed = 7;
};

struct DemoUtterance {
    UtteranceRef ref;
    dsp::AudioBuffer audio;
};

dsp::AudioBuffer synth_voice(AgeGroup group, double seconds, double rate, dsp::Rng& rng);

std::vector<DemoUtterance> make_demo_corpus(const DemoCorpusOptions& options);

/// In-memory pools keyed by split; short utterances are dropped as ingest would.
std::map<std::string, UtterancePool> demo_pools(const DemoCorpusOptions& options);

/// Writes WAV files and a corpus manifest.json under `dir`; returns the manifest path.
std::filesystem::path write_demo_corpus(const std::filesystem::path& dir, const DemoCorpusOptions& options);

} // namespace classroom::scene
