//
//  corpus.hpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#pragma once

#include <classroom/dsp/audio_buffer.hpp>
#include <classroom/dsp/rng.hpp>

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace classroom::scene {

inline constexpr double kTargetRms = 0.05;

enum class AgeGroup { Child, Adult };

std::string to_string(AgeGroup g);
AgeGroup parse_age_group(const std::string& s);

struct UtteranceRef {
    std::filesystem::path filePath;
    std::string speakerId;
    AgeGroup ageGroup = AgeGroup::Child;
    std::string split;
    double durationSeconds = 0.0;
};

struct RejectedUtterance {
    std::filesystem::path filePath;
    std::string reason;
};

struct IngestReport {
    std::vector<UtteranceRef> accepted;
    std::vector<RejectedUtterance> rejected;
};

/// Reads a JSON array of {path, speakerId, ageGroup, split}; paths are relative to the manifest.
/// Utterances shorter than the scene length are rejected with a reason. Throws DisjointnessError
/// when a speaker appears in more than one split.
IngestReport ingest_corpus(const std::filesystem::path& manifestPath);

/// Throws DisjointnessError naming the first speaker found in two splits.
void check_speaker_disjointness(const std::vector<UtteranceRef>& refs);

/// Mono audio at 16 kHz: channels are averaged and other rates resampled.
dsp::AudioBuffer load_utterance(const UtteranceRef& ref);

/// A uniformly placed crop of the scene length, RMS-normalised to 0.05. `offset` receives the crop start in samples.
dsp::AudioBuffer crop_and_normalize(const dsp::AudioBuffer& audio, dsp::Rng& rng, std::size_t* offset = nullptr);
dsp::AudioBuffer crop_and_normalize(const UtteranceRef& ref, dsp::Rng& rng, std::size_t* offset = nullptr);

/// Whole utterance RMS-normalised to 0.05; throws InvalidInput for silence.
dsp::AudioBuffer normalize_rms(const dsp::AudioBuffer& audio);

/// Utterances of one split with audio decoded on first use. Safe to share between threads.
class UtterancePool {
public:
    UtterancePool() = default;
    explicit UtterancePool(std::vector<UtteranceRef> refs);
    /// In-memory pool, used by tests and synthetic corpora.
    UtterancePool(std::vector<UtteranceRef> refs, std::vector<dsp::AudioBuffer> audio);

    std::size_t size() const noexcept { return refs_.size(); }
    const UtteranceRef& ref(std::size_t i) const { return refs_.at(i); }
    const std::vector<UtteranceRef>& refs() const noexcept { return refs_; }
    /// Indices of utterances of an age group, in pool order.
    const std::vector<std::size_t>& indices(AgeGroup g) const;
    dsp::AudioBuffer audio(std::size_t i) const;

private:
    std::vector<UtteranceRef> refs_;
    std::map<AgeGroup, std::vector<std::size_t>> byAge_;
    struct Cache {
        std::mutex mutex;
        std::vector<std::shared_ptr<const dsp::AudioBuffer>> audio;
    };
    std::shared_ptr<Cache> cache_ = std::make_shared<Cache>(); // shared by copies

};

} // namespace classroom::scene
