//
//  corpus.cpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#include <classroom/dsp/signal.hpp>
#include <classroom/dsp/wav.hpp>
#include <classroom/errors.hpp>
#include <classroom/motion/trajectory.hpp>
#include <classroom/scene/corpus.hpp>

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>

namespace classroom::scene {

namespace fs = std::filesystem;
using dsp::AudioBuffer;

std::string to_string(AgeGroup g) { return g == AgeGroup::Child ? "child" : "adult"; }

AgeGroup parse_age_group(const std::string& s) {
    if (s == "child") return AgeGroup::Child;
    if (s == "adult") return AgeGroup::Adult;
    throw ConfigError("unknown age group '" + s + "'");
}

void check_speaker_disjointness(const std::vector<UtteranceRef>& refs) {
    std::map<std::string, std::string> home;
    for (const auto& r : refs) {
        const auto [it, fresh] = home.emplace(r.speakerId, r.split);
        if (!fresh && it->second != r.split) {
            throw DisjointnessError("speaker '" + r.speakerId + "' appears in splits '" + it->second + "' and '" +
                                        r.split + "'",
                                    r.speakerId);
        }
    }
}

IngestReport ingest_corpus(const fs::path& manifestPath) {
    std::ifstream in(manifestPath);
    if (!in) throw IoError("cannot open corpus manifest " + manifestPath.string());
    nlohmann::json rows;
    try {
        in >> rows;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed corpus manifest " + manifestPath.string() + ": " + e.what());
    }
    if (!rows.is_array()) throw ConfigError("corpus manifest must be a JSON array");

    std::vector<UtteranceRef> all;
    for (const auto& row : rows) {
        UtteranceRef r;
        try {
            r.filePath = manifestPath.parent_path() / row.at("path").get<std::string>();
            r.speakerId = row.at("speakerId").get<std::string>();
            r.ageGroup = parse_age_group(row.at("ageGroup").get<std::string>());
            r.split = row.at("split").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("malformed corpus manifest row: " + std::string(e.what()));
        }
        if (r.speakerId.empty()) throw ConfigError("corpus manifest row with empty speakerId");
        all.push_back(std::move(r));
    }
    check_speaker_disjointness(all);

    IngestReport report;
    for (auto& r : all) {
        const auto info = dsp::read_wav_info(r.filePath);
        r.durationSeconds = static_cast<double>(info.frames) / info.rate;
        if (r.durationSeconds < motion::kUtteranceSeconds) {
            report.rejected.push_back({r.filePath, "shorter than " + std::to_string(motion::kUtteranceSeconds) + " s"});
            continue;
        }
        report.accepted.push_back(std::move(r));
    }
    return report;
}

AudioBuffer load_utterance(const UtteranceRef& ref) {
    const auto channels = dsp::read_wav(ref.filePath);
    AudioBuffer mono(channels.front().rate(), channels.front().size());
    for (const auto& c : channels)
        for (std::size_t i = 0; i < mono.size(); ++i) mono[i] += c[i] / static_cast<double>(channels.size());
    return dsp::resample(mono, dsp::kCorpusRate);
}

AudioBuffer normalize_rms(const AudioBuffer& audio) {
    const double rms = audio.rms();
    if (!(rms > 0.0)) throw InvalidInput("cannot normalise a silent utterance");
    return audio.scaled(kTargetRms / rms);
}

AudioBuffer crop_and_normalize(const AudioBuffer& audio, dsp::Rng& rng, std::size_t* offset) {
    const std::size_t length = dsp::samples_for(motion::kUtteranceSeconds, audio.rate());
    if (audio.size() < length) throw InvalidInput("utterance is shorter than the scene length");
    const auto start = static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(audio.size() - length)));
    if (offset) *offset = start;
    return normalize_rms(audio.slice(start, start + length));
}

AudioBuffer crop_and_normalize(const UtteranceRef& ref, dsp::Rng& rng, std::size_t* offset) {
    return crop_and_normalize(load_utterance(ref), rng, offset);
}

UtterancePool::UtterancePool(std::vector<UtteranceRef> refs) : refs_(std::move(refs)) {
    cache_->audio.resize(refs_.size());
    for (std::size_t i = 0; i < refs_.size(); ++i) byAge_[refs_[i].ageGroup].push_back(i);
}

UtterancePool::UtterancePool(std::vector<UtteranceRef> refs, std::vector<AudioBuffer> audio)
    : UtterancePool(std::move(refs)) {
    if (audio.size() != refs_.size()) throw InvalidInput("pool audio and refs differ in count");
    for (std::size_t i = 0; i < audio.size(); ++i) {
        refs_[i].durationSeconds = audio[i].duration();
        cache_->audio[i] = std::make_shared<const AudioBuffer>(std::move(audio[i]));
    }
}

const std::vector<std::size_t>& UtterancePool::indices(AgeGroup g) const {
    static const std::vector<std::size_t> none;
    const auto it = byAge_.find(g);
    return it == byAge_.end() ? none : it->second;
}

AudioBuffer UtterancePool::audio(std::size_t i) const {
    auto& slot = cache_->audio.at(i);
    {
        std::lock_guard lock(cache_->mutex);
        if (slot) return *slot;
    }
    auto loaded = std::make_shared<const AudioBuffer>(load_utterance(refs_[i]));
    std::lock_guard lock(cache_->mutex);
    if (!slot) slot = loaded;
    return *slot;
}

} // namespace classroom::scene
