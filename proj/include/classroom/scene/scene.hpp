//
//  scene.hpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#pragma once

#include <classroom/binaural/brir.hpp>
#include <classroom/dsp/audio_buffer.hpp>
#include <classroom/dsp/rng.hpp>
#include <classroom/motion/trajectory.hpp>
#include <classroom/scene/corpus.hpp>

#include <json.hpp>

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace classroom::scene {

inline constexpr int kPipelineVersion = 1;
inline constexpr int kTalkerRetries = 10;
/// Each babble utterance starts once 30% of the previous one has played.
inline constexpr double kBabbleStartFraction = 0.3;

enum class PairType { ChildChild, ChildAdult, AdultAdult };

std::string to_string(PairType p);
PairType parse_pair_type(const std::string& s);
std::array<AgeGroup, 2> age_groups(PairType p);

/// Speech power that the babble SNR is measured against.
enum class BabbleReference { BothTalkers, FirstTalker };

std::string to_string(BabbleReference r);
BabbleReference parse_babble_reference(const std::string& s);

struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

struct SceneConfig {
    PairType pairType = PairType::ChildChild;
    Range snrRangeDb{0.0, 5.0};
    bool babble = false;
    Range babbleSnrRangeDb{-2.5, 15.0};
    int babbleMinSources = 3;
    int babbleMaxSources = 8;
    BabbleReference babbleReference = BabbleReference::BothTalkers;
    double distance = 1.0;
    std::uint64_t seed = 0;

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

struct MixResult {
    dsp::BinauralBuffer scaled;
    double gain = 1.0;
};

/// Scales the interferer so that pooled reference power over interferer power equals `snrDb`.
MixResult mix_at_snr(const dsp::BinauralBuffer& reference, const dsp::BinauralBuffer& interferer, double snrDb);

/// 10 log10 of pooled power ratio.
double pooled_snr_db(const dsp::BinauralBuffer& reference, const dsp::BinauralBuffer& interferer);

struct BabbleSource {
    int ringAzimuth = 0;    // 0..355
    int renderAzimuth = 0;  // frontal label used for rendering
    std::vector<std::size_t> utterances; // pool indices
    std::vector<std::string> paths;
    std::vector<double> startSeconds;
};

struct BabbleField {
    dsp::BinauralBuffer signal;
    std::vector<BabbleSource> sources;
};

int sample_babble_count(dsp::Rng& rng, int lo = 3, int hi = 8);

/// Start times of consecutive utterances in one babble stream, up to the scene length.
std::vector<double> babble_start_times(const std::vector<double>& durations, double length);

/// Static babble streams at `count` ring locations; utterances come from `pool` without replacement,
/// skipping `excludedSpeakers`. Throws PoolExhaustedError when the pool runs dry.
BabbleField build_babble_field(const UtterancePool& pool, const binaural::BrirBank& bank, dsp::Rng& rng, int count,
                               const std::vector<std::string>& excludedSpeakers = {});

struct TalkerRecord {
    std::string speakerId;
    AgeGroup ageGroup = AgeGroup::Child;
    std::string path;
    std::size_t cropOffset = 0;
    motion::Trajectory trajectory;
};

struct SceneManifest {
    std::string sceneId;
    std::string split;
    int roomId = 0;
    room::Point3 listener;
    double distance = 1.0;
    PairType pairType = PairType::ChildChild;
    std::array<TalkerRecord, 2> talkers;
    double mixtureSnrDb = 0.0;
    double interfererGain = 1.0;
    bool babble = false;
    double babbleSnrDb = 0.0;
    double babbleGain = 1.0;
    BabbleReference babbleReference = BabbleReference::BothTalkers;
    std::vector<BabbleSource> babbleSources;
    double peakGain = 1.0;
    std::uint64_t seed = 0;
    int pipelineVersion = kPipelineVersion;
    nlohmann::json files = nlohmann::json::object();
};

void to_json(nlohmann::json& j, const SceneManifest& m);
void from_json(const nlohmann::json& j, SceneManifest& m);

struct SceneBundle {
    dsp::BinauralBuffer mixture;
    std::array<dsp::BinauralBuffer, 2> references;
    std::optional<dsp::BinauralBuffer> babble;
    SceneManifest manifest;
};

struct SceneContext {
    std::string sceneId;
    std::string split;
    int roomId = 0;
    room::Point3 listener;
};

/// Renders one two-talker scene. All randomness comes from `cfg.seed`.
SceneBundle synth_scene(const SceneConfig& cfg, const UtterancePool& pool, const binaural::BrirBank& bank,
                        const SceneContext& context = {});

} // namespace classroom::scene
