//
//  scene.cpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#include <classroom/binaural/azimuth.hpp>
#include <classroom/dsp/signal.hpp>
#include <classroom/errors.hpp>
#include <classroom/scene/scene.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace classroom::scene {

using dsp::AudioBuffer;
using dsp::BinauralBuffer;

std::string to_string(PairType p) {
    switch (p) {
    case PairType::ChildChild: return "child-child";
    case PairType::ChildAdult: return "child-adult";
    case PairType::AdultAdult: return "adult-adult";
    }
    return "child-child";
}

PairType parse_pair_type(const std::string& s) {
    if (s == "child-child") return PairType::ChildChild;
    if (s == "child-adult") return PairType::ChildAdult;
    if (s == "adult-adult") return PairType::AdultAdult;
    throw ConfigError("unknown pair type '" + s + "'");
}

std::string to_string(BabbleReference r) {
    return r == BabbleReference::BothTalkers ? "both-talkers" : "first-talker";
}

BabbleReference parse_babble_reference(const std::string& s) {
    if (s == "both-talkers") return BabbleReference::BothTalkers;
    if (s == "first-talker") return BabbleReference::FirstTalker;
    throw ConfigError("babbleReference: unknown value '" + s + "'");
}

std::array<AgeGroup, 2> age_groups(PairType p) {
    switch (p) {
    case PairType::ChildChild: return {AgeGroup::Child, AgeGroup::Child};
    case PairType::ChildAdult: return {AgeGroup::Child, AgeGroup::Adult};
    case PairType::AdultAdult: return {AgeGroup::Adult, AgeGroup::Adult};
    }
    return {AgeGroup::Child, AgeGroup::Child};
}

void SceneConfig::validate() const {
    if (!(snrRangeDb.lo <= snrRangeDb.hi)) throw ConfigError("snrRangeDb must be an increasing range");
    if (!(babbleSnrRangeDb.lo <= babbleSnrRangeDb.hi)) throw ConfigError("babbleSnrRangeDb must be an increasing range");
    if (babbleMinSources < 1 || babbleMaxSources < babbleMinSources || babbleMaxSources > room::kRingDirections) {
        throw ConfigError("babbleSources must be a range within [1, 72]");
    }
    if (!room::is_ring_radius(distance)) throw ConfigError("distance must be one of 1.0, 1.5, 2.0 m");
}

double pooled_snr_db(const BinauralBuffer& reference, const BinauralBuffer& interferer) {
    return 10.0 * std::log10(reference.pooled_power() / interferer.pooled_power());
}

MixResult mix_at_snr(const BinauralBuffer& reference, const BinauralBuffer& interferer, double snrDb) {
    if (reference.size() != interferer.size() || reference.rate() != interferer.rate()) {
        throw InvalidInput("mix_at_snr needs signals of equal length and rate");
    }
    const double pr = reference.pooled_power(), pi = interferer.pooled_power();
    if (!(pr > 0.0) || !(pi > 0.0)) throw InvalidInput("mix_at_snr needs signals with nonzero power");
    MixResult out;
    out.gain = std::sqrt(pr / (pi * std::pow(10.0, snrDb / 10.0)));
    out.scaled = interferer.scaled(out.gain);
    return out;
}

int sample_babble_count(dsp::Rng& rng, int lo, int hi) { return static_cast<int>(rng.integer(lo, hi)); }

std::vector<double> babble_start_times(const std::vector<double>& durations, double length) {
    std::vector<double> starts;
    double t = 0.0;
    for (double d : durations) {
        if (t >= length) break;
        starts.push_back(t);
        t += kBabbleStartFraction * d;
    }
    return starts;
}

namespace {

BinauralBuffer render_static(const AudioBuffer& dry, const binaural::Brir& brir) {
    BinauralBuffer out(dsp::fft_convolve(dry, brir.response.left()), dsp::fft_convolve(dry, brir.response.right()));
    out.resize(dry.size());
    return out;
}

} // namespace

BabbleField build_babble_field(const UtterancePool& pool, const binaural::BrirBank& bank, dsp::Rng& rng, int count,
                               const std::vector<std::string>& excludedSpeakers) {
    if (count < 1 || count > room::kRingDirections) throw InvalidInput("babble source count out of range");
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const auto& id = pool.ref(i).speakerId;
        if (std::find(excludedSpeakers.begin(), excludedSpeakers.end(), id) == excludedSpeakers.end()) {
            eligible.push_back(i);
        }
    }
    // Fisher-Yates with the scene stream so draws are without replacement and reproducible.
    for (std::size_t i = eligible.size(); i > 1; --i) std::swap(eligible[i - 1], eligible[rng.below(i)]);
    std::vector<int> ring(room::kRingDirections);
    std::iota(ring.begin(), ring.end(), 0);
    for (std::size_t i = ring.size(); i > 1; --i) std::swap(ring[i - 1], ring[rng.below(i)]);

    const double rate = bank.rate();
    const std::size_t length = motion::kUtteranceSamples;
    BabbleField field;
    field.signal = BinauralBuffer(rate, length);
    std::size_t cursor = 0;
    for (int s = 0; s < count; ++s) {
        BabbleSource source;
        source.ringAzimuth = ring[static_cast<std::size_t>(s)] * room::kRingStepDeg;
        source.renderAzimuth = binaural::snap_azimuth(source.ringAzimuth);
        AudioBuffer stream(rate, length);
        double start = 0.0;
        while (start < motion::kUtteranceSeconds) {
            if (cursor >= eligible.size()) {
                throw PoolExhaustedError("babble pool exhausted after " + std::to_string(cursor) + " utterances");
            }
            const std::size_t idx = eligible[cursor++];
            const AudioBuffer utt = normalize_rms(pool.audio(idx));
            const std::size_t offset = dsp::samples_for(start, rate);
            for (std::size_t i = 0; i < utt.size() && offset + i < length; ++i) stream[offset + i] += utt[i];
            source.utterances.push_back(idx);
            source.paths.push_back(pool.ref(idx).filePath.generic_string());
            source.startSeconds.push_back(start);
            start += kBabbleStartFraction * utt.duration();
        }
        field.signal += render_static(stream, bank.at(source.renderAzimuth));
        field.sources.push_back(std::move(source));
    }
    return field;
}

SceneBundle synth_scene(const SceneConfig& cfg, const UtterancePool& pool, const binaural::BrirBank& bank,
                        const SceneContext& context) {
    cfg.validate();
    bank.validate();
    const dsp::Rng root(cfg.seed);

    auto groups = age_groups(cfg.pairType);
    auto pick = root.stream("talkers");
    if (cfg.pairType == PairType::ChildAdult && pick.coin()) std::swap(groups[0], groups[1]);
    const auto& first = pool.indices(groups[0]);
    const auto& second = pool.indices(groups[1]);
    if (first.empty() || second.empty()) {
        throw PoolExhaustedError("no " + to_string(first.empty() ? groups[0] : groups[1]) + " utterances in the pool",
                                 context.sceneId);
    }
    std::array<std::size_t, 2> chosen{first[pick.below(first.size())], 0};
    bool distinct = false;
    for (int attempt = 0; attempt < kTalkerRetries && !distinct; ++attempt) {
        chosen[1] = second[pick.below(second.size())];
        distinct = pool.ref(chosen[1]).speakerId != pool.ref(chosen[0]).speakerId;
    }
    if (!distinct) {
        throw PipelineError("could not draw two distinct speakers in " + std::to_string(kTalkerRetries) + " attempts");
    }

    SceneBundle bundle;
    auto& m = bundle.manifest;
    m.sceneId = context.sceneId;
    m.split = context.split;
    m.roomId = context.roomId;
    m.listener = context.listener;
    m.distance = cfg.distance;
    m.pairType = cfg.pairType;
    m.seed = cfg.seed;

    std::array<BinauralBuffer, 2> wet;
    for (std::size_t k = 0; k < 2; ++k) {
        auto& talker = m.talkers[k];
        const auto& ref = pool.ref(chosen[k]);
        talker.speakerId = ref.speakerId;
        talker.ageGroup = ref.ageGroup;
        talker.path = ref.filePath.generic_string();
        auto cropRng = root.stream("crop", k);
        const auto dry = crop_and_normalize(pool.audio(chosen[k]), cropRng, &talker.cropOffset);
        auto trajRng = root.stream("trajectory", k);
        talker.trajectory = motion::sample_trajectory(trajRng);
        wet[k] = motion::render_moving_source(dry, talker.trajectory, bank);
    }

    auto snrRng = root.stream("snr");
    m.mixtureSnrDb = snrRng.uniform(cfg.snrRangeDb.lo, cfg.snrRangeDb.hi);
    auto mix = mix_at_snr(wet[0], wet[1], m.mixtureSnrDb);
    m.interfererGain = mix.gain;
    bundle.references = {wet[0], std::move(mix.scaled)};

    m.babble = cfg.babble;
    if (cfg.babble) {
        auto babbleRng = root.stream("babble");
        const int count = sample_babble_count(babbleRng, cfg.babbleMinSources, cfg.babbleMaxSources);
        auto field = build_babble_field(pool, bank, babbleRng, count, {m.talkers[0].speakerId, m.talkers[1].speakerId});
        m.babbleSnrDb = root.stream("babble-snr").uniform(cfg.babbleSnrRangeDb.lo, cfg.babbleSnrRangeDb.hi);
        m.babbleReference = cfg.babbleReference;
        const auto speech = cfg.babbleReference == BabbleReference::BothTalkers
                                ? bundle.references[0] + bundle.references[1]
                                : bundle.references[0];
        auto scaled = mix_at_snr(speech, field.signal, m.babbleSnrDb);
        m.babbleGain = scaled.gain;
        m.babbleSources = std::move(field.sources);
        bundle.babble = std::move(scaled.scaled);
    }

    auto sum = [&] {
        BinauralBuffer y = bundle.references[0] + bundle.references[1];
        if (bundle.babble) y += *bundle.babble;
        return y;
    };
    bundle.mixture = sum();
    const double peak = bundle.mixture.peak();
    if (peak > 1.0) {
        m.peakGain = 0.99 / peak;
        for (auto& r : bundle.references) r.scale(m.peakGain);
        if (bundle.babble) bundle.babble->scale(m.peakGain);
        bundle.mixture = sum();
    }
    return bundle;
}

void to_json(nlohmann::json& j, const SceneManifest& m) {
    nlohmann::json talkers = nlohmann::json::array();
    for (const auto& t : m.talkers) {
        talkers.push_back({{"speakerId", t.speakerId},
                           {"ageGroup", to_string(t.ageGroup)},
                           {"path", t.path},
                           {"cropOffset", t.cropOffset},
                           {"trajectory", t.trajectory}});
    }
    nlohmann::json sources = nlohmann::json::array();
    for (const auto& s : m.babbleSources) {
        sources.push_back({{"ringAzimuth", s.ringAzimuth},
                           {"renderAzimuth", s.renderAzimuth},
                           {"utterances", s.utterances},
                           {"paths", s.paths},
                           {"startSeconds", s.startSeconds}});
    }
    j = {{"sceneId", m.sceneId},
         {"split", m.split},
         {"roomId", m.roomId},
         {"listener", {m.listener.x, m.listener.y, m.listener.z}},
         {"distance", m.distance},
         {"pairType", to_string(m.pairType)},
         {"talkers", talkers},
         {"mixtureSnrDb", m.mixtureSnrDb},
         {"interfererGain", m.interfererGain},
         {"babble",
          {{"enabled", m.babble},
           {"snrDb", m.babbleSnrDb},
           {"gain", m.babbleGain},
           {"reference", to_string(m.babbleReference)},
           {"sourceCount", m.babbleSources.size()},
           {"sources", sources}}},
         {"peakGain", m.peakGain},
         {"seed", m.seed},
         {"pipelineVersion", m.pipelineVersion},
         {"files", m.files}};
}

void from_json(const nlohmann::json& j, SceneManifest& m) {
    m.sceneId = j.at("sceneId").get<std::string>();
    m.split = j.at("split").get<std::string>();
    m.roomId = j.at("roomId").get<int>();
    const auto& l = j.at("listener");
    m.listener = {l.at(0).get<double>(), l.at(1).get<double>(), l.at(2).get<double>()};
    m.distance = j.at("distance").get<double>();
    m.pairType = parse_pair_type(j.at("pairType").get<std::string>());
    const auto& talkers = j.at("talkers");
    if (talkers.size() != 2) throw ConfigError("scene manifest must list two talkers");
    for (std::size_t k = 0; k < 2; ++k) {
        auto& t = m.talkers[k];
        t.speakerId = talkers[k].at("speakerId").get<std::string>();
        t.ageGroup = parse_age_group(talkers[k].at("ageGroup").get<std::string>());
        t.path = talkers[k].at("path").get<std::string>();
        t.cropOffset = talkers[k].at("cropOffset").get<std::size_t>();
        t.trajectory = talkers[k].at("trajectory").get<motion::Trajectory>();
    }
    m.mixtureSnrDb = j.at("mixtureSnrDb").get<double>();
    m.interfererGain = j.at("interfererGain").get<double>();
    const auto& b = j.at("babble");
    m.babble = b.at("enabled").get<bool>();
    m.babbleSnrDb = b.at("snrDb").get<double>();
    m.babbleGain = b.at("gain").get<double>();
    m.babbleReference = parse_babble_reference(b.value("reference", std::string("both-talkers")));
    m.babbleSources.clear();
    for (const auto& s : b.at("sources")) {
        BabbleSource src;
        src.ringAzimuth = s.at("ringAzimuth").get<int>();
        src.renderAzimuth = s.at("renderAzimuth").get<int>();
        src.utterances = s.at("utterances").get<std::vector<std::size_t>>();
        src.paths = s.at("paths").get<std::vector<std::string>>();
        src.startSeconds = s.at("startSeconds").get<std::vector<double>>();
        m.babbleSources.push_back(std::move(src));
    }
    m.peakGain = j.at("peakGain").get<double>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.pipelineVersion = j.at("pipelineVersion").get<int>();
    m.files = j.value("files", nlohmann::json::object());
}

} // namespace classroom::scene
