//
//  demo_corpus.cpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#include <classroom/dsp/rng.hpp>
#include <classroom/dsp/signal.hpp>
#include <classroom/dsp/wav.hpp>
#include <classroom/errors.hpp>
#include <classroom/motion/trajectory.hpp>
#include <classroom/scene/demo_corpus.hpp>

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

namespace classroom::scene {

namespace fs = std::filesystem;

dsp::AudioBuffer synth_voice(AgeGroup group, double seconds, double rate, dsp::Rng& rng) {
    const bool child = group == AgeGroup::Child;
    const double f0 = child ? rng.uniform(230.0, 330.0) : rng.uniform(95.0, 180.0);
    const double formant = child ? rng.uniform(900.0, 1400.0) : rng.uniform(500.0, 900.0);
    const double syllableRate = rng.uniform(3.0, 5.5);
    const double driftRate = rng.uniform(0.3, 1.2);
    const double phase0 = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const auto n = dsp::samples_for(seconds, rate);
    dsp::AudioBuffer out(rate, n);
    double phase = 0.0;
    const int harmonics = static_cast<int>(std::floor(0.45 * rate / f0));
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / rate;
        const double pitch = f0 * (1.0 + 0.08 * std::sin(2.0 * std::numbers::pi * driftRate * t + phase0));
        phase += 2.0 * std::numbers::pi * pitch / rate;
        double v = 0.0;
        // sin(h*phase) by the Chebyshev recurrence.
        const double twoCos = 2.0 * std::cos(phase);
        double prev = 0.0, cur = std::sin(phase);
        for (int h = 1; h <= harmonics; ++h) {
            const double x = (h * pitch - formant) / (0.6 * formant);
            v += cur / ((1.0 + x * x) * std::sqrt(h));
            const double next = twoCos * cur - prev;
            prev = cur;
            cur = next;
        }
        const double envelope = std::pow(std::max(0.0, std::sin(std::numbers::pi * syllableRate * t + phase0)), 0.7);
        out[i] = 0.1 * envelope * v + 0.002 * (rng.uniform() - 0.5);
    }
    return out;
}

std::vector<DemoUtterance> make_demo_corpus(const DemoCorpusOptions& options) {
    if (options.speakersPerGroup < 1 || options.utterancesPerSpeaker < 1) {
        throw InvalidInput("demo corpus needs at least one speaker and utterance per group");
    }
    if (!(options.minSeconds >= motion::kUtteranceSeconds && options.maxSeconds >= options.minSeconds)) {
        throw InvalidInput("demo corpus durations must be at least the utterance length");
    }
    const dsp::Rng master(options.seed);
    std::vector<DemoUtterance> out;
    for (const auto& split : options.splits) {
        for (AgeGroup g : {AgeGroup::Child, AgeGroup::Adult}) {
            for (int s = 0; s < options.speakersPerGroup; ++s) {
                char id[64];
                std::snprintf(id, sizeof id, "%s-%s-%02d", split.c_str(), to_string(g).c_str(), s);
                auto rng = master.stream(id);
                const int total = options.utterancesPerSpeaker + options.shortPerSpeaker;
                for (int u = 0; u < total; ++u) {
                    const bool shortOne = u >= options.utterancesPerSpeaker;
                    const double seconds = shortOne ? rng.uniform(0.8, 2.0)
                                                    : rng.uniform(options.minSeconds, options.maxSeconds);
                    DemoUtterance d;
                    char file[96];
                    std::snprintf(file, sizeof file, "%s/%s_u%02d.wav", split.c_str(), id, u);
                    d.ref.filePath = file;
                    d.ref.speakerId = id;
                    d.ref.ageGroup = g;
                    d.ref.split = split;
                    d.ref.durationSeconds = seconds;
                    d.audio = synth_voice(g, seconds, options.rate, rng);
                    out.push_back(std::move(d));
                }
            }
        }
    }
    return out;
}

std::map<std::string, UtterancePool> demo_pools(const DemoCorpusOptions& options) {
    std::map<std::string, std::pair<std::vector<UtteranceRef>, std::vector<dsp::AudioBuffer>>> grouped;
    for (auto& d : make_demo_corpus(options)) {
        if (d.audio.duration() < motion::kUtteranceSeconds) continue;
        auto& [refs, audio] = grouped[d.ref.split];
        refs.push_back(std::move(d.ref));
        audio.push_back(std::move(d.audio));
    }
    std::map<std::string, UtterancePool> pools;
    for (auto& [split, g] : grouped) pools.emplace(split, UtterancePool(std::move(g.first), std::move(g.second)));
    return pools;
}

fs::path write_demo_corpus(const fs::path& dir, const DemoCorpusOptions& options) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& d : make_demo_corpus(options)) {
        const auto path = dir / d.ref.filePath;
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create " + path.parent_path().string());
        dsp::write_wav(path, std::vector<dsp::AudioBuffer>{d.audio}, dsp::SampleFormat::Pcm16);
        rows.push_back({{"path", d.ref.filePath.generic_string()},
                        {"speakerId", d.ref.speakerId},
                        {"ageGroup", to_string(d.ref.ageGroup)},
                        {"split", d.ref.split}});
    }
    const auto manifest = dir / "manifest.json";
    std::ofstream out(manifest);
    if (!out) throw IoError("cannot write " + manifest.string());
    out << rows.dump(2) << '\n';
    return manifest;
}

} // namespace classroom::scene
