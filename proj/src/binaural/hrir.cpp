//
//  hrir.cpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#include <classroom/binaural/azimuth.hpp>
#include <classroom/binaural/hrir.hpp>
#include <classroom/dsp/fft.hpp>
#include <classroom/dsp/signal.hpp>
#include <classroom/dsp/wav.hpp>
#include <classroom/errors.hpp>
#include <classroom/room/geometry.hpp>

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace classroom::binaural {

namespace fs = std::filesystem;
using dsp::AudioBuffer;
using dsp::BinauralBuffer;

namespace {

constexpr int kDelayHalfWidth = 16;

// Hann-windowed sinc impulse centred at `delay`; an integer delay gives an exact unit impulse.
AudioBuffer fractional_impulse(double delay, std::size_t length, double rate) {
    AudioBuffer h(rate, length);
    const auto base = static_cast<long>(std::floor(delay));
    for (long n = base - kDelayHalfWidth + 1; n <= base + kDelayHalfWidth; ++n) {
        if (n < 0 || n >= static_cast<long>(length)) continue;
        const double t = static_cast<double>(n) - delay;
        if (std::abs(t) >= kDelayHalfWidth) continue;
        const double sinc = t == 0.0 ? 1.0 : std::sin(std::numbers::pi * t) / (std::numbers::pi * t);
        const double window = 0.5 * (1.0 + std::cos(std::numbers::pi * t / kDelayHalfWidth));
        h[static_cast<std::size_t>(n)] = sinc * window;
    }
    return h;
}

// Magnitude of a first-order low-pass with no phase shift, so the shadow leaves the interaural delay intact.
AudioBuffer zero_phase_lowpass(const AudioBuffer& x, double cutoff) {
    const std::size_t n = dsp::fast_fft_size(4 * x.size());
    auto spectrum = dsp::rfft(x.samples(), n);
    for (std::size_t k = 0; k < spectrum.size(); ++k) {
        const double f = x.rate() * static_cast<double>(k) / static_cast<double>(n);
        spectrum[k] /= std::sqrt(1.0 + (f / cutoff) * (f / cutoff));
    }
    auto y = dsp::irfft(spectrum, n);
    y.resize(x.size());
    return AudioBuffer(x.rate(), std::move(y));
}

std::string join(const std::vector<int>& values) {
    std::ostringstream out;
    for (std::size_t i = 0; i < values.size(); ++i) out << (i ? ", " : "") << values[i];
    return out.str();
}

} // namespace

HrirSet::HrirSet(std::map<int, BinauralBuffer> responses, double referenceDistance, HrirOrigin origin)
    : responses_(std::move(responses)), referenceDistance_(referenceDistance), origin_(origin) {
    std::vector<int> missing;
    for (int az : frontal_azimuths())
        if (!responses_.contains(az)) missing.push_back(az);
    if (!missing.empty()) throw PackIncompleteError("HRIR set is missing azimuths: " + join(missing), missing);
    for (const auto& [az, h] : responses_) {
        if (!is_frontal_grid(az)) throw InvalidInput("HRIR azimuth " + std::to_string(az) + " is off the frontal grid");
    }
    if (!(referenceDistance_ > 0.0)) throw InvalidInput("HRIR reference distance must be positive");
    const auto& first = responses_.begin()->second;
    rate_ = first.rate();
    length_ = first.size();
    if (length_ == 0) throw InvalidInput("HRIRs must not be empty");
    for (const auto& [az, h] : responses_) {
        if (h.size() != length_ || h.right().size() != length_ || h.rate() != rate_ || h.right().rate() != rate_) {
            throw InvalidInput("HRIR at azimuth " + std::to_string(az) + " differs in length or rate");
        }
    }
}

const BinauralBuffer& HrirSet::at(int azimuthDeg) const {
    const auto it = responses_.find(azimuthDeg);
    if (it == responses_.end()) {
        throw MissingAzimuthError("no HRIR for azimuth " + std::to_string(azimuthDeg), azimuthDeg);
    }
    return it->second;
}

double HrirSet::mean_energy() const noexcept {
    if (responses_.empty()) return 0.0;
    double total = 0.0;
    for (const auto& [az, h] : responses_) total += h.left().energy() + h.right().energy();
    return total / static_cast<double>(responses_.size());
}

double woodworth_itd(double headRadius, double azimuthDeg) noexcept {
    const double theta = azimuthDeg * std::numbers::pi / 180.0;
    return headRadius / room::kSpeedOfSound * (theta + std::sin(theta));
}

BinauralBuffer synth_hrir(double headRadius, double azimuthDeg, double rate) {
    if (!(headRadius >= 0.05 && headRadius <= 0.12)) throw InvalidInput("head radius must lie in [0.05, 0.12] m");
    if (!(std::abs(azimuthDeg) <= 90.0)) throw InvalidInput("synthetic HRIRs cover azimuths within +-90 degrees");
    if (!(rate > 0.0)) throw InvalidInput("sample rate must be positive");

    const double lateral = std::abs(azimuthDeg);
    const double bulk = static_cast<double>(kSynthBulkDelay);
    const AudioBuffer nearEar = fractional_impulse(bulk, kSynthHrirLength, rate);
    AudioBuffer farEar = fractional_impulse(bulk + woodworth_itd(headRadius, lateral) * rate, kSynthHrirLength, rate);

    const double shadow = std::abs(std::sin(lateral * std::numbers::pi / 180.0));
    if (shadow > 0.0) {
        const double cutoff = 2.0 * room::kSpeedOfSound / (2.0 * std::numbers::pi * headRadius);
        const AudioBuffer dull = zero_phase_lowpass(farEar, cutoff);
        for (std::size_t i = 0; i < farEar.size(); ++i) farEar[i] = (1.0 - shadow) * farEar[i] + shadow * dull[i];
    }
    if (azimuthDeg >= 0.0) return {nearEar, farEar};
    return {farEar, nearEar};
}

HrirSet synthetic_hrir_set(double headRadius, double rate) {
    std::map<int, BinauralBuffer> responses;
    for (int az : frontal_azimuths()) responses.emplace(az, synth_hrir(headRadius, az, rate));
    return HrirSet(std::move(responses), 1.0, HrirOrigin::Synthetic);
}

HrirPackInfo read_hrir_pack_info(const fs::path& dir) {
    const auto path = dir / "manifest.json";
    std::ifstream in(path);
    if (!in) throw IoError("cannot open HRIR pack manifest " + path.string());
    nlohmann::json j;
    try {
        in >> j;
        HrirPackInfo info;
        info.rate = j.at("rate").get<double>();
        info.referenceDistance = j.value("referenceDistance", 1.0);
        info.subject = j.value("subject", std::string{});
        return info;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed HRIR pack manifest " + path.string() + ": " + e.what());
    }
}

HrirSet load_hrir_pack(const fs::path& dir, double targetRate) {
    const auto info = read_hrir_pack_info(dir);
    std::map<int, BinauralBuffer> responses;
    std::vector<int> missing;
    for (int az : frontal_azimuths()) {
        const auto path = dir / (azimuth_tag(az) + "_el000.wav");
        if (!fs::exists(path)) {
            missing.push_back(az);
            continue;
        }
        auto h = dsp::read_binaural_wav(path);
        if (h.rate() != info.rate) {
            throw ConfigError("HRIR file " + path.string() + " rate disagrees with the pack manifest");
        }
        if (h.rate() != targetRate) h = {dsp::resample(h.left(), targetRate), dsp::resample(h.right(), targetRate)};
        responses.emplace(az, std::move(h));
    }
    if (!missing.empty()) {
        throw PackIncompleteError("HRIR pack " + dir.string() + " is missing azimuths: " + join(missing), missing);
    }
    return HrirSet(std::move(responses), info.referenceDistance, HrirOrigin::MeasuredPack);
}

void write_hrir_pack(const HrirSet& set, const fs::path& dir, const std::string& subject) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    nlohmann::json j{{"rate", set.rate()}, {"referenceDistance", set.reference_distance()}, {"subject", subject}};
    std::ofstream out(dir / "manifest.json");
    if (!out) throw IoError("cannot write " + (dir / "manifest.json").string());
    out << j.dump(2) << '\n';
    for (const auto& [az, h] : set.responses()) dsp::write_wav(dir / (azimuth_tag(az) + "_el000.wav"), h);
}

} // namespace classroom::binaural
