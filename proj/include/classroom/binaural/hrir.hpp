//
//  hrir.hpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#pragma once

#include <classroom/dsp/audio_buffer.hpp>

#include <filesystem>
#include <map>
#include <string>

namespace classroom::binaural {

enum class HrirOrigin { MeasuredPack, Synthetic };

inline constexpr double kDefaultHeadRadius = 0.07;
inline constexpr std::size_t kSynthHrirLength = 128;
inline constexpr std::size_t kSynthBulkDelay = 32;

/// Frontal, zero-elevation head-related impulse responses on the 5 degree grid.
class HrirSet {
public:
    HrirSet() = default;
    /// Throws PackIncompleteError when a frontal azimuth is absent and InvalidInput on uneven lengths or rates.
    HrirSet(std::map<int, dsp::BinauralBuffer> responses, double referenceDistance, HrirOrigin origin);

    const dsp::BinauralBuffer& at(int azimuthDeg) const;
    const std::map<int, dsp::BinauralBuffer>& responses() const noexcept { return responses_; }
    double rate() const noexcept { return rate_; }
    std::size_t length() const noexcept { return length_; }
    double reference_distance() const noexcept { return referenceDistance_; }
    HrirOrigin origin() const noexcept { return origin_; }

    /// Average over directions of the energy summed over both ears.
    double mean_energy() const noexcept;

private:
    std::map<int, dsp::BinauralBuffer> responses_;
    double rate_ = dsp::kCorpusRate;
    std::size_t length_ = 0;
    double referenceDistance_ = 1.0;
    HrirOrigin origin_ = HrirOrigin::Synthetic;
};

/// Spherical-head interaural delay in seconds, positive toward the left ear.
double woodworth_itd(double headRadius, double azimuthDeg) noexcept;

/// Spherical-head stand-in for a measured response: the far ear is delayed by the Woodworth ITD
/// and shadowed by a zero-phase first-order low-pass whose share grows with |sin azimuth|.
dsp::BinauralBuffer synth_hrir(double headRadius, double azimuthDeg, double rate = dsp::kCorpusRate);

HrirSet synthetic_hrir_set(double headRadius = kDefaultHeadRadius, double rate = dsp::kCorpusRate);

struct HrirPackInfo {
    double rate = 0.0;
    double referenceDistance = 1.0;
    std::string subject;
};

/// Reads `manifest.json` and `az{+|-}DDD_el000.wav` files, resampling to `targetRate`.
HrirSet load_hrir_pack(const std::filesystem::path& dir, double targetRate = dsp::kCorpusRate);
HrirPackInfo read_hrir_pack_info(const std::filesystem::path& dir);
void write_hrir_pack(const HrirSet& set, const std::filesystem::path& dir, const std::string& subject = "synthetic");

} // namespace classroom::binaural
