//
//  model.hpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#pragma once

#include <classroom/dsp/audio_buffer.hpp>
#include <classroom/dsp/rng.hpp>

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace classroom::sep {

inline constexpr int kDoaClasses = 37;
inline constexpr double kIldEpsilon = 1e-8;

struct ModelConfig {
    int encoderWindow = 16;
    int encoderStride = 8;
    int basisSize = 64;
    int tcnBlocks = 2;
    int tcnChannels = 32;
    int kernel = 3;
    int numSpeakers = 2;
    bool enhancementStage = true;
    bool doaHead = true;
    int doaClasses = kDoaClasses;
    double rate = 16000.0;

    /// Throws ConfigError naming the offending field.
    void validate() const;
    /// Rectangular DFT bins per encoder frame.
    int bins() const noexcept { return encoderWindow / 2 + 1; }
    /// cos IPD, sin IPD and ILD per bin.
    int feature_dim() const noexcept { return 3 * bins(); }
    /// Encoder frames for a signal of `samples` samples; throws InvalidInput when too short.
    int frames(std::size_t samples) const;
    /// A model small enough for finite-difference checks (about 3,700 parameters).
    static ModelConfig tiny();

    bool operator==(const ModelConfig&) const = default;
};

struct ParamBlock {
    std::string name;
    std::size_t offset = 0;
    int rows = 0;
    int cols = 0;
    std::size_t size() const noexcept { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
};

/// Named, column-major blocks of the flat parameter vector.
class ParamLayout {
public:
    ParamLayout() = default;
    explicit ParamLayout(const ModelConfig& config);

    const std::vector<ParamBlock>& blocks() const noexcept { return blocks_; }
    const ParamBlock& block(const std::string& name) const;
    bool contains(const std::string& name) const;
    std::size_t size() const noexcept { return size_; }

private:
    void add(std::string name, int rows, int cols);
    std::vector<ParamBlock> blocks_;
    std::size_t size_ = 0;
};

struct ModelParams {
    ModelConfig config;
    ParamLayout layout;
    Eigen::VectorXd values;

    explicit ModelParams(const ModelConfig& config = {});

    Eigen::Map<const Eigen::MatrixXd> matrix(const std::string& name) const;
    Eigen::Map<Eigen::MatrixXd> matrix(const std::string& name);
    /// Throws InvalidInput when the vector length disagrees with the layout or holds non-finite values.
    void validate() const;
};

/// Random initial parameters. The decoder starts as the scaled pseudo-inverse of the encoder, so that
/// masks of 0.5 reproduce half of the mixture.
ModelParams init_params(const ModelConfig& config, dsp::Rng& rng);

/// bins x frames matrices from a rectangular-window DFT with frame `frameLength` and hop `hop`.
struct SpatialFeatures {
    Eigen::MatrixXd ipd; // radians in (-pi, pi]
    Eigen::MatrixXd ild; // dB
    int bins() const noexcept { return static_cast<int>(ipd.rows()); }
    int frames() const noexcept { return static_cast<int>(ipd.cols()); }
};

SpatialFeatures compute_spatial_features(const dsp::BinauralBuffer& mix, int frameLength, int hop);

/// Stacked [cos IPD; sin IPD; ILD / 20], the form fed to the network.
Eigen::MatrixXd feature_matrix(const SpatialFeatures& features);

struct ForwardResult {
    int frames = 0;
    std::array<dsp::BinauralBuffer, 2> separated;
    std::optional<std::array<dsp::BinauralBuffer, 2>> enhanced;
    /// Per output, doaClasses x frames.
    std::optional<std::array<Eigen::MatrixXd, 2>> doaLogits;

    const std::array<dsp::BinauralBuffer, 2>& outputs() const { return enhanced ? *enhanced : separated; }
};

ForwardResult forward(const ModelParams& params, const dsp::BinauralBuffer& mix);
/// As above with precomputed features of the (RMS-normalised) mixture.
ForwardResult forward(const ModelParams& params, const dsp::BinauralBuffer& mix, const SpatialFeatures& features);

} // namespace classroom::sep
