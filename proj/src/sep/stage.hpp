//
//  stage.hpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#pragma once

#include <classroom/sep/model.hpp>

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace classroom::sep::detail {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// window x frames; column j holds u[j*stride, j*stride + window).
Mat frame_matrix(const Vec& u, int window, int stride, int frames);
/// Adjoint of frame_matrix.
Vec overlap_add(const Mat& q, int stride, std::size_t length);

Eigen::Map<Mat> grad_block(const ModelParams& params, const std::string& name, Vec& grad);

struct StageCache {
    std::vector<Mat> frames;  // per input signal
    std::vector<Mat> encoded; // per input signal
    Mat input;                // bottleneck input
    std::vector<Mat> hidden;  // residual stream before each block, plus the final one
    std::vector<Mat> act;     // tanh output of each block
    Mat masks;                // rows: output c, ear e -> block (2c + e) of basisSize rows
    std::array<std::array<Mat, 2>, 2> masked;
    std::array<std::array<Vec, 2>, 2> outputs; // normalised waveforms
};

/// inputs[0..1] are the mixture ears; the enhancement stage adds the four first-stage outputs.
StageCache stage_forward(const ModelParams& params, const std::string& prefix, const std::vector<Vec>& inputs,
                         const Mat& features, std::size_t length);

/// Accumulates into `grad`; returns gradients of the inputs when `inputGrads` is set.
std::vector<Vec> stage_backward(const ModelParams& params, const std::string& prefix, const StageCache& cache,
                                const std::array<std::array<Vec, 2>, 2>& dOutputs, Vec& grad, bool inputGrads);

struct DoaCache {
    Mat features;
    Mat hidden;
    Mat logits;
};

DoaCache doa_forward(const ModelParams& params, const Mat& features);
void doa_backward(const ModelParams& params, const DoaCache& cache, const Mat& dLogits, Vec& grad);

struct ModelPass {
    double gain = 1.0; // applied to the mixture before the network
    Mat features;
    StageCache sep;
    std::optional<StageCache> enh;
    std::array<std::optional<DoaCache>, 2> doa;

    const StageCache& final_stage() const { return enh ? *enh : sep; }
};

ModelPass run_model(const ModelParams& params, const dsp::BinauralBuffer& mix, const SpatialFeatures* features,
                    bool withDoa);

dsp::BinauralBuffer to_binaural(const Vec& left, const Vec& right, double rate, double scale);

/// Throws PipelineError naming `layer` if `m` holds a NaN or infinity.
void check_finite(const Mat& m, const std::string& layer);

} // namespace classroom::sep::detail
