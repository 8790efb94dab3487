//
//  model.cpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#include "stage.hpp"

#include <classroom/errors.hpp>

#include <cmath>
#include <complex>
#include <numbers>

namespace classroom::sep {

using detail::Mat;
using detail::Vec;

void ModelConfig::validate() const {
    if (encoderWindow < 2) throw ConfigError("encoderWindow must be at least 2");
    if (encoderStride < 1 || encoderStride > encoderWindow) throw ConfigError("encoderStride must lie in [1, encoderWindow]");
    if (basisSize < 1) throw ConfigError("basisSize must be positive");
    if (tcnBlocks < 0) throw ConfigError("tcnBlocks must be non-negative");
    if (tcnChannels < 1) throw ConfigError("tcnChannels must be positive");
    if (kernel < 1 || kernel % 2 == 0) throw ConfigError("kernel must be a positive odd number");
    if (numSpeakers != 2) throw ConfigError("numSpeakers must be 2");
    if (doaClasses != kDoaClasses) throw ConfigError("doaClasses must be 37");
    if (!(rate > 0.0)) throw ConfigError("rate must be positive");
}

int ModelConfig::frames(std::size_t samples) const {
    if (samples < static_cast<std::size_t>(encoderWindow)) {
        throw InvalidInput("signal of " + std::to_string(samples) + " samples is shorter than the encoder window");
    }
    return static_cast<int>((samples - static_cast<std::size_t>(encoderWindow)) / static_cast<std::size_t>(encoderStride)) + 1;
}

ModelConfig ModelConfig::tiny() {
    ModelConfig c;
    c.basisSize = 8;
    c.tcnChannels = 8;
    c.tcnBlocks = 2;
    return c;
}

ParamLayout::ParamLayout(const ModelConfig& c) {
    c.validate();
    const int n = c.basisSize, ch = c.tcnChannels, f = c.feature_dim();
    auto stage = [&](const std::string& p, int inputs) {
        add(p + "encoder", n, c.encoderWindow);
        add(p + "bottleneck", ch, inputs * n + f);
        add(p + "bottleneck_bias", ch, 1);
        for (int b = 0; b < c.tcnBlocks; ++b) {
            const std::string t = p + "tcn" + std::to_string(b) + ".";
            add(t + "conv", ch, c.kernel * ch);
            add(t + "bias", ch, 1);
            add(t + "out", ch, ch);
            add(t + "out_bias", ch, 1);
        }
        add(p + "mask", 4 * n, ch);
        add(p + "mask_bias", 4 * n, 1);
        add(p + "decoder", c.encoderWindow, n);
    };
    stage("sep.", 2);
    if (c.enhancementStage) stage("enh.", 6);
    if (c.doaHead) {
        add("doa.hidden", ch, f);
        add("doa.hidden_bias", ch, 1);
        add("doa.out", c.doaClasses, ch);
        add("doa.out_bias", c.doaClasses, 1);
    }
}

void ParamLayout::add(std::string name, int rows, int cols) {
    blocks_.push_back({std::move(name), size_, rows, cols});
    size_ += blocks_.back().size();
}

const ParamBlock& ParamLayout::block(const std::string& name) const {
    for (const auto& b : blocks_)
        if (b.name == name) return b;
    throw InvalidInput("no parameter block '" + name + "'");
}

bool ParamLayout::contains(const std::string& name) const {
    for (const auto& b : blocks_)
        if (b.name == name) return true;
    return false;
}

ModelParams::ModelParams(const ModelConfig& c) : config(c), layout(c), values(Vec::Zero(static_cast<Eigen::Index>(layout.size()))) {}

Eigen::Map<const Mat> ModelParams::matrix(const std::string& name) const {
    const auto& b = layout.block(name);
    return {values.data() + b.offset, b.rows, b.cols};
}

Eigen::Map<Mat> ModelParams::matrix(const std::string& name) {
    const auto& b = layout.block(name);
    return {values.data() + b.offset, b.rows, b.cols};
}

void ModelParams::validate() const {
    if (static_cast<std::size_t>(values.size()) != layout.size()) {
        throw InvalidInput("parameter vector has " + std::to_string(values.size()) + " values, layout needs " +
                           std::to_string(layout.size()));
    }
    if (!values.allFinite()) throw InvalidInput("parameters contain non-finite values");
}

ModelParams init_params(const ModelConfig& config, dsp::Rng& rng) {
    ModelParams p(config);
    auto fill = [&](const std::string& name, double scale) {
        auto m = p.matrix(name);
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = scale * rng.normal();
    };
    const double ch = config.tcnChannels;
    auto stage = [&](const std::string& s, int inputs) {
        fill(s + "encoder", 1.0 / std::sqrt(config.encoderWindow));
        const Mat e = p.matrix(s + "encoder");
        const double overlap = static_cast<double>(config.encoderStride) / config.encoderWindow;
        p.matrix(s + "decoder") = overlap * e.completeOrthogonalDecomposition().pseudoInverse();
        fill(s + "bottleneck", 1.0 / std::sqrt(inputs * config.basisSize + config.feature_dim()));
        for (int b = 0; b < config.tcnBlocks; ++b) {
            const std::string t = s + "tcn" + std::to_string(b) + ".";
            fill(t + "conv", 1.0 / std::sqrt(config.kernel * ch));
            fill(t + "out", 0.5 / std::sqrt(ch));
        }
        fill(s + "mask", 0.1 / std::sqrt(ch));
    };
    stage("sep.", 2);
    if (config.enhancementStage) stage("enh.", 6);
    if (config.doaHead) {
        fill("doa.hidden", 1.0 / std::sqrt(config.feature_dim()));
        fill("doa.out", 1.0 / std::sqrt(ch));
    }
    return p;
}

SpatialFeatures compute_spatial_features(const dsp::BinauralBuffer& mix, int frameLength, int hop) {
    if (mix.size() == 0) throw InvalidInput("spatial features need a non-empty mixture");
    if (frameLength < 2 || hop < 1) throw InvalidInput("spatial features need frameLength >= 2 and hop >= 1");
    if (mix.size() < static_cast<std::size_t>(frameLength)) throw InvalidInput("mixture shorter than one frame");
    const int frames = static_cast<int>((mix.size() - static_cast<std::size_t>(frameLength)) / static_cast<std::size_t>(hop)) + 1;
    const int bins = frameLength / 2 + 1;
    std::vector<std::complex<double>> twiddle(static_cast<std::size_t>(frameLength));
    for (int n = 0; n < frameLength; ++n) twiddle[static_cast<std::size_t>(n)] = std::polar(1.0, -2.0 * std::numbers::pi * n / frameLength);

    SpatialFeatures out{Mat(bins, frames), Mat(bins, frames)};
    const auto& l = mix.left();
    const auto& r = mix.right();
    for (int j = 0; j < frames; ++j) {
        const std::size_t base = static_cast<std::size_t>(j) * static_cast<std::size_t>(hop);
        for (int k = 0; k < bins; ++k) {
            std::complex<double> lk, rk;
            for (int n = 0; n < frameLength; ++n) {
                const auto w = twiddle[static_cast<std::size_t>((k * n) % frameLength)];
                lk += l[base + static_cast<std::size_t>(n)] * w;
                rk += r[base + static_cast<std::size_t>(n)] * w;
            }
            double ipd = std::arg(lk * std::conj(rk));
            if (ipd <= -std::numbers::pi) ipd = std::numbers::pi;
            out.ipd(k, j) = ipd;
            out.ild(k, j) = 20.0 * std::log10((std::abs(lk) + kIldEpsilon) / (std::abs(rk) + kIldEpsilon));
        }
    }
    return out;
}

Mat feature_matrix(const SpatialFeatures& f) {
    const auto b = f.bins();
    Mat m(3 * b, f.frames());
    m.topRows(b) = f.ipd.array().cos().matrix();
    m.middleRows(b, b) = f.ipd.array().sin().matrix();
    m.bottomRows(b) = f.ild / 20.0;
    return m;
}

namespace detail {

Mat frame_matrix(const Vec& u, int window, int stride, int frames) {
    Mat m(window, frames);
    for (int j = 0; j < frames; ++j) m.col(j) = u.segment(static_cast<Eigen::Index>(j) * stride, window);
    return m;
}

Vec overlap_add(const Mat& q, int stride, std::size_t length) {
    Vec out = Vec::Zero(static_cast<Eigen::Index>(length));
    for (Eigen::Index j = 0; j < q.cols(); ++j) out.segment(j * stride, q.rows()) += q.col(j);
    return out;
}

Eigen::Map<Mat> grad_block(const ModelParams& params, const std::string& name, Vec& grad) {
    const auto& b = params.layout.block(name);
    return {grad.data() + b.offset, b.rows, b.cols};
}

void check_finite(const Mat& m, const std::string& layer) {
    if (!m.allFinite()) throw PipelineError("non-finite values in layer " + layer);
}

namespace {

// out(:, t) += w * h(:, t + shift) wherever t + shift is inside the signal.
void shifted_product(Mat& out, const Eigen::Ref<const Mat>& w, const Mat& h, int shift) {
    const Eigen::Index frames = h.cols();
    const Eigen::Index begin = std::max<Eigen::Index>(0, -shift);
    const Eigen::Index end = std::min<Eigen::Index>(frames, frames - shift);
    if (end <= begin) return;
    out.middleCols(begin, end - begin).noalias() += w * h.middleCols(begin + shift, end - begin);
}

Mat sigmoid(const Mat& x) { return (1.0 / (1.0 + (-x.array()).exp())).matrix(); }

} // namespace

StageCache stage_forward(const ModelParams& params, const std::string& prefix, const std::vector<Vec>& inputs,
                         const Mat& features, std::size_t length) {
    const auto& c = params.config;
    const int frames = c.frames(length);
    const int n = c.basisSize, ch = c.tcnChannels;
    StageCache s;
    const auto encoder = params.matrix(prefix + "encoder");
    Mat input(static_cast<Eigen::Index>(inputs.size()) * n + features.rows(), frames);
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        s.frames.push_back(frame_matrix(inputs[i], c.encoderWindow, c.encoderStride, frames));
        s.encoded.push_back(encoder * s.frames.back());
        input.middleRows(static_cast<Eigen::Index>(i) * n, n) = s.encoded.back();
    }
    input.bottomRows(features.rows()) = features;
    check_finite(input, prefix + "encoder");
    s.input = std::move(input);

    Mat h = params.matrix(prefix + "bottleneck") * s.input;
    h.colwise() += params.matrix(prefix + "bottleneck_bias").col(0);
    check_finite(h, prefix + "bottleneck");
    for (int b = 0; b < c.tcnBlocks; ++b) {
        const std::string t = prefix + "tcn" + std::to_string(b) + ".";
        const auto conv = params.matrix(t + "conv");
        const int dilation = 1 << b;
        Mat a = Mat::Zero(ch, frames);
        a.colwise() += params.matrix(t + "bias").col(0);
        for (int k = 0; k < c.kernel; ++k) {
            shifted_product(a, conv.middleCols(static_cast<Eigen::Index>(k) * ch, ch), h, (k - c.kernel / 2) * dilation);
        }
        Mat g = a.array().tanh().matrix();
        Mat next = h + params.matrix(t + "out") * g;
        next.colwise() += params.matrix(t + "out_bias").col(0);
        check_finite(next, t + "out");
        s.hidden.push_back(std::move(h));
        s.act.push_back(std::move(g));
        h = std::move(next);
    }
    s.hidden.push_back(h);

    Mat logits = params.matrix(prefix + "mask") * h;
    logits.colwise() += params.matrix(prefix + "mask_bias").col(0);
    s.masks = sigmoid(logits);
    check_finite(s.masks, prefix + "mask");

    const auto decoder = params.matrix(prefix + "decoder");
    for (int o = 0; o < 2; ++o)
        for (int e = 0; e < 2; ++e) {
            s.masked[o][e] = s.masks.middleRows(static_cast<Eigen::Index>(2 * o + e) * n, n).cwiseProduct(s.encoded[e]);
            s.outputs[o][e] = overlap_add(decoder * s.masked[o][e], c.encoderStride, length);
        }
    return s;
}

std::vector<Vec> stage_backward(const ModelParams& params, const std::string& prefix, const StageCache& s,
                                const std::array<std::array<Vec, 2>, 2>& dOutputs, Vec& grad, bool inputGrads) {
    const auto& c = params.config;
    const int n = c.basisSize, ch = c.tcnChannels;
    const int frames = static_cast<int>(s.masks.cols());
    const std::size_t length = static_cast<std::size_t>(s.outputs[0][0].size());
    const auto decoder = params.matrix(prefix + "decoder");
    auto gDecoder = grad_block(params, prefix + "decoder", grad);

    std::vector<Mat> dEncoded(s.encoded.size(), Mat::Zero(n, frames));
    Mat dMasks(s.masks.rows(), frames);
    for (int o = 0; o < 2; ++o)
        for (int e = 0; e < 2; ++e) {
            const Mat dq = frame_matrix(dOutputs[o][e], c.encoderWindow, c.encoderStride, frames);
            gDecoder.noalias() += dq * s.masked[o][e].transpose();
            const Mat dy = decoder.transpose() * dq;
            const auto mask = s.masks.middleRows(static_cast<Eigen::Index>(2 * o + e) * n, n);
            dMasks.middleRows(static_cast<Eigen::Index>(2 * o + e) * n, n) = dy.cwiseProduct(s.encoded[e]);
            dEncoded[static_cast<std::size_t>(e)] += dy.cwiseProduct(mask);
        }
    const Mat dLogits = dMasks.cwiseProduct(s.masks.cwiseProduct((1.0 - s.masks.array()).matrix()));
    grad_block(params, prefix + "mask", grad).noalias() += dLogits * s.hidden.back().transpose();
    grad_block(params, prefix + "mask_bias", grad) += dLogits.rowwise().sum();
    Mat dh = params.matrix(prefix + "mask").transpose() * dLogits;

    for (int b = c.tcnBlocks - 1; b >= 0; --b) {
        const std::string t = prefix + "tcn" + std::to_string(b) + ".";
        const auto& g = s.act[static_cast<std::size_t>(b)];
        const auto& h = s.hidden[static_cast<std::size_t>(b)];
        grad_block(params, t + "out", grad).noalias() += dh * g.transpose();
        grad_block(params, t + "out_bias", grad) += dh.rowwise().sum();
        const Mat da = (params.matrix(t + "out").transpose() * dh).cwiseProduct((1.0 - g.array().square()).matrix());
        grad_block(params, t + "bias", grad) += da.rowwise().sum();
        auto gConv = grad_block(params, t + "conv", grad);
        const auto conv = params.matrix(t + "conv");
        const int dilation = 1 << b;
        Mat dPrev = dh;
        for (int k = 0; k < c.kernel; ++k) {
            const int shift = (k - c.kernel / 2) * dilation;
            const Eigen::Index begin = std::max(0, -shift);
            const Eigen::Index end = std::min(frames, frames - shift);
            if (end <= begin) continue;
            const auto daSlice = da.middleCols(begin, end - begin);
            gConv.middleCols(static_cast<Eigen::Index>(k) * ch, ch).noalias() +=
                daSlice * h.middleCols(begin + shift, end - begin).transpose();
            dPrev.middleCols(begin + shift, end - begin).noalias() +=
                conv.middleCols(static_cast<Eigen::Index>(k) * ch, ch).transpose() * daSlice;
        }
        dh = std::move(dPrev);
    }

    grad_block(params, prefix + "bottleneck", grad).noalias() += dh * s.input.transpose();
    grad_block(params, prefix + "bottleneck_bias", grad) += dh.rowwise().sum();
    const Mat dInput = params.matrix(prefix + "bottleneck").transpose() * dh;

    auto gEncoder = grad_block(params, prefix + "encoder", grad);
    const auto encoder = params.matrix(prefix + "encoder");
    std::vector<Vec> dInputs;
    for (std::size_t i = 0; i < s.encoded.size(); ++i) {
        const Mat dx = dEncoded[i] + dInput.middleRows(static_cast<Eigen::Index>(i) * n, n);
        gEncoder.noalias() += dx * s.frames[i].transpose();
        if (inputGrads) dInputs.push_back(overlap_add(encoder.transpose() * dx, c.encoderStride, length));
    }
    return dInputs;
}

DoaCache doa_forward(const ModelParams& params, const Mat& features) {
    DoaCache d;
    d.features = features;
    Mat pre = params.matrix("doa.hidden") * features;
    pre.colwise() += params.matrix("doa.hidden_bias").col(0);
    d.hidden = pre.array().tanh().matrix();
    d.logits = params.matrix("doa.out") * d.hidden;
    d.logits.colwise() += params.matrix("doa.out_bias").col(0);
    check_finite(d.logits, "doa.out");
    return d;
}

void doa_backward(const ModelParams& params, const DoaCache& d, const Mat& dLogits, Vec& grad) {
    grad_block(params, "doa.out", grad).noalias() += dLogits * d.hidden.transpose();
    grad_block(params, "doa.out_bias", grad) += dLogits.rowwise().sum();
    const Mat dPre = (params.matrix("doa.out").transpose() * dLogits).cwiseProduct((1.0 - d.hidden.array().square()).matrix());
    grad_block(params, "doa.hidden", grad).noalias() += dPre * d.features.transpose();
    grad_block(params, "doa.hidden_bias", grad) += dPre.rowwise().sum();
}

dsp::BinauralBuffer to_binaural(const Vec& left, const Vec& right, double rate, double scale) {
    std::vector<double> l(static_cast<std::size_t>(left.size())), r(static_cast<std::size_t>(right.size()));
    for (Eigen::Index i = 0; i < left.size(); ++i) {
        l[static_cast<std::size_t>(i)] = left[i] * scale;
        r[static_cast<std::size_t>(i)] = right[i] * scale;
    }
    return {dsp::AudioBuffer(rate, std::move(l)), dsp::AudioBuffer(rate, std::move(r))};
}

ModelPass run_model(const ModelParams& params, const dsp::BinauralBuffer& mix, const SpatialFeatures* features,
                    bool withDoa) {
    const auto& c = params.config;
    if (mix.rate() != c.rate) throw InvalidInput("mixture rate does not match the model");
    const std::size_t length = mix.size();
    const int frames = c.frames(length);
    ModelPass pass;
    const double rms = std::sqrt(mix.pooled_power());
    pass.gain = rms > 1e-12 ? 1.0 / rms : 1.0;

    std::vector<Vec> inputs(2);
    for (int e = 0; e < 2; ++e) {
        const auto samples = mix.ear(e).samples();
        inputs[static_cast<std::size_t>(e)] = Eigen::Map<const Vec>(samples.data(), static_cast<Eigen::Index>(samples.size())) * pass.gain;
    }
    if (features) {
        if (features->frames() != frames || features->bins() != c.bins()) {
            throw InvalidInput("spatial features do not match the encoder framing");
        }
        pass.features = feature_matrix(*features);
    } else {
        pass.features = feature_matrix(compute_spatial_features(mix.scaled(pass.gain), c.encoderWindow, c.encoderStride));
    }
    pass.sep = stage_forward(params, "sep.", inputs, pass.features, length);
    if (c.enhancementStage) {
        for (int o = 0; o < 2; ++o)
            for (int e = 0; e < 2; ++e) inputs.push_back(pass.sep.outputs[o][e]);
        pass.enh = stage_forward(params, "enh.", inputs, pass.features, length);
    }
    if (withDoa && c.doaHead) {
        const auto& out = pass.final_stage().outputs;
        for (int o = 0; o < 2; ++o) {
            const auto est = to_binaural(out[o][0], out[o][1], c.rate, 1.0);
            pass.doa[static_cast<std::size_t>(o)] =
                doa_forward(params, feature_matrix(compute_spatial_features(est, c.encoderWindow, c.encoderStride)));
        }
    }
    return pass;
}

} // namespace detail

namespace {

ForwardResult package(const ModelParams& params, const detail::ModelPass& pass) {
    ForwardResult r;
    r.frames = static_cast<int>(pass.sep.masks.cols());
    const double scale = 1.0 / pass.gain;
    const double rate = params.config.rate;
    for (int o = 0; o < 2; ++o) {
        r.separated[static_cast<std::size_t>(o)] = detail::to_binaural(pass.sep.outputs[o][0], pass.sep.outputs[o][1], rate, scale);
    }
    if (pass.enh) {
        r.enhanced.emplace();
        for (int o = 0; o < 2; ++o) {
            (*r.enhanced)[static_cast<std::size_t>(o)] = detail::to_binaural(pass.enh->outputs[o][0], pass.enh->outputs[o][1], rate, scale);
        }
    }
    if (pass.doa[0]) r.doaLogits = std::array<Mat, 2>{pass.doa[0]->logits, pass.doa[1]->logits};
    return r;
}

} // namespace

ForwardResult forward(const ModelParams& params, const dsp::BinauralBuffer& mix) {
    params.validate();
    return package(params, detail::run_model(params, mix, nullptr, true));
}

ForwardResult forward(const ModelParams& params, const dsp::BinauralBuffer& mix, const SpatialFeatures& features) {
    params.validate();
    return package(params, detail::run_model(params, mix, &features, true));
}

} // namespace classroom::sep
