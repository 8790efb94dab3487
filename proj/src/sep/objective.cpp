//
//  objective.cpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#include "stage.hpp"

#include <classroom/binaural/azimuth.hpp>
#include <classroom/errors.hpp>
#include <classroom/parallel.hpp>
#include <classroom/sep/objective.hpp>

#include <cmath>
#include <numbers>

namespace classroom::sep {

using detail::Mat;
using detail::Vec;

namespace {

double log_sum_exp(const Eigen::Ref<const Vec>& z) {
    const double m = z.maxCoeff();
    return m + std::log((z.array() - m).exp().sum());
}

std::array<std::vector<int>, 2> labels_for(const ModelParams& params, const Example& ex, eval::Permutation perm,
                                           int frames) {
    if (!ex.trajectories) throw InvalidInput("the DoA term needs ground-truth trajectories");
    return {doa_labels((*ex.trajectories)[static_cast<std::size_t>(perm[0])], params.config, frames),
            doa_labels((*ex.trajectories)[static_cast<std::size_t>(perm[1])], params.config, frames)};
}

// d(-capped snr)/d(estimate) for one ear; zero once the term is at the cap.
Vec snr_term_gradient(std::span<const double> s, const Vec& est, double scale, double capDb) {
    const auto n = static_cast<Eigen::Index>(s.size());
    const Eigen::Map<const Vec> ref(s.data(), n);
    const Vec residual = ref - est * scale;
    const double r = residual.squaredNorm();
    const double energy = ref.squaredNorm();
    if (r < eval::kSnrEpsilon) return Vec::Zero(n);
    const double value = 10.0 * std::log10(energy / (r + eval::kSnrEpsilon));
    if (value >= capDb) return Vec::Zero(n);
    // d/d(est) of -10 log10(E / (|s - scale*est|^2 + eps)).
    return residual * (-20.0 / std::numbers::ln10 * scale / (r + eval::kSnrEpsilon));
}

ObjectiveValue evaluate(const ModelParams& params, const Example& ex, const ObjectiveOptions& options, Vec* grad) {
    params.validate();
    const auto& c = params.config;
    for (const auto& r : ex.references) {
        if (r.size() != ex.mixture.size() || r.rate() != ex.mixture.rate()) {
            throw InvalidInput("references and mixture differ in shape");
        }
    }
    const bool wantDoa = options.doa && c.doaHead;
    if (options.doa && !c.doaHead) throw InvalidInput("the DoA term needs a model with a DoA head");
    const auto pass = detail::run_model(params, ex.mixture, nullptr, wantDoa);
    const double scale = 1.0 / pass.gain;
    const int frames = static_cast<int>(pass.sep.masks.cols());
    if (grad) *grad = Vec::Zero(static_cast<Eigen::Index>(params.layout.size()));

    ObjectiveValue value;
    std::vector<const detail::StageCache*> stages{&pass.sep};
    if (pass.enh) stages.push_back(&*pass.enh);
    std::vector<std::array<std::array<Vec, 2>, 2>> dOut(stages.size());
    for (std::size_t k = 0; k < stages.size(); ++k) {
        const auto& out = stages[k]->outputs;
        const std::array<dsp::BinauralBuffer, 2> ests{detail::to_binaural(out[0][0], out[0][1], c.rate, scale),
                                                      detail::to_binaural(out[1][0], out[1][1], c.rate, scale)};
        const auto pit = eval::pit_loss(ex.references, ests, options.capDb);
        value.separation += pit.loss;
        value.permutation = pit.permutation;
        if (grad && options.separation) {
            for (int o = 0; o < 2; ++o)
                for (int e = 0; e < 2; ++e) {
                    const auto& ref = ex.references[static_cast<std::size_t>(pit.permutation[o])].ear(e);
                    dOut[k][o][e] = snr_term_gradient(ref.samples(), out[o][e], scale, options.capDb) * options.lossScale;
                }
        }
    }
    if (grad && options.separation) {
        if (pass.enh) {
            const auto dIn = detail::stage_backward(params, "enh.", *pass.enh, dOut[1], *grad, true);
            for (int o = 0; o < 2; ++o)
                for (int e = 0; e < 2; ++e) dOut[0][o][e] += dIn[static_cast<std::size_t>(2 + 2 * o + e)];
        }
        detail::stage_backward(params, "sep.", pass.sep, dOut[0], *grad, false);
    }

    if (wantDoa) {
        const auto labels = labels_for(params, ex, value.permutation, frames);
        const std::array<Mat, 2> logits{pass.doa[0]->logits, pass.doa[1]->logits};
        value.doa = doa_ce_loss(logits, labels);
        if (grad) {
            const double norm = options.lossScale / (2.0 * frames);
            for (int o = 0; o < 2; ++o) {
                const auto& z = logits[static_cast<std::size_t>(o)];
                Mat dz(z.rows(), z.cols());
                for (Eigen::Index t = 0; t < z.cols(); ++t) {
                    const double lse = log_sum_exp(z.col(t));
                    dz.col(t) = (z.col(t).array() - lse).exp().matrix() * norm;
                    dz(binaural::frontal_index(labels[static_cast<std::size_t>(o)][static_cast<std::size_t>(t)]), t) -= norm;
                }
                detail::doa_backward(params, *pass.doa[static_cast<std::size_t>(o)], dz, *grad);
            }
        }
    }
    value.total = options.lossScale * ((options.separation ? value.separation : 0.0) + (wantDoa ? value.doa : 0.0));
    if (grad) detail::check_finite(*grad, "gradient");
    return value;
}

} // namespace

double doa_ce_loss(const std::array<Mat, 2>& logits, const std::array<std::vector<int>, 2>& labelsDeg) {
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t o = 0; o < 2; ++o) {
        const auto& z = logits[o];
        if (z.rows() != kDoaClasses) throw InvalidInput("DoA logits need 37 rows");
        if (static_cast<std::size_t>(z.cols()) != labelsDeg[o].size()) {
            throw InvalidInput("DoA label count does not match the frame count");
        }
        for (Eigen::Index t = 0; t < z.cols(); ++t) {
            const int cls = binaural::frontal_index(labelsDeg[o][static_cast<std::size_t>(t)]);
            total += log_sum_exp(z.col(t)) - z(cls, t);
            ++count;
        }
    }
    if (count == 0) throw InvalidInput("DoA loss needs at least one frame");
    return total / static_cast<double>(count);
}

std::vector<int> doa_labels(const motion::Trajectory& trajectory, const ModelConfig& config, int frames) {
    std::vector<int> labels(static_cast<std::size_t>(frames));
    for (int j = 0; j < frames; ++j) {
        const double centre = (static_cast<double>(j) * config.encoderStride + 0.5 * config.encoderWindow) / config.rate;
        labels[static_cast<std::size_t>(j)] =
            binaural::snap_azimuth(motion::trajectory_at(trajectory, std::min(centre, trajectory.duration)));
    }
    return labels;
}

ObjectiveValue objective(const ModelParams& params, const Example& example, const ObjectiveOptions& options) {
    return evaluate(params, example, options, nullptr);
}

ObjectiveValue gradient(const ModelParams& params, const Example& example, const ObjectiveOptions& options,
                        Vec& grad) {
    return evaluate(params, example, options, &grad);
}

ObjectiveValue batch_gradient(const ModelParams& params, std::span<const Example* const> batch,
                              const ObjectiveOptions& options, int jobs, Vec& grad) {
    if (batch.empty()) throw InvalidInput("empty batch");
    std::vector<Vec> grads(batch.size());
    std::vector<ObjectiveValue> values(batch.size());
    parallel_for(batch.size(), static_cast<std::size_t>(std::max(jobs, 1)),
                 [&](std::size_t i) { values[i] = evaluate(params, *batch[i], options, &grads[i]); });
    ObjectiveValue mean;
    grad = Vec::Zero(static_cast<Eigen::Index>(params.layout.size()));
    const double w = 1.0 / static_cast<double>(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        grad += grads[i] * w;
        mean.total += values[i].total * w;
        mean.separation += values[i].separation * w;
        mean.doa += values[i].doa * w;
    }
    return mean;
}

ObjectiveValue batch_gradient(const ModelParams& params, std::span<const Example> batch,
                              const ObjectiveOptions& options, int jobs, Vec& grad) {
    std::vector<const Example*> ptrs;
    for (const auto& e : batch) ptrs.push_back(&e);
    return batch_gradient(params, std::span<const Example* const>(ptrs), options, jobs, grad);
}

double pit_snr_db(const ModelParams& params, const Example& example) {
    params.validate();
    const auto pass = detail::run_model(params, example.mixture, nullptr, false);
    const auto& out = pass.final_stage().outputs;
    const double scale = 1.0 / pass.gain;
    const double rate = params.config.rate;
    const std::array<dsp::BinauralBuffer, 2> ests{detail::to_binaural(out[0][0], out[0][1], rate, scale),
                                                  detail::to_binaural(out[1][0], out[1][1], rate, scale)};
    return -eval::pit_loss(example.references, ests).loss / 4.0;
}

} // namespace classroom::sep
