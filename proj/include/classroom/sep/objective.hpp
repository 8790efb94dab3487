//
//  objective.hpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#pragma once

#include <classroom/eval/metrics.hpp>
#include <classroom/motion/trajectory.hpp>
#include <classroom/sep/model.hpp>

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace classroom::sep {

inline constexpr double kTrainingSnrCapDb = 30.0;

struct Example {
    dsp::BinauralBuffer mixture;
    std::array<dsp::BinauralBuffer, 2> references;
    /// Ground truth for the DoA head; required when the DoA term is enabled.
    std::optional<std::array<motion::Trajectory, 2>> trajectories;
};

struct ObjectiveOptions {
    double capDb = kTrainingSnrCapDb;
    bool separation = true;
    bool doa = false;
    double lossScale = 1.0;
};

struct ObjectiveValue {
    double total = 0.0;
    double separation = 0.0;
    double doa = 0.0;
    /// Permutation chosen on the final outputs.
    eval::Permutation permutation = eval::kIdentity;
};

/// Mean cross-entropy over frames and outputs. `labelsDeg[c]` are frontal-grid azimuths.
double doa_ce_loss(const std::array<Eigen::MatrixXd, 2>& logits, const std::array<std::vector<int>, 2>& labelsDeg);

/// Snapped azimuth of `trajectory` at the centre of each encoder frame.
std::vector<int> doa_labels(const motion::Trajectory& trajectory, const ModelConfig& config, int frames);

/// Separation term: capped PIT losses of every stage, summed. DoA term: CE of the head, whose inputs
/// are detached from the separator, under the final-stage permutation.
ObjectiveValue objective(const ModelParams& params, const Example& example, const ObjectiveOptions& options = {});

/// Objective plus its exact gradient with the permutation held at its argmax. `grad` is overwritten.
ObjectiveValue gradient(const ModelParams& params, const Example& example, const ObjectiveOptions& options,
                        Eigen::VectorXd& grad);

/// Mean objective and gradient over a batch; the reduction order is fixed, so results do not depend on `jobs`.
ObjectiveValue batch_gradient(const ModelParams& params, std::span<const Example> batch,
                              const ObjectiveOptions& options, int jobs, Eigen::VectorXd& grad);
ObjectiveValue batch_gradient(const ModelParams& params, std::span<const Example* const> batch,
                              const ObjectiveOptions& options, int jobs, Eigen::VectorXd& grad);

/// Mean over ears and talkers of the uncapped SNR under the best permutation.
double pit_snr_db(const ModelParams& params, const Example& example);

} // namespace classroom::sep
