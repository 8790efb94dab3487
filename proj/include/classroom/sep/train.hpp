//
//  train.hpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#pragma once

#include <classroom/scene/scene.hpp>
#include <classroom/sep/objective.hpp>

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace classroom::sep {

struct TrainConfig {
    int epochs = 100;
    std::size_t batchSize = 4;
    double learningRate = 1e-3;
    double decay = 0.98;
    int decayEvery = 2;
    /// Stop after this many optimizer steps; 0 means no limit.
    int maxSteps = 0;
    /// Epochs of DoA-head training after the separator is frozen.
    int doaEpochs = 0;
    double capDb = kTrainingSnrCapDb;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adamEpsilon = 1e-8;
    std::uint64_t seed = 1;
    int jobs = 1;

    /// Schedule used when continuing from a checkpoint.
    static TrainConfig finetune();
};

double learning_rate(const TrainConfig& config, int epoch);

class Adam {
public:
    Adam(std::size_t size, double beta1, double beta2, double epsilon);
    /// Updates the coordinates in [begin, end) only.
    void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr, std::size_t begin, std::size_t end);
    long steps() const noexcept { return t_; }

private:
    Eigen::VectorXd m_, v_;
    double beta1_, beta2_, epsilon_;
    long t_ = 0;
};

struct HistoryRow {
    int epoch = 0;
    double lr = 0.0;
    double trainLoss = 0.0;
    double valLoss = 0.0;
    std::string phase = "separation";
};

struct TrainResult {
    ModelParams params;
    std::vector<HistoryRow> history;
    int steps = 0;
    bool diverged = false;
};

using TrainLogger = std::function<void(const std::string&)>;

/// Joint separation/enhancement training, then DoA-head training with the rest frozen. On a non-finite
/// loss training stops and the last parameters with a finite loss are returned with `diverged` set.
TrainResult train_micro(ModelParams init, std::span<const Example> train, std::span<const Example> val,
                        const TrainConfig& config, const TrainLogger& log = {});

void write_history_csv(const std::filesystem::path& path, const std::vector<HistoryRow>& history);

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params);
ModelParams load_checkpoint(const std::filesystem::path& path);

Example example_from_scene(const scene::SceneBundle& bundle);

/// Two steady tones at +40 and -40 degrees rendered through the synthetic HRIR set. The first talker
/// sits in 300-500 Hz, the second in 1000-1500 Hz.
std::vector<Example> make_toy_examples(std::size_t count, double seconds, std::uint64_t seed);

} // namespace classroom::sep
