//
//  train.cpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#include <classroom/binaural/hrir.hpp>
#include <classroom/dsp/signal.hpp>
#include <classroom/errors.hpp>
#include <classroom/parallel.hpp>
#include <classroom/sep/train.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <cstring>

namespace classroom::sep {

TrainConfig TrainConfig::finetune() {
    TrainConfig c;
    c.decayEvery = 5;
    return c;
}

double learning_rate(const TrainConfig& config, int epoch) {
    if (epoch < 0) throw InvalidInput("epoch must be non-negative");
    if (config.decayEvery < 1) throw ConfigError("decayEvery must be positive");
    return config.learningRate * std::pow(config.decay, epoch / config.decayEvery);
}

Adam::Adam(std::size_t size, double beta1, double beta2, double epsilon)
    : m_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size))),
      v_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size))), beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {}

void Adam::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr, std::size_t begin, std::size_t end) {
    if (grad.size() != m_.size() || params.size() != m_.size()) throw InvalidInput("Adam state size mismatch");
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    const auto b = static_cast<Eigen::Index>(begin);
    const auto n = static_cast<Eigen::Index>(end - begin);
    m_.segment(b, n) = beta1_ * m_.segment(b, n) + (1.0 - beta1_) * grad.segment(b, n);
    v_.segment(b, n) = beta2_ * v_.segment(b, n) + (1.0 - beta2_) * grad.segment(b, n).cwiseAbs2();
    params.segment(b, n).array() -=
        lr * (m_.segment(b, n).array() / c1) / ((v_.segment(b, n).array() / c2).sqrt() + epsilon_);
}

namespace {

double mean_objective(const ModelParams& params, std::span<const Example> set, const ObjectiveOptions& options,
                      int jobs) {
    if (set.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::vector<double> values(set.size());
    parallel_for(set.size(), static_cast<std::size_t>(std::max(jobs, 1)),
                 [&](std::size_t i) { values[i] = objective(params, set[i], options).total; });
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

} // namespace

TrainResult train_micro(ModelParams init, std::span<const Example> train, std::span<const Example> val,
                        const TrainConfig& config, const TrainLogger& log) {
    init.validate();
    if (train.empty()) throw InvalidInput("training needs at least one scene");
    if (config.batchSize < 1) throw ConfigError("batchSize must be positive");
    if (config.epochs < 0 || config.doaEpochs < 0) throw ConfigError("epoch counts must be non-negative");
    learning_rate(config, 0);

    TrainResult result{std::move(init), {}, 0, false};
    auto& params = result.params;
    const std::size_t size = params.layout.size();
    const std::size_t doaBegin = params.config.doaHead ? params.layout.block("doa.hidden").offset : size;
    const dsp::Rng root(config.seed);

    auto phase = [&](const std::string& name, int epochs, const ObjectiveOptions& options, std::size_t begin,
                     std::size_t end, int firstEpoch) {
        Adam adam(size, config.beta1, config.beta2, config.adamEpsilon);
        int steps = 0;
        Eigen::VectorXd grad;
        for (int epoch = 0; epoch < epochs; ++epoch) {
            if (config.maxSteps > 0 && steps >= config.maxSteps) break;
            const double lr = learning_rate(config, epoch);
            std::vector<std::size_t> order(train.size());
            std::iota(order.begin(), order.end(), 0);
            auto rng = root.stream(name, static_cast<std::uint64_t>(epoch));
            for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

            double sum = 0.0;
            int batches = 0;
            for (std::size_t b = 0; b < order.size(); b += config.batchSize) {
                if (config.maxSteps > 0 && steps >= config.maxSteps) break;
                std::vector<const Example*> batch;
                for (std::size_t k = b; k < std::min(order.size(), b + config.batchSize); ++k) batch.push_back(&train[order[k]]);
                ObjectiveValue value;
                try {
                    value = batch_gradient(params, std::span<const Example* const>(batch), options, config.jobs, grad);
                } catch (const PipelineError& e) {
                    if (log) log(std::string("training stopped: ") + e.what());
                    result.diverged = true;
                    return;
                }
                if (!std::isfinite(value.total)) {
                    if (log) log("training stopped: non-finite loss");
                    result.diverged = true;
                    return;
                }
                const Eigen::VectorXd lastGood = params.values;
                adam.step(params.values, grad, lr, begin, end);
                if (!params.values.allFinite()) {
                    params.values = lastGood;
                    result.diverged = true;
                    if (log) log("training stopped: non-finite parameters");
                    return;
                }
                sum += value.total;
                ++batches;
                ++steps;
                ++result.steps;
            }
            if (batches == 0) break;
            HistoryRow row{firstEpoch + epoch, lr, sum / batches, mean_objective(params, val, options, config.jobs), name};
            result.history.push_back(row);
            if (log) {
                log(name + " epoch " + std::to_string(row.epoch) + " lr " + std::to_string(lr) + " train " +
                    std::to_string(row.trainLoss) + " val " + std::to_string(row.valLoss));
            }
        }
    };

    ObjectiveOptions sepOptions;
    sepOptions.capDb = config.capDb;
    phase("separation", config.epochs, sepOptions, 0, doaBegin, 0);
    if (!result.diverged && params.config.doaHead && config.doaEpochs > 0) {
        ObjectiveOptions doaOptions;
        doaOptions.capDb = config.capDb;
        doaOptions.separation = false;
        doaOptions.doa = true;
        phase("doa", config.doaEpochs, doaOptions, doaBegin, size, config.epochs);
    }
    return result;
}

void write_history_csv(const std::filesystem::path& path, const std::vector<HistoryRow>& history) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "epoch,lr,trainLoss,valLoss,phase\n";
    out.precision(10);
    for (const auto& r : history) out << r.epoch << ',' << r.lr << ',' << r.trainLoss << ',' << r.valLoss << ',' << r.phase << '\n';
}

namespace {

constexpr char kMagic[8] = {'C', 'L', 'S', 'E', 'P', 'M', 'D', 'L'};
constexpr std::uint32_t kCheckpointVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::ostream& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_le(std::istream& in, int bytes, const std::filesystem::path& path) {
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) {
        const int c = in.get();
        if (c == EOF) throw IoError("truncated checkpoint " + path.string());
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
    }
    return v;
}

} // namespace

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params) {
    params.validate();
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw IoError("cannot write " + tmp.string());
        out.write(kMagic, sizeof kMagic);
        put_u32(out, kCheckpointVersion);
        const auto& c = params.config;
        const std::uint32_t fields[] = {static_cast<std::uint32_t>(c.encoderWindow), static_cast<std::uint32_t>(c.encoderStride),
                                        static_cast<std::uint32_t>(c.basisSize),     static_cast<std::uint32_t>(c.tcnBlocks),
                                        static_cast<std::uint32_t>(c.tcnChannels),   static_cast<std::uint32_t>(c.kernel),
                                        static_cast<std::uint32_t>(c.numSpeakers),   c.enhancementStage ? 1u : 0u,
                                        c.doaHead ? 1u : 0u,                         static_cast<std::uint32_t>(c.doaClasses),
                                        static_cast<std::uint32_t>(std::lround(c.rate))};
        put_u32(out, static_cast<std::uint32_t>(std::size(fields)));
        for (auto f : fields) put_u32(out, f);
        put_u64(out, static_cast<std::uint64_t>(params.values.size()));
        for (Eigen::Index i = 0; i < params.values.size(); ++i) {
            const float f = static_cast<float>(params.values[i]);
            std::uint32_t bits;
            std::memcpy(&bits, &f, sizeof bits);
            put_u32(out, bits);
        }
        if (!out) throw IoError("failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint " + path.string());
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw IoError(path.string() + " is not a model checkpoint");
    const auto version = get_le(in, 4, path);
    if (version != kCheckpointVersion) throw IoError("unsupported checkpoint version " + std::to_string(version));
    const auto count = get_le(in, 4, path);
    if (count != 11) throw IoError("unexpected config record in " + path.string());
    std::uint32_t f[11];
    for (auto& v : f) v = static_cast<std::uint32_t>(get_le(in, 4, path));
    ModelConfig c;
    c.encoderWindow = static_cast<int>(f[0]);
    c.encoderStride = static_cast<int>(f[1]);
    c.basisSize = static_cast<int>(f[2]);
    c.tcnBlocks = static_cast<int>(f[3]);
    c.tcnChannels = static_cast<int>(f[4]);
    c.kernel = static_cast<int>(f[5]);
    c.numSpeakers = static_cast<int>(f[6]);
    c.enhancementStage = f[7] != 0;
    c.doaHead = f[8] != 0;
    c.doaClasses = static_cast<int>(f[9]);
    c.rate = static_cast<double>(f[10]);
    try {
        c.validate();
    } catch (const ConfigError& e) {
        throw IoError("checkpoint " + path.string() + " holds an invalid config: " + e.what());
    }
    ModelParams p(c);
    const auto n = get_le(in, 8, path);
    if (n != p.layout.size()) throw IoError("checkpoint parameter count does not match its config");
    for (std::uint64_t i = 0; i < n; ++i) {
        const auto bits = static_cast<std::uint32_t>(get_le(in, 4, path));
        float v;
        std::memcpy(&v, &bits, sizeof v);
        p.values[static_cast<Eigen::Index>(i)] = v;
    }
    return p;
}

Example example_from_scene(const scene::SceneBundle& bundle) {
    Example e;
    e.mixture = bundle.mixture;
    e.references = bundle.references;
    e.trajectories = std::array<motion::Trajectory, 2>{bundle.manifest.talkers[0].trajectory,
                                                       bundle.manifest.talkers[1].trajectory};
    return e;
}

std::vector<Example> make_toy_examples(std::size_t count, double seconds, std::uint64_t seed) {
    constexpr double kRate = 16000.0;
    constexpr int kAzimuth = 40;
    const auto hrirs = binaural::synthetic_hrir_set(binaural::kDefaultHeadRadius, kRate);
    const auto n = dsp::samples_for(seconds, kRate);
    const dsp::Rng root(seed);
    std::vector<Example> out;
    for (std::size_t i = 0; i < count; ++i) {
        auto rng = root.stream("toy", i);
        const double freq[2] = {rng.uniform(300.0, 500.0), rng.uniform(1000.0, 1500.0)};
        const double level[2] = {1.0, rng.uniform(0.5, 1.5)};
        Example e;
        for (int k = 0; k < 2; ++k) {
            const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
            dsp::AudioBuffer tone(kRate, n);
            for (std::size_t t = 0; t < n; ++t) tone[t] = std::sin(2.0 * std::numbers::pi * freq[k] * t / kRate + phase);
            tone.scale(0.05 * level[k] / tone.rms());
            const auto& h = hrirs.at(k == 0 ? kAzimuth : -kAzimuth);
            auto left = dsp::fft_convolve(tone, h.left());
            auto right = dsp::fft_convolve(tone, h.right());
            left.resize(n);
            right.resize(n);
            e.references[static_cast<std::size_t>(k)] = dsp::BinauralBuffer(std::move(left), std::move(right));
        }
        e.mixture = e.references[0] + e.references[1];
        e.trajectories = std::array<motion::Trajectory, 2>{motion::static_trajectory(kAzimuth, seconds),
                                                           motion::static_trajectory(-kAzimuth, seconds)};
        out.push_back(std::move(e));
    }
    return out;
}

} // namespace classroom::sep
