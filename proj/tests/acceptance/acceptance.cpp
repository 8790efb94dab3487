// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any criterion fails.

#include <classroom/binaural/azimuth.hpp>
#include <classroom/binaural/brir.hpp>
#include <classroom/binaural/hrir.hpp>
#include <classroom/binaural/sdm.hpp>
#include <classroom/dsp/signal.hpp>
#include <classroom/eval/doa.hpp>
#include <classroom/eval/metrics.hpp>
#include <classroom/eval/stats.hpp>
#include <classroom/motion/trajectory.hpp>
#include <classroom/room/decay.hpp>
#include <classroom/room/room.hpp>
#include <classroom/scene/dataset.hpp>
#include <classroom/scene/demo_corpus.hpp>
#include <classroom/sep/train.hpp>

#include "../support/oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <string>
#include <vector>

using namespace classroom;
using dsp::AudioBuffer;
using dsp::BinauralBuffer;
using dsp::Rng;
using room::Point3;

namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    double budgetSeconds;
    std::function<Outcome()> run;
};

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

room::RirOptions anechoic() {
    room::RirOptions o;
    o.absorption = 1.0;
    o.stochasticTail = false;
    return o;
}

Point3 around(Point3 listener, double azDeg, double radius) {
    const double t = azDeg * std::numbers::pi / 180.0;
    return listener + radius * Point3{std::cos(t), std::sin(t), 0.0};
}

std::size_t first_arrival(const AudioBuffer& h) {
    for (std::size_t i = 0; i < h.size(); ++i)
        if (h[i] * h[i] > 1e-20) return i;
    return h.size();
}

AudioBuffer white(Rng& rng, std::size_t n, double scale = 0.1) {
    AudioBuffer x(16000.0, n);
    for (std::size_t i = 0; i < n; ++i) x[i] = scale * rng.normal();
    return x;
}

Outcome geometry() {
    Rng rng(101);
    const auto array = room::MicArray::orthogonal_triad();
    long worst = 0;
    int failures = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto r = room::sample_room(rng, trial);
        const auto listener = room::sample_listener_position(r, rng, 2.05);
        const auto src = around(listener, rng.uniform(0.0, 360.0), rng.uniform(0.5, 2.0));
        room::RirOptions opts;
        opts.maxOrder = 4;
        const auto rir = room::simulate_rir(r, src, listener, array, 16000, rng, opts);
        for (std::size_t c = 0; c < array.capsules.size(); ++c) {
            const double d = room::distance(src, listener + array.capsules[c]);
            const long expected = std::lround(16000.0 * d / 343.0);
            const long err = std::abs(static_cast<long>(first_arrival(rir.channels[c])) - expected);
            worst = std::max(worst, err);
            failures += err > 1;
        }
    }
    return {failures == 0, "max first-arrival error " + std::to_string(worst) + " samples over 700 capsules (tol 1)"};
}

Outcome reverberation() {
    Rng rng(202);
    const auto array = room::MicArray::orthogonal_triad();
    bool ok = true;
    std::string detail = "median T60/target:";
    for (double t60 : {0.2, 0.3, 0.4, 0.5, 0.6, 0.7}) {
        std::vector<double> est;
        for (int k = 0; k < 10; ++k) {
            auto r = room::sample_room(rng, k);
            r.t60 = t60;
            const auto l = room::sample_listener_position(r, rng);
            const auto rir = room::simulate_rir(r, around(l, rng.uniform(0.0, 360.0), 1.0), l, array, 16000, rng);
            est.push_back(room::schroeder_t60(rir.center()));
        }
        std::sort(est.begin(), est.end());
        const double median = 0.5 * (est[4] + est[5]);
        ok = ok && std::abs(median / t60 - 1.0) <= 0.2;
        detail += fmt(" %.2f", median / t60);
    }
    return {ok, detail + " (tol 0.80-1.20)"};
}

Outcome sdm_recovery() {
    const room::RoomSpec r{9.0, 9.0, 3.0, 0.4, 0};
    const Point3 listener{4.0, 4.5, 1.2};
    const auto array = room::MicArray::orthogonal_triad();
    Rng rng(303);
    int pass = 0;
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const double az = rng.uniform(-90.0, 90.0);
        const auto rir = room::simulate_rir(r, around(listener, az, rng.uniform(1.0, 2.0)), listener, array, 16000,
                                            rng, anechoic());
        const auto track = binaural::sdm_analyze(rir, array);
        const auto label = track.azimuthDeg[rir.directSampleIndex];
        const double err = label ? std::abs(*label - az) : 180.0;
        worst = std::max(worst, err);
        pass += err <= 5.0;
    }
    return {pass >= 45, std::to_string(pass) + "/50 within 5 deg, worst " + fmt("%.2f", worst) + " deg (need >= 90%)"};
}

binaural::BrirBank anechoic_bank(std::uint64_t seed) {
    const room::RoomSpec r{9.0, 9.0, 3.0, 0.2, 0};
    const Point3 listener{4.5, 4.5, 1.2};
    return binaural::render_brir_bank(r, listener, 1.0, binaural::synthetic_hrir_set(), room::MicArray::orthogonal_triad(),
                                      Rng(seed), anechoic());
}

Outcome brir_itd() {
    const auto hrirs = binaural::synthetic_hrir_set();
    const auto bank = anechoic_bank(404);
    Rng rng(404);
    const auto dry = white(rng, 8000);
    double worst = 0.0;
    for (int az : binaural::frontal_azimuths()) {
        const auto ears = motion::render_moving_source(dry, motion::static_trajectory(az, 0.5), bank);
        const double rendered = oracle::interaural_lag(ears.left(), ears.right(), 24, 1000, 7000);
        const double own = oracle::interaural_lag(hrirs.at(az).left(), hrirs.at(az).right(), 24);
        worst = std::max(worst, std::abs(rendered - own));
    }
    return {worst <= 1.0, "max |rendered ITD - HRIR ITD| " + fmt("%.3f", worst) + " samples over 37 azimuths (tol 1)"};
}

Outcome motion_tracking() {
    const auto bank = anechoic_bank(505);
    Rng rng(505);
    double sum = 0.0;
    for (int i = 0; i < 20; ++i) {
        const auto traj = motion::sample_trajectory(rng);
        const auto ears = motion::render_moving_source(white(rng, motion::kUtteranceSamples), traj, bank);
        sum += eval::doa_error(eval::doa_estimate(ears), traj);
    }
    const double mean = sum / 20.0;
    return {mean < 10.0, "mean absolute DoA error " + fmt("%.2f", mean) + " deg over 20 trajectories (tol < 10)"};
}

std::vector<std::uint8_t> file_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

double pooled_power(const BinauralBuffer& b) { return b.pooled_power(); }

Outcome scene_exactness() {
    const auto dir = fs::temp_directory_path() / "classroom_acceptance_scenes";
    fs::remove_all(dir);
    scene::DatasetSpec spec;
    spec.seed = 606;
    spec.rooms = 2;
    spec.roomSpecs = {{9.0, 9.0, 3.0, 0.2}, {9.5, 8.5, 3.2, 0.4}};
    spec.splits = {{"train", 20, {1.0}}, {"val", 5, {1.0}}, {"test", 5, {1.0}}};
    spec.maxOrder = 6;
    spec.bankRoot = dir / "banks";
    spec.output = dir / "a";
    scene::DemoCorpusOptions corpus;
    corpus.speakersPerGroup = 4;
    corpus.utterancesPerSpeaker = 5;
    const auto pools = scene::demo_pools(corpus);
    scene::render_room_caches(spec, scene::resolve_hrirs(spec), 1, false);
    const auto first = scene::generate_dataset(spec, pools, 1);

    double pairDev = 0.0, babbleDev = 0.0, residual = 0.0;
    const auto index = nlohmann::json::parse(std::ifstream(spec.output / "index.json"));
    const auto& scenes = index.at("scenes");
    for (const auto& entry : scenes) {
        const auto b = scene::load_scene(spec.output / entry.at("path").get<std::string>());
        pairDev = std::max(pairDev, std::abs(oracle::db(pooled_power(b.references[0]) / pooled_power(b.references[1])) -
                                             b.manifest.mixtureSnrDb));
        auto sum = b.references[0] + b.references[1];
        if (b.babble) {
            babbleDev = std::max(babbleDev, std::abs(oracle::db(pooled_power(sum) / pooled_power(*b.babble)) -
                                                     b.manifest.babbleSnrDb));
            sum += *b.babble;
        }
        residual = std::max(residual, (b.mixture - sum).peak());
    }

    auto again = spec;
    again.output = dir / "b";
    const auto second = scene::generate_dataset(again, pools, 2);
    bool identical = second.indexHash == first.indexHash;
    for (const auto& entry : scenes)
        for (const auto& [file, hash] : entry.at("files").items()) {
            const auto rel = fs::path(entry.at("path").get<std::string>()) / file;
            identical = identical && file_bytes(spec.output / rel) == file_bytes(again.output / rel);
        }
    const bool ok = scenes.size() == 30 && pairDev <= 0.01 && babbleDev <= 0.01 && residual < 1e-6 && identical;
    return {ok, std::to_string(scenes.size()) + " scenes, max pair SNR dev " + fmt("%.2e", pairDev) + " dB, babble " +
                    fmt("%.2e", babbleDev) + " dB (tol 0.01), additivity " + fmt("%.1e", residual) +
                    " (tol 1e-6), regeneration " + (identical ? "bit-identical" : "DIFFERS")};
}

Outcome loss_correctness() {
    Rng rng(707);
    auto noise2 = [&](std::size_t n) { return BinauralBuffer(white(rng, n, 1.0), white(rng, n, 1.0)); };
    int violations = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::vector<BinauralBuffer> refs{noise2(800), noise2(800)};
        const double a = rng.uniform(0.05, 2.0), b = rng.uniform(0.05, 2.0);
        std::vector<BinauralBuffer> ests{refs[trial % 2] + noise2(800).scaled(a), refs[1 - trial % 2] + noise2(800).scaled(b)};
        const double cap = trial % 3 == 0 ? 30.0 : std::numeric_limits<double>::infinity();
        const auto base = eval::pit_loss(refs, ests, cap);
        // Swapping the estimates swaps the chosen permutation and keeps the loss.
        const std::vector<BinauralBuffer> swappedEsts{ests[1], ests[0]};
        const auto sym = eval::pit_loss(refs, swappedEsts, cap);
        violations += sym.loss != base.loss || sym.permutation[0] != base.permutation[1];
        // Swapping ears in every signal keeps the loss.
        const std::vector<BinauralBuffer> er{refs[0].swapped(), refs[1].swapped()}, ee{ests[0].swapped(), ests[1].swapped()};
        const auto ear = eval::pit_loss(er, ee, cap);
        violations += ear.loss != base.loss || ear.permutation != base.permutation;
        // Relabelling talkers together with outputs keeps loss and permutation.
        const std::vector<BinauralBuffer> rr{refs[1], refs[0]};
        const auto rel = eval::pit_loss(rr, swappedEsts, cap);
        violations += rel.loss != base.loss || rel.permutation != base.permutation;
    }
    const auto s = white(rng, 4000, 1.0);
    const double zero = eval::snr(s, s.scaled(2.0));
    const double six = eval::snr(s, s.scaled(1.5));
    const double analytic = std::max(std::abs(zero), std::abs(six - 20.0 * std::log10(2.0)));
    return {violations == 0 && analytic <= 1e-6,
            std::to_string(violations) + " property violations in 600 checks, analytic cases " + fmt("%.6f", zero) +
                " / " + fmt("%.6f", six) + " dB (max dev " + fmt("%.1e", analytic) + ", tol 1e-6)"};
}

Outcome gradient_check() {
    Rng rng(808);
    auto params = sep::init_params(sep::ModelConfig::tiny(), rng);
    const auto ex = sep::make_toy_examples(1, 0.2, 808).front();
    sep::ObjectiveOptions opts;
    Eigen::VectorXd grad;
    sep::gradient(params, ex, opts, grad);
    std::vector<const sep::ParamBlock*> blocks;
    for (const auto& b : params.layout.blocks())
        if (b.name.rfind("doa.", 0) != 0) blocks.push_back(&b);
    const double h = 1e-4;
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const auto& b = *blocks[static_cast<std::size_t>(i) % blocks.size()];
        const auto k = static_cast<Eigen::Index>(b.offset + rng.below(b.size()));
        const double saved = params.values[k];
        params.values[k] = saved + h;
        const double up = sep::objective(params, ex, opts).total;
        params.values[k] = saved - h;
        const double down = sep::objective(params, ex, opts).total;
        params.values[k] = saved;
        const double numeric = (up - down) / (2.0 * h);
        worst = std::max(worst, std::abs(numeric - grad[k]) / std::max({std::abs(numeric), std::abs(grad[k]), 1e-6}));
    }
    const auto n = params.layout.size();
    return {worst < 1e-4 && n <= 5000, std::to_string(n) + " parameters, 200 probes, max relative error " +
                                            fmt("%.2e", worst) + " (tol 1e-4)"};
}

Outcome learning_signal() {
    const auto train = sep::make_toy_examples(50, 0.5, 900);
    const auto val = sep::make_toy_examples(10, 0.5, 901);
    Rng rng(909);
    const auto init = sep::init_params(sep::ModelConfig{}, rng);
    auto mean_snr = [&](const sep::ModelParams& p) {
        double s = 0.0;
        for (const auto& e : val) s += sep::pit_snr_db(p, e);
        return s / static_cast<double>(val.size());
    };
    sep::TrainConfig cfg;
    cfg.maxSteps = 200;
    cfg.batchSize = 5;
    const double before = mean_snr(init);
    const auto result = sep::train_micro(init, train, val, cfg);
    const double after = mean_snr(result.params);
    return {after - before >= 5.0 && result.steps == 200,
            "val PIT-SNR " + fmt("%.2f", before) + " -> " + fmt("%.2f", after) + " dB after " +
                std::to_string(result.steps) + " steps (gain " + fmt("%.2f", after - before) + ", need >= 5)"};
}

double pair_count_u(const std::vector<double>& x, const std::vector<double>& y) {
    double u = 0.0;
    for (double a : x)
        for (double b : y) u += a > b ? 1.0 : a == b ? 0.5 : 0.0;
    return u;
}

double enumerated_p(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> pooled = x;
    pooled.insert(pooled.end(), y.begin(), y.end());
    const std::size_t n = pooled.size(), n1 = x.size();
    const double centre = static_cast<double>(n1 * y.size()) / 2.0;
    const double observed = std::abs(pair_count_u(x, y) - centre);
    double hits = 0, all = 0;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) != n1) continue;
        std::vector<double> a, b;
        for (std::size_t i = 0; i < n; ++i) (mask >> i & 1u ? a : b).push_back(pooled[i]);
        all += 1;
        if (std::abs(pair_count_u(a, b) - centre) >= observed - 1e-9) hits += 1;
    }
    return hits / all;
}

Outcome statistics() {
    Rng rng(1010);
    double worst = 0.0;
    int cases = 0;
    for (std::size_t n = 2; n <= 10; ++n)
        for (std::size_t n1 = 1; n1 < n; ++n1)
            for (int trial = 0; trial < 5; ++trial) {
                std::vector<double> x(n1), y(n - n1);
                const int levels = trial % 2 ? 3 : 1000;
                for (auto& v : x) v = static_cast<double>(rng.below(levels));
                for (auto& v : y) v = static_cast<double>(rng.below(levels));
                const auto r = eval::mann_whitney_u(x, y);
                worst = std::max({worst, std::abs(r.p - enumerated_p(x, y)), std::abs(r.u - pair_count_u(x, y))});
                ++cases;
            }
    const auto bh = eval::fdr_adjust(std::vector<double>{0.01, 0.02, 0.04});
    const double bhDev = std::max({std::abs(bh[0] - 0.03), std::abs(bh[1] - 0.03), std::abs(bh[2] - 0.04)});
    return {worst < 1e-12 && bhDev < 1e-12,
            std::to_string(cases) + " exact cases, max deviation from enumeration " + fmt("%.1e", worst) + "; BH [" +
                fmt("%.2f", bh[0]) + ", " + fmt("%.2f", bh[1]) + ", " + fmt("%.2f", bh[2]) + "]"};
}

Outcome scaling_smoke() {
    const auto spec = scene::DatasetSpec::full_scale();
    spec.validate();
    const auto p = scene::plan_jobs(spec);
    const bool ok = p.rooms == 30 && p.distances.size() == 3 && p.rirJobsPerDistance == 2160 &&
                    p.totalScenes == 56000 && p.scenesPerSplit.at("train") == 40000 &&
                    p.scenesPerSplit.at("val") == 10000 && p.scenesPerSplit.at("test") == 6000;
    return {ok, std::to_string(p.rirJobsPerDistance) + " RIR jobs per distance, " + std::to_string(p.totalScenes) +
                    " scenes (40000/10000/6000)"};
}

} // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "geometry oracle", 60, geometry},
        {2, "reverberation fidelity", 300, reverberation},
        {3, "SDM recovery", 120, sdm_recovery},
        {4, "BRIR spatial fidelity", 60, brir_itd},
        {5, "motion tracking closed loop", 120, motion_tracking},
        {6, "scene exactness", 180, scene_exactness},
        {7, "loss correctness", 10, loss_correctness},
        {8, "gradient check", 120, gradient_check},
        {9, "micro learning signal", 600, learning_signal},
        {10, "statistics", 60, statistics},
        {11, "pipeline scaling smoke test", 10, scaling_smoke},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool inBudget = seconds <= c.budgetSeconds;
        const bool pass = o.pass && inBudget;
        failed += !pass;
        std::printf("criterion %2d %s: %s; %s; %.1f s (budget %.0f s%s)\n", c.id, pass ? "PASS" : "FAIL",
                    c.name.c_str(), o.detail.c_str(), seconds, c.budgetSeconds, inBudget ? "" : ", OVER");
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
