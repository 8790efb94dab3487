//
//  report.cpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#include <classroom/dsp/wav.hpp>
#include <classroom/errors.hpp>
#include <classroom/eval/report.hpp>
#include <classroom/parallel.hpp>
#include <classroom/scene/dataset.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace classroom::eval {

namespace fs = std::filesystem;
using nlohmann::json;

std::array<MetricsRecord, 2> evaluate_scene(const scene::SceneBundle& scene,
                                            const std::array<dsp::BinauralBuffer, 2>& estimates,
                                            const DoaOptions& doa) {
    for (const auto& e : estimates) {
        if (e.size() != scene.mixture.size() || e.rate() != scene.mixture.rate()) {
            throw InvalidInput("estimate shape differs from the mixture in scene " + scene.manifest.sceneId);
        }
    }
    const auto& m = scene.manifest;
    const auto perm = pit_align(scene.references, estimates);
    std::array<MetricsRecord, 2> out;
    for (int c = 0; c < 2; ++c) {
        const int k = perm[static_cast<std::size_t>(c)];
        const auto& ref = scene.references[static_cast<std::size_t>(k)];
        const auto& est = estimates[static_cast<std::size_t>(c)];
        MetricsRecord r;
        r.sceneId = m.sceneId;
        r.talker = k;
        r.estimate = c;
        r.ageGroup = scene::to_string(m.talkers[static_cast<std::size_t>(k)].ageGroup);
        r.snriDb = snri(ref, est, scene.mixture);
        r.snrDb = 0.5 * (snr(ref.left(), est.left()) + snr(ref.right(), est.right()));
        try {
            r.doaErrorDeg = doa_error(doa_estimate(est, doa), m.talkers[static_cast<std::size_t>(k)].trajectory);
        } catch (const InvalidInput&) {
            r.doaErrorDeg = std::numeric_limits<double>::quiet_NaN();
        }
        r.permutation = perm;
        r.pairType = scene::to_string(m.pairType);
        r.babble = m.babble;
        r.distance = m.distance;
        r.roomId = m.roomId;
        out[static_cast<std::size_t>(k)] = std::move(r);
    }
    return out;
}

fs::path estimate_path(const fs::path& estimatesDir, const std::string& sceneId, int index) {
    return estimatesDir / sceneId / ("est" + std::to_string(index + 1) + ".wav");
}

std::vector<fs::path> split_scenes(const fs::path& datasetRoot, const std::string& split) {
    std::ifstream in(datasetRoot / "index.json");
    if (!in) throw IoError("no dataset index at " + (datasetRoot / "index.json").string());
    json index;
    try {
        in >> index;
    } catch (const json::exception& e) {
        throw IoError("malformed dataset index: " + std::string(e.what()));
    }
    std::vector<fs::path> out;
    for (const auto& s : index.at("scenes"))
        if (s.at("split").get<std::string>() == split) out.push_back(datasetRoot / s.at("path").get<std::string>());
    return out;
}

EvaluationResult evaluate_dataset(const fs::path& datasetRoot, const std::string& split, const fs::path& estimatesDir,
                                  int jobs, const DoaOptions& doa) {
    const auto scenes = split_scenes(datasetRoot, split);
    std::vector<std::optional<std::array<MetricsRecord, 2>>> results(scenes.size());
    std::vector<std::string> errors(scenes.size());
    std::vector<std::string> ids(scenes.size());
    parallel_for(scenes.size(), static_cast<std::size_t>(std::max(jobs, 1)), [&](std::size_t i) {
        ids[i] = scenes[i].filename().string();
        try {
            const auto bundle = scene::load_scene(scenes[i]);
            ids[i] = bundle.manifest.sceneId;
            std::array<dsp::BinauralBuffer, 2> est;
            for (int c = 0; c < 2; ++c) {
                const auto path = estimate_path(estimatesDir, ids[i], c);
                if (!fs::exists(path)) throw IoError("missing estimate " + path.string());
                est[static_cast<std::size_t>(c)] = dsp::read_binaural_wav(path);
            }
            results[i] = evaluate_scene(bundle, est, doa);
        } catch (const Error& e) {
            errors[i] = e.what();
        }
    });
    EvaluationResult out;
    out.scenes = scenes.size();
    std::vector<std::size_t> order(scenes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });
    for (auto i : order) {
        if (results[i]) {
            for (auto& r : *results[i]) out.records.push_back(r);
        } else {
            out.failures.push_back({ids[i], errors[i]});
        }
    }
    return out;
}

void write_baseline_estimates(const fs::path& datasetRoot, const std::string& split, const fs::path& estimatesDir,
                              BaselineKind kind) {
    for (const auto& dir : split_scenes(datasetRoot, split)) {
        const auto bundle = scene::load_scene(dir);
        fs::create_directories(estimatesDir / bundle.manifest.sceneId);
        for (int c = 0; c < 2; ++c) {
            const auto& signal = kind == BaselineKind::Passthrough ? bundle.mixture : bundle.references[static_cast<std::size_t>(c)];
            dsp::write_wav(estimate_path(estimatesDir, bundle.manifest.sceneId, c), signal);
        }
    }
}

namespace {

const char* kCsvHeader = "sceneId,talker,estimate,ageGroup,pairType,babble,distance,roomId,permutation,snriDb,snrDb,doaErrorDeg";

std::string permutation_tag(Permutation p) { return std::to_string(p[0]) + std::to_string(p[1]); }

double parse_double(const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) throw IoError("bad number '" + s + "' in metrics file");
    return v;
}

std::string format_distance(double d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.1f", d);
    return buf;
}

} // namespace

void write_metrics_csv(const fs::path& path, const std::vector<MetricsRecord>& records) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out.precision(10);
    out << kCsvHeader << '\n';
    for (const auto& r : records) {
        out << r.sceneId << ',' << r.talker << ',' << r.estimate << ',' << r.ageGroup << ',' << r.pairType << ','
            << (r.babble ? 1 : 0) << ',' << format_distance(r.distance) << ',' << r.roomId << ','
            << permutation_tag(r.permutation) << ',' << r.snriDb << ',' << r.snrDb << ',' << r.doaErrorDeg << '\n';
    }
}

std::vector<MetricsRecord> read_metrics_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open metrics file " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) throw IoError(path.string() + " is not a metrics file");
    std::vector<MetricsRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
        if (f.size() != 12 || f[8].size() != 2) throw IoError("malformed metrics row: " + line);
        MetricsRecord r;
        r.sceneId = f[0];
        r.talker = std::stoi(f[1]);
        r.estimate = std::stoi(f[2]);
        r.ageGroup = f[3];
        r.pairType = f[4];
        r.babble = f[5] == "1";
        r.distance = parse_double(f[6]);
        r.roomId = std::stoi(f[7]);
        r.permutation = {f[8][0] - '0', f[8][1] - '0'};
        r.snriDb = parse_double(f[9]);
        r.snrDb = parse_double(f[10]);
        r.doaErrorDeg = parse_double(f[11]);
        out.push_back(std::move(r));
    }
    return out;
}

namespace {

std::vector<double> metric_values(const std::vector<MetricsRecord>& records, const std::string& metric,
                                  const std::function<bool(const MetricsRecord&)>& keep) {
    std::vector<double> v;
    for (const auto& r : records) {
        if (!keep(r)) continue;
        const double x = metric == "snri" ? finite_db(r.snriDb) : r.doaErrorDeg;
        if (std::isfinite(x)) v.push_back(x);
    }
    return v;
}

json stats_json(const std::vector<double>& v) {
    if (v.empty()) return {{"mean", nullptr}, {"sem", nullptr}, {"n", 0}};
    const auto s = mean_sem(v);
    return {{"mean", s.mean}, {"sem", s.sem}, {"n", s.n}};
}

json group_json(const std::vector<MetricsRecord>& records, const std::function<bool(const MetricsRecord&)>& keep) {
    return {{"snri", stats_json(metric_values(records, "snri", keep))},
            {"doa", stats_json(metric_values(records, "doa", keep))}};
}

const std::vector<std::string> kPairTypes{"child-child", "child-adult", "adult-adult"};

std::vector<double> distances_of(const std::vector<MetricsRecord>& records) {
    std::set<double> d;
    for (const auto& r : records) d.insert(r.distance);
    return {d.begin(), d.end()};
}

} // namespace

std::vector<Contrast> default_contrasts() {
    std::vector<Contrast> out;
    for (const std::string metric : {"snri", "doa"}) {
        out.push_back({"clean vs babble", metric, [](const MetricsRecord& r) { return !r.babble; },
                       [](const MetricsRecord& r) { return r.babble; }});
        for (std::size_t a = 0; a < kPairTypes.size(); ++a)
            for (std::size_t b = a + 1; b < kPairTypes.size(); ++b) {
                const auto pa = kPairTypes[a], pb = kPairTypes[b];
                out.push_back({pa + " vs " + pb, metric, [pa](const MetricsRecord& r) { return r.pairType == pa; },
                               [pb](const MetricsRecord& r) { return r.pairType == pb; }});
            }
        const double ring[] = {1.0, 1.5, 2.0};
        for (int a = 0; a < 3; ++a)
            for (int b = a + 1; b < 3; ++b) {
                const double da = ring[a], db = ring[b];
                out.push_back({format_distance(da) + " m vs " + format_distance(db) + " m", metric,
                               [da](const MetricsRecord& r) { return std::abs(r.distance - da) < 1e-9; },
                               [db](const MetricsRecord& r) { return std::abs(r.distance - db) < 1e-9; }});
            }
    }
    return out;
}

json summarize(const std::vector<MetricsRecord>& records, const std::vector<Contrast>& contrasts,
               const std::vector<SceneFailure>& failures) {
    if (records.empty()) throw PipelineError("no metrics records to summarise");
    std::set<std::string> scenes;
    for (const auto& r : records) scenes.insert(r.sceneId);
    json s;
    s["records"] = records.size();
    s["scenes"] = scenes.size();
    s["complete"] = failures.empty();
    s["failures"] = json::array();
    for (const auto& f : failures) s["failures"].push_back({{"sceneId", f.sceneId}, {"message", f.message}});
    s["sentinelDb"] = kSentinelDb;
    s["overall"] = group_json(records, [](const MetricsRecord&) { return true; });

    json groups;
    for (const auto& p : kPairTypes) groups["pairType"][p] = group_json(records, [&](const MetricsRecord& r) { return r.pairType == p; });
    for (bool b : {false, true}) {
        groups["babble"][b ? "babble" : "clean"] = group_json(records, [&](const MetricsRecord& r) { return r.babble == b; });
        for (const auto& p : kPairTypes) {
            groups["pairType x babble"][p + "/" + (b ? "babble" : "clean")] =
                group_json(records, [&](const MetricsRecord& r) { return r.babble == b && r.pairType == p; });
        }
    }
    for (double d : distances_of(records)) {
        const auto key = format_distance(d);
        groups["distance"][key] = group_json(records, [&](const MetricsRecord& r) { return r.distance == d; });
        for (const auto& p : kPairTypes) {
            groups["pairType x distance"][p + "/" + key] =
                group_json(records, [&](const MetricsRecord& r) { return r.distance == d && r.pairType == p; });
        }
    }
    for (const std::string age : {"child", "adult"}) {
        groups["talkerAge"][age] = group_json(records, [&](const MetricsRecord& r) { return r.ageGroup == age; });
    }
    s["groups"] = groups;

    json tests = json::array();
    std::vector<double> pValues;
    std::vector<std::size_t> tested;
    for (const auto& c : contrasts) {
        const auto x = metric_values(records, c.metric, c.first);
        const auto y = metric_values(records, c.metric, c.second);
        json t{{"name", c.name}, {"metric", c.metric}, {"n1", x.size()}, {"n2", y.size()}};
        if (x.empty() || y.empty()) {
            t["skipped"] = "a group is empty";
        } else {
            const auto r = mann_whitney_u(x, y);
            t["u"] = r.u;
            t["p"] = r.p;
            t["r"] = r.r;
            t["exact"] = r.exact;
            pValues.push_back(r.p);
            tested.push_back(tests.size());
        }
        tests.push_back(std::move(t));
    }
    if (!pValues.empty()) {
        const auto adjusted = fdr_adjust(pValues);
        for (std::size_t i = 0; i < tested.size(); ++i) tests[tested[i]]["pAdjusted"] = adjusted[i];
    }
    s["contrasts"] = tests;
    return s;
}

void write_plot_tables(const fs::path& dir, const std::vector<MetricsRecord>& records) {
    fs::create_directories(dir);
    auto table = [&](const std::string& file, const std::string& metric, const std::string& axis,
                     const std::vector<std::pair<std::string, std::function<bool(const MetricsRecord&)>>>& levels) {
        std::ofstream out(dir / file);
        if (!out) throw IoError("cannot write " + (dir / file).string());
        out.precision(8);
        out << axis << ",pairType,mean,sem,n\n";
        std::vector<std::string> pairs = kPairTypes;
        pairs.push_back("all");
        for (const auto& [level, keep] : levels)
            for (const auto& p : pairs) {
                const auto v = metric_values(records, metric, [&](const MetricsRecord& r) {
                    return keep(r) && (p == "all" || r.pairType == p);
                });
                if (v.empty()) continue;
                const auto s = mean_sem(v);
                out << level << ',' << p << ',' << s.mean << ',' << s.sem << ',' << s.n << '\n';
            }
    };
    const std::vector<std::pair<std::string, std::function<bool(const MetricsRecord&)>>> conditions{
        {"clean", [](const MetricsRecord& r) { return !r.babble; }},
        {"babble", [](const MetricsRecord& r) { return r.babble; }}};
    std::vector<std::pair<std::string, std::function<bool(const MetricsRecord&)>>> distances;
    for (double d : distances_of(records)) {
        distances.emplace_back(format_distance(d), [d](const MetricsRecord& r) { return r.distance == d; });
    }
    table("snri_by_condition.csv", "snri", "condition", conditions);
    table("doa_by_condition.csv", "doa", "condition", conditions);
    table("snri_by_distance.csv", "snri", "distance", distances);
    table("doa_by_distance.csv", "doa", "distance", distances);
}

json write_report(const fs::path& outDir, const std::vector<MetricsRecord>& records,
                  const std::vector<SceneFailure>& failures) {
    auto summary = summarize(records, default_contrasts(), failures);
    fs::create_directories(outDir);
    {
        const auto tmp = outDir / "summary.json.tmp";
        std::ofstream out(tmp);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << summary.dump(2) << '\n';
        out.close();
        fs::rename(tmp, outDir / "summary.json");
    }
    write_plot_tables(outDir / "plots", records);
    return summary;
}

} // namespace classroom::eval
