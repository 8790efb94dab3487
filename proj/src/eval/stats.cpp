//
//  stats.cpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#include <classroom/errors.hpp>
#include <classroom/eval/stats.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace classroom::eval {

std::vector<double> midranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
        const double rank = 0.5 * static_cast<double>(i + 1 + j); // mean of ranks i+1 .. j
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
        i = j;
    }
    return ranks;
}

namespace {

// Probability that a random split of the pooled ranks gives |U - mean| >= observed.
double exact_p(const std::vector<double>& ranks, std::size_t n1, double u) {
    const std::size_t n = ranks.size();
    const double n2 = static_cast<double>(n - n1);
    // Doubled midranks are integers, so rank sums can index a table.
    std::vector<int> doubled(n);
    int total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        doubled[i] = static_cast<int>(std::lround(2.0 * ranks[i]));
        total += doubled[i];
    }
    // ways[k][s]: subsets of size k with doubled rank sum s.
    std::vector<std::vector<double>> ways(n1 + 1, std::vector<double>(static_cast<std::size_t>(total) + 1, 0.0));
    ways[0][0] = 1.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = std::min(i + 1, n1); k >= 1; --k)
            for (int s = total; s >= doubled[i]; --s) ways[k][s] += ways[k - 1][s - doubled[i]];

    const double offset = static_cast<double>(n1) * (n1 + 1) / 2.0;
    const double centre = static_cast<double>(n1) * n2 / 2.0;
    const double observed = std::abs(u - centre);
    double hits = 0.0, all = 0.0;
    for (int s = 0; s <= total; ++s) {
        const double w = ways[n1][static_cast<std::size_t>(s)];
        if (w == 0.0) continue;
        all += w;
        if (std::abs(s / 2.0 - offset - centre) >= observed - 1e-9) hits += w;
    }
    return std::min(1.0, hits / all);
}

} // namespace

StatTestResult mann_whitney_u(std::span<const double> x, std::span<const double> y) {
    if (x.empty() || y.empty()) throw InvalidInput("Mann-Whitney U needs two non-empty samples");
    std::vector<double> pooled(x.begin(), x.end());
    pooled.insert(pooled.end(), y.begin(), y.end());
    for (double v : pooled)
        if (!std::isfinite(v)) throw InvalidInput("Mann-Whitney U samples must be finite");
    const auto ranks = midranks(pooled);

    StatTestResult res;
    res.n1 = x.size();
    res.n2 = y.size();
    const double n1 = static_cast<double>(res.n1), n2 = static_cast<double>(res.n2), n = n1 + n2;
    const double rankSum = std::accumulate(ranks.begin(), ranks.begin() + static_cast<long>(res.n1), 0.0);
    res.u = rankSum - n1 * (n1 + 1) / 2.0;
    res.r = 1.0 - 2.0 * res.u / (n1 * n2);

    if (pooled.size() <= kExactLimit) {
        res.exact = true;
        res.p = exact_p(ranks, res.n1, res.u);
        return res;
    }
    std::map<double, int> ties;
    for (double v : pooled) ties[v]++;
    double tieTerm = 0.0;
    for (const auto& [v, t] : ties) tieTerm += static_cast<double>(t) * t * t - t;
    const double variance = n1 * n2 / 12.0 * ((n + 1.0) - tieTerm / (n * (n - 1.0)));
    if (!(variance > 0.0)) {
        res.p = 1.0;
        return res;
    }
    const double z = std::max(0.0, std::abs(res.u - n1 * n2 / 2.0) - 0.5) / std::sqrt(variance);
    res.p = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
    return res;
}

std::vector<double> fdr_adjust(std::span<const double> pValues) {
    for (double p : pValues)
        if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("p-values must lie in [0, 1]");
    const std::size_t m = pValues.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pValues[a] < pValues[b]; });
    std::vector<double> adjusted(m);
    double running = 1.0;
    for (std::size_t i = m; i-- > 0;) {
        const double scaled = pValues[order[i]] * static_cast<double>(m) / static_cast<double>(i + 1);
        running = std::min(running, scaled);
        adjusted[order[i]] = std::min(1.0, running);
    }
    return adjusted;
}

MeanSem mean_sem(std::span<const double> values) {
    MeanSem out;
    out.n = values.size();
    if (values.empty()) return out;
    out.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(out.n);
    if (out.n > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - out.mean) * (v - out.mean);
        out.sem = std::sqrt(ss / static_cast<double>(out.n - 1) / static_cast<double>(out.n));
    }
    return out;
}

} // namespace classroom::eval
