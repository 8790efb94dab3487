//
//  stats.hpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace classroom::eval {

/// Pooled sample sizes up to this bound use the exact permutation distribution.
inline constexpr std::size_t kExactLimit = 12;

struct StatTestResult {
    double u = 0.0;       // statistic of the first sample
    double p = 1.0;       // two-sided
    double r = 0.0;       // rank-biserial, 1 - 2U/(n1 n2)
    std::size_t n1 = 0;
    std::size_t n2 = 0;
    bool exact = false;
};

/// Midranks of the pooled sample, ties averaged.
std::vector<double> midranks(std::span<const double> values);

StatTestResult mann_whitney_u(std::span<const double> x, std::span<const double> y);

/// Benjamini-Hochberg step-up adjustment, returned in input order.
std::vector<double> fdr_adjust(std::span<const double> pValues);

struct MeanSem {
    double mean = 0.0;
    double sem = 0.0;
    std::size_t n = 0;
};

MeanSem mean_sem(std::span<const double> values);

} // namespace classroom::eval
