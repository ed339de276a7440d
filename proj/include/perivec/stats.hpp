//  Copyright 2026 The perivec Authors.
//
//  Licensed under the Apache License, Version 2.0 (the "License");
//  you may not use this file except in compliance with the License.
//  You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
//  Unless required by applicable law or agreed to in writing, software
//  distributed under the License is distributed on an "AS IS" BASIS,
//  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//  See the License for the specific language governing permissions and
//  limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "perivec/error.hpp"

namespace perivec {

inline double mean_of(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

inline double sample_sd(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    double m = mean_of(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

struct MeanCi {
    double mean = 0.0;
    double half_width = 0.0;  // 95% normal interval
};

inline MeanCi mean_ci95(std::span<const double> xs) {
    MeanCi r;
    r.mean = mean_of(xs);
    if (xs.size() > 1) r.half_width = 1.959963984540054 * sample_sd(xs) / std::sqrt(double(xs.size()));
    return r;
}

// Fractional (average) ranks, 1-based; ties share the mean rank.
inline std::vector<double> fractional_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
        i = j + 1;
    }
    return ranks;
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw ConfigError("pearson needs two equal-length samples");
    double mx = mean_of(x), my = mean_of(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw NumericError("pearson undefined for a constant sample");
    return sxy / (std::sqrt(sxx) * std::sqrt(syy));
}

inline double spearman_rho(std::span<const double> x, std::span<const double> y) {
    auto rx = fractional_ranks(x);
    auto ry = fractional_ranks(y);
    return pearson(rx, ry);
}

// Tau-a on two numeric sequences: (concordant - discordant) / (n choose 2).
inline double kendall_tau_a(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw ConfigError("kendall tau needs two equal-length samples");
    std::int64_t concordant = 0, discordant = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = i + 1; j < x.size(); ++j) {
            double prod = (x[i] - x[j]) * (y[i] - y[j]);
            if (prod > 0)
                ++concordant;
            else if (prod < 0)
                ++discordant;
        }
    }
    double pairs = static_cast<double>(x.size()) * (static_cast<double>(x.size()) - 1.0) / 2.0;
    return static_cast<double>(concordant - discordant) / pairs;
}

enum class Kernel { gaussian, exponential };

// Silverman's rule of thumb.
inline double silverman_bandwidth(std::span<const double> sample) {
    if (sample.empty()) throw ConfigError("bandwidth of an empty sample");
    double sd = sample_sd(sample);
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    auto quantile = [&](double q) {
        double pos = q * (static_cast<double>(sorted.size()) - 1.0);
        std::size_t lo = static_cast<std::size_t>(pos);
        std::size_t hi = std::min(lo + 1, sorted.size() - 1);
        double frac = pos - static_cast<double>(lo);
        return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
    };
    double iqr = quantile(0.75) - quantile(0.25);
    double spread = sd;
    if (iqr > 0.0) spread = std::min(spread, iqr / 1.34);
    if (spread <= 0.0) spread = std::max(std::abs(mean_of(sample)), 1.0) * 1e-3;
    return 0.9 * spread * std::pow(static_cast<double>(sample.size()), -0.2);
}

inline std::vector<double> kde_density(std::span<const double> sample, Kernel kernel, double bandwidth,
                                       std::span<const double> grid) {
    std::vector<double> density(grid.size(), 0.0);
    const double n = static_cast<double>(sample.size());
    if (kernel == Kernel::gaussian) {
        const double norm = 1.0 / (bandwidth * std::sqrt(2.0 * 3.14159265358979323846) * n);
        for (std::size_t g = 0; g < grid.size(); ++g) {
            double acc = 0.0;
            for (double x : sample) {
                double u = (grid[g] - x) / bandwidth;
                acc += std::exp(-0.5 * u * u);
            }
            density[g] = acc * norm;
        }
    } else {
        const double norm = 1.0 / (2.0 * bandwidth * n);
        for (std::size_t g = 0; g < grid.size(); ++g) {
            double acc = 0.0;
            for (double x : sample) acc += std::exp(-std::abs(grid[g] - x) / bandwidth);
            density[g] = acc * norm;
        }
    }
    return density;
}

// KL(p || q) between two densities evaluated on the same grid. Both are
// floored at 1e-12 and renormalized into discrete distributions, which keeps
// the estimate nonnegative.
inline double kl_divergence_grid(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size() || p.empty()) throw ConfigError("KL needs two equal-length densities");
    double sp = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        sp += std::max(p[i], 1e-12);
        sq += std::max(q[i], 1e-12);
    }
    double kl = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        double pi = std::max(p[i], 1e-12) / sp;
        double qi = std::max(q[i], 1e-12) / sq;
        kl += pi * std::log(pi / qi);
    }
    return kl;
}

// Density comparison on a shared 512-point grid spanning the pooled support,
// padded by three bandwidths.
inline double kl_divergence_kde(std::span<const double> sample_p, std::span<const double> sample_q,
                                Kernel kernel, std::size_t grid_points = 512) {
    double hp = silverman_bandwidth(sample_p);
    double hq = silverman_bandwidth(sample_q);
    double lo = std::min(*std::min_element(sample_p.begin(), sample_p.end()),
                         *std::min_element(sample_q.begin(), sample_q.end()));
    double hi = std::max(*std::max_element(sample_p.begin(), sample_p.end()),
                         *std::max_element(sample_q.begin(), sample_q.end()));
    double pad = 3.0 * std::max(hp, hq);
    lo -= pad;
    hi += pad;
    std::vector<double> grid(grid_points);
    double step = (hi - lo) / static_cast<double>(grid_points - 1);
    for (std::size_t i = 0; i < grid_points; ++i) grid[i] = lo + step * static_cast<double>(i);
    auto dp = kde_density(sample_p, kernel, hp, grid);
    auto dq = kde_density(sample_q, kernel, hq, grid);
    return kl_divergence_grid(dp, dq);
}

}  // namespace perivec
