#pragma once

// Shared helpers for the test suites: deterministic samplers and the
// independent brute-force oracles the expected values are checked against.

#include <cmath>
#include <complex>
#include <optional>
#include <random>
#include <vector>

#include "ratdiff/equation.hpp"

namespace testsupport {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double log_uniform(Rng& rng, double lo, double hi) {
    return std::exp(uniform(rng, std::log(lo), std::log(hi)));
}

inline int uniform_int(Rng& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline std::vector<double> random_window(Rng& rng, int k, double lo, double hi) {
    std::vector<double> w(static_cast<std::size_t>(k) + 1);
    for (double& v : w) v = uniform(rng, lo, hi);
    return w;
}

inline std::vector<double> random_positive_window(Rng& rng, int k, double lo, double hi) {
    std::vector<double> w(static_cast<std::size_t>(k) + 1);
    for (double& v : w) v = log_uniform(rng, lo, hi);
    return w;
}

// Oracle: iterate the raw equation x' = alpha*x_old/(beta + gamma*product)
// directly, independent of the library's normalized path. Returns the flat
// value sequence; stops silently at a vanishing denominator.
inline std::vector<double> raw_iteration_oracle(double alpha, double beta, double gamma,
                                                const std::vector<double>& init, int steps) {
    std::vector<double> values = init;
    std::vector<double> window = init;
    for (int n = 0; n < steps; ++n) {
        double prod = 1.0;
        for (double v : window) prod *= v;
        const double denom = beta + gamma * prod;
        if (std::abs(denom) <= 1e-300) break;
        const double next = alpha * window.front() / denom;
        if (!std::isfinite(next)) break;
        values.push_back(next);
        window.erase(window.begin());
        window.push_back(next);
    }
    return values;
}

// Oracle: geometric sum by direct summation.
inline double direct_geometric_sum(double c, int m) {
    double sum = 0.0;
    double power = 1.0;
    for (int i = 0; i <= m; ++i) {
        sum += power;
        power *= c;
    }
    return sum;
}

// Oracle: n-fold Riccati step by direct iteration; nullopt when a denominator
// comes within `pole_tol` of zero.
inline std::optional<double> direct_riccati_orbit(double c, double t0, int n,
                                                  double pole_tol = 0.0) {
    double t = t0;
    for (int i = 0; i < n; ++i) {
        const double denom = 1.0 + t;
        if (std::abs(denom) <= pole_tol || denom == 0.0) return std::nullopt;
        t = c * t / denom;
    }
    return t;
}

// Greedy nearest-point matching between two root multisets; returns the
// largest pairing distance (infinity on size mismatch).
inline double multiset_match_distance(std::vector<std::complex<double>> a,
                                      std::vector<std::complex<double>> b) {
    if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
    double worst = 0.0;
    for (const auto& x : a) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_index = 0;
        for (std::size_t j = 0; j < b.size(); ++j) {
            const double d = std::abs(x - b[j]);
            if (d < best) {
                best = d;
                best_index = j;
            }
        }
        worst = std::max(worst, best);
        b.erase(b.begin() + static_cast<std::ptrdiff_t>(best_index));
    }
    return worst;
}

}  // namespace testsupport
