#pragma once

// Core types and iteration for the (k+1)-order rational difference equation
//
//     x_{n+1} = alpha * x_{n-k} / (beta + gamma * x_n x_{n-1} ... x_{n-k})
//
// and its normalized form
//
//     y_{n+1} = c * y_{n-k} / (1 + y_n y_{n-1} ... y_{n-k}),   c = alpha/beta,
//
// obtained by the substitution x_n = scale * y_n with scale = (beta/gamma)^{1/(k+1)}.
//
// Window convention used everywhere in this library: a state window stores the
// last k+1 values OLDEST FIRST, i.e. w[0] = x_{n-k}, ..., w[k] = x_n. The
// numerator of one step is therefore c * w[0].

#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "ratdiff/errors.hpp"

namespace ratdiff {

/// Default tolerance on |1 + product| below which a step is treated as a
/// forbidden-set hit rather than round-off.
inline constexpr double kDefaultBlowupTol = 1e-12;

/// Raw parameters (alpha, beta, gamma, k) of the unnormalized equation.
/// Construct through validate_params to get the invariants checked.
struct ParamSet {
    double alpha = 1.0;
    double beta = 1.0;
    double gamma = 1.0;
    int k = 1;
};

/// Canonical pair (c, k) plus the state scale factor of the substitution
/// x = scale * y.
struct NormalizedEquation {
    double c = 1.0;
    int k = 1;
    double scale = 1.0;
};

/// The ordered (k+1)-tuple of consecutive states that drives one step,
/// oldest entry first. All entries are finite by construction.
class StateWindow {
public:
    StateWindow() = default;

    explicit StateWindow(std::vector<double> values) : values_(std::move(values)) {
        if (values_.empty()) throw Error("state window must not be empty");
        for (double v : values_) {
            if (!std::isfinite(v)) throw Error("state window entries must be finite");
        }
    }

    /// Window of k+1 copies of the same value.
    static StateWindow constant(double value, int k) {
        return StateWindow(std::vector<double>(static_cast<std::size_t>(k) + 1, value));
    }

    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const { return values_[i]; }
    [[nodiscard]] double front() const { return values_.front(); }
    [[nodiscard]] double back() const { return values_.back(); }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }

    [[nodiscard]] auto begin() const noexcept { return values_.begin(); }
    [[nodiscard]] auto end() const noexcept { return values_.end(); }

    bool operator==(const StateWindow&) const = default;

private:
    std::vector<double> values_;
};

/// Result of one application of the map: the next value, or empty when the
/// denominator 1 + x_n...x_{n-k} vanished within the blow-up tolerance.
using StepOutcome = std::optional<double>;

/// Validated constructor for ParamSet. alpha, beta, gamma must be strictly
/// positive and k >= 1; anything else is one of the excluded degenerate
/// regimes and is rejected.
inline ParamSet validate_params(double alpha, double beta, double gamma, int k) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw NonPositiveParameter("alpha", alpha);
    if (!(beta > 0.0) || !std::isfinite(beta)) throw NonPositiveParameter("beta", beta);
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw NonPositiveParameter("gamma", gamma);
    if (k < 1) throw InvalidOrder(k);
    return ParamSet{alpha, beta, gamma, k};
}

/// Reduce to the normalized equation: c = alpha/beta and
/// scale = (beta/gamma)^{1/(k+1)}. Substituting x = scale * y into the raw
/// equation gives exactly the normalized one, which the conjugacy tests
/// verify by direct iteration.
inline NormalizedEquation normalize(const ParamSet& p) {
    // exp2/log2 keeps power-of-two ratios exact (e.g. (1/8)^{1/3} == 0.5).
    const double scale = std::exp2(std::log2(p.beta / p.gamma) / (p.k + 1));
    return NormalizedEquation{p.alpha / p.beta, p.k, scale};
}

/// Product of all k+1 window entries, multiplied left to right.
[[nodiscard]] inline double window_product(const StateWindow& w) {
    double prod = 1.0;
    for (double v : w) prod *= v;
    return prod;
}

/// One step of the normalized equation from window w (length k+1, oldest
/// first): c * w[0] / (1 + product(w)). Returns empty when |1 + product|
/// is within blowup_tol, i.e. the window sits on the forbidden set as far
/// as double precision can tell.
[[nodiscard]] inline StepOutcome step(const NormalizedEquation& eq, const StateWindow& w,
                                      double blowup_tol = kDefaultBlowupTol) {
    if (w.size() != static_cast<std::size_t>(eq.k) + 1) {
        throw Error("window length " + std::to_string(w.size()) +
                    " does not match k+1 = " + std::to_string(eq.k + 1));
    }
    const double denom = 1.0 + window_product(w);
    if (std::abs(denom) <= blowup_tol) return std::nullopt;
    return eq.c * w.front() / denom;
}

/// A computed orbit of the normalized equation. `values` holds the flat
/// sequence x_{-k}, ..., x_N (initial window first). `terminated_early`,
/// when set, is the step index n at which x_n could not be computed; the
/// stored values then end at x_{n-1}.
struct Trajectory {
    NormalizedEquation eq;
    std::vector<double> values;
    std::optional<int> terminated_early;

    [[nodiscard]] int k() const noexcept { return eq.k; }

    /// Number of steps actually computed, i.e. values beyond the initial window.
    [[nodiscard]] std::size_t steps_completed() const {
        return values.size() - static_cast<std::size_t>(eq.k) - 1;
    }

    /// Number of full windows contained in the value sequence. window(0) is
    /// the initial window; window(i) is the window after i steps.
    [[nodiscard]] std::size_t num_windows() const {
        return values.size() - static_cast<std::size_t>(eq.k);
    }

    /// Window after i steps; consecutive windows overlap in k entries.
    [[nodiscard]] StateWindow window(std::size_t i) const {
        if (i >= num_windows()) throw Error("window index out of range");
        return StateWindow(std::vector<double>(values.begin() + static_cast<std::ptrdiff_t>(i),
                                               values.begin() + static_cast<std::ptrdiff_t>(i + eq.k + 1)));
    }

    /// x_n for n >= -k.
    [[nodiscard]] double value_at_step(int n) const {
        const auto idx = static_cast<std::size_t>(n + eq.k);
        if (n < -eq.k || idx >= values.size()) throw Error("step index out of range");
        return values[idx];
    }

    [[nodiscard]] StateWindow final_window() const { return window(num_windows() - 1); }
};

/// Iterate n_steps applications of `step`, shifting the window each time.
/// Stops early and records the step index when a blow-up occurs or a value
/// stops being finite. Deterministic: identical inputs give bitwise
/// identical trajectories.
[[nodiscard]] inline Trajectory iterate(const NormalizedEquation& eq, const StateWindow& w0,
                                        int n_steps, double blowup_tol = kDefaultBlowupTol) {
    if (n_steps < 0) throw PreconditionViolated("n_steps must be >= 0");
    if (w0.size() != static_cast<std::size_t>(eq.k) + 1) {
        throw Error("initial window length does not match k+1");
    }
    Trajectory traj{eq, {}, std::nullopt};
    traj.values.reserve(w0.size() + static_cast<std::size_t>(n_steps));
    traj.values.assign(w0.begin(), w0.end());

    std::vector<double> window(w0.begin(), w0.end());

    for (int n = 1; n <= n_steps; ++n) {
        // Recompute the product from the window each step; k is small and this
        // avoids drift that dividing out the dropped entry would accumulate.
        double prod = 1.0;
        for (double v : window) prod *= v;
        const double denom = 1.0 + prod;
        if (std::abs(denom) <= blowup_tol) {
            traj.terminated_early = n;
            break;
        }
        const double next = eq.c * window.front() / denom;
        if (!std::isfinite(next)) {
            traj.terminated_early = n;
            break;
        }
        traj.values.push_back(next);
        window.erase(window.begin());
        window.push_back(next);
    }
    return traj;
}

}  // namespace ratdiff
