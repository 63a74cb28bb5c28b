#pragma once

// Order reduction of the normalized equation through the window product.
//
// Writing H(w) = w[0] * ... * w[k], one step of the equation multiplies the
// product by exactly c / (1 + H(w)), so H intertwines the full (k+1)-dim map
// with the scalar Riccati map phi(t) = c t / (1 + t):
//
//     H(step(w)) = phi(H(w)).
//
// The convergence picture then splits by c alone:
//   c < 1  every nonnegative orbit decays to the origin at rate c^{1/(k+1)},
//   c > 1  products converge to c - 1 and every window on that fiber is a
//          (k+1)-cycle,
//   c = 1  products follow t_n = t0 / (1 + n t0) exactly and positive orbits
//          approach windows with a vanishing coordinate (also (k+1)-cycles).

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "ratdiff/equation.hpp"
#include "ratdiff/errors.hpp"
#include "ratdiff/forbidden.hpp"
#include "ratdiff/stability.hpp"

namespace ratdiff {

/// Default tolerance on |c - 1| when assigning the critical regime.
inline constexpr double kDefaultRegimeTol = 1e-12;

/// Default sup-norm tolerance for accepting a window as a (k+1)-cycle.
inline constexpr double kDefaultCycleTol = 1e-9;

/// Value of the link map at a window (the product of its entries).
[[nodiscard]] inline double link_value(const StateWindow& w) { return window_product(w); }

/// A value of the link map paired with the limit the factor orbit is expected
/// to reach in the window's regime: c-1 when c > 1, otherwise 0.
struct FiberLevel {
    double t = 0.0;
    double regime_target = 0.0;
};

[[nodiscard]] inline FiberLevel fiber_level(const NormalizedEquation& eq, const StateWindow& w) {
    return {link_value(w), std::max(eq.c - 1.0, 0.0)};
}

/// One application of the factor map phi(t) = c t / (1 + t).
[[nodiscard]] inline double factor_step(double c, double t,
                                        double blowup_tol = kDefaultBlowupTol) {
    return riccati_step(c, t, blowup_tol);
}

/// The factor map with its analytic derivatives, phi'(t) = c/(1+t)^2 and
/// phi''(t) = -2c/(1+t)^3.
[[nodiscard]] inline DifferentiableMap factor_map(double c) {
    return DifferentiableMap{
        [c](double t) { return c * t / (1.0 + t); },
        [c](double t) { const double d = 1.0 + t; return c / (d * d); },
        [c](double t) { const double d = 1.0 + t; return -2.0 * c / (d * d * d); },
    };
}

/// |H(step(w)) - phi(H(w))|. The identity is exact, so the returned value is
/// pure round-off. Throws ForbiddenBlowup when the step is undefined.
[[nodiscard]] inline double semiconjugacy_residual(const NormalizedEquation& eq,
                                                   const StateWindow& w,
                                                   double blowup_tol = kDefaultBlowupTol) {
    const StepOutcome next = step(eq, w, blowup_tol);
    if (!next) throw ForbiddenBlowup("semiconjugacy_residual: step blew up");
    double shifted_product = *next;
    for (std::size_t i = 1; i < w.size(); ++i) shifted_product *= w[i];
    const double factor_image = factor_step(eq.c, window_product(w), blowup_tol);
    return std::abs(shifted_product - factor_image);
}

/// Result of testing a window for (k+1)-periodicity.
struct CycleReport {
    bool is_cycle = false;
    int period = 0;  // always k+1; only that period is tested
    StateWindow cycle_window;
    double fiber_value = 0.0;
    double max_deviation = 0.0;  // sup-norm of the k+1-step image minus the window
};

/// Apply k+1 steps to w and report the sup-norm deviation of the resulting
/// window from w. Deviation within tol means w is a (k+1)-cycle.
[[nodiscard]] inline CycleReport verify_kp1_cycle(const NormalizedEquation& eq,
                                                  const StateWindow& w,
                                                  double tol = kDefaultCycleTol,
                                                  double blowup_tol = kDefaultBlowupTol) {
    CycleReport report;
    report.period = eq.k + 1;
    report.cycle_window = w;
    report.fiber_value = link_value(w);

    std::vector<double> current(w.begin(), w.end());
    for (int i = 0; i <= eq.k; ++i) {
        const StepOutcome next = step(eq, StateWindow(current), blowup_tol);
        if (!next) throw ForbiddenBlowup("verify_kp1_cycle: orbit hit the forbidden set");
        current.erase(current.begin());
        current.push_back(*next);
    }
    for (std::size_t i = 0; i < current.size(); ++i) {
        report.max_deviation = std::max(report.max_deviation, std::abs(current[i] - w[i]));
    }
    report.is_cycle = report.max_deviation <= tol;
    return report;
}

/// Test the final window of a trajectory for (k+1)-periodicity. Requires at
/// least 2(k+1) computed values beyond the initial window.
[[nodiscard]] inline CycleReport detect_cycle(const Trajectory& traj,
                                              double tol = kDefaultCycleTol,
                                              double blowup_tol = kDefaultBlowupTol) {
    const std::size_t needed = 3 * (static_cast<std::size_t>(traj.k()) + 1);
    if (traj.values.size() < needed) {
        throw InsufficientData("detect_cycle needs at least 2(k+1) values beyond the window");
    }
    return verify_kp1_cycle(traj.eq, traj.final_window(), tol, blowup_tol);
}

/// Outcome of checking the subcritical decay bound
///     x_{n+1} <= c^{floor((n+1)/(k+1))} * max(initial window)
/// at every computed step. worst_ratio is the tightest observed ratio of a
/// value to its bound.
struct BoundCheck {
    bool holds = false;
    double worst_ratio = 0.0;
    int worst_step = 0;  // the step index n+1 achieving worst_ratio
};

namespace detail {
inline int floor_div(int a, int b) {
    int q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}
}  // namespace detail

/// Check the exponential decay bound along a trajectory with c < 1 and a
/// nonnegative initial window. A hair of slack absorbs the rounding of the
/// computed powers.
[[nodiscard]] inline BoundCheck exponential_bound_check(const NormalizedEquation& eq,
                                                        const Trajectory& traj) {
    if (!(eq.c < 1.0)) {
        throw PreconditionViolated("exponential_bound_check requires c < 1");
    }
    const int k = eq.k;
    double initial_max = 0.0;
    for (int i = 0; i <= k; ++i) {
        const double v = traj.values[static_cast<std::size_t>(i)];
        if (v < 0.0) {
            throw PreconditionViolated("exponential_bound_check requires nonnegative initials");
        }
        initial_max = std::max(initial_max, v);
    }

    BoundCheck check{true, 0.0, 0};
    if (initial_max == 0.0) {
        // Entire orbit is identically zero; the bound holds with equality.
        for (double v : traj.values) {
            if (v != 0.0) check.holds = false;
        }
        return check;
    }
    for (std::size_t j = 1; j < traj.values.size(); ++j) {
        const int m = static_cast<int>(j) - k;  // values[j] == x_m
        const double bound = std::pow(eq.c, detail::floor_div(m, k + 1)) * initial_max;
        const double ratio = traj.values[j] / bound;
        if (ratio > check.worst_ratio) {
            check.worst_ratio = ratio;
            check.worst_step = m;
        }
    }
    check.holds = check.worst_ratio <= 1.0 + 1e-9;
    return check;
}

/// Convergence regime, a function of c alone.
enum class Regime { Subcritical, Critical, Supercritical };

[[nodiscard]] inline Regime classify_regime(double c, double tol = kDefaultRegimeTol) {
    if (std::abs(c - 1.0) <= tol) return Regime::Critical;
    return c < 1.0 ? Regime::Subcritical : Regime::Supercritical;
}

enum class LimitKind { Origin, Cycle, Undetermined };

/// Convergence classification of one trajectory.
struct RegimeReport {
    Regime regime = Regime::Critical;
    LimitKind limit_kind = LimitKind::Undetermined;
    std::optional<StateWindow> limit_window;
    /// |H(final window) - target| where the target is c-1 for c > 1 and 0
    /// otherwise.
    double fiber_gap = std::numeric_limits<double>::quiet_NaN();
    /// Least-squares slope of log|x_n| (subcritical) or log of the fiber gap
    /// (supercritical) over the final third; reported, never asserted.
    std::optional<double> rate_estimate;
    /// Set when some initial entry is not positive: the convergence guarantees
    /// assume positive windows, so verdicts here are observations only.
    bool out_of_hypothesis = false;
    std::optional<int> terminated_early;
};

namespace detail {

inline std::optional<double> log_slope(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 8) return std::nullopt;
    double mean_x = 0.0;
    double mean_y = 0.0;
    for (const auto& [x, y] : points) {
        mean_x += x;
        mean_y += y;
    }
    mean_x /= static_cast<double>(points.size());
    mean_y /= static_cast<double>(points.size());
    double sxy = 0.0;
    double sxx = 0.0;
    for (const auto& [x, y] : points) {
        sxy += (x - mean_x) * (y - mean_y);
        sxx += (x - mean_x) * (x - mean_x);
    }
    if (sxx == 0.0) return std::nullopt;
    return sxy / sxx;
}

}  // namespace detail

/// Iterate n_steps from w0 and classify what the orbit converges to.
///
/// Subcritical c: the limit is the origin, certified by the exponential decay
/// bound (for nonnegative windows). Supercritical c: the limit is a
/// (k+1)-cycle on the fiber H = c-1, certified by the fiber gap reaching tol
/// and the final window closing up to cycle_tol. Critical c: the product must
/// reach tol; the limit is reported as the origin when the whole window has
/// decayed below sqrt(tol) and as a cycle through a vanishing coordinate
/// otherwise. Whenever the tolerances are not met within n_steps the limit is
/// Undetermined.
[[nodiscard]] inline RegimeReport analyze_convergence(const NormalizedEquation& eq,
                                                      const StateWindow& w0, int n_steps,
                                                      double tol,
                                                      double cycle_tol = 1e-6,
                                                      double blowup_tol = kDefaultBlowupTol) {
    RegimeReport report;
    report.regime = classify_regime(eq.c);
    for (double v : w0) {
        if (!(v > 0.0)) report.out_of_hypothesis = true;
    }

    const Trajectory traj = iterate(eq, w0, n_steps, blowup_tol);
    report.terminated_early = traj.terminated_early;
    const StateWindow final_win = traj.final_window();
    const FiberLevel level = fiber_level(eq, final_win);
    const double final_product = level.t;
    const double target = level.regime_target;
    report.fiber_gap = std::abs(final_product - target);

    const bool completed = !traj.terminated_early.has_value();
    double final_sup = 0.0;
    for (double v : final_win) final_sup = std::max(final_sup, std::abs(v));

    switch (report.regime) {
        case Regime::Subcritical: {
            bool nonnegative = true;
            for (int i = 0; i <= eq.k; ++i) {
                if (traj.values[static_cast<std::size_t>(i)] < 0.0) nonnegative = false;
            }
            if (completed && nonnegative) {
                if (exponential_bound_check(eq, traj).holds) {
                    report.limit_kind = LimitKind::Origin;
                    report.limit_window = StateWindow::constant(0.0, eq.k);
                }
            } else if (completed && final_sup <= tol) {
                report.limit_kind = LimitKind::Origin;
                report.limit_window = StateWindow::constant(0.0, eq.k);
            }
            std::vector<std::pair<double, double>> points;
            for (std::size_t j = 2 * traj.values.size() / 3; j < traj.values.size(); ++j) {
                const double v = std::abs(traj.values[j]);
                if (v > 0.0) points.emplace_back(static_cast<double>(j), std::log(v));
            }
            report.rate_estimate = detail::log_slope(points);
            break;
        }
        case Regime::Supercritical: {
            if (completed && report.fiber_gap <= tol) {
                try {
                    const CycleReport cycle = verify_kp1_cycle(eq, final_win, cycle_tol, blowup_tol);
                    if (cycle.is_cycle) {
                        report.limit_kind = LimitKind::Cycle;
                        report.limit_window = final_win;
                    }
                } catch (const ForbiddenBlowup&) {
                    // leave Undetermined
                }
            }
            std::vector<std::pair<double, double>> points;
            const std::size_t windows = traj.num_windows();
            for (std::size_t i = 2 * windows / 3; i < windows; ++i) {
                const double gap = std::abs(link_value(traj.window(i)) - target);
                if (gap > 0.0) points.emplace_back(static_cast<double>(i), std::log(gap));
            }
            report.rate_estimate = detail::log_slope(points);
            break;
        }
        case Regime::Critical: {
            if (completed && std::abs(final_product) <= tol) {
                if (final_sup <= std::sqrt(tol)) {
                    report.limit_kind = LimitKind::Origin;
                    report.limit_window = StateWindow::constant(0.0, eq.k);
                } else {
                    report.limit_kind = LimitKind::Cycle;
                    report.limit_window = final_win;
                }
            }
            break;
        }
    }
    return report;
}

}  // namespace ratdiff
