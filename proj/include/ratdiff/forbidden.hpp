#pragma once

// Closed-form forbidden-set membership for the normalized equation, plus the
// Riccati recurrence t_{n+1} = c t / (1 + t) that the window product obeys.
//
// A window is forbidden exactly when its product equals one of the thresholds
//
//     T(c, m) = -1 / (1 + c + ... + c^m),   m = 0, 1, 2, ...
//
// in which case direct iteration stops at step m+1. The thresholds are
// strictly negative and strictly increasing in m; for c >= 1 they approach 0,
// for c < 1 they accumulate at -(1 - c).

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "ratdiff/equation.hpp"
#include "ratdiff/errors.hpp"

namespace ratdiff {

/// Default absolute tolerance on |product - threshold| for membership.
inline constexpr double kDefaultMembershipTol = 1e-10;

/// Default number of thresholds scanned. For c >= 1 a miss at this horizon is
/// conclusive up to tolerance; for c < 1 the accumulation point takes over.
inline constexpr int kDefaultHorizon = 100;

/// Sum 1 + c + ... + c^m in closed form. The expm1/log1p route stays accurate
/// when c is close to 1, where the naive (c^{m+1}-1)/(c-1) cancels badly.
[[nodiscard]] inline double geometric_sum(double c, int m) {
    if (m < 0) throw PreconditionViolated("geometric_sum requires m >= 0");
    if (std::abs(c - 1.0) <= 1e-15) return static_cast<double>(m) + 1.0;
    return std::expm1(static_cast<double>(m + 1) * std::log1p(c - 1.0)) / (c - 1.0);
}

/// Forbidden-set threshold T(c, m) = -1 / geometric_sum(c, m).
[[nodiscard]] inline double forbidden_threshold(double c, int m) {
    return -1.0 / geometric_sum(c, m);
}

/// One Riccati step c*t/(1+t).
[[nodiscard]] inline double riccati_step(double c, double t,
                                         double blowup_tol = kDefaultBlowupTol) {
    const double denom = 1.0 + t;
    if (std::abs(denom) <= blowup_tol) {
        throw RiccatiBlowup("riccati_step: denominator 1 + t vanished");
    }
    return c * t / denom;
}

/// n-fold Riccati step in closed form:
///     t_n = c^n t0 / (1 + t0 * (1 + c + ... + c^{n-1})).
/// The denominator vanishes exactly when t0 is the forbidden threshold
/// T(c, n-1), mirroring where the stepwise orbit blows up.
[[nodiscard]] inline double riccati_closed_form(double c, double t0, int n,
                                                double blowup_tol = kDefaultBlowupTol) {
    if (n < 0) throw PreconditionViolated("riccati_closed_form requires n >= 0");
    if (n == 0) return t0;
    const double denom = 1.0 + t0 * geometric_sum(c, n - 1);
    if (std::abs(denom) <= blowup_tol) {
        throw RiccatiBlowup("riccati_closed_form: denominator vanished");
    }
    return std::pow(c, n) * t0 / denom;
}

/// Outcome of a closed-form membership query.
struct ForbiddenVerdict {
    bool member = false;
    /// Index m of the matched threshold; iteration is predicted to stop at
    /// step m+1.
    std::optional<int> witness_m;
    std::optional<double> threshold_value;
    /// Gap between the window product and the nearest threshold tested.
    double distance = std::numeric_limits<double>::infinity();
    /// Set when the verdict cannot be confirmed or refuted by double-precision
    /// iteration: the product sits where thresholds accumulate (at -(1-c) for
    /// c < 1, at 0 for c >= 1) denser than any workable tolerance.
    bool ambiguous_near_accumulation = false;
};

/// Derivative of the m-step Riccati flow along the forbidden orbit, i.e. the
/// factor by which a perturbation of the initial product grows by the time
/// the orbit should reach -1. Equals geometric_sum(c,m)^2 / c^m.
[[nodiscard]] inline double forbidden_orbit_amplification(double c, int m) {
    const double s = geometric_sum(c, m);
    return s * s / std::pow(c, m);
}

/// Smallest blow-up tolerance at which direct iteration can be expected to
/// confirm membership with witness m, for a window whose product sits within
/// `gap` of the threshold. Accounts for the forward amplification of the gap
/// and of the per-step rounding noise of a (k+1)-entry window.
[[nodiscard]] inline double forbidden_confirm_tolerance(double c, int m, int k, double gap) {
    constexpr double eps = std::numeric_limits<double>::epsilon();
    // Rounding injected at depth j of the orbit is amplified by
    // geometric_sum(c, j)^2 / c^j relative to the orbit value 1/geometric_sum.
    double noise = 0.0;
    double sum = 0.0;  // geometric_sum(c, j) built incrementally
    double power = 1.0;
    for (int j = 0; j <= m; ++j) {
        sum = sum * c + 1.0;
        noise += sum / power;
        power *= c;
    }
    noise *= static_cast<double>(k + 2) * eps;
    const double thr = 1.0 / geometric_sum(c, m);
    const double amplified_gap =
        forbidden_orbit_amplification(c, m) * std::max(gap, 4.0 * eps * thr);
    return 64.0 * (noise + amplified_gap) + kDefaultBlowupTol;
}

/// Largest blow-up tolerance that cannot misfire on the forbidden orbit
/// itself: every pre-final orbit point keeps |1 + t| >= c/(1+c).
[[nodiscard]] inline double forbidden_confirm_cap(double c) {
    return std::min(1e-4, c / (8.0 * (1.0 + c)));
}

/// Closed-form membership per the threshold family above. Scans thresholds
/// m = 0..horizon and matches the window product against the nearest one.
/// member = true means the product is within tol of threshold m (the witness)
/// and direct iteration is predicted to stop at step m+1.
///
/// Thresholds accumulate (at -(1-c) for c < 1, at 0 for c >= 1) and
/// eventually bunch closer than both the tolerance and what forward iteration
/// can resolve in double precision; verdicts in those zones carry
/// ambiguous_near_accumulation = true instead of being asserted.
[[nodiscard]] inline ForbiddenVerdict is_forbidden(const NormalizedEquation& eq,
                                                   const StateWindow& w,
                                                   int horizon = kDefaultHorizon,
                                                   double tol = kDefaultMembershipTol) {
    if (horizon < 0) throw PreconditionViolated("horizon must be >= 0");
    const double product = window_product(w);

    ForbiddenVerdict verdict;
    double sum = 0.0;
    for (int m = 0; m <= horizon; ++m) {
        sum = sum * eq.c + 1.0;  // geometric_sum(eq.c, m)
        const double threshold = -1.0 / sum;
        const double gap = std::abs(product - threshold);
        if (gap < verdict.distance) {
            verdict.distance = gap;
            verdict.witness_m = m;
            verdict.threshold_value = threshold;
        }
    }
    verdict.member = verdict.distance <= tol;
    if (!verdict.member) {
        verdict.witness_m.reset();
        verdict.threshold_value.reset();
    }

    if (verdict.member) {
        const double needed =
            forbidden_confirm_tolerance(eq.c, *verdict.witness_m, eq.k, verdict.distance);
        verdict.ambiguous_near_accumulation = needed > forbidden_confirm_cap(eq.c);
    } else if (eq.c < 1.0) {
        verdict.ambiguous_near_accumulation = std::abs(product + (1.0 - eq.c)) <= tol;
    }
    return verdict;
}

}  // namespace ratdiff
