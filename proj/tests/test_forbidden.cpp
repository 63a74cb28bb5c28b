#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ratdiff/forbidden.hpp"
#include "test_support.hpp"

using namespace ratdiff;
using Catch::Approx;

TEST_CASE("geometric_sum closed form", "[forbidden]") {
    CHECK(geometric_sum(1.0, 1) == 2.0);
    CHECK(geometric_sum(2.0, 2) == Approx(7.0).margin(1e-14));
    // frozen against the direct-summation oracle
    CHECK(testsupport::direct_geometric_sum(0.5, 10) == 1.9990234375);
    CHECK(geometric_sum(0.5, 10) == Approx(1.9990234375).epsilon(1e-14));
}

TEST_CASE("geometric_sum agrees with direct summation", "[forbidden][property]") {
    testsupport::Rng rng(31);
    for (int trial = 0; trial < 500; ++trial) {
        const double c = testsupport::log_uniform(rng, 0.05, 5.0);
        const int m = testsupport::uniform_int(rng, 0, 60);
        const double expected = testsupport::direct_geometric_sum(c, m);
        REQUIRE(geometric_sum(c, m) == Approx(expected).epsilon(1e-12));
    }
    // stays accurate arbitrarily close to c = 1, where the naive ratio form cancels
    CHECK(geometric_sum(1.0 + 1e-10, 100) ==
          Approx(testsupport::direct_geometric_sum(1.0 + 1e-10, 100)).epsilon(1e-13));
}

TEST_CASE("forbidden_threshold values and limit", "[forbidden]") {
    CHECK(forbidden_threshold(1.0, 0) == -1.0);
    CHECK(forbidden_threshold(2.0, 1) == Approx(-1.0 / 3.0).margin(1e-16));
    // thresholds for c < 1 accumulate at -(1-c)
    CHECK(forbidden_threshold(0.5, 60) == Approx(-0.5).margin(1e-15));
}

TEST_CASE("thresholds are negative and strictly increasing in m", "[forbidden][property]") {
    testsupport::Rng rng(32);
    for (int trial = 0; trial < 200; ++trial) {
        const double c = testsupport::log_uniform(rng, 0.05, 5.0);
        // keep increments above double resolution: c^{m+1} >= 1e-12
        int max_m = 100;
        if (c < 1.0) {
            max_m = std::min(max_m, static_cast<int>(std::log(1e-12) / std::log(c)) - 1);
        }
        double previous = forbidden_threshold(c, 0);
        REQUIRE(previous < 0.0);
        for (int m = 1; m <= max_m; ++m) {
            const double current = forbidden_threshold(c, m);
            REQUIRE(current < 0.0);
            REQUIRE(previous < current);
            previous = current;
        }
    }
}

TEST_CASE("is_forbidden matches the worked examples", "[forbidden]") {
    SECTION("c=1, k=1, window (1,-0.5): threshold m=1") {
        const ForbiddenVerdict v = is_forbidden(NormalizedEquation{1.0, 1, 1.0},
                                                StateWindow({1.0, -0.5}));
        REQUIRE(v.member);
        CHECK(*v.witness_m == 1);
        CHECK(*v.threshold_value == Approx(-0.5).margin(1e-15));
        CHECK_FALSE(v.ambiguous_near_accumulation);
        // direct iteration confirms the predicted blow-up at step m+1 = 2
        const Trajectory traj =
            iterate(NormalizedEquation{1.0, 1, 1.0}, StateWindow({1.0, -0.5}), 10);
        REQUIRE(traj.terminated_early.has_value());
        CHECK(*traj.terminated_early == 2);
    }
    SECTION("all-positive windows are never members") {
        testsupport::Rng rng(33);
        for (int trial = 0; trial < 100; ++trial) {
            const int k = testsupport::uniform_int(rng, 1, 5);
            const double c = testsupport::log_uniform(rng, 0.2, 5.0);
            const ForbiddenVerdict v =
                is_forbidden(NormalizedEquation{c, k, 1.0},
                             StateWindow(testsupport::random_positive_window(rng, k, 0.05, 8.0)));
            REQUIRE_FALSE(v.member);
        }
    }
    SECTION("c=2, k=2, window (1,1,-1/3): threshold m=1 (sum 1+2=3)") {
        const ForbiddenVerdict v = is_forbidden(NormalizedEquation{2.0, 2, 1.0},
                                                StateWindow({1.0, 1.0, -1.0 / 3.0}));
        REQUIRE(v.member);
        CHECK(*v.witness_m == 1);
        CHECK(v.distance <= 1e-15);
    }
}

TEST_CASE("products at the c<1 accumulation point are flagged, not asserted", "[forbidden]") {
    // product exactly -(1-c): deeper thresholds crowd within any tolerance,
    // far beyond what double-precision iteration can confirm.
    const ForbiddenVerdict v =
        is_forbidden(NormalizedEquation{0.5, 1, 1.0}, StateWindow({1.0, -0.5}));
    CHECK(v.ambiguous_near_accumulation);
}

TEST_CASE("tiny negative products are flagged for c >= 1 too", "[forbidden]") {
    // thresholds accumulate at 0 from below for c >= 1; a product like -1e-12
    // matches only thresholds far too deep for iteration to confirm
    const ForbiddenVerdict v =
        is_forbidden(NormalizedEquation{5.0, 1, 1.0}, StateWindow({1.0, -1e-12}));
    CHECK(v.member);
    CHECK(v.ambiguous_near_accumulation);

    // a shallow-threshold member stays asserted
    const ForbiddenVerdict shallow =
        is_forbidden(NormalizedEquation{5.0, 1, 1.0}, StateWindow({1.0, -1.0 / 6.0}));
    CHECK(shallow.member);
    CHECK(*shallow.witness_m == 1);
    CHECK_FALSE(shallow.ambiguous_near_accumulation);
}

TEST_CASE("riccati_step", "[forbidden]") {
    CHECK(riccati_step(3.3, 0.0) == 0.0);
    CHECK(riccati_step(2.0, 1.0) == 1.0);  // fixed point c-1
    CHECK(riccati_step(1.0, -0.5) == Approx(-1.0).margin(1e-15));
    CHECK_THROWS_AS(riccati_step(1.0, -1.0), RiccatiBlowup);
    CHECK_THROWS_AS(riccati_step(1.0, -1.0 + 1e-14), RiccatiBlowup);
}

TEST_CASE("riccati_closed_form", "[forbidden]") {
    CHECK(riccati_closed_form(4.2, 0.37, 0) == 0.37);
    // c=1: t_n = t0/(1+n t0); 1 -> 1/2 -> 1/3 -> 1/4
    CHECK(riccati_closed_form(1.0, 1.0, 3) == Approx(0.25).margin(1e-15));
    CHECK(riccati_closed_form(2.0, 3.0, 5) == Approx(96.0 / 94.0).epsilon(1e-15));
    // denominator vanishes exactly on the forbidden threshold t0 = T(c, n-1)
    CHECK_THROWS_AS(riccati_closed_form(1.0, -0.5, 2), RiccatiBlowup);
}

TEST_CASE("closed-form and iterated Riccati orbits agree", "[forbidden][property]") {
    testsupport::Rng rng(34);
    int checked = 0;
    while (checked < 1000) {
        const double c = testsupport::log_uniform(rng, 0.05, 5.0);
        double t0;
        if (testsupport::uniform(rng, 0.0, 1.0) < 0.8) {
            t0 = testsupport::log_uniform(rng, 1e-3, 1e3);
        } else {
            // mild negative starts, kept away from the repelling point c-1
            const double floor_t = std::max(c - 1.0, -1.0) + 0.05;
            if (floor_t >= -0.01) continue;
            t0 = testsupport::uniform(rng, floor_t, -0.01);
        }
        const int n = testsupport::uniform_int(rng, 1, 100);
        const auto direct = testsupport::direct_riccati_orbit(c, t0, n, 1e-3);
        if (!direct) continue;  // orbit passed too close to the pole
        const double closed = riccati_closed_form(c, t0, n);
        REQUIRE(closed == Approx(*direct).epsilon(1e-9).margin(1e-300));
        ++checked;
    }
}

TEST_CASE("window products follow the Riccati orbit of the initial product",
          "[forbidden][property]") {
    testsupport::Rng rng(35);
    for (int trial = 0; trial < 200; ++trial) {
        const int k = testsupport::uniform_int(rng, 1, 5);
        const double c = testsupport::log_uniform(rng, 0.05, 5.0);
        const NormalizedEquation eq{c, k, 1.0};
        const StateWindow w0(testsupport::random_positive_window(rng, k, 0.3, 3.0));
        const Trajectory traj = iterate(eq, w0, 100);
        REQUIRE_FALSE(traj.terminated_early.has_value());
        const double t0 = window_product(w0);
        for (std::size_t i = 0; i < traj.num_windows(); i += 7) {
            const double expected = riccati_closed_form(c, t0, static_cast<int>(i));
            REQUIRE(window_product(traj.window(i)) ==
                    Approx(expected).epsilon(1e-9).margin(1e-280));
        }
    }
}

TEST_CASE("closed-form membership agrees with direct iteration", "[forbidden][property]") {
    // Scaled-down version of the acceptance run: random windows plus windows
    // constructed exactly on thresholds, compared at matched tolerances.
    testsupport::Rng rng(36);
    int disagreements = 0;
    int flagged = 0;

    const auto compare = [&](const NormalizedEquation& eq, const StateWindow& w) {
        const ForbiddenVerdict v = is_forbidden(eq, w);
        if (v.ambiguous_near_accumulation) {
            ++flagged;
            return;
        }
        if (v.member) {
            const double matched_tol =
                forbidden_confirm_tolerance(eq.c, *v.witness_m, eq.k, v.distance);
            const Trajectory traj = iterate(eq, w, kDefaultHorizon + 1, matched_tol);
            if (!traj.terminated_early || *traj.terminated_early != *v.witness_m + 1) {
                ++disagreements;
            }
        } else {
            const Trajectory traj = iterate(eq, w, kDefaultHorizon + 1, kDefaultBlowupTol);
            if (traj.terminated_early) ++disagreements;
        }
    };

    for (int trial = 0; trial < 500; ++trial) {
        const int k = testsupport::uniform_int(rng, 1, 5);
        const double c = testsupport::uniform(rng, 0.01, 5.0);
        compare(NormalizedEquation{c, k, 1.0},
                StateWindow(testsupport::random_window(rng, k, -10.0, 10.0)));
    }
    for (int trial = 0; trial < 100; ++trial) {
        const int k = testsupport::uniform_int(rng, 1, 5);
        const double c = testsupport::uniform(rng, 0.01, 5.0);
        const int m = testsupport::uniform_int(rng, 0, 20);
        std::vector<double> w = testsupport::random_window(rng, k, -3.0, 3.0);
        double partial = 1.0;
        for (int i = 0; i < k; ++i) partial *= w[static_cast<std::size_t>(i)];
        if (partial == 0.0) continue;
        w.back() = forbidden_threshold(c, m) / partial;
        if (!std::isfinite(w.back())) continue;
        compare(NormalizedEquation{c, k, 1.0}, StateWindow(w));
    }
    CHECK(disagreements == 0);
    CHECK(flagged < 60);  // only the c<1 accumulation zone may be excluded
}
