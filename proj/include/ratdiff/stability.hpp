#pragma once

// Equilibria of the normalized equation and their linearized stability.
//
// At the origin the characteristic polynomial is lambda^{k+1} - c, so all
// roots share modulus c^{1/(k+1)}. At the positive equilibrium (c-1)^{1/(k+1)}
// (which exists for c > 1) it is
//
//     lambda^{k+1} + ((c-1)/c)(lambda^k + ... + lambda) - 1/c
//       = (lambda^k + ... + lambda + 1)(lambda - 1/c),
//
// whose roots are 1/c together with the k nontrivial (k+1)-th roots of unity.
// Those unit-modulus roots make linearization inconclusive there; the
// semiconjugacy module carries the analysis further.

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "ratdiff/equation.hpp"
#include "ratdiff/errors.hpp"

namespace ratdiff {

/// Default margin around the unit circle when classifying root moduli.
inline constexpr double kDefaultUnitCircleMargin = 1e-9;

/// Default residual tolerance for polynomial root extraction.
inline constexpr double kDefaultRootsTol = 1e-10;

enum class EquilibriumKind { Origin, Positive };

struct Equilibrium {
    double value = 0.0;
    EquilibriumKind kind = EquilibriumKind::Origin;
};

/// Equilibria of the normalized equation: the origin always, plus
/// (c-1)^{1/(k+1)} when c > 1.
[[nodiscard]] inline std::vector<Equilibrium> equilibria(const NormalizedEquation& eq) {
    std::vector<Equilibrium> out{{0.0, EquilibriumKind::Origin}};
    if (eq.c > 1.0) {
        const double value = std::exp2(std::log2(eq.c - 1.0) / (eq.k + 1));
        out.push_back({value, EquilibriumKind::Positive});
    }
    return out;
}

/// Monic real polynomial; coefficients[i] multiplies lambda^i and the leading
/// coefficient is 1.
struct CharPoly {
    std::vector<double> coefficients;

    [[nodiscard]] int degree() const { return static_cast<int>(coefficients.size()) - 1; }

    [[nodiscard]] std::complex<double> eval(std::complex<double> lambda) const {
        std::complex<double> acc{0.0, 0.0};
        for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) {
            acc = acc * lambda + *it;
        }
        return acc;
    }

    [[nodiscard]] std::complex<double> eval_derivative(std::complex<double> lambda) const {
        std::complex<double> acc{0.0, 0.0};
        for (int i = degree(); i >= 1; --i) {
            acc = acc * lambda + static_cast<double>(i) * coefficients[static_cast<std::size_t>(i)];
        }
        return acc;
    }
};

/// Characteristic polynomial at the origin: lambda^{k+1} - c.
[[nodiscard]] inline CharPoly char_poly_origin(const NormalizedEquation& eq) {
    std::vector<double> coeffs(static_cast<std::size_t>(eq.k) + 2, 0.0);
    coeffs.front() = -eq.c;
    coeffs.back() = 1.0;
    return CharPoly{std::move(coeffs)};
}

/// Characteristic polynomial at the positive equilibrium,
/// lambda^{k+1} + ((c-1)/c)(lambda^k + ... + lambda) - 1/c. Requires c > 1.
[[nodiscard]] inline CharPoly char_poly_positive(const NormalizedEquation& eq) {
    if (!(eq.c > 1.0)) {
        throw NoPositiveEquilibrium("positive equilibrium requires c > 1");
    }
    std::vector<double> coeffs(static_cast<std::size_t>(eq.k) + 2, (eq.c - 1.0) / eq.c);
    coeffs.front() = -1.0 / eq.c;
    coeffs.back() = 1.0;
    return CharPoly{std::move(coeffs)};
}

/// Roots of the positive-equilibrium polynomial from its factored form:
/// 1/c together with e^{2*pi*i*m/(k+1)} for m = 1..k (lambda = 1 is excluded
/// by the factorization's constraint). Requires c > 1.
[[nodiscard]] inline std::vector<std::complex<double>> positive_eq_roots_factored(
    const NormalizedEquation& eq) {
    if (!(eq.c > 1.0)) {
        throw NoPositiveEquilibrium("positive equilibrium requires c > 1");
    }
    std::vector<std::complex<double>> roots;
    roots.reserve(static_cast<std::size_t>(eq.k) + 1);
    roots.emplace_back(1.0 / eq.c, 0.0);
    for (int m = 1; m <= eq.k; ++m) {
        const double angle = 2.0 * std::numbers::pi * m / (eq.k + 1);
        roots.emplace_back(std::cos(angle), std::sin(angle));
    }
    return roots;
}

enum class StabilityVerdict { AsymptoticallyStable, Unstable, Inconclusive };

/// Roots of a characteristic polynomial with their residuals and, once
/// classified, the linearized verdict.
struct RootAnalysis {
    std::vector<std::complex<double>> roots;
    std::vector<double> residuals;
    double max_modulus = 0.0;
    StabilityVerdict verdict = StabilityVerdict::Inconclusive;
};

/// All complex roots of a monic real polynomial via companion-matrix
/// eigenvalues, polished by a few Newton steps. Every returned root satisfies
/// |p(root)| <= tol * (1 + |root|)^degree.
[[nodiscard]] inline RootAnalysis poly_roots(const CharPoly& p, double tol = kDefaultRootsTol) {
    const int degree = p.degree();
    if (degree < 1) throw PreconditionViolated("poly_roots requires degree >= 1");
    if (p.coefficients.back() != 1.0) throw PreconditionViolated("polynomial must be monic");

    RootAnalysis analysis;
    if (degree == 1) {
        analysis.roots.emplace_back(-p.coefficients[0], 0.0);
    } else {
        Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(degree, degree);
        companion.diagonal(-1).setOnes();
        for (int i = 0; i < degree; ++i) {
            companion(i, degree - 1) = -p.coefficients[static_cast<std::size_t>(i)];
        }
        Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, /*computeEigenvectors=*/false);
        if (solver.info() != Eigen::Success) {
            throw ConvergenceFailure("companion-matrix eigenvalue extraction failed");
        }
        analysis.roots.reserve(static_cast<std::size_t>(degree));
        for (int i = 0; i < degree; ++i) analysis.roots.push_back(solver.eigenvalues()[i]);
    }

    for (auto& root : analysis.roots) {
        for (int it = 0; it < 3; ++it) {
            const std::complex<double> value = p.eval(root);
            const std::complex<double> slope = p.eval_derivative(root);
            if (std::abs(slope) == 0.0) break;
            const std::complex<double> correction = value / slope;
            if (!std::isfinite(correction.real()) || !std::isfinite(correction.imag())) break;
            root -= correction;
        }
    }

    analysis.residuals.reserve(analysis.roots.size());
    for (const auto& root : analysis.roots) {
        const double residual = std::abs(p.eval(root));
        const double bound = tol * std::pow(1.0 + std::abs(root), degree);
        if (residual > bound) {
            throw ConvergenceFailure("poly_roots residual bound unmet");
        }
        analysis.residuals.push_back(residual);
        analysis.max_modulus = std::max(analysis.max_modulus, std::abs(root));
    }
    return analysis;
}

/// Linearized stability from root moduli: asymptotically stable when all of
/// them are inside the unit circle by at least `margin`, unstable when one is
/// outside by more than `margin`, inconclusive otherwise.
[[nodiscard]] inline StabilityVerdict classify_linearization(
    const std::vector<std::complex<double>>& roots, double margin = kDefaultUnitCircleMargin) {
    if (roots.empty()) throw PreconditionViolated("classify_linearization needs roots");
    double max_modulus = 0.0;
    for (const auto& root : roots) max_modulus = std::max(max_modulus, std::abs(root));
    if (max_modulus < 1.0 - margin) return StabilityVerdict::AsymptoticallyStable;
    if (max_modulus > 1.0 + margin) return StabilityVerdict::Unstable;
    return StabilityVerdict::Inconclusive;
}

/// A scalar map with optional analytic derivatives; when a derivative is
/// absent it is taken by central differences with step h = cbrt(eps)*(1+|x|),
/// accurate to O(h^2).
struct DifferentiableMap {
    std::function<double(double)> value;
    std::function<double(double)> first_derivative;   // optional
    std::function<double(double)> second_derivative;  // optional

    [[nodiscard]] double df(double x) const {
        if (first_derivative) return first_derivative(x);
        const double h = std::cbrt(std::numeric_limits<double>::epsilon()) * (1.0 + std::abs(x));
        return (value(x + h) - value(x - h)) / (2.0 * h);
    }

    [[nodiscard]] double d2f(double x) const {
        if (second_derivative) return second_derivative(x);
        const double h = std::cbrt(std::numeric_limits<double>::epsilon()) * (1.0 + std::abs(x));
        return (value(x + h) - 2.0 * value(x) + value(x - h)) / (h * h);
    }
};

enum class Semistability { FromRight, FromLeft, NotApplicable };

/// One-sided asymptotic stability test at a fixed point with derivative 1:
/// attracting from the right when f'' < 0, from the left when f'' > 0.
/// NotApplicable when f' differs from 1 or f'' is indistinguishable from 0.
[[nodiscard]] inline Semistability semistability_1d(const DifferentiableMap& f, double x_bar,
                                                    double tol = 1e-8) {
    if (std::abs(f.value(x_bar) - x_bar) > tol) {
        throw NotAFixedPoint("semistability_1d requires f(x) = x at the given point");
    }
    if (std::abs(f.df(x_bar) - 1.0) > tol) return Semistability::NotApplicable;
    const double curvature = f.d2f(x_bar);
    if (curvature < -tol) return Semistability::FromRight;
    if (curvature > tol) return Semistability::FromLeft;
    return Semistability::NotApplicable;
}

}  // namespace ratdiff
