#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "ctwist/cantor.hpp"
#include "ctwist/errors.hpp"

namespace ctwist {

// The three families of reflectionless curves in the (phi, eps) plane:
//   Vertical:  single-well bound states, sqrt(phi^2 + phi_v^2) = i pi;
//              independent of the lacunarity.
//   Arc:       collective states of one edge group of floor(N/2) wells;
//              phi non-increasing in eps.
//   Striation: interference between the left and right edge groups;
//              phi non-decreasing in eps. Exact for even N, approximate
//              for odd N (the central well breaks periodicity).
enum class NullFamily { Vertical, Arc, Striation };

inline const char* family_name(NullFamily f) {
    switch (f) {
        case NullFamily::Vertical: return "vertical";
        case NullFamily::Arc: return "arc";
        default: return "striation";
    }
}

struct NullPrediction {
    NullFamily family = NullFamily::Vertical;
    int i = 0;             // principal index (>= 1 for vertical, else >= 0)
    std::optional<int> j;  // arc sub-index, 1 <= j <= floor(N/2) - 1
    double eps = 0;        // lacunarity the prediction was made at (0 for vertical)
    double phi = 0;        // predicted normalized energy
    bool low_energy = false; // phi < 2 phi_v, outside the phi >> phi_v regime
};

/// Implicit null condition A sqrt(phi^2 + phi_v^2) + B phi = C. The left
/// side is strictly increasing in phi for A > 0, B >= 0, so there is at
/// most one positive root.
struct NullEquation {
    double a = 0;     // A, coefficient of sqrt(phi^2 + phi_v^2)
    double b = 0;     // B, coefficient of phi
    double c = 0;     // C, right-hand side
    double phi_v = 0;
};

/// Unique positive root of the null equation, or nullopt when C <= A phi_v
/// (the left side already exceeds C at phi = 0+). Bisection on the bracket
/// [(C - A phi_v)/(A + B), C/(A + B)]: the lower end uses
/// sqrt(phi^2 + phi_v^2) <= phi + phi_v, the upper uses
/// sqrt(phi^2 + phi_v^2) >= phi.
inline std::optional<double> solve_null_equation(const NullEquation& eq) {
    if (!(eq.a > 0) || !(eq.c > 0))
        throw BadCoefficients("null equation requires A > 0 and C > 0");
    if (eq.b < 0) throw BadCoefficients("null equation requires B >= 0");
    if (eq.c <= eq.a * eq.phi_v) return std::nullopt;
    const double denom = eq.a + eq.b;
    double lo = (eq.c - eq.a * eq.phi_v) / denom;
    double hi = eq.c / denom;
    auto f = [&](double phi) {
        return eq.a * std::hypot(phi, eq.phi_v) + eq.b * phi - eq.c;
    };
    // Bracket sanity before bisecting; nudge for roundoff at the ends.
    if (f(lo) > 0) {
        lo = std::max(0.0, lo - 1e-9 * (1 + std::abs(lo)));
        if (f(lo) > 0) return std::nullopt;
    }
    if (f(hi) < 0) {
        hi += 1e-9 * (1 + std::abs(hi));
        if (f(hi) < 0) return std::nullopt;
    }
    // bisect until the interval cannot shrink; ~60 evaluations at most
    while (true) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (f(mid) > 0)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

/// Bound states of a single well: phi_i = sqrt((i pi)^2 - phi_v^2) for every
/// i with i pi > phi_v and phi_i <= phi_max. Independent of N, gamma, eps
/// and stage.
inline std::vector<NullPrediction> vertical_nulls(double phi_v, double phi_max) {
    if (phi_v < 0) throw Error("phi_v must be >= 0");
    if (!(phi_max > 0)) throw Error("phi_max must be > 0");
    std::vector<NullPrediction> out;
    for (int i = 1;; ++i) {
        const double c = i * M_PI;
        if (c <= phi_v) continue;
        const double phi = std::sqrt(c * c - phi_v * phi_v);
        if (phi > phi_max) break;
        out.push_back({NullFamily::Vertical, i, std::nullopt, 0.0, phi, phi < 2 * phi_v});
    }
    return out;
}

/// Arc nulls: sqrt(phi^2 + phi_v^2) + (eps/gamma)^S phi = (i + j/n) pi with
/// n = floor(N/2), j = 1..n-1 (multiples of pi are excluded since j never
/// reaches n). Requires n >= 2; otherwise there is no edge group to resonate
/// and the list is empty.
inline std::vector<NullPrediction> arc_nulls(const CantorParams& params, double phi_v,
                                             double eps, double phi_max) {
    std::vector<NullPrediction> out;
    const int n = params.copies / 2;
    if (n < 2) return out;
    const double b = std::pow(eps / params.gamma, params.stage);
    for (int i = 0;; ++i) {
        // smallest rhs for this i; its root lower bound caps the enumeration
        const double c_min = (i + 1.0 / n) * M_PI;
        if ((c_min - phi_v) / (1.0 + b) > phi_max) break;
        for (int j = 1; j < n; ++j) {
            const double c = (i + static_cast<double>(j) / n) * M_PI;
            const auto phi = solve_null_equation({1.0, b, c, phi_v});
            if (phi && *phi <= phi_max)
                out.push_back({NullFamily::Arc, i, j, eps, *phi, *phi < 2 * phi_v});
        }
    }
    return out;
}

/// Striation nulls, single form covering both parities:
///   (N - n) sqrt(phi^2 + phi_v^2)
///     + (gamma^-S - N - (n - 1)(eps/gamma)^S) phi = (2i + 1) pi/2,
/// n = floor(N/2). The phi coefficient is provably nonnegative for validated
/// parameters at S = 1; a negative value signals out-of-model inputs.
inline std::vector<NullPrediction> striation_nulls(const CantorParams& params, double phi_v,
                                                   double eps, double phi_max) {
    const int n = params.copies / 2;
    const double a = params.copies - n;
    const double b = std::pow(params.gamma, -params.stage) - params.copies -
                     (n - 1) * std::pow(eps / params.gamma, params.stage);
    if (b < 0)
        throw NegativeB("striation phi coefficient is negative (" + std::to_string(b) +
                        "); parameters outside the model");
    std::vector<NullPrediction> out;
    for (int i = 0;; ++i) {
        const double c = (2 * i + 1) * M_PI / 2;
        if ((c - a * phi_v) / (a + b) > phi_max) break;
        const auto phi = solve_null_equation({a, b, c, phi_v});
        if (phi && *phi <= phi_max)
            out.push_back({NullFamily::Striation, i, std::nullopt, eps, *phi, *phi < 2 * phi_v});
    }
    return out;
}

struct NullCurvePoint {
    double eps = 0;
    double phi = 0;
    bool low_energy = false;
};

/// One analytical null traced across lacunarity samples.
struct NullCurve {
    NullFamily family = NullFamily::Vertical;
    int i = 0;
    std::optional<int> j;
    std::vector<NullCurvePoint> points; // in eps_samples order; truncated
                                        // where the root leaves (0, phi_max]
};

/// All three families evaluated at each eps sample and stitched into
/// per-index polylines. Vertical curves are flat; arc curves non-increasing
/// and striation curves non-decreasing in eps.
inline std::vector<NullCurve> null_curves(const CantorParams& params, double phi_v,
                                          std::span<const double> eps_samples, double phi_max) {
    const LacunarityBounds bounds = epsilon_bounds(params.copies, params.gamma);
    for (const double e : eps_samples)
        if (e < 0 || e > bounds.eps_max * (1.0 + 1e-12) + 1e-15)
            throw EpsOutOfRange("eps sample " + std::to_string(e) + " outside [0, " +
                                std::to_string(bounds.eps_max) + "]");
    std::map<std::tuple<int, int, int>, NullCurve> curves; // (family, i, j) -> curve
    auto add = [&](const NullPrediction& p, double eps) {
        const auto key = std::make_tuple(static_cast<int>(p.family), p.i, p.j.value_or(-1));
        auto [it, inserted] = curves.try_emplace(key);
        if (inserted) {
            it->second.family = p.family;
            it->second.i = p.i;
            it->second.j = p.j;
        }
        it->second.points.push_back({eps, p.phi, p.low_energy});
    };
    const auto verticals = vertical_nulls(phi_v, phi_max);
    for (const double eps : eps_samples) {
        for (const auto& p : verticals) add(p, eps);
        for (const auto& p : arc_nulls(params, phi_v, eps, phi_max)) add(p, eps);
        for (const auto& p : striation_nulls(params, phi_v, eps, phi_max)) add(p, eps);
    }
    std::vector<NullCurve> out;
    out.reserve(curves.size());
    for (auto& [key, curve] : curves) out.push_back(std::move(curve));
    return out;
}

} // namespace ctwist
