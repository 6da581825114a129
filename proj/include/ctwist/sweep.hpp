#pragma once

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "ctwist/cantor.hpp"
#include "ctwist/errors.hpp"
#include "ctwist/nulls.hpp"
#include "ctwist/tmm.hpp"

namespace ctwist {

/// Reflection coefficient sampled over the (phi, eps) plane; the raw data
/// behind a twist plot. Row r is lacunarity eps_axis[r], column c is energy
/// phi_axis[c]; values are R in [0, 1], row-major.
struct TwistGrid {
    std::vector<double> phi_axis;
    std::vector<double> eps_axis;
    std::vector<double> values;
    CantorParams params; // template; eps is swept over eps_axis
    double phi_v = 0;

    std::size_t width() const { return phi_axis.size(); }
    std::size_t height() const { return eps_axis.size(); }
    double at(std::size_t row, std::size_t col) const { return values[row * width() + col]; }
};

/// Replace the lacunarity of a validated parameter set, recovering exactness
/// when the new eps is a small fraction in disguise.
inline CantorParams with_eps(const CantorParams& base, double eps) {
    std::optional<Rational> eps_exact;
    if (base.gamma_exact) eps_exact = Rational::from_double(eps);
    return validate_params(base.copies, base.gamma, eps, base.stage, base.gamma_exact, eps_exact);
}

/// Evaluate R = scatter(...).R on a width x height grid with phi uniform on
/// [phi_min, phi_max] and eps uniform on [0, eps_max]. Rows are independent
/// work items; they may be sharded over threads without changing the result
/// (every cell writes its own slot, there is no cross-cell state).
inline TwistGrid twist(const CantorParams& params, double phi_v, double phi_min, double phi_max,
                       std::size_t width, std::size_t height, unsigned threads = 0) {
    if (width < 2 || height < 2) throw Error("twist grid needs width, height >= 2");
    if (!(phi_min > 0) || !(phi_min < phi_max))
        throw Error("twist needs 0 < phi_min < phi_max");
    const LacunarityBounds bounds = epsilon_bounds(params.copies, params.gamma);
    if (!std::isfinite(bounds.eps_max))
        throw ValidationError("eps_max is unbounded for N = 3; a lacunarity sweep is undefined");

    TwistGrid grid;
    grid.params = params;
    grid.phi_v = phi_v;
    grid.phi_axis.resize(width);
    for (std::size_t c = 0; c < width; ++c)
        grid.phi_axis[c] = phi_min + (phi_max - phi_min) * static_cast<double>(c) /
                                         static_cast<double>(width - 1);

    // Exact eps samples when gamma is exact, so the degenerate first and
    // last rows merge exactly.
    std::vector<CantorParams> row_params(height);
    grid.eps_axis.resize(height);
    std::optional<Rational> eps_max_exact;
    if (params.gamma_exact && params.copies != 3) {
        const Rational free_width = Rational(1) - Rational(params.copies) * *params.gamma_exact;
        eps_max_exact =
            free_width / Rational(params.copies % 2 == 0 ? params.copies - 2 : params.copies - 3);
    }
    for (std::size_t r = 0; r < height; ++r) {
        if (eps_max_exact) {
            const Rational e = *eps_max_exact * Rational(static_cast<std::int64_t>(r),
                                                         static_cast<std::int64_t>(height - 1));
            grid.eps_axis[r] = e.to_double();
            row_params[r] = validate_params(params.copies, params.gamma, e.to_double(),
                                            params.stage, params.gamma_exact, e);
        } else {
            const double e = bounds.eps_max * static_cast<double>(r) /
                             static_cast<double>(height - 1);
            grid.eps_axis[r] = e;
            row_params[r] = with_eps(params, e);
        }
    }

    grid.values.assign(width * height, 0.0);
    unsigned nthreads = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
    nthreads = std::min<unsigned>(nthreads, static_cast<unsigned>(height));

    std::exception_ptr failure;
    auto run_rows = [&](unsigned first) {
        try {
            for (std::size_t r = first; r < height; r += nthreads) {
                const LayerStack stack = build_stage(row_params[r]);
                for (std::size_t c = 0; c < width; ++c) {
                    const EnergyPoint point = energy_point(row_params[r], grid.phi_axis[c], phi_v);
                    grid.values[r * width + c] = scatter(stack, point).R;
                }
            }
        } catch (...) {
            failure = std::current_exception();
        }
    };
    if (nthreads <= 1) {
        run_rows(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(nthreads);
        for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(run_rows, t);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);
    return grid;
}

/// Display transform for twist plots: d = max(10 log10 R, floor_db), then
/// v = (d - floor_db) / (0 - floor_db), so v = 0 (black) at or below the
/// floor and v = 1 (white) at R = 1. Returns height x width values in [0,1].
inline std::vector<double> to_decibels(const TwistGrid& grid, double floor_db) {
    if (!(floor_db < 0)) throw Error("floor_db must be < 0");
    std::vector<double> out(grid.values.size());
    for (std::size_t i = 0; i < grid.values.size(); ++i) {
        const double r = grid.values[i];
        double db = r > 0 ? 10.0 * std::log10(r) : floor_db;
        db = std::max(db, floor_db);
        out[i] = std::clamp((db - floor_db) / (0.0 - floor_db), 0.0, 1.0);
    }
    return out;
}

/// Numerical check of one analytical prediction: the reflection minimum
/// found near it and how far it sits from the predicted energy.
struct NullVerification {
    NullPrediction prediction;
    double phi_at_min = 0; // minimizer of R(phi) over the window
    double r_min = 1;      // R at that minimizer
    double residual = 0;   // |phi_at_min - prediction.phi|
};

namespace detail {

// Golden-section minimization of f on [lo, hi] down to interval <= tol.
// Returns the best evaluated point.
template <class F>
std::pair<double, double> golden_min(F&& f, double lo, double hi, double tol) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    while (hi - lo > tol) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    return f1 < f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

} // namespace detail

/// Scan R(phi) in [phi - window, phi + window] at each prediction's
/// lacunarity (at least min_samples points), then refine the smallest sample
/// by golden section to ~1e-9 in phi. The window must stay inside
/// (0, phi_max].
inline std::vector<NullVerification> verify_nulls(
    const CantorParams& params, double phi_v, std::span<const NullPrediction> predictions,
    double window = 0.15, int min_samples = 201,
    double phi_max = std::numeric_limits<double>::infinity()) {
    if (!(window > 0)) throw WindowOutOfRange("window must be > 0");
    std::vector<NullVerification> out;
    out.reserve(predictions.size());
    for (const auto& pred : predictions) {
        const double lo = pred.phi - window;
        const double hi = pred.phi + window;
        if (!(lo > 0) || hi > phi_max)
            throw WindowOutOfRange("window [" + std::to_string(lo) + ", " + std::to_string(hi) +
                                   "] leaves (0, phi_max]");
        const CantorParams p = with_eps(params, pred.eps);
        const LayerStack stack = build_stage(p);
        auto reflection = [&](double phi) {
            return scatter(stack, energy_point(p, phi, phi_v)).R;
        };
        const int n = std::max(min_samples, 201);
        std::vector<double> rs(static_cast<std::size_t>(n));
        int best = 0;
        for (int s = 0; s < n; ++s) {
            const double phi = lo + (hi - lo) * static_cast<double>(s) / (n - 1);
            rs[static_cast<std::size_t>(s)] = reflection(phi);
            if (rs[static_cast<std::size_t>(s)] < rs[static_cast<std::size_t>(best)]) best = s;
        }
        const double step = (hi - lo) / (n - 1);
        const double blo = lo + step * std::max(0, best - 1);
        const double bhi = lo + step * std::min(n - 1, best + 1);
        auto [phi_min_at, r_min] = detail::golden_min(reflection, blo, bhi, 1e-9);
        NullVerification v;
        v.prediction = pred;
        v.phi_at_min = phi_min_at;
        v.r_min = r_min;
        v.residual = std::abs(phi_min_at - pred.phi);
        out.push_back(v);
    }
    return out;
}

} // namespace ctwist
