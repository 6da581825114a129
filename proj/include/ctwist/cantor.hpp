#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ctwist/errors.hpp"
#include "ctwist/rational.hpp"

namespace ctwist {

/// Recipe for a symmetric polyadic Cantor pre-fractal: N scaled copies per
/// generation, scale factor gamma, stage-1 outermost gap width eps (the
/// lacunarity parameter), and pre-fractal stage. The initiator length is
/// fixed at L = 1; every width below is a fraction of it.
struct CantorParams {
    int copies = 0;    // N >= 3
    double gamma = 0;  // 0 < gamma < 1/N
    double eps = 0;    // 0 <= eps <= eps_max(N, gamma)
    int stage = 0;     // S >= 0; S = 0 is the bare initiator

    // Exact values when the inputs were given as rationals ("1/7").
    // Geometry construction uses them to make the degenerate eps = 0 and
    // eps = eps_max merges exact instead of tolerance-based.
    std::optional<Rational> gamma_exact;
    std::optional<Rational> eps_exact;
};

enum class SegmentKind { Well, Gap }; // Well: potential -V; Gap: potential 0

struct Segment {
    double width = 0; // in units of L
    SegmentKind kind = SegmentKind::Gap;
};

/// Ordered piecewise-constant potential profile spanning [0, 1].
struct LayerStack {
    std::vector<Segment> segments;
    int stage = 0;
    CantorParams params;

    double total_width() const {
        double sum = 0;
        for (const auto& s : segments) sum += s.width;
        return sum;
    }
    double well_width() const {
        double sum = 0;
        for (const auto& s : segments)
            if (s.kind == SegmentKind::Well) sum += s.width;
        return sum;
    }
    std::size_t well_count() const {
        std::size_t n = 0;
        for (const auto& s : segments)
            if (s.kind == SegmentKind::Well) ++n;
        return n;
    }
};

struct LacunarityBounds {
    double eps_min = 0;
    double eps_max = 0; // +inf for N = 3, which has no internal gaps
    double eps_reg = 0; // gaps and wells equally wide at stage 1
};

namespace detail {

template <class Num>
struct RawSegment {
    Num width;
    SegmentKind kind;
};

// One generation step: replace a well of width w by floor(N/2) wells packed
// at each edge (internal gaps eps*w) and, for odd N, one centered well. The
// remaining width goes to the central gap (even N) or the two gaps flanking
// the central well (odd N).
template <class Num>
void emit_children(std::vector<RawSegment<Num>>& out, int copies, const Num& gamma,
                   const Num& eps, const Num& w) {
    const int side = copies / 2;
    const Num well_w = gamma * w;
    const Num gap_w = eps * w;
    auto emit_side = [&] {
        for (int i = 0; i < side; ++i) {
            if (i > 0) out.push_back({gap_w, SegmentKind::Gap});
            out.push_back({well_w, SegmentKind::Well});
        }
    };
    if (copies % 2 == 0) {
        Num central = w;
        for (int i = 0; i < copies; ++i) central = central - well_w;
        for (int i = 0; i < copies - 2; ++i) central = central - gap_w;
        emit_side();
        out.push_back({central, SegmentKind::Gap});
        emit_side();
    } else {
        Num flank2 = w;
        for (int i = 0; i < copies; ++i) flank2 = flank2 - well_w;
        for (int i = 0; i < copies - 3; ++i) flank2 = flank2 - gap_w;
        const Num flank = flank2 / Num(2);
        emit_side();
        out.push_back({flank, SegmentKind::Gap});
        out.push_back({well_w, SegmentKind::Well});
        out.push_back({flank, SegmentKind::Gap});
        emit_side();
    }
}

template <class Num>
std::vector<RawSegment<Num>> generate(int copies, const Num& gamma, const Num& eps, int stage) {
    std::vector<RawSegment<Num>> segs{{Num(1), SegmentKind::Well}};
    for (int s = 0; s < stage; ++s) {
        std::vector<RawSegment<Num>> next;
        next.reserve(segs.size() * static_cast<std::size_t>(2 * copies));
        for (const auto& seg : segs) {
            if (seg.kind == SegmentKind::Gap)
                next.push_back(seg);
            else
                emit_children(next, copies, gamma, eps, seg.width);
        }
        segs.swap(next);
    }
    return segs;
}

// Drop (sub-)zero-width segments and merge equal-kind neighbours. Dropped
// width is folded into the adjacent segment so the total is preserved.
template <class Num>
std::vector<RawSegment<Num>> canonical(const std::vector<RawSegment<Num>>& in, const Num& tol) {
    std::vector<RawSegment<Num>> out;
    out.reserve(in.size());
    Num carry(0);
    for (const auto& seg : in) {
        if (seg.width <= tol) {
            carry = carry + seg.width;
            continue;
        }
        if (!out.empty() && out.back().kind == seg.kind)
            out.back().width = out.back().width + seg.width + carry;
        else if (!out.empty())
            out.push_back({seg.width + carry, seg.kind});
        else
            out.push_back({seg.width + carry, seg.kind});
        carry = Num(0);
    }
    if (!out.empty()) out.back().width = out.back().width + carry;
    return out;
}

inline std::vector<Segment> to_segments(const std::vector<RawSegment<double>>& raw) {
    std::vector<Segment> segs;
    segs.reserve(raw.size());
    for (const auto& r : raw) segs.push_back({r.width, r.kind});
    return segs;
}

inline std::vector<Segment> to_segments(const std::vector<RawSegment<Rational>>& raw) {
    std::vector<Segment> segs;
    segs.reserve(raw.size());
    for (const auto& r : raw) segs.push_back({r.width.to_double(), r.kind});
    return segs;
}

} // namespace detail

inline constexpr double kMergeTolerance = 1e-14; // canonicalization, in units of L

/// eps_min, eps_max and eps_reg for given N and gamma. eps_max closes the
/// central region (two or three wells touch); eps_reg makes all stage-1 gaps
/// and wells equally wide. For N = 3 there are no internal gaps, so eps has
/// no geometric effect and eps_max is unbounded (+inf).
inline LacunarityBounds epsilon_bounds(int copies, double gamma) {
    if (copies < 3) throw InvalidN("N must be >= 3, got " + std::to_string(copies));
    if (!(gamma > 0.0) || !(gamma < 1.0 / copies))
        throw GammaOutOfRange("gamma must lie in (0, 1/N); got " + std::to_string(gamma) +
                              " with N = " + std::to_string(copies));
    LacunarityBounds b;
    const double free_width = 1.0 - copies * gamma;
    b.eps_min = 0.0;
    b.eps_reg = free_width / (copies - 1);
    if (copies % 2 == 0)
        b.eps_max = free_width / (copies - 2);
    else if (copies == 3)
        b.eps_max = std::numeric_limits<double>::infinity();
    else
        b.eps_max = free_width / (copies - 3);
    return b;
}

/// Gate for all fractal parameters. Throws InvalidN, GammaOutOfRange,
/// EpsOutOfRange or NegativeStage; returns the validated bundle otherwise.
inline CantorParams validate_params(int copies, double gamma, double eps, int stage,
                                    std::optional<Rational> gamma_exact = std::nullopt,
                                    std::optional<Rational> eps_exact = std::nullopt) {
    if (copies < 3) throw InvalidN("N must be >= 3, got " + std::to_string(copies));
    if (gamma_exact &&
        (!(gamma_exact->num() > 0) || !(*gamma_exact < Rational(1, copies))))
        throw GammaOutOfRange("gamma must lie in (0, 1/N); got " + gamma_exact->str() +
                              " with N = " + std::to_string(copies));
    if (!(gamma > 0.0) || !(gamma < 1.0 / copies))
        throw GammaOutOfRange("gamma must lie in (0, 1/N); got " + std::to_string(gamma) +
                              " with N = " + std::to_string(copies));
    const LacunarityBounds bounds = epsilon_bounds(copies, gamma);
    if (eps < 0.0)
        throw EpsOutOfRange("eps must lie in [0, " + std::to_string(bounds.eps_max) + "]; got " +
                            std::to_string(eps));
    bool eps_ok;
    if (gamma_exact && eps_exact && copies != 3) {
        // exact boundary check: eps <= (1 - N gamma)/(N - 2 or 3)
        const Rational free_width = Rational(1) - Rational(copies) * *gamma_exact;
        const Rational emax = free_width / Rational(copies % 2 == 0 ? copies - 2 : copies - 3);
        eps_ok = *eps_exact <= emax;
    } else {
        // tolerant boundary check so eps = eps_max given in decimals passes
        eps_ok = eps <= bounds.eps_max * (1.0 + 1e-12) + 1e-15;
    }
    if (!eps_ok)
        throw EpsOutOfRange("eps must lie in [0, " + std::to_string(bounds.eps_max) + "]; got " +
                            std::to_string(eps));
    if (stage < 0) throw NegativeStage("stage must be >= 0, got " + std::to_string(stage));
    CantorParams p;
    p.copies = copies;
    p.gamma = gamma;
    p.eps = eps;
    p.stage = stage;
    p.gamma_exact = gamma_exact;
    p.eps_exact = eps_exact;
    return p;
}

inline CantorParams validate_params(int copies, const Rational& gamma, const Rational& eps,
                                    int stage) {
    return validate_params(copies, gamma.to_double(), eps.to_double(), stage, gamma, eps);
}

/// Stage-S pre-fractal before canonicalization: exactly N^S wells, each of
/// width gamma^S, separated by the generator's gaps (possibly zero-width at
/// the degenerate lacunarities).
inline LayerStack build_stage_raw(const CantorParams& params) {
    LayerStack stack;
    stack.stage = params.stage;
    stack.params = params;
    if (params.gamma_exact && params.eps_exact) {
        try {
            stack.segments = detail::to_segments(detail::generate<Rational>(
                params.copies, *params.gamma_exact, *params.eps_exact, params.stage));
            return stack;
        } catch (const RationalOverflow&) {
            // fall through to floating point
        }
    }
    stack.segments = detail::to_segments(
        detail::generate<double>(params.copies, params.gamma, params.eps, params.stage));
    return stack;
}

/// Remove (sub-tolerance) zero-width segments and merge adjacent segments of
/// equal kind. Total width is preserved; idempotent.
inline LayerStack canonicalize(const LayerStack& stack) {
    LayerStack out;
    out.stage = stack.stage;
    out.params = stack.params;
    std::vector<detail::RawSegment<double>> raw;
    raw.reserve(stack.segments.size());
    for (const auto& s : stack.segments) raw.push_back({s.width, s.kind});
    out.segments = detail::to_segments(detail::canonical(raw, kMergeTolerance));
    return out;
}

/// Canonical stage-S stack for validated params. When gamma and eps are known
/// exactly the construction and the degenerate merges run in exact rational
/// arithmetic (with automatic fallback to double on int64 overflow).
inline LayerStack build_stage(const CantorParams& params) {
    LayerStack stack;
    stack.stage = params.stage;
    stack.params = params;
    if (params.gamma_exact && params.eps_exact) {
        try {
            auto raw = detail::generate<Rational>(params.copies, *params.gamma_exact,
                                                  *params.eps_exact, params.stage);
            stack.segments = detail::to_segments(detail::canonical(raw, Rational(0)));
            return stack;
        } catch (const RationalOverflow&) {
            // fall through to floating point
        }
    }
    auto raw = detail::generate<double>(params.copies, params.gamma, params.eps, params.stage);
    stack.segments = detail::to_segments(detail::canonical(raw, kMergeTolerance));
    return stack;
}

/// D = ln(N) / ln(1/gamma); independent of eps and stage.
inline double similarity_dimension(const CantorParams& params) {
    return std::log(static_cast<double>(params.copies)) / std::log(1.0 / params.gamma);
}

/// x_start of every segment plus the final x_end, as prefix sums of widths.
inline std::vector<double> segment_boundaries(const LayerStack& stack) {
    std::vector<double> xs;
    xs.reserve(stack.segments.size() + 1);
    double x = 0;
    xs.push_back(x);
    for (const auto& s : stack.segments) {
        x += s.width;
        xs.push_back(x);
    }
    return xs;
}

inline bool is_mirror_symmetric(const LayerStack& stack, double tol = 1e-12) {
    const auto& segs = stack.segments;
    const std::size_t n = segs.size();
    for (std::size_t i = 0; i < n / 2 + 1 && i < n; ++i) {
        const auto& a = segs[i];
        const auto& b = segs[n - 1 - i];
        if (a.kind != b.kind || std::abs(a.width - b.width) > tol) return false;
    }
    return true;
}

} // namespace ctwist
