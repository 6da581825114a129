#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctwist/cantor.hpp"
#include "ctwist/nulls.hpp"
#include "ctwist/sweep.hpp"
#include "ctwist/tmm.hpp"

namespace ctwist {

/// Shortest decimal representation that round-trips to the same double.
/// Keeps CSV golden files stable.
inline std::string format_double(double v) {
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

inline const char* kind_name(SegmentKind k) {
    return k == SegmentKind::Well ? "well" : "gap";
}

// ---------------------------------------------------------------- geometry

inline void write_geometry_csv(std::ostream& os, const LayerStack& stack) {
    os << "index,kind,width,x_start,x_end\n";
    const auto xs = segment_boundaries(stack);
    for (std::size_t i = 0; i < stack.segments.size(); ++i) {
        const auto& s = stack.segments[i];
        os << i << ',' << kind_name(s.kind) << ',' << format_double(s.width) << ','
           << format_double(xs[i]) << ',' << format_double(xs[i + 1]) << '\n';
    }
}

inline nlohmann::ordered_json params_json(const CantorParams& p) {
    nlohmann::ordered_json j;
    j["N"] = p.copies;
    if (p.gamma_exact)
        j["gamma"] = p.gamma_exact->str();
    else
        j["gamma"] = p.gamma;
    if (p.eps_exact)
        j["eps"] = p.eps_exact->str();
    else
        j["eps"] = p.eps;
    j["S"] = p.stage;
    return j;
}

inline nlohmann::ordered_json geometry_json(const LayerStack& stack) {
    nlohmann::ordered_json j;
    j["params"] = params_json(stack.params);
    j["stage"] = stack.stage;
    auto segs = nlohmann::ordered_json::array();
    for (const auto& s : stack.segments)
        segs.push_back({{"kind", kind_name(s.kind)}, {"width", s.width}});
    j["segments"] = std::move(segs);
    return j;
}

// ----------------------------------------------------------------- scatter

inline void write_scatter_csv(std::ostream& os, double phi, const ScatterResult& result) {
    os << "phi,R,T\n"
       << format_double(phi) << ',' << format_double(result.R) << ',' << format_double(result.T)
       << '\n';
}

inline nlohmann::ordered_json scatter_json(const CantorParams& params, double phi_v, double phi,
                                           const ScatterResult& result) {
    nlohmann::ordered_json j;
    j["params"] = params_json(params);
    j["phi_v"] = phi_v;
    j["phi"] = phi;
    j["R"] = result.R;
    j["T"] = result.T;
    auto entry = [](const std::complex<double>& z) {
        return nlohmann::ordered_json::array({z.real(), z.imag()});
    };
    j["M"] = {{"m11", entry(result.M.m11)},
              {"m12", entry(result.M.m12)},
              {"m21", entry(result.M.m21)},
              {"m22", entry(result.M.m22)}};
    return j;
}

// ------------------------------------------------------------------- nulls

inline void write_nulls_csv(std::ostream& os, std::span<const NullCurve> curves) {
    os << "family,i,j,eps,phi,low_energy_flag\n";
    for (const auto& curve : curves) {
        for (const auto& pt : curve.points) {
            os << family_name(curve.family) << ',' << curve.i << ',';
            if (curve.j) os << *curve.j;
            os << ',' << format_double(pt.eps) << ',' << format_double(pt.phi) << ','
               << (pt.low_energy ? 1 : 0) << '\n';
        }
    }
}

inline nlohmann::ordered_json nulls_json(std::span<const NullCurve> curves) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& curve : curves) {
        for (const auto& pt : curve.points) {
            nlohmann::ordered_json rec;
            rec["family"] = family_name(curve.family);
            rec["i"] = curve.i;
            if (curve.j)
                rec["j"] = *curve.j;
            else
                rec["j"] = nullptr;
            rec["eps"] = pt.eps;
            rec["phi"] = pt.phi;
            rec["low_energy"] = pt.low_energy;
            arr.push_back(std::move(rec));
        }
    }
    return arr;
}

// ------------------------------------------------------------ verification

inline void write_verify_csv(std::ostream& os, std::span<const NullVerification> rows) {
    os << "family,i,j,eps,phi_pred,phi_min,R_min,residual\n";
    for (const auto& v : rows) {
        os << family_name(v.prediction.family) << ',' << v.prediction.i << ',';
        if (v.prediction.j) os << *v.prediction.j;
        os << ',' << format_double(v.prediction.eps) << ',' << format_double(v.prediction.phi)
           << ',' << format_double(v.phi_at_min) << ',' << format_double(v.r_min) << ','
           << format_double(v.residual) << '\n';
    }
}

// -------------------------------------------------------------- twist grid

inline void write_twist_csv(std::ostream& os, const TwistGrid& grid) {
    os << "eps\\phi";
    for (const double phi : grid.phi_axis) os << ',' << format_double(phi);
    os << '\n';
    for (std::size_t r = 0; r < grid.height(); ++r) {
        os << format_double(grid.eps_axis[r]);
        for (std::size_t c = 0; c < grid.width(); ++c)
            os << ',' << format_double(grid.at(r, c));
        os << '\n';
    }
}

/// FNV-1a over the little-endian bytes of the doubles, row-major.
inline std::uint64_t fnv1a64(std::span<const double> values) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const double v : values) {
        std::uint64_t bits = 0;
        std::memcpy(&bits, &v, sizeof bits);
        for (int byte = 0; byte < 8; ++byte) {
            h ^= (bits >> (8 * byte)) & 0xffu;
            h *= 0x100000001b3ull;
        }
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return s;
}

/// Binary 8-bit PGM (magic P5, maxval 255) of the dB display values.
/// Raster row 0 is the top of the image; by default the eps = 0 grid row is
/// placed at the bottom, flip puts it at the top.
inline void write_twist_pgm(std::ostream& os, const TwistGrid& grid, double floor_db,
                            bool flip = false) {
    const std::vector<double> display = to_decibels(grid, floor_db);
    const std::size_t w = grid.width(), h = grid.height();
    os << "P5\n" << w << ' ' << h << "\n255\n";
    std::vector<unsigned char> row(w);
    for (std::size_t out_r = 0; out_r < h; ++out_r) {
        const std::size_t r = flip ? out_r : h - 1 - out_r;
        for (std::size_t c = 0; c < w; ++c) {
            const double v = display[r * w + c];
            row[c] = static_cast<unsigned char>(std::lround(v * 255.0));
        }
        os.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(w));
    }
}

/// Sidecar metadata for a twist grid: parameters, axes, display floor and a
/// hash of the raw R values.
inline nlohmann::ordered_json twist_meta_json(const TwistGrid& grid, double floor_db) {
    nlohmann::ordered_json j;
    j["params"] = params_json(grid.params);
    j["phi_v"] = grid.phi_v;
    j["width"] = grid.width();
    j["height"] = grid.height();
    j["floor_db"] = floor_db;
    j["phi_axis"] = grid.phi_axis;
    j["eps_axis"] = grid.eps_axis;
    j["grid_fnv1a64"] = hex64(fnv1a64(grid.values));
    return j;
}

} // namespace ctwist
