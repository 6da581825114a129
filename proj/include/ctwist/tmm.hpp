#pragma once

#include <cmath>
#include <complex>
#include <string>

#include "ctwist/cantor.hpp"
#include "ctwist/errors.hpp"

namespace ctwist {

// Transfer-matrix conventions used throughout:
//
//   (A0+, A0-)^T = M (An+, An-)^T
//
// relates the plane-wave amplitudes on the left of the stack to those on the
// right. M is the ordered product D0^-1 (prod_i D_i P_i(d_i) D_i^-1) D0 with
//   D(k) = ((1, 1), (k, -k)),   P(k, d) = diag(exp(ikd), exp(-ikd)),
// and the exterior on both sides at potential 0 (wavenumber k0). For a wave
// incoming from the left, R = |M21|^2 / |M11|^2 and T = 1 / |M11|^2.
//
// All wavenumbers are real (wells have V = -V0 < 0 < E), so every layer
// factor D P D^-1 has the form ((c, i s/k), (i k s, c)) with real c, s. The
// accumulated product keeps the shape ((p, iq), (ir, s)) with real p, q, r,
// s; products are carried in long double on those four reals.

struct Complex2x2 {
    std::complex<double> m11, m12, m21, m22;

    static Complex2x2 identity() { return {{1, 0}, {0, 0}, {0, 0}, {1, 0}}; }

    std::complex<double> det() const { return m11 * m22 - m12 * m21; }
    std::complex<double> trace() const { return m11 + m22; }

    friend Complex2x2 operator*(const Complex2x2& a, const Complex2x2& b) {
        return {a.m11 * b.m11 + a.m12 * b.m21, a.m11 * b.m12 + a.m12 * b.m22,
                a.m21 * b.m11 + a.m22 * b.m21, a.m21 * b.m12 + a.m22 * b.m22};
    }
};

/// Dimensionless scattering energy: phi = a k0 and phi_v the well-depth
/// parameter, with a the finest well width gamma^S (in units of L). All SI
/// quantities (m*, hbar, E, V) are absorbed into phi and phi_v.
struct EnergyPoint {
    double phi = 0;
    double phi_v = 0;
    double a = 1;
};

inline EnergyPoint energy_point(const CantorParams& params, double phi, double phi_v) {
    if (phi_v < 0) throw Error("phi_v must be >= 0, got " + std::to_string(phi_v));
    return {phi, phi_v, std::pow(params.gamma, params.stage)};
}

struct Wavenumbers {
    double k0 = 0; // exterior and gaps (V = 0)
    double k1 = 0; // wells (V = -V0)
};

/// k0 = phi / a, k1 = sqrt(phi^2 + phi_v^2) / a; both real and positive.
inline Wavenumbers wavenumbers(const EnergyPoint& point) {
    if (!(point.phi > 0))
        throw NonPositiveEnergy("phi must be > 0, got " + std::to_string(point.phi));
    if (!(point.a > 0)) throw Error("finest well width a must be > 0");
    return {point.phi / point.a, std::hypot(point.phi, point.phi_v) / point.a};
}

struct InterfaceMatrices {
    Complex2x2 d;     // ((1, 1), (k, -k))
    Complex2x2 d_inv; // ((1/2, 1/(2k)), (1/2, -1/(2k)))
};

inline InterfaceMatrices interface_matrix(double k) {
    if (!(k > 0)) throw ZeroWavenumber("wavenumber must be > 0, got " + std::to_string(k));
    InterfaceMatrices m;
    m.d = {{1, 0}, {1, 0}, {k, 0}, {-k, 0}};
    m.d_inv = {{0.5, 0}, {0.5 / k, 0}, {0.5, 0}, {-0.5 / k, 0}};
    return m;
}

/// diag(exp(ikd), exp(-ikd)); unimodular for any real k, d.
inline Complex2x2 propagation_matrix(double k, double width) {
    if (width < 0) throw NegativeWidth("segment width must be >= 0, got " + std::to_string(width));
    const double c = std::cos(k * width);
    const double s = std::sin(k * width);
    return {{c, s}, {0, 0}, {0, 0}, {c, -s}};
}

namespace detail {

// ((p, iq), (ir, s)) with real entries; closed under layer-block products.
struct RealFamily {
    long double p = 1, q = 0, r = 0, s = 1;

    void right_multiply_block(long double k, long double width) {
        const long double c = std::cos(k * width);
        const long double sn = std::sin(k * width);
        const long double bq = sn / k;
        const long double br = k * sn;
        const long double np = p * c - q * br;
        const long double nq = p * bq + q * c;
        const long double nr = r * c + s * br;
        const long double ns = -r * bq + s * c;
        p = np;
        q = nq;
        r = nr;
        s = ns;
    }
};

inline RealFamily accumulate_stack(const LayerStack& stack, const Wavenumbers& k) {
    RealFamily acc;
    for (const auto& seg : stack.segments) {
        const long double kk = seg.kind == SegmentKind::Well ? k.k1 : k.k0;
        if (seg.width < 0)
            throw NegativeWidth("segment width must be >= 0, got " + std::to_string(seg.width));
        acc.right_multiply_block(kk, seg.width);
    }
    return acc;
}

// M = D0^-1 K D0 written out for K = ((p, iq), (ir, s)).
inline Complex2x2 to_transfer_matrix(const RealFamily& k, long double k0) {
    const long double re_diag = (k.p + k.s) / 2;
    const long double im_diag = (k.r / k0 + k0 * k.q) / 2;
    const long double re_off = (k.p - k.s) / 2;
    const long double im_off = (k.r / k0 - k0 * k.q) / 2;
    Complex2x2 m;
    m.m11 = {static_cast<double>(re_diag), static_cast<double>(im_diag)};
    m.m22 = {static_cast<double>(re_diag), static_cast<double>(-im_diag)};
    m.m12 = {static_cast<double>(re_off), static_cast<double>(im_off)};
    m.m21 = {static_cast<double>(re_off), static_cast<double>(-im_off)};
    return m;
}

} // namespace detail

/// Total transfer matrix of a stack at the given energy. Gap segments
/// propagate with k0, wells with k1; the interior D_i P_i D_i^-1 factors are
/// fused analytically into the layer blocks described above, and the product
/// is accumulated left to right in long double.
inline Complex2x2 transfer_matrix(const LayerStack& stack, const EnergyPoint& point) {
    const Wavenumbers k = wavenumbers(point);
    return detail::to_transfer_matrix(detail::accumulate_stack(stack, k), k.k0);
}

struct ScatterResult {
    double R = 0;  // reflection coefficient
    double T = 1;  // transmission coefficient
    Complex2x2 M = Complex2x2::identity();
};

/// R = |M21|^2 / |M11|^2 and T = 1 / |M11|^2, evaluated in long double so
/// strongly reflecting stacks (|M11| huge) stay finite: R then saturates at
/// 1 and T underflows to 0, with R + T = 1 preserved to machine precision.
inline ScatterResult scatter(const LayerStack& stack, const EnergyPoint& point) {
    const Wavenumbers k = wavenumbers(point);
    const detail::RealFamily acc = detail::accumulate_stack(stack, k);
    const long double k0 = k.k0;
    const long double re_diag = (acc.p + acc.s) / 2;
    const long double im_diag = (acc.r / k0 + k0 * acc.q) / 2;
    const long double re_off = (acc.p - acc.s) / 2;
    const long double im_off = (acc.r / k0 - k0 * acc.q) / 2;
    const long double m11_sq = re_diag * re_diag + im_diag * im_diag;
    const long double m21_sq = re_off * re_off + im_off * im_off;
    ScatterResult result;
    result.R = static_cast<double>(m21_sq / m11_sq);
    result.T = static_cast<double>(1.0L / m11_sq);
    result.M = detail::to_transfer_matrix(acc, k0);
    return result;
}

/// Bloch phase theta with tr(M) = 2 cos(theta): real for |tr| <= 2, complex
/// otherwise (principal branch of arccos). M must be unimodular.
inline std::complex<double> bloch_phase(const Complex2x2& m) {
    if (std::abs(m.det() - std::complex<double>(1, 0)) > 1e-8)
        throw NonUnimodular("bloch_phase requires det(M) = 1");
    return std::acos(std::complex<double>(m.trace().real() / 2.0, 0.0));
}

/// M^n via the Chebyshev identity
///   M^n = sin(n theta)/sin(theta) M - sin((n-1) theta)/sin(theta) I,
/// falling back to repeated multiplication near the sin(theta) = 0
/// singularity (theta = m pi, where the ratio degenerates to n).
inline Complex2x2 matrix_power_bloch(const Complex2x2& m, int n) {
    if (n < 1) throw Error("matrix power requires n >= 1");
    const std::complex<double> theta = bloch_phase(m); // also checks det
    const std::complex<long double> th(theta.real(), theta.imag());
    const std::complex<long double> sin_theta = std::sin(th);
    if (std::abs(sin_theta) < 1e-8) {
        Complex2x2 acc = m;
        for (int i = 1; i < n; ++i) acc = acc * m;
        return acc;
    }
    const std::complex<long double> ca = std::sin(static_cast<long double>(n) * th) / sin_theta;
    const std::complex<long double> cb =
        std::sin(static_cast<long double>(n - 1) * th) / sin_theta;
    auto combine = [&](const std::complex<double>& mij, bool diagonal) {
        const std::complex<long double> v =
            ca * std::complex<long double>(mij.real(), mij.imag()) - (diagonal ? cb : 0.0L);
        return std::complex<double>(static_cast<double>(v.real()), static_cast<double>(v.imag()));
    };
    return {combine(m.m11, true), combine(m.m12, false), combine(m.m21, false),
            combine(m.m22, true)};
}

/// Exact trace of the symmetric single-well cell (gap b/2 | well a | gap b/2):
///   tr(M) = 2 cos(b k0) cos(a k1) - (k0^2 + k1^2)/(k0 k1) sin(b k0) sin(a k1).
inline double trace_of_cell(const EnergyPoint& point, double well_width, double gap_width) {
    const Wavenumbers k = wavenumbers(point);
    const long double k0 = k.k0, k1 = k.k1;
    const long double ak1 = k1 * well_width;
    const long double bk0 = k0 * gap_width;
    const long double tr = 2.0L * std::cos(bk0) * std::cos(ak1) -
                           (k0 * k0 + k1 * k1) / (k0 * k1) * std::sin(bk0) * std::sin(ak1);
    return static_cast<double>(tr);
}

} // namespace ctwist
