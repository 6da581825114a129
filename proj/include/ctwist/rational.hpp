#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>

#include "ctwist/errors.hpp"

namespace ctwist {

// Signals that an exact-arithmetic computation left the int64 range.
// Callers fall back to floating point when they catch it.
struct RationalOverflow : Error {
    using Error::Error;
};

/// Exact rational number on int64, always normalized (gcd 1, den > 0).
///
/// Layer widths like gamma = 1/7 are not representable in binary floating
/// point, but the degenerate lacunarity geometries (eps = 0, eps = eps_max)
/// need gap widths that cancel exactly. Building stacks in Rational keeps
/// those cancellations exact; anything that cannot be expressed exactly
/// falls back to double arithmetic.
class Rational {
public:
    constexpr Rational() = default;
    Rational(std::int64_t num, std::int64_t den) : num_(num), den_(den) { normalize(); }
    Rational(std::int64_t value) : num_(value), den_(1) {} // NOLINT: implicit by design

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }

    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    bool is_zero() const { return num_ == 0; }
    bool is_negative() const { return num_ < 0; }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return make(add_checked(mul_checked(a.num_, b.den_), mul_checked(b.num_, a.den_)),
                    mul_checked(a.den_, b.den_));
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        return make(sub_checked(mul_checked(a.num_, b.den_), mul_checked(b.num_, a.den_)),
                    mul_checked(a.den_, b.den_));
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return make(mul_checked(a.num_, b.num_), mul_checked(a.den_, b.den_));
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0) throw Error("Rational: division by zero");
        return make(mul_checked(a.num_, b.den_), mul_checked(a.den_, b.num_));
    }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b) {
        return static_cast<__int128>(a.num_) * b.den_ < static_cast<__int128>(b.num_) * a.den_;
    }
    friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
    friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
    friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

    /// "3", "-1/7", "1 / 14" -> Rational; empty optional if not of that shape.
    static std::optional<Rational> parse(std::string_view text) {
        auto trim = [](std::string_view s) {
            while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
            while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
            return s;
        };
        text = trim(text);
        if (text.empty()) return std::nullopt;
        const auto slash = text.find('/');
        std::string_view num_part = trim(text.substr(0, slash));
        std::string_view den_part =
            slash == std::string_view::npos ? std::string_view("1") : trim(text.substr(slash + 1));
        auto to_i64 = [](std::string_view s) -> std::optional<std::int64_t> {
            if (s.empty()) return std::nullopt;
            std::size_t idx = 0;
            bool neg = false;
            if (s[0] == '+' || s[0] == '-') {
                neg = s[0] == '-';
                idx = 1;
            }
            if (idx == s.size()) return std::nullopt;
            std::int64_t v = 0;
            for (; idx < s.size(); ++idx) {
                if (s[idx] < '0' || s[idx] > '9') return std::nullopt;
                if (v > (std::numeric_limits<std::int64_t>::max() - 9) / 10) return std::nullopt;
                v = v * 10 + (s[idx] - '0');
            }
            return neg ? -v : v;
        };
        const auto n = to_i64(num_part);
        const auto d = to_i64(den_part);
        if (!n || !d || *d == 0) return std::nullopt;
        return Rational(*n, *d);
    }

    /// Recover a small exact fraction from a double via continued fractions.
    /// Succeeds only when num/den round-trips to exactly the same double,
    /// so 0.25 -> 1/4 and the double nearest 1/7 -> 1/7, while 0.1234567
    /// stays inexact and yields nullopt.
    static std::optional<Rational> from_double(double x, std::int64_t max_den = 1'000'000) {
        if (!std::isfinite(x)) return std::nullopt;
        double rem = x;
        std::int64_t p_prev = 1, q_prev = 0;
        std::int64_t p = std::llround(std::floor(rem)), q = 1;
        rem -= std::floor(rem);
        for (int iter = 0; iter < 64; ++iter) {
            if (q <= max_den && static_cast<double>(p) / static_cast<double>(q) == x)
                return Rational(p, q);
            if (rem == 0.0 || q > max_den) break;
            rem = 1.0 / rem;
            const double ai = std::floor(rem);
            if (ai > 1e15) break;
            rem -= ai;
            const auto a = static_cast<std::int64_t>(ai);
            const std::int64_t p_next = a * p + p_prev;
            const std::int64_t q_next = a * q + q_prev;
            p_prev = p;
            q_prev = q;
            p = p_next;
            q = q_next;
            if (q <= 0) break; // overflow wrap
        }
        return std::nullopt;
    }

    std::string str() const {
        if (den_ == 1) return std::to_string(num_);
        return std::to_string(num_) + "/" + std::to_string(den_);
    }

private:
    static Rational make(std::int64_t n, std::int64_t d) {
        Rational r;
        r.num_ = n;
        r.den_ = d;
        r.normalize();
        return r;
    }

    static std::int64_t checked(__int128 v) {
        if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min())
            throw RationalOverflow("Rational: int64 overflow");
        return static_cast<std::int64_t>(v);
    }
    static std::int64_t mul_checked(std::int64_t a, std::int64_t b) {
        return checked(static_cast<__int128>(a) * b);
    }
    static std::int64_t add_checked(std::int64_t a, std::int64_t b) {
        return checked(static_cast<__int128>(a) + b);
    }
    static std::int64_t sub_checked(std::int64_t a, std::int64_t b) {
        return checked(static_cast<__int128>(a) - b);
    }

    void normalize() {
        if (den_ == 0) throw Error("Rational: zero denominator");
        if (den_ < 0) {
            if (num_ == std::numeric_limits<std::int64_t>::min() ||
                den_ == std::numeric_limits<std::int64_t>::min())
                throw RationalOverflow("Rational: int64 overflow");
            num_ = -num_;
            den_ = -den_;
        }
        const std::int64_t g = std::gcd(num_, den_);
        if (g > 1) {
            num_ /= g;
            den_ /= g;
        }
    }

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

} // namespace ctwist
