#pragma once

#include <cmath>

namespace pikan {

/// Truncated second-order Taylor jet: value plus first and second derivative
/// along one direction. Arithmetic follows the usual composition rules
/// (Leibniz for products, Faa di Bruno up to order two for chaining).
struct Jet2 {
    double v = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;

    constexpr Jet2() = default;
    constexpr Jet2(double value, double first, double second) : v(value), d1(first), d2(second) {}

    static constexpr Jet2 variable(double x, double seed = 1.0) { return {x, seed, 0.0}; }
    static constexpr Jet2 constant(double x) { return {x, 0.0, 0.0}; }

    constexpr Jet2 operator-() const { return {-v, -d1, -d2}; }

    constexpr Jet2& operator+=(const Jet2& o) {
        v += o.v;
        d1 += o.d1;
        d2 += o.d2;
        return *this;
    }
};

constexpr Jet2 operator+(const Jet2& a, const Jet2& b) { return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2}; }
constexpr Jet2 operator-(const Jet2& a, const Jet2& b) { return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2}; }

constexpr Jet2 operator*(const Jet2& a, const Jet2& b) {
    return {a.v * b.v, a.d1 * b.v + a.v * b.d1, a.d2 * b.v + 2.0 * a.d1 * b.d1 + a.v * b.d2};
}

constexpr Jet2 operator+(const Jet2& a, double c) { return {a.v + c, a.d1, a.d2}; }
constexpr Jet2 operator+(double c, const Jet2& a) { return a + c; }
constexpr Jet2 operator-(const Jet2& a, double c) { return {a.v - c, a.d1, a.d2}; }
constexpr Jet2 operator-(double c, const Jet2& a) { return {c - a.v, -a.d1, -a.d2}; }
constexpr Jet2 operator*(const Jet2& a, double c) { return {a.v * c, a.d1 * c, a.d2 * c}; }
constexpr Jet2 operator*(double c, const Jet2& a) { return a * c; }
constexpr Jet2 operator/(const Jet2& a, double c) { return {a.v / c, a.d1 / c, a.d2 / c}; }

constexpr Jet2 operator/(const Jet2& a, const Jet2& b) {
    const double q = a.v / b.v;
    const double q1 = (a.d1 - q * b.d1) / b.v;
    const double q2 = (a.d2 - 2.0 * q1 * b.d1 - q * b.d2) / b.v;
    return {q, q1, q2};
}

/// Compose a univariate f with jet g, given f, f', f'' at g.v.
constexpr Jet2 chain(double f, double fp, double fpp, const Jet2& g) {
    return {f, fp * g.d1, fpp * g.d1 * g.d1 + fp * g.d2};
}

inline Jet2 sin(const Jet2& g) { return chain(std::sin(g.v), std::cos(g.v), -std::sin(g.v), g); }
inline Jet2 cos(const Jet2& g) { return chain(std::cos(g.v), -std::sin(g.v), -std::cos(g.v), g); }
inline Jet2 exp(const Jet2& g) {
    const double e = std::exp(g.v);
    return chain(e, e, e, g);
}

constexpr Jet2 sqr(const Jet2& g) { return g * g; }

}  // namespace pikan
