#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <ostream>

#include "quatdyn/errors.hpp"

namespace quatdyn {

/// Element of the quaternion division algebra, q = q0 + q1 i + q2 j + q3 k.
/// Plain value type; all arithmetic is free-function / operator based and pure.
struct Quaternion {
    double q0 = 0.0;
    double q1 = 0.0;
    double q2 = 0.0;
    double q3 = 0.0;

    constexpr Quaternion() = default;
    constexpr Quaternion(double s, double x, double y, double z) : q0(s), q1(x), q2(y), q3(z) {}
    // real embedding
    explicit constexpr Quaternion(double s) : q0(s) {}

    constexpr bool operator==(const Quaternion&) const = default;

    constexpr double& operator[](int i) { return (&q0)[i]; }
    constexpr double operator[](int i) const { return (&q0)[i]; }
};

inline constexpr Quaternion kOne{1.0, 0.0, 0.0, 0.0};
inline constexpr Quaternion kI{0.0, 1.0, 0.0, 0.0};
inline constexpr Quaternion kJ{0.0, 0.0, 1.0, 0.0};
inline constexpr Quaternion kK{0.0, 0.0, 0.0, 1.0};

constexpr Quaternion operator+(const Quaternion& a, const Quaternion& b) {
    return {a.q0 + b.q0, a.q1 + b.q1, a.q2 + b.q2, a.q3 + b.q3};
}
constexpr Quaternion operator-(const Quaternion& a, const Quaternion& b) {
    return {a.q0 - b.q0, a.q1 - b.q1, a.q2 - b.q2, a.q3 - b.q3};
}
constexpr Quaternion operator-(const Quaternion& a) { return {-a.q0, -a.q1, -a.q2, -a.q3}; }
constexpr Quaternion operator*(double s, const Quaternion& a) {
    return {s * a.q0, s * a.q1, s * a.q2, s * a.q3};
}
constexpr Quaternion operator*(const Quaternion& a, double s) { return s * a; }
constexpr Quaternion operator/(const Quaternion& a, double s) {
    return {a.q0 / s, a.q1 / s, a.q2 / s, a.q3 / s};
}

/// Hamilton product. Non-commutative; a and b commute iff their imaginary
/// vectors are parallel.
constexpr Quaternion mul(const Quaternion& a, const Quaternion& b) {
    return {a.q0 * b.q0 - a.q1 * b.q1 - a.q2 * b.q2 - a.q3 * b.q3,
            a.q1 * b.q0 + a.q0 * b.q1 - a.q3 * b.q2 + a.q2 * b.q3,
            a.q2 * b.q0 + a.q3 * b.q1 + a.q0 * b.q2 - a.q1 * b.q3,
            a.q3 * b.q0 - a.q2 * b.q1 + a.q1 * b.q2 + a.q0 * b.q3};
}
constexpr Quaternion operator*(const Quaternion& a, const Quaternion& b) { return mul(a, b); }

constexpr Quaternion conj(const Quaternion& q) { return {q.q0, -q.q1, -q.q2, -q.q3}; }

constexpr double norm_sq(const Quaternion& q) {
    return q.q0 * q.q0 + q.q1 * q.q1 + q.q2 * q.q2 + q.q3 * q.q3;
}
inline double norm(const Quaternion& q) { return std::sqrt(norm_sq(q)); }

constexpr double re(const Quaternion& q) { return q.q0; }
/// squared length of the imaginary vector (the Delta^2 of the power expansion)
constexpr double imag_norm_sq(const Quaternion& q) {
    return q.q1 * q.q1 + q.q2 * q.q2 + q.q3 * q.q3;
}
constexpr bool is_zero(const Quaternion& q) { return norm_sq(q) == 0.0; }
constexpr bool is_real(const Quaternion& q, double eps = 1e-14) {
    return imag_norm_sq(q) <= eps * eps;
}

inline Quaternion inverse(const Quaternion& q) {
    const double n2 = norm_sq(q);
    if (n2 == 0.0) throw DomainError("zero has no inverse");
    return conj(q) / n2;
}

/// q^n by repeated Hamilton product, q^0 = 1.
inline Quaternion pow(const Quaternion& q, int n) {
    Quaternion r = kOne;
    for (int k = 0; k < n; ++k) r = mul(r, q);
    return r;
}

namespace detail {
// Pascal's triangle, exact in uint64 up to row 40.
inline std::uint64_t binom(int n, int k) {
    static const auto table = [] {
        std::array<std::array<std::uint64_t, 41>, 41> t{};
        for (int i = 0; i <= 40; ++i) {
            t[i][0] = 1;
            for (int j = 1; j <= i; ++j)
                t[i][j] = t[i - 1][j - 1] + (j <= i - 1 ? t[i - 1][j] : 0);
        }
        return t;
    }();
    if (k < 0 || k > n) return 0;
    return table[n][k];
}
} // namespace detail

/// q^n = scalar + vector_coeff * (q1 i + q2 j + q3 k), both parts real
/// polynomials in (q0, Delta^2). vector_coeff is the (q^n - conj(q)^n)/(q - conj(q))
/// factor, regular also when q is real.
struct PowerDecomposition {
    double scalar = 0.0;
    double vector_coeff = 0.0;
};

inline PowerDecomposition binomial_expand(double s, double delta_sq, int n) {
    if (n < 0 || n > 40) throw DomainError("binomial_expand: n out of range [0, 40]");
    // powers of s and (-Delta^2), exact recurrences
    std::array<double, 41> ps{}, pd{};
    ps[0] = 1.0;
    pd[0] = 1.0;
    for (int k = 1; k <= n; ++k) ps[k] = ps[k - 1] * s;
    for (int k = 1; 2 * k <= n + 1; ++k) pd[k] = pd[k - 1] * (-delta_sq);

    PowerDecomposition out;
    // even binomial sum -> scalar, odd -> vector coefficient
    for (int t = 0; 2 * t <= n; ++t)
        out.scalar += double(detail::binom(n, 2 * t)) * pd[t] * ps[n - 2 * t];
    for (int t = 1; 2 * t - 1 <= n; ++t)
        out.vector_coeff += double(detail::binom(n, 2 * t - 1)) * pd[t - 1] * ps[n - 2 * t + 1];
    return out;
}

inline PowerDecomposition binomial_expand(const Quaternion& q, int n) {
    return binomial_expand(q.q0, imag_norm_sq(q), n);
}

/// (q^n + conj(q)^n)/2 as a real number.
inline double power_scalar(const Quaternion& q, int n) { return binomial_expand(q, n).scalar; }
/// (q^n - conj(q)^n)/(q - conj(q)) as a real number.
inline double power_vector_coeff(const Quaternion& q, int n) {
    return binomial_expand(q, n).vector_coeff;
}

/// Unit c with c a c^-1 = Re(a) + |Im(a)| i, plus that normal form.
struct SimilarityFrame {
    Quaternion c;
    Quaternion a_normal;
};

/// Conjugation by a unit quaternion rotates the imaginary 3-vector; c is
/// chosen as the shortest-arc rotation taking Im(a) onto the +i axis.
/// Antiparallel tie-break: c = j (rotation by pi about j).
inline SimilarityFrame similarity_normalize(const Quaternion& a) {
    if (is_zero(a)) throw DomainError("similarity_normalize: a = 0");
    const double vn = std::sqrt(imag_norm_sq(a));
    SimilarityFrame out;
    out.a_normal = Quaternion{a.q0, vn, 0.0, 0.0};
    if (vn == 0.0) {
        out.c = kOne;
        return out;
    }
    const double f1 = a.q1 / vn, f2 = a.q2 / vn, f3 = a.q3 / vn;
    if (1.0 + f1 < 1e-14) {
        out.c = kJ;
        return out;
    }
    // half-angle quaternion (1 + f.t) + f x t, t = +i axis
    Quaternion c{1.0 + f1, 0.0, f3, -f2};
    out.c = c / norm(c);
    return out;
}

/// Conjugation q -> c q c^-1.
inline Quaternion conjugate_by(const Quaternion& c, const Quaternion& q) {
    return mul(mul(c, q), inverse(c));
}

inline std::ostream& operator<<(std::ostream& os, const Quaternion& q) {
    return os << "(" << q.q0 << ", " << q.q1 << ", " << q.q2 << ", " << q.q3 << ")";
}

} // namespace quatdyn
