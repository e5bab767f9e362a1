#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>

#include "quatdyn/errors.hpp"

namespace quatdyn {

struct Rational {
    long long p = 0; // signed numerator
    long long q = 1; // positive denominator

    double value() const { return double(p) / double(q); }
    std::string str() const { return std::to_string(p) + "/" + std::to_string(q); }
};

inline Rational parse_rational(const std::string& s) {
    const auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return {std::stoll(s), 1};
        Rational r{std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1))};
        if (r.q <= 0) throw ConfigError("rational denominator must be positive: " + s);
        const long long g = std::gcd(std::llabs(r.p), r.q);
        if (g > 1) { r.p /= g; r.q /= g; }
        return r;
    } catch (const std::invalid_argument&) {
        throw ConfigError("bad rational: " + s);
    } catch (const std::out_of_range&) {
        throw ConfigError("bad rational: " + s);
    }
}

/// Continued-fraction convergents of x, walked in order. Returns the best
/// convergent with denominator <= q_max, plus the first convergent beyond the
/// cap (if any) so callers can detect "looks rational but too deep".
struct ConvergentScan {
    Rational best;          // last convergent with q <= q_max
    double best_err = 0.0;  // |x - best|
    bool has_next = false;  // a further convergent exists
    Rational next;          // first convergent with q > q_max
    double next_err = 0.0;
};

inline ConvergentScan scan_convergents(double x, long long q_max) {
    ConvergentScan out;
    long long h0 = 1, h1 = (long long)std::floor(x); // p_{-1}, p_0
    long long k0 = 0, k1 = 1;                        // q_{-1}, q_0
    out.best = {h1, 1};
    out.best_err = std::fabs(x - double(h1));
    double frac = x - std::floor(x);
    for (int it = 0; it < 64; ++it) {
        if (frac < 1e-15) break;
        const double inv = 1.0 / frac;
        const double fl = std::floor(inv);
        if (fl > 9.0e17) break; // exact enough; avoid overflow
        const long long ai = (long long)fl;
        const long long h2 = ai * h1 + h0;
        const long long k2 = ai * k1 + k0;
        if (k2 > q_max) {
            out.has_next = true;
            out.next = {h2, k2};
            out.next_err = std::fabs(x - out.next.value());
            break;
        }
        h0 = h1; h1 = h2;
        k0 = k1; k1 = k2;
        out.best = {h1, k1};
        out.best_err = std::fabs(x - out.best.value());
        frac = inv - fl;
    }
    return out;
}

enum class OrbitClass { Periodic, Quasiperiodic, Unresolved };

inline const char* orbit_class_name(OrbitClass c) {
    switch (c) {
        case OrbitClass::Periodic: return "PERIODIC";
        case OrbitClass::Quasiperiodic: return "QUASIPERIODIC";
        case OrbitClass::Unresolved: return "UNRESOLVED";
    }
    return "?";
}

/// Rationality verdict for a rotation value: PERIODIC(p, q) when a convergent
/// with q <= q_max sits within tol; UNRESOLVED when only a deeper convergent
/// does (rationality undecidable at this resolution); QUASIPERIODIC otherwise.
struct RotationClass {
    OrbitClass kind = OrbitClass::Quasiperiodic;
    Rational ratio;      // meaningful for Periodic / Unresolved
    double residual = 0; // |value - ratio|
};

inline RotationClass classify_rotation_value(double x, long long q_max = 64,
                                             double tol = 1e-9) {
    const auto scan = scan_convergents(x, q_max);
    RotationClass rc;
    if (scan.best_err <= tol) {
        rc.kind = OrbitClass::Periodic;
        rc.ratio = scan.best;
        rc.residual = scan.best_err;
        return rc;
    }
    if (scan.has_next && scan.next_err <= tol) {
        rc.kind = OrbitClass::Unresolved;
        rc.ratio = scan.next;
        rc.residual = scan.next_err;
        return rc;
    }
    rc.kind = OrbitClass::Quasiperiodic;
    rc.ratio = scan.best;
    rc.residual = scan.best_err;
    return rc;
}

} // namespace quatdyn
