#pragma once

#include <array>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "quatdyn/errors.hpp"
#include "quatdyn/quaternion.hpp"

namespace quatdyn {

using Vec4 = std::array<double, 4>;
using TangentVector = Vec4;
using Mat4 = std::array<std::array<double, 4>, 4>;

inline Vec4 to_vec(const Quaternion& q) { return {q.q0, q.q1, q.q2, q.q3}; }
inline Quaternion to_quat(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }

/// Equation families. The Bernoulli family is the reduced form
/// qdot = a (c q - q^n); linear/affine families are the constant-coefficient
/// equations qdot = aq+qb, aq+conj(q)b, aq+b conj(q), b+aq, b+qa.
enum class Family {
    Homogeneous, // qdot = a q^n
    Bernoulli,   // qdot = a (c q - q^n)
    Cubic,       // qdot = a (q - c0)(q + c0) q
    LinearLL,    // qdot = a q + q b
    LinearLConj, // qdot = a q + conj(q) b
    LinearConjL, // qdot = a q + b conj(q)
    AffineL,     // qdot = b + a q
    AffineR,     // qdot = b + q a
};

inline const char* family_name(Family f) {
    switch (f) {
        case Family::Homogeneous: return "homogeneous";
        case Family::Bernoulli: return "bernoulli";
        case Family::Cubic: return "cubic";
        case Family::LinearLL: return "linear_ll";
        case Family::LinearLConj: return "linear_lconj";
        case Family::LinearConjL: return "linear_conjl";
        case Family::AffineL: return "affine_l";
        case Family::AffineR: return "affine_r";
    }
    return "?";
}

inline Family family_from_name(const std::string& s) {
    for (Family f : {Family::Homogeneous, Family::Bernoulli, Family::Cubic, Family::LinearLL,
                     Family::LinearLConj, Family::LinearConjL, Family::AffineL, Family::AffineR})
        if (s == family_name(f)) return f;
    throw ConfigError("unknown family: " + s);
}

inline bool is_linear_family(Family f) {
    return f == Family::LinearLL || f == Family::LinearLConj || f == Family::LinearConjL;
}
inline bool is_affine_family(Family f) { return f == Family::AffineL || f == Family::AffineR; }

/// Parameter-regime flags, exact component tests with eps = 1e-14 on the
/// normalized parameters. The theorem analyses branch on these.
struct Regime {
    bool a_real = false;      // a - conj(a) = 0
    bool a_imaginary = false; // a + conj(a) = 0
    bool c_real = false;
    bool c_imaginary = false; // c + conj(c) = 0

    std::string label() const {
        std::string s;
        s += a_real ? "a_real" : (a_imaginary ? "a_imaginary" : "a_generic");
        s += c_real ? ",c_real" : (c_imaginary ? ",c_imaginary" : ",c_generic");
        return s;
    }
};

inline constexpr double kRegimeEps = 1e-14;

/// One equation family plus parameters. Immutable in spirit: construct via
/// make() so the invariants are checked once up front.
struct FieldSpec {
    Family family = Family::Bernoulli;
    Quaternion a{1, 0, 0, 0};
    Quaternion b{};      // linear / affine families
    Quaternion c{};      // Bernoulli
    double c0 = 0.0;     // Cubic
    int n = 2;           // Homogeneous / Bernoulli

    static FieldSpec make(Family family, Quaternion a, Quaternion b = {}, Quaternion c = {},
                          double c0 = 0.0, int n = 2) {
        FieldSpec s;
        s.family = family;
        s.a = a;
        s.b = b;
        s.c = c;
        s.c0 = c0;
        s.n = n;
        s.validate();
        return s;
    }

    static FieldSpec bernoulli(Quaternion a, Quaternion c, int n) {
        return make(Family::Bernoulli, a, {}, c, 0.0, n);
    }
    static FieldSpec cubic(Quaternion a, double c0) {
        return make(Family::Cubic, a, {}, {}, c0);
    }
    static FieldSpec homogeneous(Quaternion a, int n) {
        return make(Family::Homogeneous, a, {}, {}, 0.0, n);
    }
    static FieldSpec linear(Family f, Quaternion a, Quaternion b) { return make(f, a, b); }
    static FieldSpec affine(Family f, Quaternion a, Quaternion b) { return make(f, a, b); }

    void validate() const {
        switch (family) {
            case Family::Homogeneous:
            case Family::Bernoulli:
                if (is_zero(a)) throw ConfigError("a must be nonzero");
                if (n < 2) throw ConfigError("n must be >= 2");
                if (n > 20) throw ConfigError("n too large (max 20)");
                if (family == Family::Bernoulli && is_zero(c))
                    throw ConfigError("bernoulli requires c != 0 (else homogeneous)");
                break;
            case Family::Cubic:
                if (is_zero(a)) throw ConfigError("a must be nonzero");
                if (!(c0 > 0.0)) throw ConfigError("cubic requires c0 > 0");
                break;
            case Family::LinearLL:
                // affine reduction of qdot = b + q a lands on (0, a)
                if (is_zero(a) && is_zero(b)) throw ConfigError("linear spec with a = b = 0");
                break;
            case Family::LinearLConj:
            case Family::LinearConjL:
                if (is_zero(a)) throw ConfigError("a must be nonzero");
                break;
            case Family::AffineL:
            case Family::AffineR:
                if (is_zero(a)) throw ConfigError("a must be nonzero");
                break;
        }
    }

    Regime regime() const {
        Regime r;
        r.a_real = std::sqrt(imag_norm_sq(a)) <= kRegimeEps;
        r.a_imaginary = std::abs(a.q0) <= kRegimeEps;
        r.c_real = std::sqrt(imag_norm_sq(c)) <= kRegimeEps;
        r.c_imaginary = std::abs(c.q0) <= kRegimeEps;
        return r;
    }

    /// Real c0 of a Bernoulli spec with c real (singularity radius etc.).
    double bernoulli_c0() const {
        if (family != Family::Bernoulli) throw WrongFamilyError("bernoulli_c0: not Bernoulli");
        if (!regime().c_real) throw WrongRegimeError("bernoulli_c0: c is not real");
        return c.q0;
    }
};

/// Similarity frame of a spec: conjugating q -> c q c^-1 maps solutions of the
/// spec to solutions of `normalized`, whose non-real parameter points along i.
/// For Bernoulli: a is normalized when c is real, c is normalized when a is
/// real; if both a and c are non-real no normalization is attempted and
/// `frame` is the identity.
struct NormalizedSpec {
    FieldSpec normalized;
    Quaternion frame{1, 0, 0, 0}; // unit c of the similarity
    bool changed = false;
};

inline NormalizedSpec normalize_spec(const FieldSpec& spec) {
    NormalizedSpec out{spec, kOne, false};
    const Regime r = spec.regime();
    auto apply = [&](const Quaternion& target) {
        const auto f = similarity_normalize(target);
        out.frame = f.c;
        out.changed = true;
        FieldSpec s = spec;
        s.a = conjugate_by(f.c, spec.a);
        if (!is_zero(spec.b)) s.b = conjugate_by(f.c, spec.b);
        if (!is_zero(spec.c)) s.c = conjugate_by(f.c, spec.c);
        // snap the rotated axis exactly onto i
        auto snap = [](Quaternion& q) {
            if (std::abs(q.q2) < 1e-13 && std::abs(q.q3) < 1e-13) q.q2 = q.q3 = 0.0;
        };
        snap(s.a);
        snap(s.b);
        snap(s.c);
        out.normalized = s;
    };
    switch (spec.family) {
        case Family::Homogeneous:
        case Family::Cubic:
            if (!r.a_real) apply(spec.a);
            break;
        case Family::Bernoulli:
            if (r.c_real && !r.a_real) apply(spec.a);
            else if (r.a_real && !r.c_real) apply(spec.c);
            break;
        default:
            break; // linear/affine specs are used as-is
    }
    return out;
}

// ---------------------------------------------------------------------------
// field evaluation (quaternion-arithmetic route)
// ---------------------------------------------------------------------------

inline Quaternion eval_field_quat(const FieldSpec& s, const Quaternion& q) {
    switch (s.family) {
        case Family::Homogeneous: return mul(s.a, pow(q, s.n));
        case Family::Bernoulli: return mul(s.a, mul(s.c, q) - pow(q, s.n));
        case Family::Cubic: {
            const Quaternion c0q{s.c0};
            return mul(s.a, mul(mul(q - c0q, q + c0q), q));
        }
        case Family::LinearLL: return mul(s.a, q) + mul(q, s.b);
        case Family::LinearLConj: return mul(s.a, q) + mul(conj(q), s.b);
        case Family::LinearConjL: return mul(s.a, q) + mul(s.b, conj(q));
        case Family::AffineL: return s.b + mul(s.a, q);
        case Family::AffineR: return s.b + mul(q, s.a);
    }
    throw WrongFamilyError("eval_field: bad family");
}

inline TangentVector eval_field(const FieldSpec& s, const Quaternion& q) {
    return to_vec(eval_field_quat(s, q));
}

/// Debug route: the component systems written out for the normalized frames.
/// Requires the spec to be in the frame the component form assumes
/// (a = a0 + a1 i, c real for Bernoulli; a real and c = c0 + c1 i for the
/// complex-c Bernoulli; a = a0 + a1 i for the cubic).
inline TangentVector eval_field_components(const FieldSpec& s, const Quaternion& q) {
    const double rho23 = q.q2 * q.q2 + q.q3 * q.q3;
    const double d2 = q.q1 * q.q1 + rho23;
    if (s.family == Family::Bernoulli && s.regime().c_real) {
        if (std::abs(s.a.q2) > kRegimeEps || std::abs(s.a.q3) > kRegimeEps)
            throw WrongRegimeError("component form needs a = a0 + a1 i");
        const double a0 = s.a.q0, a1 = s.a.q1, c0 = s.c.q0;
        const auto pn = binomial_expand(q.q0, d2, s.n);
        const double X = c0 * q.q0 - pn.scalar;  // c0 q0 - (q^n+conj^n)/2
        const double Y = c0 - pn.vector_coeff;   // c0 - (q^n-conj^n)/(q-conj q)
        return {a0 * X - a1 * Y * q.q1, a0 * Y * q.q1 + a1 * X,
                (a0 * q.q2 - a1 * q.q3) * Y, (a1 * q.q2 + a0 * q.q3) * Y};
    }
    if (s.family == Family::Bernoulli && s.n == 2 && s.regime().a_real) {
        if (std::abs(s.c.q2) > kRegimeEps || std::abs(s.c.q3) > kRegimeEps)
            throw WrongRegimeError("component form needs c = c0 + c1 i");
        const double a0 = s.a.q0, c0 = s.c.q0, c1 = s.c.q1;
        return {a0 * (c0 * q.q0 - c1 * q.q1 - q.q0 * q.q0 + q.q1 * q.q1 + rho23),
                a0 * (c1 * q.q0 + (c0 - 2 * q.q0) * q.q1),
                a0 * ((c0 - 2 * q.q0) * q.q2 - c1 * q.q3),
                a0 * (c1 * q.q2 + (c0 - 2 * q.q0) * q.q3)};
    }
    if (s.family == Family::Cubic) {
        if (std::abs(s.a.q2) > kRegimeEps || std::abs(s.a.q3) > kRegimeEps)
            throw WrongRegimeError("component form needs a = a0 + a1 i");
        const double a0 = s.a.q0, a1 = s.a.q1;
        const double A = s.c0 * s.c0 - 3 * q.q0 * q.q0 + d2;
        const double B = s.c0 * s.c0 - q.q0 * q.q0 + 3 * d2;
        return {a1 * q.q1 * A - a0 * q.q0 * B, -a0 * q.q1 * A - a1 * q.q0 * B,
                -(a0 * q.q2 - a1 * q.q3) * A, -(a1 * q.q2 + a0 * q.q3) * A};
    }
    throw WrongRegimeError("no component form for this spec");
}

// ---------------------------------------------------------------------------
// linear machinery
// ---------------------------------------------------------------------------

/// 4x4 real matrix M with eval_field(spec, q) = M q, built column-by-column
/// on the basis quaternions (exact by construction).
inline Mat4 component_matrix_linear(const FieldSpec& s) {
    if (!is_linear_family(s.family))
        throw WrongFamilyError("component_matrix_linear: not a linear family");
    Mat4 m{};
    const Quaternion basis[4] = {kOne, kI, kJ, kK};
    for (int col = 0; col < 4; ++col) {
        const Vec4 v = eval_field(s, basis[col]);
        for (int row = 0; row < 4; ++row) m[row][col] = v[row];
    }
    return m;
}

/// Translate an affine equation to its homogeneous linear part:
/// qdot = b + a q  -(p = q + a^-1 b)->  pdot = a p        (LinearLL(a, 0))
/// qdot = b + q a  -(p = q + b a^-1)->  pdot = p a        (LinearLL(0, a))
inline std::pair<FieldSpec, Quaternion> affine_reduce(const FieldSpec& s) {
    if (!is_affine_family(s.family)) throw WrongFamilyError("affine_reduce: not affine");
    if (is_zero(s.a)) throw DomainError("affine_reduce: a = 0");
    if (s.family == Family::AffineL) {
        const Quaternion shift = mul(inverse(s.a), s.b);
        return {FieldSpec::linear(Family::LinearLL, s.a, Quaternion{}), shift};
    }
    const Quaternion shift = mul(s.b, inverse(s.a));
    return {FieldSpec::linear(Family::LinearLL, Quaternion{}, s.a), shift};
}

// ---------------------------------------------------------------------------
// JSON (the CLI / config wire format)
// {"family": string, "a":[4], "b":[4]?, "c":[4]?, "c0": real?, "n": int?}
// ---------------------------------------------------------------------------

inline nlohmann::json quat_to_json(const Quaternion& q) {
    return nlohmann::json::array({q.q0, q.q1, q.q2, q.q3});
}

inline Quaternion quat_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 4) throw ConfigError("quaternion must be [4 reals]");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

inline nlohmann::json spec_to_json(const FieldSpec& s) {
    nlohmann::json j;
    j["family"] = family_name(s.family);
    j["a"] = quat_to_json(s.a);
    if (is_linear_family(s.family) || is_affine_family(s.family)) j["b"] = quat_to_json(s.b);
    if (s.family == Family::Bernoulli) j["c"] = quat_to_json(s.c);
    if (s.family == Family::Cubic) j["c0"] = s.c0;
    if (s.family == Family::Homogeneous || s.family == Family::Bernoulli) j["n"] = s.n;
    return j;
}

inline FieldSpec spec_from_json(const nlohmann::json& j) {
    try {
        FieldSpec s;
        s.family = family_from_name(j.at("family").get<std::string>());
        s.a = quat_from_json(j.at("a"));
        if (j.contains("b")) s.b = quat_from_json(j["b"]);
        if (j.contains("c")) s.c = quat_from_json(j["c"]);
        if (j.contains("c0")) s.c0 = j["c0"].get<double>();
        if (j.contains("n")) s.n = j["n"].get<int>();
        s.validate();
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad field spec: ") + e.what());
    }
}

} // namespace quatdyn
