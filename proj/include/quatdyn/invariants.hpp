#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "quatdyn/errors.hpp"
#include "quatdyn/fields.hpp"

namespace quatdyn {

/// Named scalar functions attached to the equation families: first integrals
/// in their conserving regimes, or functions whose time derivative has a known
/// closed form.
enum class IntegralName { H2, H3, Hn, S, F_cyl, H_e51, F_e50b, L_plane, H_e417, L_hyp };

inline const char* integral_name(IntegralName n) {
    switch (n) {
        case IntegralName::H2: return "H2";
        case IntegralName::H3: return "H3";
        case IntegralName::Hn: return "Hn";
        case IntegralName::S: return "S";
        case IntegralName::F_cyl: return "F_cyl";
        case IntegralName::H_e51: return "H_e51";
        case IntegralName::F_e50b: return "F_e50b";
        case IntegralName::L_plane: return "L_plane";
        case IntegralName::H_e417: return "H_e417";
        case IntegralName::L_hyp: return "L_hyp";
    }
    return "?";
}

inline IntegralName integral_from_name(const std::string& s) {
    for (IntegralName n :
         {IntegralName::H2, IntegralName::H3, IntegralName::Hn, IntegralName::S,
          IntegralName::F_cyl, IntegralName::H_e51, IntegralName::F_e50b, IntegralName::L_plane,
          IntegralName::H_e417, IntegralName::L_hyp})
        if (s == integral_name(n)) return n;
    throw ConfigError("unknown integral name: " + s);
}

enum class Conservation { Conserved, Identity };

inline constexpr double kSingularGuard = 1e-12;

/// Evaluator + closed-form gradient for one named integral, bound to the
/// parameters of the FieldSpec it was created from. Creation validates the
/// family/regime and requires the spec to be in the normalized frame
/// (non-real parameter pointing along i).
class IntegralDescriptor {
public:
    IntegralName name;
    Conservation tag = Conservation::Identity;
    int n = 2;        // Bernoulli power
    double c0 = 0.0;  // real part of c (Bernoulli) or the cubic constant
    double c1 = 0.0;  // i-part of c (complex-c Bernoulli)

    double eval(const Quaternion& q) const {
        const double rho = norm_sq(q);
        switch (name) {
            case IntegralName::H2: return q.q2 / guard(q.q1);
            case IntegralName::H3: return q.q3 / guard(q.q1);
            case IntegralName::Hn: return std::pow(rho, n - 1) / guard(S_val(q));
            case IntegralName::S: return S_val(q);
            case IntegralName::F_cyl: return q.q2 * q.q2 + q.q3 * q.q3;
            case IntegralName::H_e51: return rho / guard(e51_den(q));
            case IntegralName::F_e50b: return rho * rho / guard(e50b_den(q));
            case IntegralName::L_plane:
                return c0 * q.q0 + c1 * q.q1 - (c0 * c0 + c1 * c1) / 2;
            case IntegralName::H_e417: return rho * rho / guard(L_val(q));
            case IntegralName::L_hyp: return L_val(q);
        }
        throw Error("unreachable");
    }

    Vec4 gradient(const Quaternion& q) const {
        const double rho = norm_sq(q);
        switch (name) {
            case IntegralName::H2: {
                const double d = guard(q.q1);
                return {0, -q.q2 / (d * d), 1 / d, 0};
            }
            case IntegralName::H3: {
                const double d = guard(q.q1);
                return {0, -q.q3 / (d * d), 0, 1 / d};
            }
            case IntegralName::Hn: {
                const double S = guard(S_val(q));
                const auto pn = binomial_expand(q, n);
                const double pref = 2 * (n - 1) * std::pow(rho, n - 2) / (S * S);
                return {pref * (pn.scalar - c0 * q.q0), pref * (pn.vector_coeff - c0) * q.q1,
                        pref * (pn.vector_coeff - c0) * q.q2, pref * (pn.vector_coeff - c0) * q.q3};
            }
            case IntegralName::S: {
                const auto pm = binomial_expand(q, n - 2);
                const double k = 2.0 * (n - 1);
                return {k * pm.scalar, -k * pm.vector_coeff * q.q1, -k * pm.vector_coeff * q.q2,
                        -k * pm.vector_coeff * q.q3};
            }
            case IntegralName::F_cyl: return {0, 0, 2 * q.q2, 2 * q.q3};
            case IntegralName::H_e51: {
                const double D = guard(e51_den(q));
                return {(2 * q.q0 * D - rho * 2 * c0) / (D * D),
                        (2 * q.q1 * D - rho * 2 * c1) / (D * D), 2 * q.q2 / D, 2 * q.q3 / D};
            }
            case IntegralName::F_e50b: {
                const double D = guard(e50b_den(q));
                const double p = 4 * rho / D; // d(rho^2)/dq / D
                const double r2 = rho * rho / (D * D);
                return {p * q.q0, p * q.q1 - r2 * 4 * (2 * q.q1 - c1), p * q.q2 - r2 * 8 * q.q2,
                        p * q.q3 - r2 * 8 * q.q3};
            }
            case IntegralName::L_plane: return {c0, c1, 0, 0};
            case IntegralName::H_e417: {
                const double L = guard(L_val(q));
                const double a = 4 * rho / L, b = rho * rho / (L * L) * 2;
                return {a * q.q0 - b * q.q0, a * q.q1 + b * q.q1, a * q.q2 + b * q.q2,
                        a * q.q3 + b * q.q3};
            }
            case IntegralName::L_hyp: return {2 * q.q0, -2 * q.q1, -2 * q.q2, -2 * q.q3};
        }
        throw Error("unreachable");
    }

    /// denominator magnitude (singular locus proximity); +inf when polynomial
    double denominator(const Quaternion& q) const {
        switch (name) {
            case IntegralName::H2:
            case IntegralName::H3: return std::fabs(q.q1);
            case IntegralName::Hn: return std::fabs(S_val(q));
            case IntegralName::H_e51: return std::fabs(e51_den(q));
            case IntegralName::F_e50b: return std::fabs(e50b_den(q));
            case IntegralName::H_e417: return std::fabs(L_val(q));
            default: return std::numeric_limits<double>::infinity();
        }
    }

    // pieces shared with the structure module
    double S_val(const Quaternion& q) const { return 2 * binomial_expand(q, n - 1).scalar - c0; }
    double L_val(const Quaternion& q) const {
        return q.q0 * q.q0 - q.q1 * q.q1 - q.q2 * q.q2 - q.q3 * q.q3 - c0 * c0 / 2;
    }
    double e51_den(const Quaternion& q) const {
        return 2 * c0 * q.q0 + 2 * c1 * q.q1 - (c0 * c0 + c1 * c1);
    }
    double e50b_den(const Quaternion& q) const {
        const double t = 2 * q.q1 - c1;
        return t * t + 4 * q.q2 * q.q2 + 4 * q.q3 * q.q3;
    }

private:
    double guard(double d) const {
        if (std::fabs(d) < kSingularGuard)
            throw SingularLocusError(std::string(integral_name(name)) +
                                     ": denominator inside the singular guard");
        return d;
    }
};

namespace detail {
inline void require_axis_frame(const Quaternion& x, const char* what) {
    if (std::fabs(x.q2) > kRegimeEps || std::fabs(x.q3) > kRegimeEps)
        throw WrongRegimeError(std::string(what) + " must be in the normalized frame (along i)");
}
} // namespace detail

inline IntegralDescriptor make_descriptor(IntegralName name, const FieldSpec& spec) {
    const Regime r = spec.regime();
    IntegralDescriptor d;
    d.name = name;
    auto need_bernoulli_c_real = [&] {
        if (spec.family != Family::Bernoulli) throw WrongFamilyError("descriptor needs Bernoulli");
        if (!r.c_real) throw WrongRegimeError("descriptor needs real c");
        detail::require_axis_frame(spec.a, "a");
        d.n = spec.n;
        d.c0 = spec.c.q0;
    };
    auto need_bernoulli_c_complex = [&] {
        if (spec.family != Family::Bernoulli || spec.n != 2)
            throw WrongFamilyError("descriptor needs Bernoulli with n = 2");
        if (!r.a_real) throw WrongRegimeError("descriptor needs real a");
        if (r.c_real) throw WrongRegimeError("descriptor needs non-real c");
        detail::require_axis_frame(spec.c, "c");
        d.n = 2;
        d.c0 = spec.c.q0;
        d.c1 = spec.c.q1;
    };
    auto need_cubic = [&] {
        if (spec.family != Family::Cubic) throw WrongFamilyError("descriptor needs Cubic");
        detail::require_axis_frame(spec.a, "a");
        d.c0 = spec.c0;
    };
    switch (name) {
        case IntegralName::H2:
        case IntegralName::H3:
            need_bernoulli_c_real();
            if (!r.a_real) throw WrongRegimeError("H2/H3 need real a");
            d.tag = Conservation::Conserved;
            break;
        case IntegralName::Hn:
            need_bernoulli_c_real();
            d.tag = r.a_imaginary ? Conservation::Conserved : Conservation::Identity;
            break;
        case IntegralName::S:
            need_bernoulli_c_real();
            d.tag = Conservation::Identity;
            break;
        case IntegralName::F_cyl:
            if (spec.family == Family::Cubic) need_cubic();
            else need_bernoulli_c_real();
            d.tag = r.a_imaginary ? Conservation::Conserved : Conservation::Identity;
            break;
        case IntegralName::H_e51:
            need_bernoulli_c_complex();
            d.tag = r.c_imaginary ? Conservation::Conserved : Conservation::Identity;
            break;
        case IntegralName::F_e50b:
            need_bernoulli_c_complex();
            if (!r.c_imaginary) throw WrongRegimeError("F_e50b needs c + conj(c) = 0");
            d.tag = Conservation::Conserved;
            break;
        case IntegralName::L_plane:
            need_bernoulli_c_complex();
            d.tag = Conservation::Identity;
            break;
        case IntegralName::H_e417:
            need_cubic();
            d.tag = r.a_imaginary ? Conservation::Conserved : Conservation::Identity;
            break;
        case IntegralName::L_hyp:
            need_cubic();
            d.tag = Conservation::Identity;
            break;
    }
    return d;
}

inline double eval_integral(const IntegralDescriptor& d, const Quaternion& q) {
    return d.eval(q);
}

/// d/dt of the descriptor along the field: grad . f(q).
inline double lie_derivative(const IntegralDescriptor& d, const FieldSpec& spec,
                             const Quaternion& q) {
    const Vec4 g = d.gradient(q);
    const Vec4 f = eval_field(spec, q);
    return g[0] * f[0] + g[1] * f[1] + g[2] * f[2] + g[3] * f[3];
}

/// The closed form the paper gives for d/dt of the descriptor (0 for
/// conserved ones). For L_hyp and L_plane the closed form is the general
/// polynomial; restricted to {L = 0} it collapses to the displayed identity.
inline double lie_closed_form(const IntegralDescriptor& d, const FieldSpec& spec,
                              const Quaternion& q) {
    const Regime r = spec.regime();
    const double a0 = spec.a.q0;
    const double rho = norm_sq(q);
    switch (d.name) {
        case IntegralName::H2:
        case IntegralName::H3: return 0.0;
        case IntegralName::Hn: {
            const double H = d.eval(q);
            return (d.n - 1) * (2 * a0) * (d.c0 - H) * H;
        }
        case IntegralName::S: {
            const Quaternion p = pow(q, d.n - 1);
            const Quaternion x = mul(spec.a, mul(p, Quaternion{d.c0} - p));
            return (d.n - 1) * 2 * x.q0;
        }
        case IntegralName::F_cyl: {
            const double F = d.eval(q);
            if (spec.family == Family::Cubic) {
                const double A =
                    d.c0 * d.c0 - 3 * q.q0 * q.q0 + q.q1 * q.q1 + q.q2 * q.q2 + q.q3 * q.q3;
                return -2 * a0 * A * F;
            }
            return 2 * a0 * (d.c0 - power_vector_coeff(q, d.n)) * F;
        }
        case IntegralName::H_e51: {
            if (r.c_imaginary) return 0.0;
            const double D = d.e51_den(q);
            const double B = (q.q0 - d.c0) * (q.q0 - d.c0) + (q.q1 - d.c1) * (q.q1 - d.c1) +
                             q.q2 * q.q2 + q.q3 * q.q3;
            return a0 * (-2 * d.c0 * rho * B) / (D * D);
        }
        case IntegralName::F_e50b: return 0.0;
        case IntegralName::L_plane: {
            const double k0 = d.c0 * d.c0 + d.c1 * d.c1;
            return a0 * (k0 * q.q0 - d.c0 * q.q0 * q.q0 + d.c0 * q.q1 * q.q1 -
                         2 * d.c1 * q.q0 * q.q1 + d.c0 * (q.q2 * q.q2 + q.q3 * q.q3));
        }
        case IntegralName::H_e417: {
            if (r.a_imaginary) return 0.0;
            const double qd = q.q0 * q.q0 - q.q1 * q.q1 - q.q2 * q.q2 - q.q3 * q.q3;
            const double N = std::pow(d.c0, 4) - 2 * d.c0 * d.c0 * qd + rho * rho;
            const double den = d.c0 * d.c0 - 2 * qd;
            return 8 * a0 * N * rho * rho / (den * den);
        }
        case IntegralName::L_hyp: {
            const double a1 = spec.a.q1;
            const double d2 = q.q1 * q.q1 + q.q2 * q.q2 + q.q3 * q.q3;
            const double A = d.c0 * d.c0 - 3 * q.q0 * q.q0 + d2;
            const double B = d.c0 * d.c0 - q.q0 * q.q0 + 3 * d2;
            return 2 * a1 * q.q0 * q.q1 * (A + B) + 2 * a0 * (d2 * A - q.q0 * q.q0 * B);
        }
    }
    throw Error("unreachable");
}

// ---------------------------------------------------------------------------
// Darboux hyperplanes (real-a Bernoulli): q1, q2, q3 share the cofactor
// a0 (c0 - (q^n - conj q^n)/(q - conj q)).
// ---------------------------------------------------------------------------

inline double cofactor_residual(int axis, const FieldSpec& spec, const Quaternion& q) {
    if (axis < 1 || axis > 3) throw DomainError("cofactor_residual: axis must be 1, 2 or 3");
    if (spec.family != Family::Bernoulli) throw WrongFamilyError("cofactor: needs Bernoulli");
    const Regime r = spec.regime();
    if (!r.a_real || !r.c_real) throw WrongRegimeError("cofactor: needs real a and real c");
    const double K = spec.a.q0 * (spec.c.q0 - power_vector_coeff(q, spec.n));
    const Vec4 f = eval_field(spec, q);
    return f[axis] - K * q[axis];
}

// ---------------------------------------------------------------------------
// Poisson structure of the c-real Bernoulli system
// ---------------------------------------------------------------------------

/// M(q) = S^2 / (2 (n-1) (q conj q)^{n-2}) * J with J the block rotation
/// matrix; antisymmetric by construction.
inline Mat4 poisson_matrix(int n, double c0, const Quaternion& q) {
    const double rho = norm_sq(q);
    const double S = 2 * binomial_expand(q, n - 1).scalar - c0;
    const double rp = std::pow(rho, n - 2);
    if (n > 2 && std::fabs(rp) < kSingularGuard)
        throw SingularLocusError("poisson_matrix: q conj q ~ 0");
    const double pref = S * S / (2 * (n - 1) * rp);
    Mat4 m{};
    m[0][1] = -pref;
    m[1][0] = pref;
    m[2][3] = -pref;
    m[3][2] = pref;
    return m;
}

/// {f, g}(q) = grad f . M(q) grad g. Both descriptors must carry the same
/// (n, c0) context.
inline double poisson_bracket(const IntegralDescriptor& f, const IntegralDescriptor& g,
                              const Quaternion& q) {
    if (f.n != g.n || f.c0 != g.c0)
        throw WrongRegimeError("poisson_bracket: descriptors from different contexts");
    if (std::fabs(f.S_val(q)) < kSingularGuard)
        throw SingularLocusError("poisson_bracket: on the singular surface S = 0");
    const double pref = poisson_matrix(f.n, f.c0, q)[1][0];
    const Vec4 gf = f.gradient(q), gg = g.gradient(q);
    // block form of grad f . M grad g; {f, f} cancels exactly
    return pref * ((gf[1] * gg[0] - gf[0] * gg[1]) + (gf[3] * gg[2] - gf[2] * gg[3]));
}

// ---------------------------------------------------------------------------
// critical sets of the (H, F) pairs
// ---------------------------------------------------------------------------

struct CriticalSet {
    std::string name;
    std::function<double(const Quaternion&)> residual; // 0 on the set
    std::function<bool(const Quaternion&)> contains;
};

inline std::vector<CriticalSet> critical_sets(const FieldSpec& spec, double tol = 1e-10) {
    const Regime r = spec.regime();
    std::vector<CriticalSet> out;
    auto add = [&](std::string name, std::function<double(const Quaternion&)> res) {
        auto contains = [res, tol](const Quaternion& q) { return std::fabs(res(q)) <= tol; };
        out.push_back({std::move(name), std::move(res), std::move(contains)});
    };
    if (spec.family == Family::Bernoulli && r.c_real && r.a_imaginary) {
        const int n = spec.n;
        const double c0 = spec.c.q0;
        add("S1", [](const Quaternion& q) { return std::hypot(q.q2, q.q3); });
        add("S2", [n, c0](const Quaternion& q) {
            const auto p = binomial_expand(q, n);
            return std::hypot(p.scalar - c0 * q.q0, p.vector_coeff - c0);
        });
        add("S3", [n, c0](const Quaternion& q) {
            const auto p = binomial_expand(q, n);
            return std::hypot(p.scalar - c0 * q.q0, q.q1);
        });
        return out;
    }
    if (spec.family == Family::Bernoulli && spec.n == 2 && r.a_real && r.c_imaginary) {
        const double c1 = spec.c.q1;
        add("plane_q2q3", [](const Quaternion& q) { return std::hypot(q.q2, q.q3); });
        add("sphere", [c1](const Quaternion& q) {
            return std::hypot(q.q0,
                              -c1 * q.q1 + q.q1 * q.q1 + q.q2 * q.q2 + q.q3 * q.q3);
        });
        return out;
    }
    if (spec.family == Family::Cubic) {
        const double c0 = spec.c0;
        auto L = [c0](const Quaternion& q) {
            return q.q0 * q.q0 - q.q1 * q.q1 - q.q2 * q.q2 - q.q3 * q.q3 - c0 * c0 / 2;
        };
        out.push_back({"L_plus", L, [L, c0, tol](const Quaternion& q) {
                           return std::fabs(L(q)) <= tol && q.q0 >= c0 / std::sqrt(2.0) - tol;
                       }});
        out.push_back({"L_minus", L, [L, c0, tol](const Quaternion& q) {
                           return std::fabs(L(q)) <= tol && q.q0 <= -c0 / std::sqrt(2.0) + tol;
                       }});
        return out;
    }
    throw WrongRegimeError("critical_sets: no theorem case matches this spec");
}

} // namespace quatdyn
