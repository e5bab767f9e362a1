#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "quatdyn/errors.hpp"
#include "quatdyn/fields.hpp"

namespace quatdyn {

template <std::size_t N>
using VecN = std::array<double, N>;

namespace detail {

template <std::size_t N>
VecN<N> axpy(const VecN<N>& y, double h, const VecN<N>& k) {
    VecN<N> r;
    for (std::size_t i = 0; i < N; ++i) r[i] = y[i] + h * k[i];
    return r;
}

// Dormand-Prince 5(4) tableau.
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                        a75 = -2187.0 / 6784, a76 = 11.0 / 84;
// 4th-order embedded error weights (b5 - b4)
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// dense-output weights
inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

} // namespace detail

enum class IntegrationStatus {
    ReachedEnd,
    EventTerminated,
    Escaped,          // |y| exceeded the escape radius
    StepCountExceeded,
    StepSizeUnderflow,
    NonFiniteRHS,
};

inline const char* status_name(IntegrationStatus s) {
    switch (s) {
        case IntegrationStatus::ReachedEnd: return "REACHED_END";
        case IntegrationStatus::EventTerminated: return "EVENT";
        case IntegrationStatus::Escaped: return "ESCAPE";
        case IntegrationStatus::StepCountExceeded: return "STEP_CAP";
        case IntegrationStatus::StepSizeUnderflow: return "STEP_UNDERFLOW";
        case IntegrationStatus::NonFiniteRHS: return "NONFINITE_RHS";
    }
    return "?";
}

/// Scalar event surface g(t, y) = 0 watched during integration.
/// direction: +1 detects - -> +, -1 detects + -> -, 0 both.
template <std::size_t N>
struct EventSpec {
    std::string name;
    std::function<double(double, const VecN<N>&)> g;
    int direction = 0;
    bool terminal = false;
};

struct IntegrationOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    long max_steps = 10'000'000;
    double escape_radius = 1e8;
    double initial_step = 0.0; // 0 -> automatic
    bool store_dense = true;
};

template <std::size_t N>
struct Trajectory {
    struct DenseSegment {
        double t0 = 0, h = 0;
        std::array<VecN<N>, 5> r; // contd5 coefficients
    };
    struct Event {
        double t = 0;
        std::string name;
        VecN<N> y{};
        bool terminal = false;
    };

    std::vector<double> t;
    std::vector<VecN<N>> y;
    std::vector<DenseSegment> segments;
    std::vector<Event> events;
    IntegrationStatus status = IntegrationStatus::ReachedEnd;
    double rtol = 0, atol = 0;
    long n_accepted = 0, n_rejected = 0, n_rhs = 0;

    bool ok() const {
        return status == IntegrationStatus::ReachedEnd ||
               status == IntegrationStatus::EventTerminated ||
               status == IntegrationStatus::Escaped;
    }
    double t_begin() const { return t.front(); }
    double t_end() const { return t.back(); }
    const VecN<N>& y_end() const { return y.back(); }

    /// Dense-output evaluation; t_query must lie within the covered span.
    VecN<N> eval(double t_query) const {
        if (segments.empty()) {
            if (t_query == t.front()) return y.front();
            throw DomainError("trajectory has no dense segments");
        }
        // binary search for the last segment starting at or before t_query
        std::size_t lo = 0, hi = segments.size() - 1;
        const bool fwd = segments.front().h > 0;
        while (lo < hi) {
            const std::size_t mid = (lo + hi + 1) / 2;
            if (fwd ? (segments[mid].t0 <= t_query) : (segments[mid].t0 >= t_query)) lo = mid;
            else hi = mid - 1;
        }
        const DenseSegment& s = segments[lo];
        const double th = (t_query - s.t0) / s.h;
        const double th1 = 1.0 - th;
        VecN<N> out;
        for (std::size_t i = 0; i < N; ++i)
            out[i] = s.r[0][i] +
                     th * (s.r[1][i] + th1 * (s.r[2][i] + th * (s.r[3][i] + th1 * s.r[4][i])));
        return out;
    }
};

namespace detail {

template <std::size_t N>
double norm_inf(const VecN<N>& v) {
    double m = 0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}
template <std::size_t N>
double norm2(const VecN<N>& v) {
    double s = 0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}
template <std::size_t N>
bool finite(const VecN<N>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

// standard starting-step heuristic
template <std::size_t N, class F>
double initial_step_guess(F& f, double t0, const VecN<N>& y0, const VecN<N>& f0, double dir,
                          double rtol, double atol) {
    double dn0 = 0, dn1 = 0;
    for (std::size_t i = 0; i < N; ++i) {
        const double sk = atol + rtol * std::fabs(y0[i]);
        dn0 += (y0[i] / sk) * (y0[i] / sk);
        dn1 += (f0[i] / sk) * (f0[i] / sk);
    }
    double h0 = (dn0 < 1e-10 || dn1 < 1e-10) ? 1e-6 : 0.01 * std::sqrt(dn0 / dn1);
    h0 *= dir;
    const VecN<N> y1 = axpy(y0, h0, f0);
    const VecN<N> f1 = f(t0 + h0, y1);
    double der2 = 0;
    for (std::size_t i = 0; i < N; ++i) {
        const double sk = atol + rtol * std::fabs(y0[i]);
        const double d = (f1[i] - f0[i]) / sk;
        der2 += d * d;
    }
    der2 = std::sqrt(der2) / std::fabs(h0);
    const double der12 = std::max(der2, std::sqrt(dn1));
    const double h1 = (der12 <= 1e-15) ? std::max(1e-6, std::fabs(h0) * 1e-3)
                                       : std::pow(0.01 / der12, 0.2);
    return dir * std::min({100 * std::fabs(h0), h1, 1e3});
}

} // namespace detail

/// Adaptive Dormand-Prince 5(4) with PI step control, 4th-order dense output
/// and event location by bisection on the interpolant. Backward integration is
/// requested with t1 < t0. Never throws on numerical trouble; the returned
/// trajectory carries the status and the last good state.
template <std::size_t N, class F>
Trajectory<N> integrate_ode(F&& f, VecN<N> y0, double t0, double t1,
                            const IntegrationOptions& opt = {},
                            const std::vector<EventSpec<N>>& events = {}) {
    using namespace detail;
    if (!(opt.rtol > 0) || !(opt.atol > 0)) throw DomainError("integrate: tolerances must be > 0");
    if (t0 == t1) throw DomainError("integrate: degenerate t_span");
    if (!finite(y0)) throw DomainError("integrate: non-finite initial state");

    Trajectory<N> traj;
    traj.rtol = opt.rtol;
    traj.atol = opt.atol;
    auto rhs = [&](double t, const VecN<N>& y) {
        ++traj.n_rhs;
        return f(t, y);
    };

    const double dir = (t1 > t0) ? 1.0 : -1.0;
    VecN<N> y = y0;
    double t = t0;
    VecN<N> k1 = rhs(t, y);
    if (!finite(k1)) {
        traj.status = IntegrationStatus::NonFiniteRHS;
        traj.t.push_back(t);
        traj.y.push_back(y);
        return traj;
    }
    double h = opt.initial_step != 0.0
                   ? dir * std::fabs(opt.initial_step)
                   : initial_step_guess<N>(rhs, t, y, k1, dir, opt.rtol, opt.atol);

    traj.t.push_back(t);
    traj.y.push_back(y);

    std::vector<double> gprev(events.size());
    for (std::size_t i = 0; i < events.size(); ++i) gprev[i] = events[i].g(t, y);

    // PI controller state
    const double beta = 0.04, expo1 = 0.2 - beta * 0.75, safe = 0.9;
    const double facc1 = 1.0 / 0.2, facc2 = 1.0 / 10.0;
    double facold = 1e-4;
    bool reject = false;

    VecN<N> k2, k3, k4, k5, k6, k7, ynew, yerr;

    while (traj.n_accepted + traj.n_rejected < opt.max_steps) {
        if (std::fabs(h) < 1e-14 * std::max(1.0, std::fabs(t))) {
            traj.status = IntegrationStatus::StepSizeUnderflow;
            return traj;
        }
        // do not step past t1
        if ((t + h - t1) * dir > 0) h = t1 - t;

        k2 = rhs(t + c2 * h, axpy(y, h * a21, k1));
        {
            VecN<N> tmp;
            for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
            k3 = rhs(t + c3 * h, tmp);
            for (std::size_t i = 0; i < N; ++i)
                tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
            k4 = rhs(t + c4 * h, tmp);
            for (std::size_t i = 0; i < N; ++i)
                tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
            k5 = rhs(t + c5 * h, tmp);
            for (std::size_t i = 0; i < N; ++i)
                tmp[i] = y[i] +
                         h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
            k6 = rhs(t + h, tmp);
            for (std::size_t i = 0; i < N; ++i)
                ynew[i] = y[i] +
                          h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
            k7 = rhs(t + h, ynew);
        }
        if (!finite(k7) || !finite(ynew)) {
            traj.status = IntegrationStatus::NonFiniteRHS;
            return traj;
        }
        double err = 0;
        for (std::size_t i = 0; i < N; ++i) {
            const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                                  e7 * k7[i]);
            const double sk = opt.atol + opt.rtol * std::max(std::fabs(y[i]), std::fabs(ynew[i]));
            err += (e / sk) * (e / sk);
        }
        err = std::sqrt(err / N);

        const double fac11 = std::pow(std::max(err, 1e-32), expo1);
        double fac = fac11 / std::pow(facold, beta);
        fac = std::max(facc2, std::min(facc1, fac / safe));
        double hnew = h / fac;

        if (err <= 1.0) {
            // accepted
            facold = std::max(err, 1e-4);
            typename Trajectory<N>::DenseSegment seg;
            seg.t0 = t;
            seg.h = h;
            for (std::size_t i = 0; i < N; ++i) {
                const double dy = ynew[i] - y[i];
                const double bspl = h * k1[i] - dy;
                seg.r[0][i] = y[i];
                seg.r[1][i] = dy;
                seg.r[2][i] = bspl;
                seg.r[3][i] = dy - h * k7[i] - bspl;
                seg.r[4][i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] +
                                   d7 * k7[i]);
            }

            const double tnew = t + h;
            // event scan on this step
            struct Hit {
                double t;
                std::size_t idx;
                VecN<N> y;
            };
            std::vector<Hit> hits;
            auto dense_here = [&](double tq) {
                const double th = (tq - seg.t0) / seg.h, th1 = 1.0 - th;
                VecN<N> o;
                for (std::size_t i = 0; i < N; ++i)
                    o[i] = seg.r[0][i] +
                           th * (seg.r[1][i] +
                                 th1 * (seg.r[2][i] + th * (seg.r[3][i] + th1 * seg.r[4][i])));
                return o;
            };
            for (std::size_t ie = 0; ie < events.size(); ++ie) {
                const double g1 = events[ie].g(tnew, ynew);
                const double g0 = gprev[ie];
                const bool crossed = (g0 < 0 && g1 >= 0 && events[ie].direction >= 0) ||
                                     (g0 > 0 && g1 <= 0 && events[ie].direction <= 0);
                gprev[ie] = g1;
                if (!crossed || g0 == 0.0) continue;
                // bisection on dense output
                double ta = t, tb = tnew, ga = g0;
                VecN<N> ymid = ynew;
                double tm = tnew, gm = g1;
                for (int it = 0; it < 60 && std::fabs(gm) > 1e-10; ++it) {
                    tm = 0.5 * (ta + tb);
                    ymid = dense_here(tm);
                    gm = events[ie].g(tm, ymid);
                    if ((ga < 0) == (gm < 0)) { ta = tm; ga = gm; }
                    else tb = tm;
                }
                if (std::fabs(gm) > 1e-10 && tm != tnew) { tm = tb; ymid = dense_here(tb); }
                hits.push_back({tm, ie, ymid});
            }
            std::sort(hits.begin(), hits.end(),
                      [dir](const Hit& a, const Hit& b) { return (a.t - b.t) * dir < 0; });

            if (opt.store_dense) traj.segments.push_back(seg);
            ++traj.n_accepted;

            for (const Hit& hit : hits) {
                traj.events.push_back(
                    {hit.t, events[hit.idx].name, hit.y, events[hit.idx].terminal});
                if (events[hit.idx].terminal) {
                    traj.t.push_back(hit.t);
                    traj.y.push_back(hit.y);
                    traj.status = IntegrationStatus::EventTerminated;
                    return traj;
                }
            }

            t = tnew;
            y = ynew;
            k1 = k7; // FSAL
            traj.t.push_back(t);
            traj.y.push_back(y);

            if (norm2(y) > opt.escape_radius) {
                traj.events.push_back({t, "ESCAPE", y, true});
                traj.status = IntegrationStatus::Escaped;
                return traj;
            }
            if ((t - t1) * dir >= 0) {
                traj.status = IntegrationStatus::ReachedEnd;
                return traj;
            }
            if (reject) hnew = dir * std::min(std::fabs(hnew), std::fabs(h));
            reject = false;
            h = hnew;
        } else {
            ++traj.n_rejected;
            reject = true;
            h = h / std::min(facc1, fac11 / safe);
        }
    }
    traj.status = IntegrationStatus::StepCountExceeded;
    return traj;
}

/// Fixed-step Dormand-Prince driver (5th-order solution, no error control);
/// used by the order-of-convergence checks.
template <std::size_t N, class F>
VecN<N> integrate_fixed_step(F&& f, VecN<N> y, double t0, double t1, long n_steps) {
    using namespace detail;
    const double h = (t1 - t0) / double(n_steps);
    double t = t0;
    VecN<N> k1, k2, k3, k4, k5, k6, tmp;
    for (long s = 0; s < n_steps; ++s) {
        k1 = f(t, y);
        k2 = f(t + c2 * h, axpy(y, h * a21, k1));
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        k3 = f(t + c3 * h, tmp);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        k4 = f(t + c4 * h, tmp);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        k5 = f(t + c5 * h, tmp);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        k6 = f(t + h, tmp);
        for (std::size_t i = 0; i < N; ++i)
            y[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
        t += h;
    }
    return y;
}

// ---------------------------------------------------------------------------
// quaternion-field front end
// ---------------------------------------------------------------------------

using Event4 = EventSpec<4>;
using Trajectory4 = Trajectory<4>;

inline Trajectory4 integrate(const FieldSpec& spec, const Quaternion& q0,
                             std::pair<double, double> t_span, const IntegrationOptions& opt = {},
                             const std::vector<Event4>& events = {}) {
    auto f = [&spec](double, const Vec4& y) { return eval_field(spec, to_quat(y)); };
    return integrate_ode<4>(f, to_vec(q0), t_span.first, t_span.second, opt, events);
}

/// Event surface: membership residual of P = {q^{n-1} + conj(q)^{n-1} - c0 = 0}.
inline Event4 event_on_P(const FieldSpec& spec, int direction = 0, bool terminal = false) {
    const int n = spec.n;
    const double c0 = spec.bernoulli_c0();
    return {"P", [n, c0](double, const Vec4& y) {
                return 2.0 * power_scalar(to_quat(y), n - 1) - c0;
            },
            direction, terminal};
}

/// Event surface: the Theorem-3 hyperplane or the cubic hyperboloid L = 0.
inline Event4 event_on_L(const FieldSpec& spec, int direction = 0, bool terminal = false) {
    if (spec.family == Family::Cubic) {
        const double c0 = spec.c0;
        return {"L", [c0](double, const Vec4& y) {
                    return y[0] * y[0] - y[1] * y[1] - y[2] * y[2] - y[3] * y[3] - c0 * c0 / 2;
                },
                direction, terminal};
    }
    if (spec.family == Family::Bernoulli) {
        const double c0 = spec.c.q0, c1 = spec.c.q1;
        const double k0 = norm_sq(spec.c);
        return {"L", [c0, c1, k0](double, const Vec4& y) {
                    return c0 * y[0] + c1 * y[1] - k0 / 2;
                },
                direction, terminal};
    }
    throw WrongFamilyError("event_on_L: no L surface for this family");
}

// ---------------------------------------------------------------------------
// limit sets
// ---------------------------------------------------------------------------

enum class ProbeOutcome { Converged, Escaped, Undecided };

struct ProbeResult {
    ProbeOutcome outcome = ProbeOutcome::Undecided;
    int target_index = -1;
    double residual = std::numeric_limits<double>::quiet_NaN();
    double t_end = 0.0;
    Quaternion q_end;
};

/// Integrate forward or backward up to t_max and test convergence toward one
/// of the given equilibria: distance < 1e-4 at the end and non-increasing over
/// the trailing decade of integration time.
inline ProbeResult limit_set_probe(const FieldSpec& spec, const Quaternion& q0, bool forward,
                                   const std::vector<Quaternion>& targets, double t_max,
                                   IntegrationOptions opt = {}) {
    for (const auto& tgt : targets) {
        if (norm(to_quat(eval_field(spec, tgt))) > 1e-10)
            throw DomainError("limit_set_probe: target is not an equilibrium");
    }
    ProbeResult res;
    const double t1 = forward ? t_max : -t_max;

    // immediate hit
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const double d = norm(q0 - targets[i]);
        if (d == 0.0) {
            res.outcome = ProbeOutcome::Converged;
            res.target_index = int(i);
            res.residual = 0.0;
            res.q_end = q0;
            return res;
        }
    }

    const Trajectory4 traj = integrate(spec, q0, {0.0, t1}, opt);
    res.t_end = traj.t_end();
    res.q_end = to_quat(traj.y_end());
    if (traj.status == IntegrationStatus::Escaped) {
        res.outcome = ProbeOutcome::Escaped;
        return res;
    }
    if (traj.status != IntegrationStatus::ReachedEnd) return res; // undecided

    double best = std::numeric_limits<double>::infinity();
    int best_i = -1;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const double d = norm(res.q_end - targets[i]);
        if (d < best) {
            best = d;
            best_i = int(i);
        }
    }
    res.residual = best;
    if (best >= 1e-4) return res;

    // monotone decay over the trailing decade [t_end/10, t_end]
    const double tend = std::fabs(res.t_end);
    bool monotone = true;
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 8; ++k) {
        const double tq = (forward ? 1.0 : -1.0) * (tend / 10.0) * std::pow(10.0, k / 8.0);
        const double d = norm(to_quat(traj.eval(tq)) - targets[best_i]);
        if (d > prev * (1 + 1e-6) + 1e-8) { // floor absorbs interpolant noise at convergence
            monotone = false;
            break;
        }
        prev = d;
    }
    if (monotone) {
        res.outcome = ProbeOutcome::Converged;
        res.target_index = best_i;
    }
    return res;
}

} // namespace quatdyn
