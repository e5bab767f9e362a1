#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "quatdyn/errors.hpp"

namespace quatdyn {

struct QuadResult {
    double value = 0.0;
    double abs_err = 0.0; // error estimate
    long n_evals = 0;
    int panels = 0;
};

namespace detail {
// Gauss-Kronrod 7-15 nodes/weights on [-1, 1] (node, gauss weight, kronrod weight).
inline constexpr double kGK[8][3] = {
    {0.000000000000000, 0.417959183673469, 0.209482141084728},
    {0.405845151377397, 0.381830050505119, 0.190350578064785},
    {0.741531185599394, 0.279705391489277, 0.140653259715525},
    {0.949107912342759, 0.129484966168870, 0.063092092629979},
    {0.207784955007898, 0.0, 0.204432940075298},
    {0.586087235467691, 0.0, 0.169004726639267},
    {0.864864423359769, 0.0, 0.104790010322250},
    {0.991455371120813, 0.0, 0.022935322010529}};

template <class F>
void gk15(const F& f, double a, double b, double& k15, double& err) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double f0 = f(mid);
    double g7 = kGK[0][1] * f0;
    k15 = kGK[0][2] * f0;
    for (int i = 1; i < 8; ++i) {
        const double dx = half * kGK[i][0];
        const double fi = f(mid + dx) + f(mid - dx);
        g7 += kGK[i][1] * fi;
        k15 += kGK[i][2] * fi;
    }
    g7 *= half;
    k15 *= half;
    const double d = std::fabs(k15 - g7);
    // standard (200|K-G|)^1.5 sharpening, floored at the raw difference scale
    err = std::min(d, std::pow(200.0 * d, 1.5) / 200.0) + 1e-18 * std::fabs(k15);
    err = std::max(err, d * 1e-3);
}
} // namespace detail

/// Adaptive Gauss-Kronrod bisection. Splits the worst interval until the
/// summed error estimate drops below abs_tol (or rel_tol * |integral|).
template <class F>
QuadResult quad_adaptive(const F& f, double a, double b, double abs_tol = 1e-12,
                         double rel_tol = 0.0, int max_panels = 4000) {
    struct Panel {
        double a, b, val, err;
    };
    QuadResult out;
    std::vector<Panel> panels;
    auto eval_panel = [&](double lo, double hi) {
        double v, e;
        detail::gk15(f, lo, hi, v, e);
        out.n_evals += 15;
        return Panel{lo, hi, v, e};
    };
    // seed with a few panels so periodic integrands are not mistaken for flat
    const int seed = 8;
    for (int i = 0; i < seed; ++i)
        panels.push_back(eval_panel(a + (b - a) * i / seed, a + (b - a) * (i + 1) / seed));

    while (true) {
        double total = 0, toterr = 0;
        std::size_t worst = 0;
        for (std::size_t i = 0; i < panels.size(); ++i) {
            total += panels[i].val;
            toterr += panels[i].err;
            if (panels[i].err > panels[worst].err) worst = i;
        }
        const double goal = std::max(abs_tol, rel_tol * std::fabs(total));
        if (toterr <= goal) {
            out.value = total;
            out.abs_err = toterr;
            out.panels = int(panels.size());
            return out;
        }
        if (int(panels.size()) >= max_panels)
            throw QuadratureFailureError("quad_adaptive: error estimate stalled at panel cap");
        const Panel w = panels[worst];
        const double mid = 0.5 * (w.a + w.b);
        panels[worst] = eval_panel(w.a, mid);
        panels.push_back(eval_panel(mid, w.b));
    }
}

/// Composite Simpson with n_panels sub-intervals (n_panels even), used as the
/// independent quadrature oracle.
template <class F>
double simpson_composite(const F& f, double a, double b, long n_panels) {
    if (n_panels < 2 || n_panels % 2 != 0)
        throw DomainError("simpson_composite: n_panels must be even and >= 2");
    const double h = (b - a) / double(n_panels);
    double s_end = f(a) + f(b);
    double s_odd = 0.0, s_even = 0.0;
    for (long i = 1; i < n_panels; ++i) {
        const double x = a + h * double(i);
        if (i % 2 == 1) s_odd += f(x);
        else s_even += f(x);
    }
    return (s_end + 4.0 * s_odd + 2.0 * s_even) * h / 3.0;
}

} // namespace quatdyn
