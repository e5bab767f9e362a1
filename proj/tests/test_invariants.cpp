#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "quatdyn/integrate.hpp"
#include "quatdyn/invariants.hpp"

using namespace quatdyn;

namespace {

std::mt19937_64 rng(909090);
double uni(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}
Quaternion rquat(double s = 1.0) { return {uni(-s, s), uni(-s, s), uni(-s, s), uni(-s, s)}; }

// regular point for a descriptor: denominator bounded away from zero
Quaternion regular_point(const IntegralDescriptor& d, double s = 1.3, double dmin = 0.25) {
    for (int tries = 0; tries < 10000; ++tries) {
        const Quaternion q = rquat(s);
        if (d.denominator(q) > dmin && norm_sq(q) > 0.05) return q;
    }
    throw std::runtime_error("no regular point found");
}

// 4th-order central finite difference of the descriptor value
Vec4 fd_gradient(const IntegralDescriptor& d, const Quaternion& q, double h = 1e-3) {
    Vec4 g{};
    for (int i = 0; i < 4; ++i) {
        Quaternion qp = q, qm = q, qp2 = q, qm2 = q;
        qp[i] += h;
        qm[i] -= h;
        qp2[i] += 2 * h;
        qm2[i] -= 2 * h;
        g[i] = (-d.eval(qp2) + 8 * d.eval(qp) - 8 * d.eval(qm) + d.eval(qm2)) / (12 * h);
    }
    return g;
}

double rel(double got, double want) {
    return std::abs(got - want) / std::max(1.0, std::abs(want));
}

} // namespace

TEST_CASE("descriptor creation respects family and regime") {
    const auto thm1c = FieldSpec::bernoulli(kI, Quaternion{1.0}, 2);
    const auto thm1a = FieldSpec::bernoulli(Quaternion{1.0}, Quaternion{1.0}, 3);
    const auto thm3b = FieldSpec::bernoulli(Quaternion{1.0}, Quaternion{0, 1, 0, 0}, 2);
    const auto cubic = FieldSpec::cubic(kI, 1.0);

    CHECK(make_descriptor(IntegralName::Hn, thm1c).tag == Conservation::Conserved);
    CHECK(make_descriptor(IntegralName::Hn, thm1a).tag == Conservation::Identity);
    CHECK(make_descriptor(IntegralName::F_cyl, thm1c).tag == Conservation::Conserved);
    CHECK(make_descriptor(IntegralName::H2, thm1a).tag == Conservation::Conserved);
    CHECK_THROWS_AS(make_descriptor(IntegralName::H2, thm1c), WrongRegimeError);
    CHECK(make_descriptor(IntegralName::H_e51, thm3b).tag == Conservation::Conserved);
    CHECK(make_descriptor(IntegralName::F_e50b, thm3b).tag == Conservation::Conserved);
    CHECK_THROWS_AS(make_descriptor(IntegralName::F_e50b, thm1c), WrongRegimeError);
    CHECK(make_descriptor(IntegralName::H_e417, cubic).tag == Conservation::Conserved);
    CHECK(make_descriptor(IntegralName::L_hyp, cubic).tag == Conservation::Identity);
    CHECK_THROWS_AS(make_descriptor(IntegralName::Hn, cubic), WrongFamilyError);
}

TEST_CASE("frozen evaluations") {
    const auto thm1c = FieldSpec::bernoulli(kI, Quaternion{1.0}, 2);
    const auto F = make_descriptor(IntegralName::F_cyl, thm1c);
    CHECK(F.eval({0.3, 0.4, 0.1, 0.2}) == Catch::Approx(0.05).epsilon(1e-14));

    // level set H = c0 contains the roots of q^{n-1} = c0
    const auto H = make_descriptor(IntegralName::Hn, thm1c);
    CHECK(H.eval(Quaternion{1.0}) == Catch::Approx(1.0).epsilon(1e-14));
    // H -> 0 toward the origin
    CHECK(std::abs(H.eval(Quaternion{1e-3, 0, 0, 0})) < 1e-4);
    // singular guard
    CHECK_THROWS_AS(H.eval(Quaternion{0.5, 0.2, 0.1, 0.1}), SingularLocusError); // on P: 2q0=c0
}

TEST_CASE("gradients match 4th-order finite differences") {
    struct Case {
        IntegralName name;
        FieldSpec spec;
    };
    const std::vector<Case> cases = {
        {IntegralName::H2, FieldSpec::bernoulli(Quaternion{1.0}, Quaternion{1.0}, 2)},
        {IntegralName::H3, FieldSpec::bernoulli(Quaternion{1.0}, Quaternion{1.0}, 2)},
        {IntegralName::Hn, FieldSpec::bernoulli(kI, Quaternion{1.0}, 2)},
        {IntegralName::Hn, FieldSpec::bernoulli(kI, Quaternion{1.0}, 3)},
        {IntegralName::Hn, FieldSpec::bernoulli(kI, Quaternion{-1.5}, 4)},
        {IntegralName::S, FieldSpec::bernoulli(kI, Quaternion{1.0}, 3)},
        {IntegralName::F_cyl, FieldSpec::bernoulli(kI, Quaternion{1.0}, 2)},
        {IntegralName::H_e51, FieldSpec::bernoulli(Quaternion{1.0}, {0.8, 1.1, 0, 0}, 2)},
        {IntegralName::F_e50b, FieldSpec::bernoulli(Quaternion{1.0}, {0, 1.3, 0, 0}, 2)},
        {IntegralName::L_plane, FieldSpec::bernoulli(Quaternion{1.0}, {0.8, 1.1, 0, 0}, 2)},
        {IntegralName::H_e417, FieldSpec::cubic(kI, 1.0)},
        {IntegralName::L_hyp, FieldSpec::cubic(kI, 1.0)},
    };
    for (const auto& c : cases) {
        const auto d = make_descriptor(c.name, c.spec);
        for (int t = 0; t < 60; ++t) {
            const Quaternion q = regular_point(d, 1.3, 0.4);
            const Vec4 g = d.gradient(q);
            const Vec4 gf = fd_gradient(d, q);
            double scale = 1.0;
            for (int i = 0; i < 4; ++i) scale = std::max(scale, std::abs(g[i]));
            for (int i = 0; i < 4; ++i) CHECK(std::abs(g[i] - gf[i]) <= 1e-6 * scale);
        }
    }
}

TEST_CASE("Lie-derivative identities (d1), (d2), (d3)") {
    for (int n : {2, 3, 5}) {
        // generic quaternion a, real c
        const Quaternion araw{uni(-1, 1), uni(-1, 1), 0, 0};
        const auto spec = FieldSpec::bernoulli(araw, Quaternion{1.3}, n);
        const auto H = make_descriptor(IntegralName::Hn, spec);
        const auto S = make_descriptor(IntegralName::S, spec);
        for (int t = 0; t < 1000; ++t) {
            const Quaternion q = regular_point(H, 1.2, 0.2);
            CHECK(rel(lie_derivative(H, spec, q), lie_closed_form(H, spec, q)) < 1e-9);
            CHECK(rel(lie_derivative(S, spec, q), lie_closed_form(S, spec, q)) < 1e-9);
        }
    }
    // (d1) special cases: a = i makes Hn a first integral
    const auto ci = FieldSpec::bernoulli(kI, Quaternion{1.0}, 2);
    const auto Hi = make_descriptor(IntegralName::Hn, ci);
    for (int t = 0; t < 500; ++t) {
        const Quaternion q = regular_point(Hi, 1.2, 0.2);
        CHECK(std::abs(lie_derivative(Hi, ci, q)) < 1e-10);
    }
    // a = 1 (a + conj a = 2), n = 2, c0 = 1: dH/dt = (n-1) 2 (c0-H) H
    const auto c1 = FieldSpec::bernoulli(Quaternion{1.0}, Quaternion{1.0}, 2);
    const auto H1 = make_descriptor(IntegralName::Hn, c1);
    for (int t = 0; t < 500; ++t) {
        const Quaternion q = regular_point(H1, 1.2, 0.2);
        const double H = H1.eval(q);
        CHECK(rel(lie_derivative(H1, c1, q), 2 * (1 - H) * H) < 1e-9);
    }
    // (d3): on P the S-derivative equals (n-1)(a+conj a)(q conj q)^{n-1}
    const int n = 3;
    const double c0 = 1.0;
    const Quaternion a{0.7, 0.4, 0, 0};
    const auto spec = FieldSpec::bernoulli(a, Quaternion{c0}, n);
    const auto S = make_descriptor(IntegralName::S, spec);
    int found = 0;
    for (int t = 0; t < 2000 && found < 200; ++t) {
        Quaternion u = rquat();
        const double w = power_scalar(u, n - 1);
        if (w < 1e-3) continue;
        const double r = std::pow(c0 / (2 * w), 1.0 / (n - 1));
        const Quaternion q = r * u;
        ++found;
        CHECK(std::abs(S.eval(q)) < 1e-12);
        const double want = (n - 1) * 2 * a.q0 * std::pow(norm_sq(q), n - 1);
        CHECK(rel(lie_derivative(S, spec, q), want) < 1e-9);
    }
    REQUIRE(found >= 100);
}

TEST_CASE("Lie-derivative identities (e52), (e4.16), (e4.18)") {
    // (e52) with a = 1, c = c0 + c1 i
    const auto s3 = FieldSpec::bernoulli(Quaternion{1.0}, {0.8, 1.1, 0, 0}, 2);
    const auto He51 = make_descriptor(IntegralName::H_e51, s3);
    CHECK(He51.tag == Conservation::Identity);
    for (int t = 0; t < 1000; ++t) {
        const Quaternion q = regular_point(He51, 1.4, 0.3);
        CHECK(rel(lie_derivative(He51, s3, q), lie_closed_form(He51, s3, q)) < 1e-9);
    }
    // conserved with c0 = 0
    const auto s3b = FieldSpec::bernoulli(Quaternion{1.0}, {0, 1.3, 0, 0}, 2);
    for (IntegralName nm : {IntegralName::H_e51, IntegralName::F_e50b}) {
        const auto d = make_descriptor(nm, s3b);
        for (int t = 0; t < 500; ++t) {
            const Quaternion q = regular_point(d, 1.4, 0.3);
            CHECK(std::abs(lie_derivative(d, s3b, q)) < 1e-9);
        }
    }
    // L_plane restricted to L = 0: a0 c0 (q conj q)
    const auto Lp = make_descriptor(IntegralName::L_plane, s3);
    for (int t = 0; t < 500; ++t) {
        Quaternion q = rquat(1.2);
        // project onto the hyperplane c0 q0 + c1 q1 = K0/2
        const double c0 = 0.8, c1 = 1.1, k0 = c0 * c0 + c1 * c1;
        q.q0 = (k0 / 2 - c1 * q.q1) / c0;
        CHECK(std::abs(Lp.eval(q)) < 1e-12);
        CHECK(rel(lie_derivative(Lp, s3, q), c0 * norm_sq(q)) < 1e-9);
        CHECK(rel(lie_closed_form(Lp, s3, q), c0 * norm_sq(q)) < 1e-9);
    }

    // cubic identities, general a = a0 + a1 i
    const Quaternion a{-0.6, 0.9, 0, 0};
    const auto cub = FieldSpec::cubic(a, 1.0);
    const auto He417 = make_descriptor(IntegralName::H_e417, cub);
    const auto Lh = make_descriptor(IntegralName::L_hyp, cub);
    for (int t = 0; t < 1000; ++t) {
        const Quaternion q = regular_point(He417, 1.4, 0.25);
        CHECK(rel(lie_derivative(He417, cub, q), lie_closed_form(He417, cub, q)) < 1e-9);
        CHECK(rel(lie_derivative(Lh, cub, q), lie_closed_form(Lh, cub, q)) < 1e-9);
    }
    // (e4.16) on L = 0
    for (int t = 0; t < 500; ++t) {
        const double d2 = uni(0.01, 1.5);
        const double q0 = std::sqrt(0.5 + d2) * (uni(-1, 1) > 0 ? 1 : -1);
        Quaternion u{0, uni(-1, 1), uni(-1, 1), uni(-1, 1)};
        const double sc = std::sqrt(d2 / imag_norm_sq(u));
        const Quaternion q{q0, sc * u.q1, sc * u.q2, sc * u.q3};
        const double want = -2 * a.q0 * std::pow(2 * q0 * q0 - 0.5, 2);
        CHECK(rel(lie_derivative(Lh, cub, q), want) < 1e-9);
    }
}

TEST_CASE("hyperplane cofactors (real a, real c)") {
    const auto spec = FieldSpec::bernoulli(Quaternion{1.0}, Quaternion{2.0}, 3);
    for (int axis : {1, 2, 3}) {
        double worst = 0;
        for (int t = 0; t < 1000; ++t)
            worst = std::max(worst, std::abs(cofactor_residual(axis, spec, rquat(1.2))));
        CHECK(worst < 1e-10);
    }
    // exact invariance on the locus q2 = 0
    const Quaternion q{0.4, 0.3, 0.0, 0.6};
    CHECK(eval_field(spec, q)[2] == 0.0);
    // wrong regime
    const auto im = FieldSpec::bernoulli(kI, Quaternion{1.0}, 2);
    CHECK_THROWS_AS(cofactor_residual(1, im, kOne), WrongRegimeError);
}

TEST_CASE("Poisson structure") {
    const auto spec = FieldSpec::bernoulli(kI, Quaternion{1.0}, 2);
    const auto H = make_descriptor(IntegralName::Hn, spec);
    const auto F = make_descriptor(IntegralName::F_cyl, spec);

    // exact antisymmetry of M
    const Quaternion q0{0.7, 0.2, 0.4, -0.3};
    const Mat4 m = poisson_matrix(2, 1.0, q0);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) CHECK(m[i][j] == -m[j][i]);

    for (int n : {2, 3}) {
        const auto sp = FieldSpec::bernoulli(kI, Quaternion{1.0}, n);
        const auto Hn = make_descriptor(IntegralName::Hn, sp);
        const auto Fc = make_descriptor(IntegralName::F_cyl, sp);
        for (int t = 0; t < 500; ++t) {
            const Quaternion q = regular_point(Hn, 1.2, 0.25);
            CHECK(poisson_bracket(Hn, Hn, q) == 0.0); // antisymmetry, exact
            CHECK(std::abs(poisson_bracket(Hn, Fc, q)) < 1e-9);
            CHECK(std::abs(poisson_bracket(Fc, Hn, q)) < 1e-9);
        }
    }
}

TEST_CASE("functional independence of (Hn, F) off the critical sets") {
    const auto spec = FieldSpec::bernoulli(kI, Quaternion{1.0}, 3);
    const auto H = make_descriptor(IntegralName::Hn, spec);
    const auto F = make_descriptor(IntegralName::F_cyl, spec);
    const auto crit = critical_sets(spec);
    for (int t = 0; t < 500; ++t) {
        const Quaternion q = regular_point(H, 1.2, 0.3);
        bool on_crit = false;
        for (const auto& cs : crit)
            if (cs.residual(q) < 1e-2) on_crit = true;
        if (on_crit || F.eval(q) < 1e-2) continue;
        Vec4 gh = H.gradient(q), gf = F.gradient(q);
        auto normz = [](Vec4& v) {
            double s = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3]);
            for (double& x : v) x /= s;
        };
        normz(gh);
        normz(gf);
        // smallest singular value of the normalized 2x4 Jacobian
        const double a = 1.0, b2 = 1.0;
        double dot = 0;
        for (int i = 0; i < 4; ++i) dot += gh[i] * gf[i];
        const double tr = a + b2, det = a * b2 - dot * dot;
        const double smin = std::sqrt((tr - std::sqrt(tr * tr - 4 * det)) / 2);
        CHECK(smin > 1e-8);
    }
}

TEST_CASE("critical sets") {
    // Thm 1(c) sets; S2 is nonempty for n = 3 with c0 < 0 (sphere of equilibria)
    const auto spec = FieldSpec::bernoulli(kI, Quaternion{-1.0}, 3);
    const auto sets = critical_sets(spec);
    REQUIRE(sets.size() == 3);
    CHECK(sets[0].contains({1.0, 0.5, 0, 0}));       // S1: q2 = q3 = 0
    CHECK_FALSE(sets[0].contains({1.0, 0.5, 0.1, 0}));
    // S2 point: q0 = 0, |Im q| = sqrt(-c0) = 1
    const Quaternion s2pt{0, 0.6, 0.64, std::sqrt(1 - 0.36 - 0.4096)};
    CHECK(sets[1].contains(s2pt));
    // S2 is full of equilibria
    CHECK(norm(to_quat(eval_field(spec, s2pt))) < 1e-10);

    // Thm 3(b) sphere invariance via a short integration
    const auto s3b = FieldSpec::bernoulli(Quaternion{1.0}, {0, 1.0, 0, 0}, 2);
    const auto sets3 = critical_sets(s3b);
    REQUIRE(sets3.size() == 2);
    const double c1 = 1.0;
    const double q1 = 0.25;
    const double rest = c1 * q1 - q1 * q1; // q2^2 + q3^2 on the sphere
    const Quaternion sph{0, q1, std::sqrt(rest / 2), std::sqrt(rest / 2)};
    REQUIRE(sets3[1].contains(sph));
    auto traj = integrate(s3b, sph, {0.0, 5.0});
    REQUIRE(traj.ok());
    double worst = 0;
    for (std::size_t k = 0; k < traj.t.size(); ++k)
        worst = std::max(worst, sets3[1].residual(to_quat(traj.y[k])));
    CHECK(worst < 1e-9);

    // cubic sheets
    const auto cub = FieldSpec::cubic(kI, 1.0);
    const auto setsc = critical_sets(cub);
    CHECK(setsc[0].contains({std::sqrt(0.5 + 0.04), 0.2, 0, 0}));
    CHECK_FALSE(setsc[1].contains({std::sqrt(0.5 + 0.04), 0.2, 0, 0}));

    CHECK_THROWS_AS(critical_sets(FieldSpec::bernoulli(Quaternion{1, 1, 0, 0}, Quaternion{1.0}, 2)),
                    WrongRegimeError);
}

TEST_CASE("conservation drift along trajectories (spot check)") {
    struct Case {
        FieldSpec spec;
        std::vector<IntegralName> names;
    };
    const std::vector<Case> cases = {
        {FieldSpec::bernoulli(Quaternion{1.0}, Quaternion{1.0}, 3),
         {IntegralName::H2, IntegralName::H3}},
        {FieldSpec::bernoulli(kI, Quaternion{1.0}, 2), {IntegralName::Hn, IntegralName::F_cyl}},
        {FieldSpec::bernoulli(Quaternion{1.0}, {0, 1.0, 0, 0}, 2),
         {IntegralName::H_e51, IntegralName::F_e50b}},
        {FieldSpec::cubic(kI, 1.0), {IntegralName::H_e417, IntegralName::F_cyl}},
    };
    IntegrationOptions opt;
    opt.rtol = 1e-10;
    opt.atol = 1e-12;
    for (const auto& c : cases) {
        std::vector<IntegralDescriptor> ds;
        for (auto nm : c.names) ds.push_back(make_descriptor(nm, c.spec));
        for (int rep = 0; rep < 4; ++rep) {
            Quaternion q0;
            bool good = false;
            for (int tries = 0; tries < 1000 && !good; ++tries) {
                q0 = rquat(1.0);
                good = norm_sq(q0) > 0.1 && q0.q2 * q0.q2 + q0.q3 * q0.q3 > 0.05;
                for (const auto& d : ds) good = good && d.denominator(q0) > 0.3;
                if (good && std::abs(q0.q1) < 0.1) good = false;
            }
            const auto traj = integrate(c.spec, q0, {0.0, 20.0}, opt);
            REQUIRE(traj.status == IntegrationStatus::ReachedEnd);
            for (const auto& d : ds) {
                const double v0 = d.eval(q0);
                double drift = 0;
                for (std::size_t k = 0; k < traj.t.size(); ++k) {
                    const Quaternion qk = to_quat(traj.y[k]);
                    // the integral is undefined to tested precision at its
                    // singular locus; orbits may legally run into it
                    if (d.denominator(qk) < 1e-8) continue;
                    drift = std::max(drift, std::abs(d.eval(qk) - v0));
                }
                CHECK(drift / std::max(std::abs(v0), 1e-2) < 1e-8);
            }
        }
    }
}
