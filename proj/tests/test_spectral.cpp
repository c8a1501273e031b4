#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>

#include "mgt/spectral.hpp"

using namespace mgt;

namespace {

std::vector<cplx> from_roots(const std::vector<cplx>& r) {
    std::vector<cplx> c{1.0};
    for (cplx z : r) {
        std::vector<cplx> n(c.size() + 1, 0.0);
        for (std::size_t i = 0; i < c.size(); ++i) {
            n[i] += c[i];
            n[i + 1] -= z * c[i];
        }
        c = n;
    }
    return c;
}

double match_error(std::vector<cplx> a, std::vector<cplx> b) {
    double worst = 0.0;
    for (cplx x : a) {
        auto it = std::min_element(b.begin(), b.end(), [&](cplx p, cplx q) { return std::abs(p - x) < std::abs(q - x); });
        worst = std::max(worst, std::abs(*it - x) / std::max(1.0, std::abs(x)));
        b.erase(it);
    }
    return worst;
}

}  // namespace

TEST_CASE("poly_roots recovers known roots") {
    std::vector<cplx> r = {cplx(1, 0), cplx(-2, 0), cplx(0, 3), cplx(0, -3), cplx(-0.5, 0.25)};
    CHECK(match_error(poly_roots(from_roots(r)), r) < 1e-12);
    std::vector<cplx> wide = {cplx(-1e-4, 0), cplx(-1, 0), cplx(-1e4, 0), cplx(-1e8, 0)};
    CHECK(match_error(poly_roots(from_roots(wide)), wide) < 1e-9);
    CHECK_THROWS_AS(poly_roots(std::vector<cplx>{0.0, 1.0, 2.0}), NumericalError);
}

TEST_CASE("poly_roots agrees with the generator eigenvalues") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.1, 2.0);
    for (int i = 0; i < 40; ++i) {
        ModelParams p{u(rng), u(rng), 1.0, u(rng), 1.0, 1.0, i % 2 ? u(rng) : 0.0, 1};
        const Variant v = i % 2 ? Variant::CattaneoHeat : Variant::FourierHeat;
        const double xi = u(rng);
        Eigen::VectorXcd ev = build_generator(p, v, xi).entries.eigenvalues();
        std::vector<cplx> e(ev.data(), ev.data() + ev.size());
        CHECK(match_error(poly_roots(char_poly(p, v, xi)), e) < 1e-7);
    }
}

TEST_CASE("Hurwitz minors of a cubic by hand") {
    CharPoly cp;
    cp.coeffs = {1.0, 6.0, 11.0, 6.0};  // (l+1)(l+2)(l+3)
    cp.scale = 2.0;
    std::vector<double> m = hurwitz_minors(cp);
    REQUIRE(m.size() == 3);
    const double a0 = 2, a1 = 12, a2 = 22, a3 = 12;
    CHECK(m[0] == doctest::Approx(a1));
    CHECK(m[1] == doctest::Approx(a1 * a2 - a0 * a3));
    CHECK(m[2] == doctest::Approx(a3 * (a1 * a2 - a0 * a3)));
}

TEST_CASE("stability boundary without heat conduction") {
    for (double xi : {0.1, 1.0, 10.0}) {
        for (double tau : {0.2, 0.7, 0.99}) {
            StabilityVerdict v = rh_verdict({tau, 1, 1, 0, 1, 1, 0, 1}, Variant::NoHeat, xi);
            CHECK(v.verdict == Verdict::Stable);
            CHECK(v.roots_agree);
        }
        StabilityVerdict m = rh_verdict({1, 1, 1, 0, 1, 1, 0, 1}, Variant::NoHeat, xi);
        CHECK(m.verdict == Verdict::Marginal);
        CHECK(m.roots_agree);
        for (double tau : {1.01, 1.5, 3.0}) {
            StabilityVerdict v = rh_verdict({tau, 1, 1, 0, 1, 1, 0, 1}, Variant::NoHeat, xi);
            CHECK(v.verdict == Verdict::Unstable);
            CHECK(v.roots_agree);
        }
    }
}

TEST_CASE("heat coupling stabilizes tau = beta and some tau > beta") {
    StabilityVerdict eq = rh_verdict({1, 1, 1, 0.3, 1, 1, 0, 1}, Variant::FourierHeat, 1.0);
    CHECK(eq.verdict == Verdict::Stable);
    StabilityVerdict gt = rh_verdict({1.05, 1, 1, 0.3, 1, 1, 0, 1}, Variant::FourierHeat, 1.0);
    CHECK(gt.verdict == Verdict::Stable);
    CHECK(gt.roots_agree);
    StabilityVerdict small = rh_verdict({1, 1, 1, 0.3, 1, 1, 0, 1}, Variant::FourierHeat, 1e-3);
    CHECK(small.verdict == Verdict::Stable);
    CHECK(rh_verdict({1, 1, 1, 0.3, 1, 1, 0, 1}, Variant::FourierHeat, 0.0).verdict == Verdict::Marginal);
}

TEST_CASE("leading expansion coefficients by hand") {
    const ModelParams p{0.5, 1, 1, 0.3, 1, 1, 0, 1};
    EigenExpansion s = expansion_small_xi(p, Variant::FourierHeat, Regime::TauLessBeta);
    std::map<std::string, double> c;
    for (const auto& b : s.branches) c[b.id] = b.coeff;
    CHECK(c["elastic+"] == doctest::Approx(-(p.beta - p.tau) / 2));
    CHECK(c["thermal"] == doctest::Approx(-1.0));
    CHECK(c["relaxation"] == doctest::Approx(-1.0 / p.tau));

    const ModelParams q{1, 1, 1, 1, 1, 1, 0.2, 1};
    EigenExpansion l = expansion_large_xi(q, Variant::CattaneoHeat, Regime::TauEqualsBeta);
    double slow = 0.0;
    for (const auto& b : l.branches)
        if (b.id == "slow+") slow = b.coeff;
    CHECK(slow == doctest::Approx(-q.kappa * q.kappa / (2 * q.eta * q.eta * q.tau0 * q.tau0)));
}

TEST_CASE("expansions verify in all four cases") {
    struct Case {
        ModelParams p;
        Variant v;
        Regime r;
    };
    const std::vector<Case> cases = {
        {{0.5, 1, 1, 0.3, 1, 1, 0, 1}, Variant::FourierHeat, Regime::TauLessBeta},
        {{1, 1, 1, 0.3, 1, 1, 0, 1}, Variant::FourierHeat, Regime::TauEqualsBeta},
        {{0.5, 1, 1, 0.3, 1, 1, 0.2, 1}, Variant::CattaneoHeat, Regime::TauLessBeta},
        {{1, 1, 1, 1, 1, 1, 0.2, 1}, Variant::CattaneoHeat, Regime::TauEqualsBeta},
    };
    for (const auto& c : cases)
        for (Limit l : {Limit::SmallXi, Limit::LargeXi}) {
            EigenExpansion e = l == Limit::SmallXi ? expansion_small_xi(c.p, c.v, c.r) : expansion_large_xi(c.p, c.v, c.r);
            ExpansionReport rep = verify_expansion(e, c.p, c.v, default_ladder(l));
            CAPTURE(to_string(c.v));
            CAPTURE(to_string(l));
            CHECK(rep.pass);
            CHECK(rep.ladder.size() == 12);
        }
}

TEST_CASE("cubic feeding the Cattaneo bounded branches") {
    SigmaRoots s = sigma_cubic({0.5, 1, 1, 0.3, 1, 1, 0.2, 1});
    CHECK(s.roots.size() == 3);
    CHECK(s.real_root_bracketed);
    CHECK(s.all_negative);
    const double t = 0.5, e2 = 0.09, t0 = 0.2;
    for (cplx z : s.roots) {
        cplx v = t * e2 * t0 * z * z * z + e2 * (t0 + t) * z * z + (e2 + 1.0) * z + 1.0;
        CHECK(std::abs(v) < 1e-10);
    }
}

TEST_CASE("expansions reject unsupported settings") {
    CHECK_THROWS_AS(expansion_small_xi({2, 1, 1, 0.3, 1, 1, 0, 1}, Variant::FourierHeat, Regime::TauGreaterBeta),
                    ConfigError);
    CHECK_THROWS_AS(expansion_small_xi({0.5, 1, 2, 0.3, 1, 1, 0, 1}, Variant::FourierHeat, Regime::TauLessBeta),
                    ConfigError);
}
