#include <doctest.h>

#include <algorithm>
#include <random>

#include "mgt/model.hpp"
#include "mgt/spectral.hpp"

using namespace mgt;

namespace {

// Coefficients of det(lambda I - M) recovered by sampling the determinant at n+1 points on a
// circle and solving the (unitary up to scaling) Vandermonde system.
std::vector<cplx> determinant_fit(const Eigen::MatrixXcd& m) {
    const int n = static_cast<int>(m.rows());
    Eigen::MatrixXcd V(n + 1, n + 1);
    Eigen::VectorXcd d(n + 1);
    const double scale = std::max(1.0, m.eigenvalues().cwiseAbs().maxCoeff());
    for (int s = 0; s <= n; ++s) {
        cplx lam = scale * std::polar(1.0, 2.0 * M_PI * s / (n + 1) + 0.3);
        for (int j = 0; j <= n; ++j) V(s, j) = std::pow(lam / scale, n - j);
        d(s) = (lam * Eigen::MatrixXcd::Identity(n, n) - m).determinant();
    }
    Eigen::VectorXcd c = V.fullPivLu().solve(d);
    for (int j = 0; j <= n; ++j) c(j) /= std::pow(scale, n - j);
    return std::vector<cplx>(c.data(), c.data() + n + 1);
}

// Hand expansion of det(lambda I - M) for general (a, gamma, kappa); every term is positive.
std::vector<double> expanded_char_poly(const ModelParams& p, Variant v, double r) {
    const double r2 = r * r, a2 = p.a * p.a, gk = p.gamma * p.kappa, e2 = p.eta * p.eta, t = p.tau;
    if (v != Variant::CattaneoHeat)
        return {1.0, (gk * r2 * t + 1) / t, r2 * (a2 * p.beta + e2 * r2 * t + gk) / t,
                r2 * (a2 * p.beta * gk * r2 + a2 + e2 * r2) / t, a2 * gk * r2 * r2 / t};
    const double t0 = p.tau0, tt = t * t0;
    return {1.0,
            (t + t0) / tt,
            (a2 * p.beta * r2 * t0 + e2 * r2 * r2 * tt + gk * r2 * t + 1) / tt,
            r2 * (a2 * p.beta + a2 * t0 + e2 * r2 * (t + t0) + gk) / tt,
            r2 * (a2 * p.beta * gk * r2 + a2 + e2 * r2) / tt,
            a2 * gk * r2 * r2 / tt};
}

double max_rel_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    double scale = 0.0, diff = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        scale = std::max(scale, std::abs(b[i]));
        diff = std::max(diff, std::abs(a[i] - b[i]));
    }
    return diff / scale;
}

// Largest coefficientwise relative error.
double coefficient_error(const std::vector<cplx>& a, const std::vector<double>& ref) {
    double worst = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) worst = std::max(worst, std::abs(a[j] - ref[j]) / std::abs(ref[j]));
    return worst;
}

ModeState state(std::initializer_list<cplx> v) {
    Eigen::VectorXcd a(v.size());
    int i = 0;
    for (cplx x : v) a(i++) = x;
    return ModeState(a);
}

}  // namespace

TEST_CASE("generator rows for the Fourier variant") {
    ModelParams p{1.0, 2.0, 1.0, 0.5, 1.0, 1.0, 0.0, 1};
    Generator g = build_generator(p, Variant::FourierHeat, 1.0);
    Eigen::RowVector4cd r2, r3;
    r2 << -1.0, -2.0, -1.0, 0.5;
    r3 << 0.0, -0.5, -0.5, -1.0;
    CHECK((g.entries.row(2) - r2).norm() < 1e-15);
    CHECK((g.entries.row(3) - r3).norm() < 1e-15);
    CHECK(g.entries(0, 1) == cplx(1.0));
    CHECK(g.entries(1, 2) == cplx(1.0));
}

TEST_CASE("generator at zero frequency has eigenvalues 0, 0, -1/tau, 0") {
    ModelParams p{0.7, 1.3, 1.0, 0.4, 1.0, 1.0, 0.0, 1};
    Eigen::VectorXcd ev = build_generator(p, Variant::FourierHeat, 0.0).entries.eigenvalues();
    std::vector<double> re;
    for (int i = 0; i < ev.size(); ++i) re.push_back(ev(i).real());
    std::sort(re.begin(), re.end());
    CHECK(re[0] == doctest::Approx(-1.0 / 0.7));
    for (int i = 1; i < 4; ++i) CHECK(std::abs(re[i]) < 1e-12);
}

TEST_CASE("Cattaneo generator matches the closed-form characteristic polynomial") {
    ModelParams p{0.5, 1.0, 1.0, 0.3, 1.0, 1.0, 0.2, 1};
    Generator g = build_generator(p, Variant::CattaneoHeat, 2.0);
    CHECK(g.entries.rows() == 5);
    CHECK(g.entries(3, 4).real() == 0.0);
    CHECK(g.entries(4, 3).real() == 0.0);
    CharPoly cp = char_poly(p, Variant::CattaneoHeat, 2.0);
    REQUIRE_FALSE(cp.from_determinant);
    CHECK(max_rel_diff(cp.coeffs, determinant_fit(g.entries)) < 1e-10);
}

TEST_CASE("determinant consistency over random parameters") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.1, 3.0), lx(-2.0, 2.0);
    for (int i = 0; i < 100; ++i) {
        const bool catt = i % 2 == 1;
        const Variant v = catt ? Variant::CattaneoHeat : Variant::FourierHeat;
        ModelParams p{u(rng), u(rng), 1.0, u(rng), 1.0, 1.0, catt ? u(rng) : 0.0, 1};
        if (i % 4 >= 2) {
            // general coefficients: the determinant path
            p.a = u(rng);
            p.gamma = u(rng);
            p.kappa = u(rng);
        } else if (catt) {
            p.gamma = p.kappa = u(rng);
        } else {
            p.kappa = u(rng);
            p.gamma = 1.0 / p.kappa;
        }
        const double xi = std::pow(10.0, lx(rng));
        CharPoly cp = char_poly(p, v, xi);
        if (i % 4 >= 2) CHECK(cp.from_determinant);
        CAPTURE(xi);
        CHECK(coefficient_error(cp.coeffs, expanded_char_poly(p, v, xi)) < 1e-12);
        CHECK(coefficient_error(matrix_char_poly(build_generator(p, v, xi).entries), expanded_char_poly(p, v, xi)) < 1e-12);
    }
}

TEST_CASE("observable norms") {
    ModelParams p{1.0, 2.0, 1.0, 0.5, 1.0, 1.0, 0.0, 1};
    SUBCASE("temperature only") {
        for (double xi : {0.1, 1.0, 7.0})
            CHECK(observable(p, Variant::FourierHeat, xi, state({0, 0, 0, 1}), ObservableKind::VF).squared_norm ==
                  doctest::Approx(1.0));
    }
    SUBCASE("hand value 6") {
        CHECK(observable(p, Variant::FourierHeat, 1.0, state({1, 1, 0, 0}), ObservableKind::VF).squared_norm ==
              doctest::Approx(6.0));
    }
    SUBCASE("W has no |xi|^2 |v|^2 term") {
        ModelParams q{1.0, 1.0, 1.0, 0.5, 1.0, 1.0, 0.0, 1};
        CHECK(observable(q, Variant::FourierHeat, 1.0, state({0, 1, 0, 0}), ObservableKind::WF).squared_norm ==
              doctest::Approx(2.0));
        ObservableVector w = observable(q, Variant::FourierHeat, 1.0, state({0, 1, 0, 0}), ObservableKind::WF);
        CHECK(w.components.size() == 3);
    }
    SUBCASE("kind must fit the variant") {
        CHECK_THROWS_AS(observable(p, Variant::FourierHeat, 1.0, state({0, 0, 0, 1}), ObservableKind::VC),
                        ConfigError);
    }
}

TEST_CASE("V_C minus W_C equals |xi|^2 |v|^2") {
    ModelParams p{0.5, 1.0, 1.0, 0.3, 1.0, 1.0, 0.2, 1};
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n;
    for (int i = 0; i < 50; ++i) {
        ModeState s(Eigen::VectorXcd::Zero(5), n(rng));
        for (int j = 0; j < 5; ++j) s.amp(j) = cplx(n(rng), n(rng));
        const double xi = std::exp(n(rng));
        double vc = observable(p, Variant::CattaneoHeat, xi, s, ObservableKind::VC).squared_norm;
        double wc = observable(p, Variant::CattaneoHeat, xi, s, ObservableKind::WC).squared_norm;
        CHECK(vc - wc == doctest::Approx(xi * xi * std::norm(s.v())).epsilon(1e-10));
    }
}

TEST_CASE("state reconstruction inverts the observable map") {
    ModelParams p{0.5, 1.0, 1.0, 0.3, 1.0, 1.0, 0.2, 1};
    Eigen::VectorXcd y(5);
    y << cplx(1, 2), cplx(-0.5, 0), cplx(0.25, 1), cplx(3, -1), cplx(0, 0.5);
    ModeState s = state_from_observable(p, Variant::CattaneoHeat, 1.7, y, ObservableKind::VC, 0.4);
    ObservableVector back = observable(p, Variant::CattaneoHeat, 1.7, s, ObservableKind::VC);
    CHECK((back.components - y).norm() < 1e-13);
    CHECK(back.squared_norm == doctest::Approx(y.squaredNorm() + 0.16));
}

TEST_CASE("mode energy hand values") {
    CHECK(mode_energy({0.5, 1, 1, 0.3, 1, 1, 0, 1}, Variant::FourierHeat, Regime::TauLessBeta, 1.0,
                      ModeState::zero(Variant::FourierHeat)) == 0.0);
    CHECK(mode_energy({1, 1, 1, 0.3, 1, 1, 0, 1}, Variant::FourierHeat, Regime::TauEqualsBeta, 1.0,
                      state({0, 1, 0, 0})) == doctest::Approx(1.0));
    CHECK(mode_energy({0.5, 1, 1, 0.3, 1, 1, 0, 1}, Variant::FourierHeat, Regime::TauLessBeta, 2.0,
                      state({0, 1, 0, 0})) == doctest::Approx(1.5));
    CHECK_THROWS_AS(mode_energy({2, 1, 1, 0.3, 1, 1, 0, 1}, Variant::FourierHeat, Regime::TauGreaterBeta, 1.0,
                                state({0, 1, 0, 0})),
                    ConfigError);
}

TEST_CASE("energy form reproduces mode_energy") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n;
    for (Variant v : {Variant::FourierHeat, Variant::CattaneoHeat}) {
        ModelParams p{0.4, 1.1, 1.3, 0.6, 0.8, 1.25, v == Variant::CattaneoHeat ? 0.3 : 0.0, 2};
        for (int i = 0; i < 20; ++i) {
            ModeState s = ModeState::zero(v);
            for (int j = 0; j < s.amp.size(); ++j) s.amp(j) = cplx(n(rng), n(rng));
            const double xi = std::exp(n(rng));
            double e = (s.amp.adjoint() * energy_form(p, v, xi) * s.amp)(0, 0).real();
            CHECK(e == doctest::Approx(mode_energy(p, v, Regime::TauLessBeta, xi, s)).epsilon(1e-12));
        }
    }
}

TEST_CASE("energy-norm equivalence on random states") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n;
    struct Case {
        ModelParams p;
        Variant v;
        Regime r;
    };
    const std::vector<Case> cases = {
        {{0.5, 1, 1, 0.3, 1, 1, 0, 1}, Variant::FourierHeat, Regime::TauLessBeta},
        {{0.5, 1, 1, 0.3, 1, 1, 0.2, 1}, Variant::CattaneoHeat, Regime::TauLessBeta},
        {{1, 1, 1, 0.3, 1, 1, 0, 1}, Variant::FourierHeat, Regime::TauEqualsBeta},
        {{1, 1, 1, 0.3, 1, 1, 0.2, 1}, Variant::CattaneoHeat, Regime::TauEqualsBeta},
    };
    for (const auto& c : cases) {
        const ObservableKind kind = default_observable(c.v, c.r);
        for (int i = 0; i < 250; ++i) {
            const double xi = std::exp(2 * n(rng));
            EquivalenceConstants k = equivalence_constants(c.p, c.v, xi);
            REQUIRE(k.c1 > 0);
            ModeState s = ModeState::zero(c.v);
            for (int j = 0; j < s.amp.size(); ++j) s.amp(j) = cplx(n(rng), n(rng));
            if (c.v == Variant::CattaneoHeat) s.q_perp = n(rng);
            if (c.r == Regime::TauEqualsBeta) {
                // W observables cannot see v; use states of the form reconstructed from W.
                s = state_from_observable(c.p, c.v, xi, observable(c.p, c.v, xi, s, kind).components, kind, s.q_perp);
            }
            const double e = mode_energy(c.p, c.v, c.r, xi, s);
            const double y = observable(c.p, c.v, xi, s, kind).squared_norm;
            CHECK(e >= k.c1 * y * (1 - 1e-10));
            CHECK(e <= k.c2 * y * (1 + 1e-10));
        }
    }
}

TEST_CASE("regime classification") {
    CHECK(classify_regime({0.5, 1}) == Regime::TauLessBeta);
    CHECK(classify_regime({1, 1}) == Regime::TauEqualsBeta);
    CHECK(classify_regime({2, 1}) == Regime::TauGreaterBeta);
    CHECK(classify_regime({1.0 + 1e-9, 1}, 1e-8) == Regime::TauEqualsBeta);
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(validate({0.5, 1, 1, 0.3, 1, 1, 0, 1}, Variant::NoHeat), ConfigError);
    CHECK_THROWS_AS(validate({0.5, 1, 1, 0.3, 1, 1, 0.2, 1}, Variant::FourierHeat), ConfigError);
    CHECK_THROWS_AS(validate({0.5, 1, 1, 0.3, 1, 1, 0, 1}, Variant::CattaneoHeat), ConfigError);
    CHECK_THROWS_AS(validate({-0.5, 1, 1, 0, 1, 1, 0, 1}, Variant::NoHeat), ConfigError);
    CHECK_THROWS_AS(validate({0.5, 1, 1, 0, 1, 1, 0, 4}, Variant::NoHeat), ConfigError);
    CHECK_THROWS_AS(build_generator({0.5, 1, 1, 0, 1, 1, 0, 1}, Variant::NoHeat, -1.0), ConfigError);
    CHECK_NOTHROW(validate({0.5, 1, 1, 0, 1, 1, 0, 1}, Variant::NoHeat));
    CHECK(parse_variant("cattaneo") == Variant::CattaneoHeat);
    CHECK_THROWS_AS(parse_variant("maxwell"), ConfigError);
}
