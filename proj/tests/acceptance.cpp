// One PASS/FAIL line per acceptance criterion. Tolerances and runtime budgets are fixed here.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mgt/cauchy.hpp"
#include "mgt/dynamics.hpp"
#include "mgt/lyapunov.hpp"
#include "mgt/spectral.hpp"
#include "mgt/util.hpp"

using namespace mgt;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Case {
    const char* name;
    ModelParams p;
    Variant v;
    Regime r;
};

const std::vector<Case>& reference_cases() {
    static const std::vector<Case> cases = {
        {"fourier tau<beta", {0.5, 1, 1, 0.3, 1, 1, 0, 1}, Variant::FourierHeat, Regime::TauLessBeta},
        {"fourier tau=beta", {1, 1, 1, 1, 1, 1, 0, 1}, Variant::FourierHeat, Regime::TauEqualsBeta},
        {"cattaneo tau<beta", {0.5, 1, 1, 0.3, 1, 1, 0.2, 1}, Variant::CattaneoHeat, Regime::TauLessBeta},
        {"cattaneo tau=beta", {1, 1, 1, 1, 1, 1, 0.2, 1}, Variant::CattaneoHeat, Regime::TauEqualsBeta},
    };
    return cases;
}

double spectral_radius(const ModelParams& p, Variant v, double xi) {
    return std::max(1.0, build_generator(p, v, xi).entries.eigenvalues().cwiseAbs().maxCoeff());
}

double spectral_gap(const ModelParams& p, Variant v, double xi) {
    double top = -std::numeric_limits<double>::infinity();
    for (cplx z : poly_roots(char_poly(p, v, xi))) top = std::max(top, z.real());
    return -top;
}

ModeState random_state(Variant v, std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    ModeState s = ModeState::zero(v);
    for (int j = 0; j < s.amp.size(); ++j) s.amp(j) = cplx(n(rng), n(rng));
    if (v == Variant::CattaneoHeat) s.q_perp = n(rng);
    return s;
}

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

// 1. Stability boundary without heat conduction.
Outcome stability_boundary() {
    int mismatches = 0, sign_errors = 0, cells = 0;
    for (int k = 0; k < 60; ++k) {
        const double tau = (k + 2) / 20.0;
        for (double xi : {0.1, 1.0, 10.0}) {
            ++cells;
            StabilityVerdict v = rh_verdict({tau, 1, 1, 0, 1, 1, 0, 1}, Variant::NoHeat, xi);
            const Verdict want = tau < 1.0 ? Verdict::Stable : tau > 1.0 ? Verdict::Unstable : Verdict::Marginal;
            if (v.verdict != want) ++mismatches;
            const bool sign_ok = want == Verdict::Stable     ? v.witness < 0
                                 : want == Verdict::Unstable ? v.witness > 0
                                                             : std::abs(v.witness) < 1e-8;
            if (!sign_ok || !v.roots_agree) ++sign_errors;
        }
    }
    return {mismatches == 0 && sign_errors == 0,
            std::to_string(cells) + " cells, " + std::to_string(mismatches) + " verdict mismatches, " +
                std::to_string(sign_errors) + " root-sign disagreements"};
}

// 2. Small- and large-frequency eigenvalue expansions.
Outcome expansions() {
    int passed = 0, total = 0;
    std::string failed;
    for (const auto& c : reference_cases()) {
        for (Limit l : {Limit::SmallXi, Limit::LargeXi}) {
            ++total;
            EigenExpansion e = l == Limit::SmallXi ? expansion_small_xi(c.p, c.v, c.r) : expansion_large_xi(c.p, c.v, c.r);
            ExpansionReport rep = verify_expansion(e, c.p, c.v, default_ladder(l, 12), 0.2, 0.01);
            if (rep.pass && rep.ladder.size() == 12) {
                ++passed;
            } else {
                failed += std::string(" ") + c.name + "/" + to_string(l);
            }
        }
    }
    return {passed == total, std::to_string(passed) + "/" + std::to_string(total) + " expansions verified" +
                                 (failed.empty() ? "" : "; failing:" + failed)};
}

// Random parameters inside the regime of a reference case.
ModelParams draw_params(const Case& c, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0, 1);
    ModelParams p = c.p;
    p.beta = 0.5 + 1.5 * u(rng);
    p.tau = c.r == Regime::TauEqualsBeta ? p.beta : p.beta * (0.1 + 0.8 * u(rng));
    p.eta = 0.1 + 1.9 * u(rng);
    if (c.v == Variant::CattaneoHeat) p.tau0 = 0.05 + 0.95 * u(rng);
    return p;
}

// 3. Energy identities along exact trajectories.
Outcome energy_identities() {
    std::string detail;
    bool all = true;
    for (const auto& c : reference_cases()) {
        std::mt19937_64 rng(1000 + static_cast<int>(c.r) * 10 + static_cast<int>(c.v));
        std::uniform_real_distribution<double> lx(-2, 2);
        struct Draw {
            ModelParams p;
            double xi;
            ModeState s;
        };
        std::vector<Draw> draws;
        for (int i = 0; i < 100; ++i) {
            ModelParams p = draw_params(c, rng);
            const double xi = std::pow(10.0, lx(rng));
            draws.push_back({p, xi, random_state(c.v, rng)});
        }
        std::vector<double> rel(draws.size());
        parallel_for(draws.size(), default_workers(), [&](std::size_t i) {
            const Draw& d = draws[i];
            const double dt = 0.002 / spectral_radius(d.p, c.v, d.xi);
            Trajectory tr = propagate_mode(build_generator(d.p, c.v, d.xi), d.s, uniform_time_grid(1000 * dt, 1000));
            rel[i] = check_energy_identity(c.v, c.r, tr, d.p, 1e-6).relative;
        });
        double worst = 0.0;
        for (double r : rel) worst = std::max(worst, r);
        all = all && worst < 1e-6;
        detail += std::string(detail.empty() ? "" : ", ") + c.name + " max " + fmt("%.1e", worst);
    }
    return {all, "residual / E(0) over 100 draws: " + detail};
}

// 4. Lyapunov recipes, monotonicity along probe trajectories, and the eta = 0 failure at tau = beta.
Outcome lyapunov_certificates() {
    std::string detail;
    bool all = true;
    for (const auto& c : reference_cases()) {
        FunctionalRecipe rc;
        try {
            rc = select_coefficients(c.p, c.v, c.r);
        } catch (const std::exception& e) {
            all = false;
            detail += std::string(c.name) + " recipe failed (" + e.what() + "); ";
            continue;
        }
        std::mt19937_64 rng(2000 + static_cast<int>(c.r) * 10 + static_cast<int>(c.v));
        std::uniform_real_distribution<double> lx(-3, 3);
        std::vector<std::pair<double, ModeState>> probes;
        for (int i = 0; i < 200; ++i) {
            const double xi = std::pow(10.0, lx(rng));
            probes.emplace_back(xi, random_state(c.v, rng));
        }
        std::vector<MonotonicityReport> mono(probes.size());
        parallel_for(probes.size(), default_workers(), [&](std::size_t i) {
            const double xi = probes[i].first;
            const double dt = 0.02 / spectral_radius(rc.params, c.v, xi);
            Trajectory tr = propagate_mode(build_generator(rc.params, c.v, xi), probes[i].second,
                                           uniform_time_grid(2000 * dt, 2000));
            mono[i] = check_monotonicity(rc, tr, rc.params, 1e-6);
        });
        int ok = 0;
        double worst = -std::numeric_limits<double>::infinity();
        for (const auto& m : mono) {
            ok += m.pass;
            worst = std::max(worst, m.max_dLdt);
        }
        const bool case_ok = ok == 200 && rc.gamma3 > 0 && rc.gamma4 > 0;
        all = all && case_ok;
        detail += std::string(c.name) + ": gamma3=" + fmt("%.3g", rc.gamma3) + " gamma4=" + fmt("%.3g", rc.gamma4) +
                  " monotone " + std::to_string(ok) + "/200 (max dL/dt " + fmt("%.1e", worst) + "); ";
    }
    int refused = 0;
    for (Variant v : {Variant::NoHeat, Variant::FourierHeat, Variant::CattaneoHeat}) {
        try {
            select_coefficients({1, 1, 1, 0, 1, 1, v == Variant::CattaneoHeat ? 0.2 : 0.0, 1}, v,
                                Regime::TauEqualsBeta);
        } catch (const RecipeError&) {
            ++refused;
        } catch (const std::exception&) {
        }
    }
    all = all && refused == 3;
    detail += "tau=beta, eta=0 refused " + std::to_string(refused) + "/3";
    return {all, detail};
}

// 5. Fitted per-mode rates dominate c * rho(|xi|) with one c per case.
Outcome pointwise_envelopes() {
    const std::vector<double> grid = [] {
        std::vector<double> g;
        for (int i = 0; i < 40; ++i) g.push_back(std::pow(10.0, -2.0 + 4.0 * i / 39.0));
        return g;
    }();
    std::string detail;
    bool all = true;
    for (const auto& c : reference_cases()) {
        FunctionalRecipe rc = select_coefficients(c.p, c.v, c.r);
        DecayEnvelope env = envelope(rc.case_id);
        std::vector<DecayFit> fits(grid.size());
        parallel_for(grid.size(), default_workers(), [&](std::size_t i) {
            const double xi = grid[i];
            const double T = 40.0 / spectral_gap(rc.params, c.v, xi);
            Trajectory tr = propagate_mode(build_generator(rc.params, c.v, xi),
                                           ModeState(Eigen::VectorXcd::Ones(state_size(c.v))), uniform_time_grid(T, 800));
            fits[i] = pointwise_decay_fit(tr, env, rc.params, c.v, default_observable(c.v, c.r));
        });
        double cmin = std::numeric_limits<double>::infinity();
        for (const auto& f : fits) cmin = std::min(cmin, f.c);
        const bool ok = cmin > 0 && cmin >= rc.implied_c;
        all = all && ok;
        detail += std::string(c.name) + ": min rate/rho " + fmt("%.3g", cmin) + " vs certified c " +
                  fmt("%.3g", rc.implied_c) + "; ";
    }
    return {all, detail};
}

// 6. Low-frequency decay exponents of ||grad^k V(t)|| for Gaussian data.
Outcome decay_exponents() {
    std::string detail;
    bool all = true;
    for (const auto& c : reference_cases()) {
        SpectralData d = sample_initial_data(InitialDataSpec{}, log_xi_grid(1e-3, 1e2, 48), c.p, c.v,
                                             default_observable(c.v, c.r));
        for (int k = 0; k < 2; ++k) {
            NormSeries s = evolve_norm_series(c.p, c.v, d, k, log_time_grid(1.0, 1e4, 16));
            ExponentFit f = fit_decay_exponent(s, 1e2, 1e4);
            const double want = theorem_low_frequency_slope(c.r, 1, k);
            const bool ok = std::abs(f.slope - want) <= 0.05;
            all = all && ok;
            detail += std::string(c.name) + " k=" + std::to_string(k) + ": " + fmt("%.4f", f.slope) + " (" +
                      fmt("%.4f", want) + "); ";
        }
    }
    return {all, detail};
}

// 7. Regularity loss: exponential high-frequency decay with Fourier heat, polynomial with Cattaneo.
Outcome regularity_loss() {
    const ModelParams fourier{0.5, 1, 1, 0.3, 1, 1, 0, 1};
    InitialDataSpec bump;
    bump.profile = Profile::Bump;
    bump.bump_lo = 2.0;
    bump.bump_hi = 4.0;
    const std::vector<double> grid = log_xi_grid(1.0, 10.0, 256);
    SpectralData d = sample_initial_data(bump, grid, fourier, Variant::FourierHeat, ObservableKind::VF);
    std::vector<double> support;
    for (double x : grid)
        if (x > 2.0 && x < 4.0) support.push_back(x);
    const double c = minimal_spectral_gap(fourier, Variant::FourierHeat, support);
    NormSeries s = evolve_norm_series(fourier, Variant::FourierHeat, d, 0, {0.0, 50.0 / c});
    const double ratio = s.high[1] / s.high[0];
    const bool fourier_ok = ratio < std::exp(-10.0);

    RegularityLossConfig cfg;
    cfg.params = {0.5, 1, 1, 0.3, 1, 1, 0.2, 1};
    cfg.ell = 2;
    cfg.t_min = 1e2;
    cfg.t_max = 1e4;
    RegularityLossReport rep = regularity_loss_experiment(cfg);
    const bool catt_ok = std::abs(rep.cattaneo_fit.slope - (-1.0)) <= 0.1 && rep.cattaneo_fit.power_law;
    return {fourier_ok && catt_ok && rep.fourier_exponential,
            "fourier bump: c=" + fmt("%.3g", c) + ", ratio at 50/c " + fmt("%.2e", ratio) + " (< " +
                fmt("%.2e", std::exp(-10.0)) + "), grid-wide ratio " + fmt("%.2e", rep.fourier_ratio) +
                "; cattaneo tail a=" + fmt("%.2f", rep.tail_exponent) + ": slope " +
                fmt("%.4f", rep.cattaneo_fit.slope) + " (-1 +- 0.1), rms " + fmt("%.3f", rep.cattaneo_fit.rms_residual)};
}

// 8. High-frequency rates of the Cattaneo tau = beta case against the certified envelope.
Outcome non_optimality() {
    const Case& c = reference_cases()[3];
    const ModelParams& p = c.p;
    const double predicted = p.kappa * p.kappa / (2 * p.eta * p.eta * p.tau0 * p.tau0);
    FunctionalRecipe rc = select_coefficients(p, c.v, c.r);
    DecayEnvelope env = envelope(rc.case_id);
    std::vector<double> grid;
    for (int i = 0; i < 10; ++i) grid.push_back(30.0 * std::pow(10.0, i / 9.0));
    std::vector<DecayFit> fits(grid.size());
    parallel_for(grid.size(), default_workers(), [&](std::size_t i) {
        const double xi = grid[i];
        const double T = 40.0 / spectral_gap(p, c.v, xi);
        Trajectory tr = propagate_mode(build_generator(p, c.v, xi), ModeState(Eigen::VectorXcd::Ones(5)),
                                       uniform_time_grid(T, 800));
        fits[i] = pointwise_decay_fit(tr, env, p, c.v, default_observable(c.v, c.r));
    });
    double worst = 0.0, lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    bool dominates = true;
    double prev_ratio = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double r2 = grid[i] * grid[i];
        const double coeff = r2 * fits[i].rate / 2;  // rate fits |Y|^2
        worst = std::max(worst, std::abs(coeff / predicted - 1));
        lo = std::min(lo, coeff);
        hi = std::max(hi, coeff);
        const double ratio = fits[i].rate / (rc.implied_c * env.rho(grid[i]));
        if (!(ratio > 1 && ratio > prev_ratio)) dominates = false;
        prev_ratio = ratio;
    }
    return {worst <= 0.1 && dominates,
            "|xi|^2 * rate over [30, 300]: " + fmt("%.3f", lo) + ".." + fmt("%.3f", hi) + " vs " +
                fmt("%.3f", predicted) + " (max rel dev " + fmt("%.3f", worst) + "); rate / (c rho) grows from " +
                fmt("%.3g", fits.front().rate / (rc.implied_c * env.rho(grid.front()))) + " to " +
                fmt("%.3g", prev_ratio)};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double budget_s;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "stability boundary", 5, stability_boundary},
        {2, "eigenvalue expansions", 10, expansions},
        {3, "energy identities", 10, energy_identities},
        {4, "Lyapunov certificates", 60, lyapunov_certificates},
        {5, "pointwise decay envelopes", 60, pointwise_envelopes},
        {6, "decay exponents", 300, decay_exponents},
        {7, "regularity loss", 60, regularity_loss},
        {8, "high-frequency rate probe", 30, non_optimality},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs < c.budget_s;
        const bool pass = o.pass && in_time;
        failures += !pass;
        std::printf("%s [%d] %s: %s (%.2f s, budget %.0f s%s)\n", pass ? "PASS" : "FAIL", c.id, c.name,
                    o.detail.c_str(), secs, c.budget_s, in_time ? "" : ", over budget");
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
