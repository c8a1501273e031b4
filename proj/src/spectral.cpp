#include "mgt/spectral.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <limits>
#include <numeric>

namespace mgt {

namespace {

using wide = long double;
using wcplx = std::complex<wide>;

template <class T>
std::vector<std::complex<T>> closed_form_coeffs(const ModelParams& p, Variant variant, T r) {
    using C = std::complex<T>;
    const T tau = p.tau, beta = p.beta, eta = p.eta, z = -r * r, e2 = eta * eta;
    if (variant != Variant::CattaneoHeat) {
        return {C(1), C((1 - tau * z) / tau), C((tau * e2 * z - beta - 1) * z / tau),
                C(((e2 + beta) * z - 1) * z / tau), C(z * z / tau)};
    }
    const T t0 = p.tau0, k2 = T(p.kappa) * T(p.kappa), tt = tau * t0;
    return {C(1),
            C(1 / t0 + 1 / tau),
            C((tau * e2 * t0 * z * z - (tau * k2 + beta * t0) * z + 1) / tt),
            C(((tau + t0) * e2 * z - (beta + t0 + k2)) * z / tt),
            C(((e2 + beta * k2) * z - 1) * z / tt),
            C(k2 * z * z / tt)};
}

template <class T>
std::complex<T> horner(const std::vector<std::complex<T>>& c, std::complex<T> x) {
    std::complex<T> acc = c[0];
    for (std::size_t i = 1; i < c.size(); ++i) acc = acc * x + c[i];
    return acc;
}

template <class T>
std::complex<T> horner_deriv(const std::vector<std::complex<T>>& c, std::complex<T> x) {
    const std::size_t n = c.size() - 1;
    std::complex<T> acc = T(n) * c[0];
    for (std::size_t i = 1; i < n; ++i) acc = acc * x + T(n - i) * c[i];
    return acc;
}

template <class T>
T abs_poly(const std::vector<std::complex<T>>& c, std::complex<T> x) {
    T ax = std::abs(x), acc = std::abs(c[0]);
    for (std::size_t i = 1; i < c.size(); ++i) acc = acc * ax + std::abs(c[i]);
    return acc;
}

// Simultaneous Aberth-Ehrlich refinement; keeps clustered roots apart.
template <class T>
void aberth_refine(const std::vector<std::complex<T>>& c, std::vector<std::complex<T>>& z, int iters) {
    const std::size_t n = z.size();
    for (int it = 0; it < iters; ++it) {
        T change = 0;
        for (std::size_t i = 0; i < n; ++i) {
            std::complex<T> pz = horner(c, z[i]);
            if (pz == std::complex<T>(0)) continue;
            std::complex<T> ratio = pz / horner_deriv(c, z[i]);
            std::complex<T> s(0);
            for (std::size_t j = 0; j < n; ++j)
                if (j != i && z[i] != z[j]) s += T(1) / (z[i] - z[j]);
            std::complex<T> step = ratio / (T(1) - ratio * s);
            if (!std::isfinite(std::abs(step))) continue;
            z[i] -= step;
            change = std::max(change, std::abs(step) / std::max(std::abs(z[i]), T(1e-300)));
        }
        if (change < 4 * std::numeric_limits<T>::epsilon()) break;
    }
}

std::vector<cplx> companion_roots(const std::vector<cplx>& c) {
    const int n = static_cast<int>(c.size()) - 1;
    Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(n, n);
    for (int j = 0; j < n; ++j) comp(0, j) = -c[j + 1] / c[0];
    for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
    // Parlett-Reinsch balancing by powers of two.
    for (bool done = false; !done;) {
        done = true;
        for (int i = 0; i < n; ++i) {
            double rn = 0.0, cn = 0.0;
            for (int j = 0; j < n; ++j)
                if (j != i) {
                    rn += std::abs(comp(i, j));
                    cn += std::abs(comp(j, i));
                }
            if (rn == 0.0 || cn == 0.0) continue;
            double f = 1.0;
            const double s = rn + cn;
            while (cn < rn / 2) { cn *= 2; rn /= 2; f *= 2; }
            while (cn >= rn * 2) { cn /= 2; rn *= 2; f /= 2; }
            if ((rn + cn) < 0.95 * s) {
                done = false;
                comp.row(i) /= f;
                comp.col(i) *= f;
            }
        }
    }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
    if (es.info() != Eigen::Success) throw NumericalError("companion eigensolve did not converge");
    std::vector<cplx> out(n);
    for (int i = 0; i < n; ++i) out[i] = es.eigenvalues()(i);
    return out;
}

std::vector<wcplx> widen(const std::vector<cplx>& v) {
    std::vector<wcplx> out;
    for (auto x : v) out.emplace_back(x.real(), x.imag());
    return out;
}

}  // namespace

bool has_closed_form(const ModelParams& p, Variant variant) {
    if (p.a != 1.0) return false;
    if (variant == Variant::CattaneoHeat) return p.gamma == p.kappa;
    return p.gamma * p.kappa == 1.0;
}

std::vector<cplx> matrix_char_poly(const Eigen::MatrixXcd& a) {
    const int n = static_cast<int>(a.rows());
    if (n != a.cols() || n > 8) throw ConfigError("characteristic polynomial needs a square matrix of size <= 8");
    // Sum over permutations of prod_i (lambda delta - a)(i, perm i); no powers of the matrix are
    // formed, so there is no cancellation beyond that of the determinant itself.
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<wcplx> acc(n + 1, wcplx(0));
    std::vector<wcplx> poly, next;
    do {
        int parity = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) parity ^= perm[i] > perm[j];
        poly.assign(1, wcplx(1));
        bool zero = false;
        for (int i = 0; i < n && !zero; ++i) {
            const wcplx c(-a(i, perm[i]).real(), -a(i, perm[i]).imag());
            const bool diag = perm[i] == i;
            zero = !diag && c == wcplx(0);
            next.assign(poly.size() + 1, wcplx(0));
            for (std::size_t k = 0; k < poly.size(); ++k) {
                next[k] += poly[k] * c;
                if (diag) next[k + 1] += poly[k];
            }
            poly.swap(next);
        }
        if (zero) continue;
        for (std::size_t k = 0; k < poly.size(); ++k) acc[k] += parity ? -poly[k] : poly[k];
    } while (std::next_permutation(perm.begin(), perm.end()));
    std::vector<cplx> c(n + 1);
    for (int j = 0; j <= n; ++j) c[j] = cplx(static_cast<double>(acc[n - j].real()), static_cast<double>(acc[n - j].imag()));
    return c;
}

CharPoly char_poly(const ModelParams& p, Variant variant, double xi_abs) {
    validate(p, variant);
    if (!(xi_abs >= 0)) throw ConfigError("|xi| must be nonnegative");
    CharPoly out;
    out.xi_abs = xi_abs;
    out.degree = state_size(variant);
    out.scale = variant == Variant::CattaneoHeat ? p.tau * p.tau0 : p.tau;
    if (has_closed_form(p, variant)) {
        out.coeffs = closed_form_coeffs<double>(p, variant, xi_abs);
    } else {
        out.coeffs = matrix_char_poly(build_generator(p, variant, xi_abs).entries);
        out.from_determinant = true;
        for (auto& c : out.coeffs) c = cplx(c.real(), 0.0);  // imaginary parts are rounding noise
    }
    out.is_real = std::all_of(out.coeffs.begin(), out.coeffs.end(),
                              [](cplx c) { return c.imag() == 0.0; });
    return out;
}

cplx poly_eval(const std::vector<cplx>& coeffs, cplx x) { return horner(coeffs, x); }

std::vector<cplx> poly_roots(const std::vector<cplx>& coeffs) {
    if (coeffs.size() < 2) return {};
    if (coeffs[0] == cplx(0.0)) throw NumericalError("leading coefficient is zero");
    // Exact zero roots come from trailing zero coefficients and are deflated first.
    std::size_t zeros = 0;
    while (zeros + 1 < coeffs.size() && coeffs[coeffs.size() - 1 - zeros] == cplx(0.0)) ++zeros;
    std::vector<cplx> c(coeffs.begin(), coeffs.end() - zeros);
    for (auto& x : c) x /= coeffs[0];
    if (c.size() < 2) return std::vector<cplx>(zeros, cplx(0.0));
    std::vector<cplx> roots = companion_roots(c);

    // Newton polish in extended precision; each step is kept only if it lowers the residual.
    std::vector<wcplx> cw = widen(c);
    std::vector<wcplx> rw = widen(roots);
    aberth_refine(cw, rw, 50);
    for (std::size_t i = 0; i < roots.size(); ++i) {
        cplx z(static_cast<double>(rw[i].real()), static_cast<double>(rw[i].imag()));
        if (std::isfinite(std::abs(z)) && std::abs(horner(cw, rw[i])) < std::abs(horner(cw, widen({roots[i]})[0])))
            roots[i] = z;
    }
    double worst = 0.0;
    for (auto& z : roots) {
        wcplx zw(z.real(), z.imag());
        for (int it = 0; it < 8; ++it) {
            wcplx pz = horner(cw, zw), dz = horner_deriv(cw, zw);
            if (dz == wcplx(0) || pz == wcplx(0)) break;
            wcplx cand = zw - pz / dz;
            if (!(std::abs(horner(cw, cand)) < std::abs(pz))) break;
            zw = cand;
        }
        z = cplx(static_cast<double>(zw.real()), static_cast<double>(zw.imag()));
        double scale = static_cast<double>(abs_poly(cw, zw));
        double res = scale > 0 ? static_cast<double>(std::abs(horner(cw, zw))) / scale : 0.0;
        worst = std::max(worst, res);
    }
    if (!(worst <= 1e-10)) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.3e", worst);
        throw NumericalError(std::string("root finder backward error ") + buf + " exceeds 1e-10");
    }
    roots.insert(roots.end(), zeros, cplx(0.0));
    return roots;
}

std::vector<cplx> poly_roots(const CharPoly& p) { return poly_roots(p.coeffs); }

std::vector<double> hurwitz_minors(const CharPoly& p) {
    if (!p.is_real) throw ConfigError("Hurwitz minors need real coefficients");
    const int n = static_cast<int>(p.coeffs.size()) - 1;
    std::vector<double> a(n + 1);
    for (int i = 0; i <= n; ++i) a[i] = p.coeffs[i].real() * p.scale;
    if (!(a[0] > 0)) throw ConfigError("Hurwitz minors need a positive leading coefficient");
    auto coef = [&](int k) { return (k < 0 || k > n) ? 0.0 : a[k]; };
    Eigen::MatrixXd h(n, n);
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j) h(i - 1, j - 1) = coef(2 * j - i);
    std::vector<double> minors(n);
    for (int k = 1; k <= n; ++k) minors[k - 1] = h.topLeftCorner(k, k).determinant();
    return minors;
}

std::vector<double> hurwitz_minor_bounds(const CharPoly& p) {
    const int n = static_cast<int>(p.coeffs.size()) - 1;
    auto coef = [&](int k) { return (k < 0 || k > n) ? 0.0 : std::abs(p.coeffs[k].real() * p.scale); };
    std::vector<double> out(n);
    for (int k = 1; k <= n; ++k) {
        // Permanent of |H_k| by expansion over column subsets (k <= 5).
        std::vector<double> perm(1u << k, 0.0);
        perm[0] = 1.0;
        for (unsigned mask = 1; mask < (1u << k); ++mask) {
            const int row = __builtin_popcount(mask) - 1;
            double acc = 0.0;
            for (int j = 0; j < k; ++j)
                if (mask & (1u << j)) acc += coef(2 * (j + 1) - (row + 1)) * perm[mask ^ (1u << j)];
            perm[mask] = acc;
        }
        out[k - 1] = perm[(1u << k) - 1];
    }
    return out;
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Stable: return "Stable";
        case Verdict::Marginal: return "Marginal";
        case Verdict::Unstable: return "Unstable";
    }
    return "?";
}

StabilityVerdict rh_verdict(const ModelParams& p, Variant variant, double xi_abs) {
    CharPoly cp = char_poly(p, variant, xi_abs);
    StabilityVerdict out;
    out.minors = hurwitz_minors(cp);
    std::vector<cplx> roots = poly_roots(cp);
    double root_scale = 0.0;
    out.witness = -std::numeric_limits<double>::infinity();
    for (auto z : roots) {
        out.witness = std::max(out.witness, z.real());
        root_scale = std::max(root_scale, std::abs(z));
    }
    if (xi_abs == 0.0) {
        out.verdict = Verdict::Marginal;
    } else {
        const std::vector<double> bounds = hurwitz_minor_bounds(cp);
        bool negative = false, marginal = false;
        for (std::size_t k = 0; k < out.minors.size(); ++k) {
            const double band = 1e3 * std::numeric_limits<double>::epsilon() * bounds[k];
            if (out.minors[k] < -band) negative = true;
            else if (out.minors[k] <= band) marginal = true;
        }
        out.verdict = negative ? Verdict::Unstable : marginal ? Verdict::Marginal : Verdict::Stable;
    }
    const double tol = 1e-12 * std::max(root_scale, 1e-300);
    switch (out.verdict) {
        case Verdict::Stable: out.roots_agree = out.witness < -tol; break;
        case Verdict::Unstable: out.roots_agree = out.witness > tol; break;
        case Verdict::Marginal: out.roots_agree = std::abs(out.witness) <= 1e-8 * std::max(root_scale, 1.0); break;
    }
    return out;
}

std::string to_string(Limit l) { return l == Limit::SmallXi ? "small" : "large"; }

EigenExpansion expansion_small_xi(const ModelParams& p, Variant variant, Regime regime) {
    validate(p, variant);
    if (!has_closed_form(p, variant))
        throw ConfigError("expansions are available only for a = 1 and normalized gamma, kappa");
    if (regime == Regime::TauGreaterBeta) throw ConfigError("no expansion for tau > beta");
    EigenExpansion e;
    e.limit = Limit::SmallXi;
    e.variant = variant;
    e.regime = regime;
    const bool catt = variant == Variant::CattaneoHeat;
    const double k2 = catt ? p.kappa * p.kappa : 1.0;
    if (regime == Regime::TauLessBeta) {
        double c = -(p.beta - p.tau) / 2;
        e.branches.push_back({"elastic+", c, 2, 3});
        e.branches.push_back({"elastic-", c, 2, 3});
    } else {
        double c = -p.eta * p.eta * k2 / 2;
        e.branches.push_back({"elastic+", c, 4, 5});
        e.branches.push_back({"elastic-", c, 4, 5});
    }
    e.branches.push_back({"thermal", -k2, 2, 3});
    e.branches.push_back({"relaxation", -1.0 / p.tau, 0, 2});
    if (catt) e.branches.push_back({"flux", -1.0 / p.tau0, 0, 2});
    return e;
}

SigmaRoots sigma_cubic(const ModelParams& p) {
    if (!(p.eta > 0 && p.tau > 0 && p.tau0 > 0)) throw ConfigError("sigma cubic needs eta, tau, tau0 > 0");
    const double e2 = p.eta * p.eta, k2 = p.kappa * p.kappa;
    std::vector<cplx> c = {p.tau * e2 * p.tau0, e2 * (p.tau0 + p.tau), e2 + p.beta * k2, k2};
    SigmaRoots out;
    out.roots = poly_roots(c);
    std::sort(out.roots.begin(), out.roots.end(), [](cplx a, cplx b) {
        return std::abs(a.imag()) < std::abs(b.imag()) ||
               (std::abs(a.imag()) == std::abs(b.imag()) && a.real() > b.real());
    });
    out.real_root = out.roots.front().real();
    out.real_root_bracketed = out.real_root < 0 && out.real_root > -1.0 / p.tau - 1.0 / p.tau0;
    out.all_negative = std::all_of(out.roots.begin(), out.roots.end(), [](cplx z) { return z.real() < 0; });
    return out;
}

EigenExpansion expansion_large_xi(const ModelParams& p, Variant variant, Regime regime) {
    validate(p, variant);
    if (!has_closed_form(p, variant))
        throw ConfigError("expansions are available only for a = 1 and normalized gamma, kappa");
    if (regime == Regime::TauGreaterBeta) throw ConfigError("no expansion for tau > beta");
    if (!(p.eta > 0)) throw ConfigError("large-|xi| expansion needs eta > 0");
    EigenExpansion e;
    e.limit = Limit::LargeXi;
    e.variant = variant;
    e.regime = regime;
    const double e2 = p.eta * p.eta, tau = p.tau, beta = p.beta;
    if (variant != Variant::CattaneoHeat) {
        if (regime == Regime::TauLessBeta) {
            cplx disc = std::sqrt(cplx((beta + e2) * (beta + e2) - 4 * tau * e2));
            e.branches.push_back({"bounded+", (-(beta + e2 - disc) / (2 * tau * e2)).real(), 0, -1});
            e.branches.push_back({"bounded-", (-(beta + e2 + disc) / (2 * tau * e2)).real(), 0, -1});
            if (std::abs(disc) == 0.0) e.degenerate = true;
        } else {
            e.branches.push_back({"relaxation", -1.0 / tau, 0, -1});
            e.branches.push_back({"thermal", -1.0 / e2, 0, -1});
        }
        cplx d = std::sqrt(cplx(1 - 4 * e2));
        e.branches.push_back({"parabolic-", (-(1.0 - d) / 2.0).real(), 2, 1});
        e.branches.push_back({"parabolic+", (-(1.0 + d) / 2.0).real(), 2, 1});
        if (std::abs(1 - 4 * e2) < 1e-12) e.degenerate = true;
        return e;
    }
    const double t0 = p.tau0, k2 = p.kappa * p.kappa;
    double slow = -((beta - tau) * t0 * t0 + k2 * tau * tau) / (2 * tau * tau * e2 * t0 * t0);
    e.branches.push_back({"slow+", slow, -2, -3});
    e.branches.push_back({"slow-", slow, -2, -3});
    SigmaRoots s = sigma_cubic(p);
    e.side_data = s.roots;
    for (std::size_t i = 0; i < s.roots.size(); ++i)
        e.branches.push_back({"sigma" + std::to_string(i + 3), s.roots[i].real(), 0, -1});
    for (std::size_t i = 0; i < s.roots.size(); ++i)
        for (std::size_t j = i + 1; j < s.roots.size(); ++j)
            if (std::abs(s.roots[i] - s.roots[j]) < 1e-6 * (1 + std::abs(s.roots[i]))) e.degenerate = true;
    return e;
}

std::vector<double> default_ladder(Limit limit, int points) {
    std::vector<double> out;
    for (int k = 0; k < points; ++k)
        out.push_back(limit == Limit::SmallXi ? std::ldexp(1.0, -(k + 2)) : std::ldexp(1.0, k + 2));
    return out;
}

ExpansionReport verify_expansion(const EigenExpansion& e, const ModelParams& p, Variant variant,
                                 const std::vector<double>& ladder_in, double slope_tol,
                                 double coeff_tol) {
    const int n = state_size(variant);
    if (static_cast<int>(e.branches.size()) != n) throw ConfigError("branch count does not match degree");
    if (ladder_in.size() < 3) throw ConfigError("ladder needs at least 3 points");
    const bool small = e.limit == Limit::SmallXi;
    ExpansionReport rep;
    rep.limit = e.limit;
    rep.ladder = ladder_in;
    // Order the ladder by distance from the limit: index 0 is closest.
    std::sort(rep.ladder.begin(), rep.ladder.end(), [&](double a, double b) { return small ? a < b : a > b; });
    const std::size_t m = rep.ladder.size();
    const bool closed = has_closed_form(p, variant);

    std::vector<std::vector<wcplx>> matched(m, std::vector<wcplx>(n));
    std::vector<std::vector<wide>> noise(m, std::vector<wide>(n));
    std::vector<int> perm(n);
    for (std::size_t j = 0; j < m; ++j) {
        const double r = rep.ladder[j];
        CharPoly cp = char_poly(p, variant, r);
        std::vector<wcplx> cw = closed ? closed_form_coeffs<wide>(p, variant, static_cast<wide>(r)) : widen(cp.coeffs);
        std::vector<wcplx> z = widen(poly_roots(cp));
        aberth_refine(cw, z, 60);

        // Assign roots to branches: prediction mismatch plus continuity with the previous rung.
        std::iota(perm.begin(), perm.end(), 0);
        std::vector<int> best(perm);
        wide best_cost = std::numeric_limits<wide>::infinity();
        do {
            wide cost = 0;
            for (int b = 0; b < n; ++b) {
                const Branch& br = e.branches[b];
                wide pred = br.coeff * std::pow(static_cast<wide>(r), static_cast<wide>(br.power));
                wide re = z[perm[b]].real();
                cost += std::abs(re - pred) / (std::abs(pred) + std::numeric_limits<wide>::min());
                if (j > 0) {
                    wcplx prev = matched[j - 1][b];
                    wide ratio = std::abs(prev) > 0 ? std::abs(z[perm[b]].imag() - prev.imag()) / (std::abs(z[perm[b]]) + std::abs(prev)) : 0;
                    cost += 1e-3L * ratio;
                }
            }
            if (cost < best_cost) { best_cost = cost; best = perm; }
        } while (std::next_permutation(perm.begin(), perm.end()));
        for (int b = 0; b < n; ++b) {
            matched[j][b] = z[best[b]];
            wcplx d = horner_deriv(cw, z[best[b]]);
            wide cond = abs_poly(cw, z[best[b]]) / std::max(std::abs(d), std::numeric_limits<wide>::min());
            // Rounding of the extended-precision root plus that of the double-precision prediction.
            const Branch& br = e.branches[b];
            wide pred = std::abs(br.coeff * std::pow(static_cast<wide>(r), static_cast<wide>(br.power)));
            noise[j][b] = 16 * std::numeric_limits<wide>::epsilon() * cond + 4 * std::numeric_limits<double>::epsilon() * pred;
        }
        for (int a = 0; a < n && rep.crossing_xi == 0.0; ++a)
            for (int b = a + 1; b < n; ++b)
                if (e.branches[a].coeff != e.branches[b].coeff &&
                    std::abs(matched[j][a] - matched[j][b]) <= 1e-9L * (std::abs(matched[j][a]) + 1e-300L))
                    rep.crossing_xi = r;
    }

    rep.pass = rep.crossing_xi == 0.0;
    for (int b = 0; b < n; ++b) {
        const Branch& br = e.branches[b];
        BranchReport out;
        out.id = br.id;
        out.predicted_coeff = br.coeff;
        out.expected_order = small ? br.remainder : -br.remainder;
        const double r0 = rep.ladder[0];
        out.measured_coeff = static_cast<double>(matched[0][b].real() / std::pow(static_cast<wide>(r0), static_cast<wide>(br.power)));
        out.coeff_rel_error = br.coeff != 0.0 ? std::abs(out.measured_coeff - br.coeff) / std::abs(br.coeff)
                                              : std::abs(out.measured_coeff);
        // Remainder slope against the expansion variable s (|xi| or 1/|xi|), over the points
        // nearest the limit that sit above the rounding floor.
        std::vector<double> xs, ys;
        for (std::size_t j = 0; j < m; ++j) {
            const double r = rep.ladder[j];
            wide pred = br.coeff * std::pow(static_cast<wide>(r), static_cast<wide>(br.power));
            wide rem = std::abs(matched[j][b].real() - pred);
            if (rem <= noise[j][b]) continue;
            xs.push_back(std::log(small ? r : 1.0 / r));
            ys.push_back(std::log(static_cast<double>(rem)));
            if (xs.size() == m / 2) break;
        }
        if (xs.size() < 3) {
            out.at_noise_floor = true;
            out.measured_order = std::numeric_limits<double>::infinity();
        } else {
            double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
            double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
            double sxy = 0, sxx = 0;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                sxy += (xs[i] - mx) * (ys[i] - my);
                sxx += (xs[i] - mx) * (xs[i] - mx);
            }
            out.measured_order = sxy / sxx;
        }
        double relax = e.degenerate ? 0.5 : 0.0;
        out.pass = out.measured_order >= out.expected_order - slope_tol - relax &&
                   out.coeff_rel_error <= coeff_tol;
        rep.pass = rep.pass && out.pass;
        rep.branches.push_back(out);
    }
    return rep;
}

}  // namespace mgt
