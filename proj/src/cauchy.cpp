#include "mgt/cauchy.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "mgt/dynamics.hpp"
#include "mgt/spectral.hpp"
#include "mgt/util.hpp"

namespace mgt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Composite trapezoid in log |xi| over the selected grid indices, split at |xi| = 1.
// g[i] = |xi_i|^(2k+N) |V_i|^2; the cap integrates |xi|^(2k+N-1) |V(xi_min)|^2 over [0, xi_min].
void log_trapezoid(const std::vector<double>& xi, const std::vector<double>& g, const std::vector<std::size_t>& idx,
                   double cap, double& low, double& high) {
    std::vector<double> lo_terms{cap}, hi_terms;
    for (std::size_t s = 0; s + 1 < idx.size(); ++s) {
        const std::size_t i = idx[s], j = idx[s + 1];
        const double li = std::log(xi[i]), lj = std::log(xi[j]);
        if (lj <= 0.0) {
            lo_terms.push_back(0.5 * (g[i] + g[j]) * (lj - li));
        } else if (li >= 0.0) {
            hi_terms.push_back(0.5 * (g[i] + g[j]) * (lj - li));
        } else {
            const double g1 = g[i] + (g[j] - g[i]) * (-li) / (lj - li);
            lo_terms.push_back(0.5 * (g[i] + g1) * (-li));
            hi_terms.push_back(0.5 * (g1 + g[j]) * lj);
        }
    }
    low = pairwise_sum(lo_terms);
    high = pairwise_sum(hi_terms);
}

std::vector<double> with_origin(const std::vector<double>& times, bool& prepended) {
    if (times.empty()) throw ConfigError("time list is empty");
    prepended = times[0] != 0.0;
    std::vector<double> out;
    if (prepended) out.push_back(0.0);
    out.insert(out.end(), times.begin(), times.end());
    return out;
}

}  // namespace

std::string to_string(Profile p) {
    switch (p) {
        case Profile::Gaussian: return "gaussian";
        case Profile::AlgebraicTail: return "algebraic";
        case Profile::Bump: return "bump";
    }
    return "?";
}

Profile parse_profile(const std::string& s) {
    if (s == "gaussian") return Profile::Gaussian;
    if (s == "algebraic") return Profile::AlgebraicTail;
    if (s == "bump") return Profile::Bump;
    throw ConfigError("unknown profile '" + s + "' (expected gaussian, algebraic or bump)");
}

double profile_value(const InitialDataSpec& spec, double r) {
    switch (spec.profile) {
        case Profile::Gaussian: return std::exp(-r * r);
        case Profile::AlgebraicTail: return std::pow(1.0 + r, -spec.tail_exponent);
        case Profile::Bump: {
            if (!(r > spec.bump_lo && r < spec.bump_hi)) return 0.0;
            const double s = (2.0 * r - spec.bump_lo - spec.bump_hi) / (spec.bump_hi - spec.bump_lo);
            return std::exp(1.0 - 1.0 / (1.0 - s * s));
        }
    }
    return 0.0;
}

std::vector<double> log_xi_grid(double xi_min, double xi_max, int per_decade) {
    if (!(xi_min > 0 && xi_max > xi_min && std::isfinite(xi_max)) || per_decade < 1)
        throw ConfigError("frequency grid needs 0 < xi_min < xi_max and a positive density");
    const double l0 = std::log10(xi_min), l1 = std::log10(xi_max);
    const int n = std::max(1, static_cast<int>(std::lround((l1 - l0) * per_decade)));
    std::vector<double> out(n + 1);
    for (int i = 0; i <= n; ++i) {
        const double e = l0 + (l1 - l0) * i / n;
        const double re = std::round(e);
        out[i] = std::abs(e - re) < 1e-12 ? std::pow(10.0, re) : std::pow(10.0, e);
    }
    out.front() = xi_min;
    out.back() = xi_max;
    return out;
}

double sphere_area(int dim) {
    switch (dim) {
        case 1: return 2.0;
        case 2: return 2.0 * std::numbers::pi;
        case 3: return 4.0 * std::numbers::pi;
    }
    throw ConfigError("dimension must be 1, 2 or 3");
}

SpectralData sample_initial_data(const InitialDataSpec& spec, const std::vector<double>& xi_grid,
                                 const ModelParams& p, Variant variant, ObservableKind kind) {
    validate(p, variant);
    if (xi_grid.size() < 3) throw ConfigError("frequency grid needs at least 3 points");
    for (std::size_t i = 0; i < xi_grid.size(); ++i) {
        if (!(xi_grid[i] > 0) || !std::isfinite(xi_grid[i])) throw ConfigError("frequency grid must be positive and finite");
        if (i > 0 && !(xi_grid[i] > xi_grid[i - 1])) throw ConfigError("frequency grid must be strictly increasing");
    }
    if (!(spec.amplitude > 0) || !std::isfinite(spec.amplitude)) throw ConfigError("amplitude must be positive");
    if (!std::isfinite(spec.q_perp)) throw ConfigError("transverse amplitude must be finite");
    if (spec.q_perp != 0.0 && variant != Variant::CattaneoHeat)
        throw ConfigError("a transverse flux needs the cattaneo variant");

    SpectralData d;
    d.xi_grid = xi_grid;
    d.dim = p.dim;
    d.kind = kind;
    d.spec = spec;
    const double N = p.dim;
    switch (spec.profile) {
        case Profile::Gaussian:
            d.sobolev_supremum = kInf;
            break;
        case Profile::Bump:
            if (!(spec.bump_hi > spec.bump_lo && spec.bump_lo >= 0)) throw ConfigError("bump needs 0 <= lo < hi");
            d.sobolev_supremum = kInf;
            break;
        case Profile::AlgebraicTail:
            if (!(spec.tail_exponent > 0) || !std::isfinite(spec.tail_exponent))
                throw ConfigError("tail exponent must be positive");
            d.tail_exponent = spec.tail_exponent;
            d.l1_finite = spec.tail_exponent > N;
            d.sobolev_supremum = spec.tail_exponent - N / 2.0;
            break;
    }
    if (spec.target_order && !(*spec.target_order < d.sobolev_supremum))
        throw ConfigError("the H^s norm of the data is infinite for the requested order");

    const int m = static_cast<int>(observable_map(p, variant, 1.0, kind).rows());
    const Eigen::VectorXcd dir = Eigen::VectorXcd::Constant(m, 1.0 / std::sqrt(static_cast<double>(m)));
    for (double r : xi_grid) {
        const double f = spec.amplitude * profile_value(spec, r);
        ObservableVector ov;
        ov.kind = kind;
        ov.components = f * dir;
        const double qp = f * spec.q_perp;
        ov.squared_norm = f * f + qp * qp;
        if (!ov.components.allFinite()) throw NumericalError("initial data is not finite");
        d.v0_hat.push_back(std::move(ov));
        d.q_perp.push_back(qp);
    }
    return d;
}

NormSeries evolve_norm_series(const ModelParams& p, Variant variant, const SpectralData& data, int k,
                              const std::vector<double>& times, int workers, double convergence_tol) {
    validate(p, variant);
    if (k < 0) throw ConfigError("derivative order must be nonnegative");
    if (data.dim != p.dim) throw ConfigError("data dimension does not match the parameters");
    const std::size_t nx = data.xi_grid.size();
    if (nx < 3 || data.v0_hat.size() != nx || data.q_perp.size() != nx)
        throw ConfigError("spectral data is incomplete");
    bool prepended = false;
    const std::vector<double> tgrid = with_origin(times, prepended);
    const std::size_t nt = tgrid.size();
    if (workers <= 0) workers = default_workers();

    // |V(xi_i, t_j)|^2
    std::vector<std::vector<double>> sq(nx);
    parallel_for(nx, workers, [&](std::size_t i) {
        const double r = data.xi_grid[i];
        ModeState s0 = state_from_observable(p, variant, r, data.v0_hat[i].components, data.kind, data.q_perp[i]);
        Trajectory tr = propagate_mode(build_generator(p, variant, r), s0, tgrid);
        sq[i].resize(nt);
        for (std::size_t j = 0; j < nt; ++j)
            sq[i][j] = observable(p, variant, r, tr.states[j], data.kind).squared_norm;
    });

    const double omega = sphere_area(p.dim);
    const double power = 2.0 * k + p.dim;
    std::vector<std::size_t> fine(nx), coarse;
    for (std::size_t i = 0; i < nx; ++i) fine[i] = i;
    for (std::size_t i = 0; i < nx; i += 2) coarse.push_back(i);
    if (coarse.back() != nx - 1) coarse.push_back(nx - 1);
    std::vector<double> rp(nx);
    for (std::size_t i = 0; i < nx; ++i) rp[i] = std::pow(data.xi_grid[i], power);

    NormSeries out;
    out.k = k;
    std::vector<double> g(nx);
    for (std::size_t j = 0; j < nt; ++j) {
        for (std::size_t i = 0; i < nx; ++i) g[i] = rp[i] * sq[i][j];
        const double cap = g[0] / power;
        double lo, hi, clo, chi;
        log_trapezoid(data.xi_grid, g, fine, cap, lo, hi);
        log_trapezoid(data.xi_grid, g, coarse, cap, clo, chi);
        const double val = omega * (lo + hi), cval = omega * (clo + chi);
        if (!std::isfinite(val)) throw NumericalError("norm quadrature produced a non-finite value");
        const double err = val > 0 ? std::abs(val - cval) / val : 0.0;
        if (prepended && j == 0) continue;
        out.times.push_back(tgrid[j]);
        out.values.push_back(val);
        out.low.push_back(omega * lo);
        out.high.push_back(omega * hi);
        out.error.push_back(err);
        if (!(err < convergence_tol)) out.converged = false;
    }
    return out;
}

void write_norm_series_csv(std::ostream& os, const NormSeries& s) {
    os << "# k=" << s.k << " converged=" << (s.converged ? "true" : "false") << "\n";
    os << "t,norm,L1_part,L2_part,rel_error\n";
    for (std::size_t i = 0; i < s.times.size(); ++i)
        os << fmt17(s.times[i]) << ',' << fmt17(std::sqrt(s.values[i])) << ',' << fmt17(s.low[i]) << ','
           << fmt17(s.high[i]) << ',' << fmt17(s.error[i]) << '\n';
}

ExponentFit fit_decay_exponent(const NormSeries& s, double t_lo, double t_hi, NormPart part,
                               double residual_threshold) {
    if (s.times.empty()) throw ConfigError("norm series is empty");
    if (!(t_lo > 0 && t_hi > t_lo)) throw ConfigError("fit window needs 0 < t_lo < t_hi");
    if (t_hi < 100.0 * t_lo * (1 - 1e-12)) throw ConfigError("fit window must span at least two decades");
    if (t_lo < s.times.front() * (1 - 1e-12) || t_hi > s.times.back() * (1 + 1e-12))
        throw ConfigError("fit window lies outside the sampled times");
    const std::vector<double>& v = part == NormPart::Total ? s.values : part == NormPart::Low ? s.low : s.high;
    std::vector<double> x, y;
    for (std::size_t i = 0; i < s.times.size(); ++i) {
        const double t = s.times[i];
        if (t < t_lo * (1 - 1e-12) || t > t_hi * (1 + 1e-12)) continue;
        if (!(v[i] > 0)) throw NumericalError("norm vanished inside the fit window");
        x.push_back(std::log1p(t));
        y.push_back(0.5 * std::log(v[i]));
    }
    if (x.size() < 3) throw ConfigError("fit window holds fewer than 3 samples");
    LinearFit lf = linear_fit(x, y);
    ExponentFit out;
    out.slope = lf.slope;
    out.stderr_ = lf.slope_stderr;
    out.intercept = lf.intercept;
    out.rms_residual = lf.rms_residual;
    out.points = static_cast<int>(x.size());
    out.power_law = lf.rms_residual <= residual_threshold;
    return out;
}

double theorem_low_frequency_slope(Regime regime, int dim, int k) {
    switch (regime) {
        case Regime::TauLessBeta: return -dim / 4.0 - k / 2.0;
        case Regime::TauEqualsBeta: return -dim / 8.0 - k / 4.0;
        case Regime::TauGreaterBeta: break;
    }
    throw ConfigError("no decay for tau > beta");
}

double theorem_regularity_slope(Regime regime, int ell) {
    switch (regime) {
        case Regime::TauLessBeta: return -ell / 2.0;
        case Regime::TauEqualsBeta: return -ell / 3.0;
        case Regime::TauGreaterBeta: break;
    }
    throw ConfigError("no decay for tau > beta");
}

double minimal_spectral_gap(const ModelParams& p, Variant variant, const std::vector<double>& xi) {
    if (xi.empty()) throw ConfigError("no frequencies given");
    double gap = kInf;
    for (double r : xi) {
        double top = -kInf;
        for (cplx z : poly_roots(char_poly(p, variant, r))) top = std::max(top, z.real());
        gap = std::min(gap, -top);
    }
    return gap;
}

RegularityLossReport regularity_loss_experiment(const RegularityLossConfig& cfg) {
    const ModelParams& pc = cfg.params;
    validate(pc, Variant::CattaneoHeat);
    if (cfg.k < 0 || cfg.ell < 1) throw ConfigError("need k >= 0 and ell >= 1");
    RegularityLossReport rep;
    rep.regime = classify_regime(pc);
    if (rep.regime == Regime::TauGreaterBeta) throw ConfigError("regularity loss needs tau <= beta");
    const double half_n = pc.dim / 2.0, order = cfg.k + cfg.ell;
    const double a = cfg.tail_exponent > 0 ? cfg.tail_exponent : order + half_n + 0.1;
    if (!(a > order + half_n)) throw ConfigError("tail exponent leaves the k+ell derivative norm infinite");
    if (a > order + 1 + half_n) throw ConfigError("tail exponent makes the k+ell+1 derivative norm finite");
    rep.tail_exponent = a;

    InitialDataSpec spec;
    spec.profile = Profile::AlgebraicTail;
    spec.tail_exponent = a;
    spec.target_order = order;
    const std::vector<double> grid = log_xi_grid(cfg.xi_min, cfg.xi_max, cfg.xi_per_decade);
    const int workers = cfg.workers > 0 ? cfg.workers : default_workers();

    ModelParams pf = pc;
    pf.tau0 = 0.0;
    SpectralData df = sample_initial_data(spec, grid, pf, Variant::FourierHeat,
                                          default_observable(Variant::FourierHeat, rep.regime));
    std::vector<double> high_grid;
    for (double r : grid)
        if (r >= 1.0) high_grid.push_back(r);
    if (high_grid.empty()) throw ConfigError("grid has no frequencies above 1");
    rep.fourier_gap = minimal_spectral_gap(pf, Variant::FourierHeat, high_grid);
    if (!(rep.fourier_gap > 0)) throw NumericalError("fourier arm has no spectral gap at high frequency");
    rep.fourier_time = 50.0 / rep.fourier_gap;
    rep.fourier = evolve_norm_series(pf, Variant::FourierHeat, df, cfg.k, {0.0, rep.fourier_time}, workers);
    rep.fourier_ratio = rep.fourier.high[1] / rep.fourier.high[0];
    rep.fourier_exponential = rep.fourier_ratio < std::exp(-10.0);

    SpectralData dc = sample_initial_data(spec, grid, pc, Variant::CattaneoHeat,
                                          default_observable(Variant::CattaneoHeat, rep.regime));
    std::vector<double> times = log_time_grid(cfg.t_min, cfg.t_max, cfg.t_per_decade);
    rep.cattaneo = evolve_norm_series(pc, Variant::CattaneoHeat, dc, cfg.k, times, workers);
    rep.cattaneo_fit = fit_decay_exponent(rep.cattaneo, cfg.t_min, cfg.t_max, NormPart::High);
    rep.theorem_slope = theorem_regularity_slope(rep.regime, cfg.ell);
    rep.optimal_slope = -cfg.ell / 2.0;
    rep.cattaneo_consistent = rep.cattaneo_fit.slope <= rep.theorem_slope + 0.1 && rep.cattaneo_fit.power_law;
    return rep;
}

}  // namespace mgt
