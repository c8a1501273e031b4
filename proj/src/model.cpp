#include "mgt/model.hpp"

#include <cmath>

namespace mgt {

namespace {

const cplx I(0.0, 1.0);

bool is_cattaneo_kind(ObservableKind k) { return k == ObservableKind::VC || k == ObservableKind::WC; }
bool is_w_kind(ObservableKind k) { return k == ObservableKind::WF || k == ObservableKind::WC; }

void check_kind(Variant variant, ObservableKind kind) {
    bool catt = variant == Variant::CattaneoHeat;
    if (catt != is_cattaneo_kind(kind))
        throw ConfigError("observable " + to_string(kind) + " does not apply to variant " + to_string(variant));
}

void check_state(Variant variant, const ModeState& s) {
    if (s.amp.size() != state_size(variant))
        throw ConfigError("state has " + std::to_string(s.amp.size()) + " components, variant " +
                          to_string(variant) + " needs " + std::to_string(state_size(variant)));
}

}  // namespace

std::string to_string(Variant v) {
    switch (v) {
        case Variant::NoHeat: return "noheat";
        case Variant::FourierHeat: return "fourier";
        case Variant::CattaneoHeat: return "cattaneo";
    }
    return "?";
}

std::string to_string(Regime r) {
    switch (r) {
        case Regime::TauLessBeta: return "tau-lt-beta";
        case Regime::TauEqualsBeta: return "tau-eq-beta";
        case Regime::TauGreaterBeta: return "tau-gt-beta";
    }
    return "?";
}

std::string to_string(ObservableKind k) {
    switch (k) {
        case ObservableKind::VF: return "V_F";
        case ObservableKind::WF: return "W_F";
        case ObservableKind::VC: return "V_C";
        case ObservableKind::WC: return "W_C";
    }
    return "?";
}

Variant parse_variant(const std::string& s) {
    if (s == "noheat") return Variant::NoHeat;
    if (s == "fourier") return Variant::FourierHeat;
    if (s == "cattaneo") return Variant::CattaneoHeat;
    throw ConfigError("unknown variant '" + s + "' (expected noheat, fourier or cattaneo)");
}

Regime parse_regime(const std::string& s) {
    if (s == "tau-lt-beta") return Regime::TauLessBeta;
    if (s == "tau-eq-beta") return Regime::TauEqualsBeta;
    if (s == "tau-gt-beta") return Regime::TauGreaterBeta;
    throw ConfigError("unknown regime '" + s + "' (expected tau-lt-beta, tau-eq-beta or tau-gt-beta)");
}

void validate(const ModelParams& p, Variant variant) {
    auto bad = [](const std::string& m) { throw ConfigError(m); };
    if (!(p.tau > 0)) bad("tau must be positive");
    if (!(p.beta > 0)) bad("beta must be positive");
    if (!(p.a > 0)) bad("a must be positive");
    if (!(p.gamma > 0)) bad("gamma must be positive");
    if (!(p.kappa > 0)) bad("kappa must be positive");
    if (!(p.tau0 >= 0)) bad("tau0 must be nonnegative");
    if (!(p.eta >= 0)) bad("eta must be nonnegative");
    if (p.dim < 1 || p.dim > 3) bad("dimension must be 1, 2 or 3");
    for (double x : {p.tau, p.beta, p.a, p.eta, p.gamma, p.kappa, p.tau0})
        if (!std::isfinite(x)) bad("parameters must be finite");
    switch (variant) {
        case Variant::NoHeat:
            if (p.eta != 0) bad("noheat variant requires eta = 0");
            if (p.tau0 != 0) bad("noheat variant requires tau0 = 0");
            break;
        case Variant::FourierHeat:
            if (p.tau0 != 0) bad("fourier variant requires tau0 = 0");
            if (!(p.eta > 0)) bad("fourier variant requires eta > 0");
            break;
        case Variant::CattaneoHeat:
            if (!(p.tau0 > 0)) bad("cattaneo variant requires tau0 > 0");
            if (!(p.eta > 0)) bad("cattaneo variant requires eta > 0");
            break;
    }
}

int state_size(Variant variant) { return variant == Variant::CattaneoHeat ? 5 : 4; }

ModeState ModeState::zero(Variant variant) {
    return ModeState(Eigen::VectorXcd::Zero(state_size(variant)));
}

Generator build_generator(const ModelParams& p, Variant variant, double xi_abs) {
    if (!(xi_abs >= 0) || !std::isfinite(xi_abs)) throw ConfigError("|xi| must be finite and nonnegative");
    validate(p, variant);
    const double r = xi_abs, r2 = r * r, a2 = p.a * p.a;
    const int n = state_size(variant);
    Generator g;
    g.xi_abs = r;
    g.tau0 = variant == Variant::CattaneoHeat ? p.tau0 : 0.0;
    g.entries = Eigen::MatrixXcd::Zero(n, n);
    auto& m = g.entries;
    m(0, 1) = 1.0;
    m(1, 2) = 1.0;
    m(2, 0) = -a2 * r2 / p.tau;
    m(2, 1) = -a2 * p.beta * r2 / p.tau;
    m(2, 2) = -1.0 / p.tau;
    m(2, 3) = p.eta * r2 / p.tau;
    m(3, 1) = -p.eta * r2;
    m(3, 2) = -p.tau * p.eta * r2;
    if (variant == Variant::CattaneoHeat) {
        m(3, 4) = -I * p.gamma * r;
        m(4, 3) = -I * p.kappa * r / p.tau0;
        m(4, 4) = -1.0 / p.tau0;
    } else {
        m(3, 3) = -p.gamma * p.kappa * r2;
    }
    return g;
}

ObservableKind default_observable(Variant variant, Regime regime) {
    bool w = regime == Regime::TauEqualsBeta;
    if (variant == Variant::CattaneoHeat) return w ? ObservableKind::WC : ObservableKind::VC;
    return w ? ObservableKind::WF : ObservableKind::VF;
}

Eigen::MatrixXcd observable_map(const ModelParams& p, Variant variant, double xi_abs,
                                ObservableKind kind) {
    check_kind(variant, kind);
    const int n = state_size(variant);
    const bool w = is_w_kind(kind);
    const int m = n - (w ? 1 : 0);
    const double r = xi_abs;
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(m, n);
    // v + tau w
    M(0, 1) = 1.0;
    M(0, 2) = p.tau;
    // |xi| (u + tau v)
    M(1, 0) = r;
    M(1, 1) = r * p.tau;
    int row = 2;
    if (!w) M(row++, 1) = r;
    M(row++, 3) = 1.0;
    if (variant == Variant::CattaneoHeat) M(row++, 4) = 1.0;
    return M;
}

ObservableVector observable(const ModelParams& p, Variant variant, double xi_abs,
                            const ModeState& s, ObservableKind kind) {
    check_state(variant, s);
    ObservableVector out;
    out.kind = kind;
    out.components = observable_map(p, variant, xi_abs, kind) * s.amp;
    out.squared_norm = out.components.squaredNorm();
    if (variant == Variant::CattaneoHeat) out.squared_norm += s.q_perp * s.q_perp;
    return out;
}

ModeState state_from_observable(const ModelParams& p, Variant variant, double xi_abs,
                                const Eigen::VectorXcd& y, ObservableKind kind, double q_perp) {
    check_kind(variant, kind);
    if (!(xi_abs > 0)) throw ConfigError("state reconstruction needs |xi| > 0");
    const bool wk = is_w_kind(kind);
    const int n = state_size(variant);
    if (y.size() != n - (wk ? 1 : 0)) throw ConfigError("observable vector has the wrong size");
    const double r = xi_abs;
    ModeState s = ModeState::zero(variant);
    s.q_perp = q_perp;
    int idx = 2;
    cplx v = wk ? cplx(0.0) : y(idx++) / r;
    cplx S = y(1) / r;
    s.amp(1) = v;
    s.amp(0) = S - p.tau * v;
    s.amp(2) = (y(0) - v) / p.tau;
    s.amp(3) = y(idx++);
    if (variant == Variant::CattaneoHeat) s.amp(4) = y(idx++);
    return s;
}

Regime classify_regime(const ModelParams& p, double tie_tol) {
    double d = p.tau - p.beta;
    if (std::abs(d) <= tie_tol) return Regime::TauEqualsBeta;
    return d < 0 ? Regime::TauLessBeta : Regime::TauGreaterBeta;
}

double transverse_energy_weight(const ModelParams& p, Variant variant) {
    if (variant != Variant::CattaneoHeat) return 0.0;
    return 0.5 * p.tau0 * p.gamma / p.kappa;
}

Eigen::MatrixXcd energy_form(const ModelParams& p, Variant variant, double xi_abs) {
    Regime regime = classify_regime(p);
    if (regime == Regime::TauGreaterBeta)
        throw ConfigError("energy is not sign-definite for tau > beta");
    const double r2 = xi_abs * xi_abs, a2 = p.a * p.a;
    const int n = state_size(variant);
    // E = 1/2 sum_j c_j |row_j . U|^2
    Eigen::MatrixXcd rows = Eigen::MatrixXcd::Zero(n, n);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
    rows(0, 1) = 1.0; rows(0, 2) = p.tau; c(0) = 1.0;
    rows(1, 0) = 1.0; rows(1, 1) = p.tau; c(1) = a2 * r2;
    rows(2, 1) = 1.0; c(2) = regime == Regime::TauEqualsBeta ? 0.0 : a2 * p.tau * (p.beta - p.tau) * r2;
    rows(3, 3) = 1.0; c(3) = 1.0;
    if (variant == Variant::CattaneoHeat) { rows(4, 4) = 1.0; c(4) = p.tau0 * p.gamma / p.kappa; }
    return 0.5 * rows.adjoint() * c.asDiagonal() * rows;
}

double mode_energy(const ModelParams& p, Variant variant, Regime regime, double xi_abs,
                   const ModeState& s) {
    if (regime == Regime::TauGreaterBeta)
        throw ConfigError("energy is not sign-definite for tau > beta; use raw norms");
    check_state(variant, s);
    const double r2 = xi_abs * xi_abs, a2 = p.a * p.a;
    double e = std::norm(s.v() + p.tau * s.w()) + a2 * r2 * std::norm(s.u() + p.tau * s.v()) +
               std::norm(s.theta());
    if (regime == Regime::TauLessBeta) e += a2 * p.tau * (p.beta - p.tau) * r2 * std::norm(s.v());
    e *= 0.5;
    if (variant == Variant::CattaneoHeat)
        e += transverse_energy_weight(p, variant) * (std::norm(s.qpar()) + s.q_perp * s.q_perp);
    return e;
}

double energy_dissipation(const ModelParams& p, Variant variant, double xi_abs, const ModeState& s) {
    check_state(variant, s);
    const double r2 = xi_abs * xi_abs;
    double d = -p.a * p.a * (p.beta - p.tau) * r2 * std::norm(s.v());
    if (variant == Variant::CattaneoHeat)
        d -= p.gamma / p.kappa * (std::norm(s.qpar()) + s.q_perp * s.q_perp);
    else
        d -= p.gamma * p.kappa * r2 * std::norm(s.theta());
    return d;
}

EquivalenceConstants equivalence_constants(const ModelParams& p, Variant variant, double xi_abs) {
    if (!(xi_abs > 0)) throw ConfigError("equivalence constants need |xi| > 0");
    Regime regime = classify_regime(p);
    if (regime == Regime::TauGreaterBeta)
        throw ConfigError("energy is not sign-definite for tau > beta");
    ObservableKind kind = default_observable(variant, regime);
    Eigen::MatrixXcd M = observable_map(p, variant, xi_abs, kind);
    const int m = static_cast<int>(M.rows());
    // Columns: the state reconstructed from each observable unit vector.
    Eigen::MatrixXcd B(state_size(variant), m);
    for (int j = 0; j < m; ++j)
        B.col(j) = state_from_observable(p, variant, xi_abs, Eigen::VectorXcd::Unit(m, j), kind).amp;
    Eigen::MatrixXcd G = B.adjoint() * energy_form(p, variant, xi_abs) * B;
    Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(G).eigenvalues();
    EquivalenceConstants out;
    out.kind = kind;
    out.c1 = ev.minCoeff();
    out.c2 = ev.maxCoeff();
    if (variant == Variant::CattaneoHeat) {
        double wt = transverse_energy_weight(p, variant);
        out.c1 = std::min(out.c1, wt);
        out.c2 = std::max(out.c2, wt);
    }
    return out;
}

}  // namespace mgt
