#include "mgt/dynamics.hpp"

#include <cmath>
#include <limits>

#include <unsupported/Eigen/MatrixFunctions>

#include "mgt/util.hpp"

namespace mgt {

namespace {

constexpr long kRkStepBudget = 2000000;

void check_times(const std::vector<double>& times) {
    if (times.empty() || times[0] != 0.0) throw ConfigError("time grid must start at 0");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]) || !std::isfinite(times[i]))
            throw ConfigError("time grid must be strictly increasing and finite");
}

// Dormand-Prince 5(4) with dense stops at every requested time. Returns false when the
// step budget is exhausted.
bool rk45(const Eigen::MatrixXcd& a, const Eigen::VectorXcd& y0, const std::vector<double>& times,
          double tol, std::vector<Eigen::VectorXcd>& out) {
    static const double A[7][6] = {
        {0, 0, 0, 0, 0, 0},
        {1.0 / 5, 0, 0, 0, 0, 0},
        {3.0 / 40, 9.0 / 40, 0, 0, 0, 0},
        {44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0, 0},
        {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0, 0},
        {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656, 0},
        {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
    static const double b[7] = {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0};
    static const double bs[7] = {5179.0 / 57600, 0, 7571.0 / 16695, 393.0 / 640, -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};
    out.assign(times.size(), y0);
    Eigen::VectorXcd y = y0;
    const double norm_a = a.cwiseAbs().rowwise().sum().maxCoeff();
    const double atol = tol * 1e-3 * std::max(y0.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    double t = 0.0, h = norm_a > 0 ? 0.01 / norm_a : 1.0;
    long steps = 0;
    Eigen::VectorXcd k[7];
    for (std::size_t i = 1; i < times.size(); ++i) {
        while (t < times[i]) {
            if (++steps > kRkStepBudget) return false;
            double hs = std::min(h, times[i] - t);
            for (int s = 0; s < 7; ++s) {
                Eigen::VectorXcd ys = y;
                for (int j = 0; j < s; ++j) ys += hs * A[s][j] * k[j];
                k[s] = a * ys;
            }
            Eigen::VectorXcd yn = y, err = Eigen::VectorXcd::Zero(y.size());
            for (int s = 0; s < 7; ++s) {
                yn += hs * b[s] * k[s];
                err += hs * (b[s] - bs[s]) * k[s];
            }
            double en = 0.0;
            for (int j = 0; j < y.size(); ++j) {
                double sc = atol + tol * std::max(std::abs(y(j)), std::abs(yn(j)));
                en = std::max(en, std::abs(err(j)) / sc);
            }
            if (en <= 1.0) {
                t = (hs == times[i] - t) ? times[i] : t + hs;
                y = yn;
            }
            double fac = en > 0 ? 0.9 * std::pow(en, -0.2) : 5.0;
            h = hs * std::clamp(fac, 0.2, 5.0);
        }
        out[i] = y;
    }
    return true;
}

// An explicit method needs about rho * T / 3 steps for a stiff spectrum of radius rho.
bool rk_affordable(const Eigen::ComplexEigenSolver<Eigen::MatrixXcd>& es, double t_max) {
    if (es.info() != Eigen::Success) return true;
    const double rho = es.eigenvalues().cwiseAbs().maxCoeff();
    return rho * t_max / 3.0 < static_cast<double>(kRkStepBudget);
}

}  // namespace

Eigen::MatrixXcd matrix_exponential(const Eigen::MatrixXcd& m) { return m.exp(); }

Trajectory propagate_mode(const Generator& gen, const ModeState& u0, const std::vector<double>& times,
                          double tol) {
    check_times(times);
    if (!(tol > 0)) throw ConfigError("tolerance must be positive");
    const Eigen::MatrixXcd& a = gen.entries;
    if (u0.amp.size() != a.rows()) throw ConfigError("initial state does not match the generator size");
    if (!a.allFinite()) throw NumericalError("generator has non-finite entries");
    if (!u0.amp.allFinite() || !std::isfinite(u0.q_perp)) throw NumericalError("initial state is not finite");

    Trajectory tr;
    tr.xi_abs = gen.xi_abs;
    tr.times = times;
    std::vector<Eigen::VectorXcd> amps;

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(a);
    double cond = std::numeric_limits<double>::infinity();
    if (es.info() == Eigen::Success) {
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(es.eigenvectors());
        const auto& sv = svd.singularValues();
        if (sv(sv.size() - 1) > 0) cond = sv(0) / sv(sv.size() - 1);
    }
    if (cond <= kDefectiveCondition) {
        const Eigen::MatrixXcd& v = es.eigenvectors();
        const Eigen::VectorXcd& lam = es.eigenvalues();
        Eigen::VectorXcd coef = v.partialPivLu().solve(u0.amp);
        amps.reserve(times.size());
        for (double t : times) {
            Eigen::VectorXcd e(lam.size());
            for (int j = 0; j < lam.size(); ++j) e(j) = std::exp(lam(j) * t) * coef(j);
            amps.push_back(v * e);
        }
        amps[0] = u0.amp;
        tr.method = "eigen";
        tr.accuracy = 4.0 * cond * std::numeric_limits<double>::epsilon();
    } else if (rk_affordable(es, times.back()) && rk45(a, u0.amp, times, tol * 1e-2, amps)) {
        tr.method = "rk45";
        tr.accuracy = tol;
    } else {
        amps.clear();
        for (double t : times) amps.push_back(matrix_exponential(t * a) * u0.amp);
        tr.method = "expm";
        tr.accuracy = 1e-12;
    }
    tr.degraded = tr.accuracy > tol;
    tr.states.reserve(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!amps[i].allFinite()) throw NumericalError("propagation produced non-finite values");
        double qp = gen.tau0 > 0 ? u0.q_perp * transverse_flux_factor(gen.tau0, times[i]) : u0.q_perp;
        tr.states.emplace_back(amps[i], qp);
    }
    return tr;
}

double transverse_flux_factor(double tau0, double t) {
    if (!(tau0 > 0)) throw ConfigError("transverse flux factor needs tau0 > 0");
    if (!(t >= 0)) throw ConfigError("time must be nonnegative");
    return std::exp(-t / tau0);
}

std::vector<double> log_time_grid(double t_min, double t_max, int points_per_decade) {
    if (!(t_min > 0 && t_max > t_min) || points_per_decade < 1)
        throw ConfigError("log time grid needs 0 < t_min < t_max");
    std::vector<double> out{0.0};
    const double l0 = std::log10(t_min), l1 = std::log10(t_max);
    const int n = std::max(1, static_cast<int>(std::ceil((l1 - l0) * points_per_decade)));
    for (int i = 0; i <= n; ++i) out.push_back(std::pow(10.0, l0 + (l1 - l0) * i / n));
    return out;
}

std::vector<double> uniform_time_grid(double t_max, int n) {
    if (!(t_max > 0) || n < 1) throw ConfigError("uniform grid needs t_max > 0 and n >= 1");
    std::vector<double> out(n + 1);
    for (int i = 0; i <= n; ++i) out[i] = t_max * i / n;
    return out;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& tr, const ModelParams& p, Variant variant) {
    const int n = state_size(variant);
    static const char* names[5] = {"u", "v", "w", "theta", "qpar"};
    Regime regime = classify_regime(p);
    ObservableKind kind = default_observable(variant, regime == Regime::TauGreaterBeta ? Regime::TauLessBeta : regime);
    os << "# xi=" << fmt17(tr.xi_abs) << " method=" << tr.method << " observable=" << to_string(kind) << "\n";
    os << "t";
    for (int j = 0; j < n; ++j) os << ",re_" << names[j] << ",im_" << names[j];
    if (variant == Variant::CattaneoHeat) os << ",qperp";
    os << ",obs_sq,energy\n";
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        const ModeState& s = tr.states[i];
        os << fmt17(tr.times[i]);
        for (int j = 0; j < n; ++j) os << ',' << fmt17(s.amp(j).real()) << ',' << fmt17(s.amp(j).imag());
        if (variant == Variant::CattaneoHeat) os << ',' << fmt17(s.q_perp);
        os << ',' << fmt17(observable(p, variant, tr.xi_abs, s, kind).squared_norm) << ',';
        if (regime != Regime::TauGreaterBeta) os << fmt17(mode_energy(p, variant, regime, tr.xi_abs, s));
        os << '\n';
    }
}

}  // namespace mgt
