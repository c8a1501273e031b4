#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mgt {

using cplx = std::complex<double>;

// Invalid parameters, variant/kind mismatches, malformed configuration.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Root-finder, propagator or certificate failures.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Variant { NoHeat, FourierHeat, CattaneoHeat };
enum class Regime { TauLessBeta, TauEqualsBeta, TauGreaterBeta };
enum class ObservableKind { VF, WF, VC, WC };

std::string to_string(Variant v);
std::string to_string(Regime r);
std::string to_string(ObservableKind k);
Variant parse_variant(const std::string& s);
Regime parse_regime(const std::string& s);

struct ModelParams {
    double tau = 0.5;    // relaxation time
    double beta = 1.0;   // viscoelastic damping
    double a = 1.0;      // wave speed
    double eta = 0.0;    // thermal coupling
    double gamma = 1.0;  // heat-flux divergence coefficient
    double kappa = 1.0;  // conductivity
    double tau0 = 0.0;   // heat-flux relaxation
    int dim = 1;
};

// Throws ConfigError when the parameters violate positivity or do not fit the variant.
void validate(const ModelParams& p, Variant variant);

// Number of complex state components carried by a mode.
int state_size(Variant variant);

// Per-mode amplitudes (u, v = u_t, w = u_tt, theta[, q_par]).
// q_perp is the modulus of the transverse heat flux, which decays on its own.
struct ModeState {
    Eigen::VectorXcd amp;
    double q_perp = 0.0;

    ModeState() = default;
    explicit ModeState(Eigen::VectorXcd a, double qp = 0.0) : amp(std::move(a)), q_perp(qp) {}
    static ModeState zero(Variant variant);

    cplx u() const { return amp(0); }
    cplx v() const { return amp(1); }
    cplx w() const { return amp(2); }
    cplx theta() const { return amp(3); }
    cplx qpar() const { return amp.size() > 4 ? amp(4) : cplx(0.0); }
};

struct Generator {
    double xi_abs = 0.0;
    double tau0 = 0.0;  // needed to advance the transverse flux
    Eigen::MatrixXcd entries;
};

Generator build_generator(const ModelParams& p, Variant variant, double xi_abs);

struct ObservableVector {
    ObservableKind kind = ObservableKind::VF;
    Eigen::VectorXcd components;
    double squared_norm = 0.0;
};

// The observable appropriate for a (variant, regime) pair: V for tau<beta, W for tau=beta.
ObservableKind default_observable(Variant variant, Regime regime);

ObservableVector observable(const ModelParams& p, Variant variant, double xi_abs,
                            const ModeState& s, ObservableKind kind);

// Linear map taking the longitudinal state to the observable components
// (the transverse flux is handled separately).
Eigen::MatrixXcd observable_map(const ModelParams& p, Variant variant, double xi_abs,
                                ObservableKind kind);

// Inverse of observable_map on its range; for W observables the v component is set to zero.
ModeState state_from_observable(const ModelParams& p, Variant variant, double xi_abs,
                                const Eigen::VectorXcd& y, ObservableKind kind,
                                double q_perp = 0.0);

Regime classify_regime(const ModelParams& p, double tie_tol = 0.0);

double mode_energy(const ModelParams& p, Variant variant, Regime regime, double xi_abs,
                   const ModeState& s);

// Hermitian H with E = U^* H U on the longitudinal state.
Eigen::MatrixXcd energy_form(const ModelParams& p, Variant variant, double xi_abs);

// Weight multiplying q_perp^2 in the energy.
double transverse_energy_weight(const ModelParams& p, Variant variant);

// Right-hand side of the energy identity dE/dt = -a^2 (beta-tau) r^2 |v|^2 - (heat dissipation).
double energy_dissipation(const ModelParams& p, Variant variant, double xi_abs, const ModeState& s);

struct EquivalenceConstants {
    double c1 = 0.0;
    double c2 = 0.0;
    ObservableKind kind = ObservableKind::VF;
};

// c1 |Y|^2 <= E <= c2 |Y|^2, from the Gram matrix of E in observable coordinates.
EquivalenceConstants equivalence_constants(const ModelParams& p, Variant variant, double xi_abs);

}  // namespace mgt
