#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mgt/dynamics.hpp"
#include "mgt/model.hpp"

namespace mgt {

enum class CaseId { FourierTauLessBeta, FourierTauEqualsBeta, CattaneoTauLessBeta, CattaneoTauEqualsBeta };
std::string to_string(CaseId c);

// NoHeat shares the Fourier functionals. Throws ConfigError for tau > beta.
CaseId case_for(Variant variant, Regime regime);

struct AuxFunctionals {
    std::optional<double> E, F1, F2, F3, F3c, F4c, F3t, F4t;
};

AuxFunctionals aux_functionals(Variant variant, Regime regime, const ModelParams& p, double xi_abs,
                               const ModeState& s);

// Recipe failure (e.g. tau = beta without thermal coupling, or a certificate that cannot be validated).
class RecipeError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

struct FunctionalRecipe {
    CaseId case_id = CaseId::FourierTauLessBeta;
    Variant variant = Variant::FourierHeat;
    Regime regime = Regime::TauLessBeta;
    ModelParams params;
    std::map<std::string, double> epsilons;
    std::map<std::string, double> weights;
    std::vector<std::string> derivation_log;
    // dL/dt + chain_rate * rate_weight(|xi|) * E <= 0 from the assembled Young bounds.
    double chain_rate = 0.0;
    // gamma3 * w(|xi|) E <= L <= gamma4 * w(|xi|) E over the probe set.
    double gamma3 = 0.0;
    double gamma4 = 0.0;
    // dL/dt <= -implied_c * rho(|xi|) * L.
    double implied_c = 0.0;
    int tightenings = 0;
};

// Selects Young parameters and weights along the constraint chain of each case, then validates
// the certificate on a probe set of frequencies, doubling the energy weight (up to 8 times)
// until it holds. Throws RecipeError on failure.
FunctionalRecipe select_coefficients(const ModelParams& p, Variant variant, Regime regime);

double lyapunov_value(const FunctionalRecipe& r, double xi_abs, const ModeState& s);

// Weight multiplying E in the equivalence sandwich: 1, 1+r^2+r^4, 1+r^2+r^4, 1+r^2+r^4+r^6.
double case_weight(CaseId c, double xi_abs);
// Weight multiplying E in the dissipation bound: r^2/(1+r^2), r^4, r^2, r^4/(1+r^2)^2.
double rate_weight(CaseId c, double xi_abs);

struct DecayEnvelope {
    CaseId case_id = CaseId::FourierTauLessBeta;
    std::function<double(double)> rho;
    int low_power = 0;
    int high_power = 0;
};

DecayEnvelope envelope(CaseId c);
double envelope_value(CaseId c, double xi_abs);

// Coefficient of E inside L at |xi| (gamma0, gamma0_tilde (1+r^2+r^4), ...).
double energy_coefficient(const FunctionalRecipe& r, double xi_abs);

// Hermitian matrices of the quadratic forms at |xi| in the coordinates
// (v + tau w, u + tau v, v, theta[, q_par, q_perp]), which keep the forms well scaled.
// The energy part of dL/dt uses the exact dissipation; the remaining functionals are
// differentiated through the generator.
struct QuadraticForms {
    Eigen::MatrixXcd to_coords;    // state -> coordinates (longitudinal block)
    Eigen::MatrixXcd lyapunov;     // L
    Eigen::MatrixXcd derivative;   // dL/dt along the flow
    Eigen::MatrixXcd energy;       // E
    Eigen::MatrixXcd generator;    // generator in these coordinates
};
QuadraticForms quadratic_forms(const FunctionalRecipe& r, double xi_abs);

struct CertificateCheck {
    double xi_abs = 0.0;
    double max_rate_margin = 0.0;  // largest eigenvalue of dL/dt + chain_rate*rate_weight*E relative to E
    double lower = 0.0;            // min of L / (w E)
    double upper = 0.0;            // max of L / (w E)
    Eigen::VectorXcd worst_state;
    bool pass = false;
};

// Exact check of the certificate at one frequency via generalized eigenvalues.
CertificateCheck check_certificate(const FunctionalRecipe& r, double xi_abs);

struct MonotonicityReport {
    double max_dLdt = 0.0;    // max of dL/dt / (L(0) * omega)
    double max_margin = 0.0;  // max of (dL/dt + c rho L) / (L(0) * omega)
    double c = 0.0;
    double rho = 0.0;
    bool sampling_ok = true;
    bool pass = false;
};

// Centered 5-point differences of L along the trajectory; omega is the spectral radius of
// the generator (at least 1), making the tolerance scale-free.
MonotonicityReport check_monotonicity(const FunctionalRecipe& r, const Trajectory& tr,
                                      const ModelParams& p, double tol = 1e-6);

struct EnergyIdentityReport {
    double max_residual = 0.0;  // |dE/dt - RHS|
    double relative = 0.0;      // max_residual / E(0)
    double worst_time = 0.0;
    bool pass = false;
};

EnergyIdentityReport check_energy_identity(Variant variant, Regime regime, const Trajectory& tr,
                                           const ModelParams& p, double tol = 1e-6);

struct DecayFit {
    double C = 1.0;
    double c = 0.0;     // fitted rate divided by rho(|xi|)
    double rate = 0.0;  // fitted exponential rate of |Y|^2
    bool used_peaks = false;
};

// Least-squares fit of log|Y(t)|^2 on the upper envelope over the last two thirds of the
// trajectory; C is then the smallest constant making the bound hold at every sample.
DecayFit pointwise_decay_fit(const Trajectory& tr, const DecayEnvelope& env, const ModelParams& p,
                             Variant variant, ObservableKind kind);

}  // namespace mgt
