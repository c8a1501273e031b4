#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mgt/model.hpp"

namespace mgt {

enum class Profile { Gaussian, AlgebraicTail, Bump };
std::string to_string(Profile p);
Profile parse_profile(const std::string& s);

struct InitialDataSpec {
    Profile profile = Profile::Gaussian;
    double tail_exponent = 3.0;  // (1 + |xi|)^-a for AlgebraicTail
    double bump_lo = 2.0;        // support of the smooth bump
    double bump_hi = 4.0;
    double amplitude = 1.0;
    double q_perp = 0.0;         // transverse flux amplitude relative to the profile (Cattaneo)
    // Sobolev order whose norm must be finite; nullopt skips the check.
    std::optional<double> target_order;
};

// Radial profile |V0(|xi|)| before the amplitude factor.
double profile_value(const InitialDataSpec& spec, double xi_abs);

struct SpectralData {
    std::vector<double> xi_grid;
    std::vector<ObservableVector> v0_hat;
    std::vector<double> q_perp;  // transverse flux per grid point (zero unless Cattaneo)
    int dim = 1;
    ObservableKind kind = ObservableKind::VF;
    InitialDataSpec spec;
    std::optional<double> tail_exponent;
    bool l1_finite = true;             // |V0| integrable over R^N
    double sobolev_supremum = 0.0;     // H^s finite for every s below this (infinity for smooth data)
};

// Log-spaced grid with `per_decade` points per decade; decade endpoints are hit exactly.
std::vector<double> log_xi_grid(double xi_min, double xi_max, int per_decade);

// Radially symmetric samples along a fixed unit direction in observable space.
// Throws ConfigError if the target Sobolev norm of the data is infinite.
SpectralData sample_initial_data(const InitialDataSpec& spec, const std::vector<double>& xi_grid,
                                 const ModelParams& p, Variant variant, ObservableKind kind);

// Area of the unit sphere in R^N: 2, 2 pi, 4 pi.
double sphere_area(int dim);

struct NormSeries {
    int k = 0;
    std::vector<double> times;
    std::vector<double> values;  // ||grad^k V(t)||^2
    std::vector<double> low;     // |xi| <= 1 part
    std::vector<double> high;    // |xi| >= 1 part
    std::vector<double> error;   // relative change against the half-density grid
    bool converged = true;
};

// Propagates every grid mode and integrates omega_N |xi|^(2k+N-1) |V(|xi|,t)|^2 d|xi| by the
// composite trapezoid rule in log |xi|, plus the |xi| < xi_min cap from the first sample.
NormSeries evolve_norm_series(const ModelParams& p, Variant variant, const SpectralData& data, int k,
                              const std::vector<double>& times, int workers = 0,
                              double convergence_tol = 1e-3);

void write_norm_series_csv(std::ostream& os, const NormSeries& s);

enum class NormPart { Total, Low, High };

struct ExponentFit {
    double slope = 0.0;      // d log||.|| / d log(1+t)
    double stderr_ = 0.0;
    double intercept = 0.0;
    double rms_residual = 0.0;
    int points = 0;
    bool power_law = true;   // residual below the threshold
};

// Least squares of log sqrt(value) against log(1+t) over times in [t_lo, t_hi].
// The window must span at least two decades.
ExponentFit fit_decay_exponent(const NormSeries& s, double t_lo, double t_hi, NormPart part = NormPart::Total,
                               double residual_threshold = 0.05);

// Slope of ||grad^k V|| guaranteed for the low-frequency part: -N/4 - k/2 (tau < beta),
// -N/8 - k/4 (tau = beta).
double theorem_low_frequency_slope(Regime regime, int dim, int k);
// High-frequency slope with ell extra derivatives on the data: -ell/2 (tau < beta), -ell/3 (tau = beta).
double theorem_regularity_slope(Regime regime, int ell);

// Smallest spectral gap -max Re(lambda) over the given frequencies.
double minimal_spectral_gap(const ModelParams& p, Variant variant, const std::vector<double>& xi);

struct RegularityLossConfig {
    ModelParams params;  // tau0 > 0; the Fourier arm uses the same parameters with tau0 = 0
    int k = 0;
    int ell = 2;
    double tail_exponent = 0.0;  // 0 selects k + ell + N/2 + 0.1
    double xi_min = 1.0;
    double xi_max = 1e5;
    int xi_per_decade = 24;
    double t_min = 1e2;  // fit window, after the exponential transient of the |xi| ~ 1 modes
    double t_max = 1e4;
    int t_per_decade = 16;
    int workers = 0;
};

struct RegularityLossReport {
    Regime regime = Regime::TauLessBeta;
    double tail_exponent = 0.0;
    double fourier_gap = 0.0;     // minimal spectral gap of the Fourier arm on the grid
    double fourier_time = 0.0;    // 50 / gap
    double fourier_ratio = 0.0;   // high part at fourier_time over its initial value
    bool fourier_exponential = false;
    ExponentFit cattaneo_fit;
    double theorem_slope = 0.0;   // -ell/2 or -ell/3
    double optimal_slope = 0.0;   // -ell/2 for comparison in the tau = beta case
    bool cattaneo_consistent = false;
    NormSeries fourier;
    NormSeries cattaneo;
};

// Data with (1+|xi|)^-a such that ||grad^(k+ell) V0|| is finite and ||grad^(k+ell+1) V0|| is not.
RegularityLossReport regularity_loss_experiment(const RegularityLossConfig& cfg);

}  // namespace mgt
