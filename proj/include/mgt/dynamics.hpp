#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "mgt/model.hpp"

namespace mgt {

struct Trajectory {
    double xi_abs = 0.0;
    std::vector<double> times;
    std::vector<ModeState> states;
    std::string method;     // "eigen", "rk45" or "expm"
    double accuracy = 0.0;  // estimated relative error
    bool degraded = false;  // accuracy estimate above the requested tolerance
};

// Eigenvector condition number above which propagation leaves the eigenbasis.
constexpr double kDefectiveCondition = 1e8;

// U(t) = exp(t Psi) U0 at each requested time (times[0] must be 0, increasing).
Trajectory propagate_mode(const Generator& gen, const ModeState& u0, const std::vector<double>& times,
                          double tol = 1e-10);

// exp(-t / tau0): factor applied to the transverse heat-flux modulus.
double transverse_flux_factor(double tau0, double t);

// {0} followed by log-spaced points from t_min to t_max.
std::vector<double> log_time_grid(double t_min, double t_max, int points_per_decade = 64);

// n+1 equally spaced points on [0, t_max].
std::vector<double> uniform_time_grid(double t_max, int n);

// Columns: t, Re/Im of every component, |Y|^2, E (empty when the energy is indefinite).
void write_trajectory_csv(std::ostream& os, const Trajectory& tr, const ModelParams& p, Variant variant);

// Scaling-and-squaring matrix exponential (Pade 13 via Eigen's MatrixFunctions).
Eigen::MatrixXcd matrix_exponential(const Eigen::MatrixXcd& m);

}  // namespace mgt
