#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mgt/model.hpp"

namespace mgt::cli {

// start:stop:count (count points, endpoints included) or a single value.
struct Range {
    double start = 0.0;
    double stop = 0.0;
    int count = 1;
    std::vector<double> values() const;
};
Range parse_range(const std::string& s);
std::string to_string(const Range& r);

struct ParamOverrides {
    std::optional<double> tau, beta, a, eta, gamma, kappa, tau0;
    std::optional<int> dim;
};

struct RunConfig {
    std::string experiment;  // simulate, stability-map, eig-expand, lyapunov-check, decay-fit, regloss
    Variant variant = Variant::FourierHeat;
    std::optional<Regime> regime;
    ParamOverrides params;

    // frequencies and times
    std::vector<double> xi{1.0};
    double t_min = 1e-2;
    double t_max = 100.0;
    int t_per_decade = 64;
    double xi_min = 1e-3;
    double xi_max = 1e2;
    int xi_per_decade = 48;

    // sweeps
    std::optional<Range> tau_range, beta_range, eta_range, tau0_range;
    bool with_decay = false;

    // initial data
    std::vector<double> u0;  // empty: all ones
    double q_perp = 0.0;
    std::string profile = "gaussian";
    double tail_exponent = 0.0;
    double bump_lo = 2.0;
    double bump_hi = 4.0;
    int k = 0;
    int ell = 2;

    // fits and checks
    double fit_t_min = 1e2;
    double fit_t_max = 1e4;
    double slope_tol = 0.05;
    std::string limit = "both";
    int ladder_points = 12;
    int probes = 20;

    double tol = 1e-10;
    std::string output_dir = "out";
    int workers = 0;
    std::uint64_t seed = 1;
};

// Strict JSON reader: unknown keys and TOML files raise ConfigError.
RunConfig load_config(const std::string& path);
RunConfig config_from_json_text(const std::string& text);
std::string config_to_json(const RunConfig& c);

// Parameters after variant/regime defaults; throws ConfigError on inconsistency.
ModelParams resolve_params(const RunConfig& c);

// FNV-1a 64 of the canonical configuration (output directory and worker count excluded).
std::string config_hash(const RunConfig& c);

// Runs the experiment and writes artifacts. Returns 0, or throws ConfigError / NumericalError.
std::vector<std::string> run(const RunConfig& c, std::ostream& log);

// Full command-line entry point; returns the process exit status (0 ok, 1 config, 2 numerical).
int main_entry(int argc, char** argv);

}  // namespace mgt::cli
