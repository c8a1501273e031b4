#include "mgt/cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mgt/cauchy.hpp"
#include "mgt/dynamics.hpp"
#include "mgt/lyapunov.hpp"
#include "mgt/spectral.hpp"
#include "mgt/util.hpp"

namespace mgt::cli {

using ojson = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "1.0.0";
constexpr std::size_t kMaxCells = 1000000;

const std::vector<std::string> kExperiments = {"simulate",       "stability-map", "eig-expand",
                                               "lyapunov-check", "decay-fit",     "regloss"};

double parse_double(const std::string& key, const std::string& s) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw ConfigError("'" + key + "' expects a number, got '" + s + "'");
    }
    if (pos != s.size() || !std::isfinite(v)) throw ConfigError("'" + key + "' expects a finite number, got '" + s + "'");
    return v;
}

long long parse_int(const std::string& key, const std::string& s) {
    std::size_t pos = 0;
    long long v = 0;
    try {
        v = std::stoll(s, &pos);
    } catch (const std::exception&) {
        throw ConfigError("'" + key + "' expects an integer, got '" + s + "'");
    }
    if (pos != s.size()) throw ConfigError("'" + key + "' expects an integer, got '" + s + "'");
    return v;
}

bool parse_bool(const std::string& key, const std::string& s) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw ConfigError("'" + key + "' expects true or false, got '" + s + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
    if (out.empty()) throw ConfigError("'" + key + "' expects a comma-separated list");
    return out;
}

std::string join(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + fmt17(v[i]);
    return out;
}

// Setting keys shared by flags (--key) and the JSON sections below.
void apply_setting(RunConfig& c, const std::string& key, const std::string& val) {
    auto& p = c.params;
    if (key == "variant") c.variant = parse_variant(val);
    else if (key == "regime") c.regime = parse_regime(val);
    else if (key == "tau") p.tau = parse_double(key, val);
    else if (key == "beta") p.beta = parse_double(key, val);
    else if (key == "a") p.a = parse_double(key, val);
    else if (key == "eta") p.eta = parse_double(key, val);
    else if (key == "gamma") p.gamma = parse_double(key, val);
    else if (key == "kappa") p.kappa = parse_double(key, val);
    else if (key == "tau0") p.tau0 = parse_double(key, val);
    else if (key == "N") p.dim = static_cast<int>(parse_int(key, val));
    else if (key == "xi") c.xi = parse_list(key, val);
    else if (key == "tmin") c.t_min = parse_double(key, val);
    else if (key == "tmax") c.t_max = parse_double(key, val);
    else if (key == "t-per-decade") c.t_per_decade = static_cast<int>(parse_int(key, val));
    else if (key == "xi-min") c.xi_min = parse_double(key, val);
    else if (key == "xi-max") c.xi_max = parse_double(key, val);
    else if (key == "xi-per-decade") c.xi_per_decade = static_cast<int>(parse_int(key, val));
    else if (key == "tau-range") c.tau_range = parse_range(val);
    else if (key == "beta-range") c.beta_range = parse_range(val);
    else if (key == "eta-range") c.eta_range = parse_range(val);
    else if (key == "tau0-range") c.tau0_range = parse_range(val);
    else if (key == "with-decay") c.with_decay = parse_bool(key, val);
    else if (key == "u0") c.u0 = val.empty() ? std::vector<double>{} : parse_list(key, val);
    else if (key == "qperp") c.q_perp = parse_double(key, val);
    else if (key == "profile") c.profile = to_string(parse_profile(val));
    else if (key == "tail") c.tail_exponent = parse_double(key, val);
    else if (key == "bump-lo") c.bump_lo = parse_double(key, val);
    else if (key == "bump-hi") c.bump_hi = parse_double(key, val);
    else if (key == "k") c.k = static_cast<int>(parse_int(key, val));
    else if (key == "ell") c.ell = static_cast<int>(parse_int(key, val));
    else if (key == "fit-tmin") c.fit_t_min = parse_double(key, val);
    else if (key == "fit-tmax") c.fit_t_max = parse_double(key, val);
    else if (key == "slope-tol") c.slope_tol = parse_double(key, val);
    else if (key == "limit") {
        if (val != "small" && val != "large" && val != "both") throw ConfigError("limit must be small, large or both");
        c.limit = val;
    } else if (key == "ladder-points") c.ladder_points = static_cast<int>(parse_int(key, val));
    else if (key == "probes") c.probes = static_cast<int>(parse_int(key, val));
    else if (key == "tol") c.tol = parse_double(key, val);
    else if (key == "out") c.output_dir = val;
    else if (key == "workers") c.workers = static_cast<int>(parse_int(key, val));
    else if (key == "seed") {
        long long s = parse_int(key, val);
        if (s < 0) throw ConfigError("seed must be nonnegative");
        c.seed = static_cast<std::uint64_t>(s);
    } else throw ConfigError("unknown setting '" + key + "'");
}

struct FlagSpec {
    const char* key;
    const char* help;
};

const std::vector<FlagSpec> kFlags = {
    {"variant", "noheat, fourier or cattaneo"},
    {"regime", "tau-lt-beta, tau-eq-beta or tau-gt-beta"},
    {"tau", "relaxation time"},
    {"beta", "viscoelastic damping"},
    {"a", "wave speed"},
    {"eta", "thermal coupling"},
    {"gamma", "heat-flux divergence coefficient"},
    {"kappa", "conductivity"},
    {"tau0", "heat-flux relaxation"},
    {"N", "space dimension (1, 2 or 3)"},
    {"xi", "frequency modulus or comma-separated list"},
    {"tmin", "first positive sample time"},
    {"tmax", "final time"},
    {"t-per-decade", "time samples per decade"},
    {"xi-min", "smallest frequency of the quadrature or probe grid"},
    {"xi-max", "largest frequency of the quadrature or probe grid"},
    {"xi-per-decade", "frequency samples per decade"},
    {"tau-range", "start:stop:count sweep of tau"},
    {"beta-range", "start:stop:count sweep of beta"},
    {"eta-range", "start:stop:count sweep of eta"},
    {"tau0-range", "start:stop:count sweep of tau0"},
    {"with-decay", "add a fitted decay rate per stable cell (true/false)"},
    {"u0", "initial state components (comma-separated reals)"},
    {"qperp", "initial transverse flux amplitude"},
    {"profile", "gaussian, algebraic or bump"},
    {"tail", "algebraic tail exponent (0 picks k+ell+N/2+0.1 for regloss)"},
    {"bump-lo", "bump support start"},
    {"bump-hi", "bump support end"},
    {"k", "derivative order"},
    {"ell", "extra derivatives on the data"},
    {"fit-tmin", "start of the fit window"},
    {"fit-tmax", "end of the fit window"},
    {"slope-tol", "tolerance against the reference slope"},
    {"limit", "small, large or both"},
    {"ladder-points", "points in the frequency ladder"},
    {"probes", "random probe trajectories"},
    {"tol", "propagation tolerance"},
    {"out", "output directory"},
    {"workers", "worker threads (default MGT_WORKERS or hardware)"},
    {"seed", "random seed"},
};

// JSON layout: section -> (json name -> setting key).
const std::map<std::string, std::map<std::string, std::string>> kSections = {
    {"params",
     {{"tau", "tau"}, {"beta", "beta"}, {"a", "a"}, {"eta", "eta"}, {"gamma", "gamma"}, {"kappa", "kappa"},
      {"tau0", "tau0"}, {"N", "N"}}},
    {"grids",
     {{"xi", "xi"}, {"t_min", "tmin"}, {"t_max", "tmax"}, {"t_per_decade", "t-per-decade"}, {"xi_min", "xi-min"},
      {"xi_max", "xi-max"}, {"xi_per_decade", "xi-per-decade"}, {"tau_range", "tau-range"},
      {"beta_range", "beta-range"}, {"eta_range", "eta-range"}, {"tau0_range", "tau0-range"}}},
    {"data",
     {{"u0", "u0"}, {"q_perp", "qperp"}, {"profile", "profile"}, {"tail_exponent", "tail"}, {"bump_lo", "bump-lo"},
      {"bump_hi", "bump-hi"}, {"k", "k"}, {"ell", "ell"}}},
    {"analysis",
     {{"fit_t_min", "fit-tmin"}, {"fit_t_max", "fit-tmax"}, {"slope_tol", "slope-tol"}, {"limit", "limit"},
      {"ladder_points", "ladder-points"}, {"probes", "probes"}, {"with_decay", "with-decay"}}},
    {"tolerances", {{"propagation", "tol"}}},
};

const std::map<std::string, std::string> kTopLevel = {
    {"variant", "variant"}, {"regime", "regime"}, {"output_dir", "out"}, {"workers", "workers"}, {"seed", "seed"}};

std::string json_scalar(const std::string& where, const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) return fmt17(v.get<double>());
    if (v.is_array()) {
        std::vector<double> xs;
        for (const auto& x : v) {
            if (!x.is_number()) throw ConfigError("'" + where + "' must be a list of numbers");
            xs.push_back(x.get<double>());
        }
        return join(xs);
    }
    throw ConfigError("'" + where + "' has an unsupported type");
}

void validate_config(const RunConfig& c) {
    if (std::find(kExperiments.begin(), kExperiments.end(), c.experiment) == kExperiments.end())
        throw ConfigError("unknown experiment '" + c.experiment + "'");
    if (c.xi.empty()) throw ConfigError("xi list is empty");
    for (double x : c.xi)
        if (!(x >= 0)) throw ConfigError("xi must be nonnegative");
    if (!(c.t_min > 0 && c.t_max > c.t_min)) throw ConfigError("need 0 < tmin < tmax");
    if (c.t_per_decade < 1 || c.xi_per_decade < 1) throw ConfigError("grid densities must be positive");
    if (!(c.xi_min > 0 && c.xi_max > c.xi_min)) throw ConfigError("need 0 < xi-min < xi-max");
    if (c.k < 0 || c.ell < 1) throw ConfigError("need k >= 0 and ell >= 1");
    if (!(c.fit_t_min > 0 && c.fit_t_max > c.fit_t_min)) throw ConfigError("need 0 < fit-tmin < fit-tmax");
    if (!(c.slope_tol > 0)) throw ConfigError("slope-tol must be positive");
    if (c.ladder_points < 3) throw ConfigError("ladder needs at least 3 points");
    if (c.probes < 0) throw ConfigError("probes must be nonnegative");
    if (!(c.tol > 0)) throw ConfigError("tol must be positive");
    if (c.workers < 0) throw ConfigError("workers must be nonnegative");
    if (c.output_dir.empty()) throw ConfigError("output directory is empty");
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

std::string timestamp() {
    std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

ojson config_json(const RunConfig& c, bool with_runtime) {
    ojson j;
    j["experiment"] = c.experiment;
    j["variant"] = to_string(c.variant);
    if (c.regime) j["regime"] = to_string(*c.regime);
    ojson p = ojson::object();
    auto put = [&](const char* k, const std::optional<double>& v) {
        if (v) p[k] = *v;
    };
    put("tau", c.params.tau);
    put("beta", c.params.beta);
    put("a", c.params.a);
    put("eta", c.params.eta);
    put("gamma", c.params.gamma);
    put("kappa", c.params.kappa);
    put("tau0", c.params.tau0);
    if (c.params.dim) p["N"] = *c.params.dim;
    j["params"] = p;
    ojson g;
    g["xi"] = c.xi;
    g["t_min"] = c.t_min;
    g["t_max"] = c.t_max;
    g["t_per_decade"] = c.t_per_decade;
    g["xi_min"] = c.xi_min;
    g["xi_max"] = c.xi_max;
    g["xi_per_decade"] = c.xi_per_decade;
    if (c.tau_range) g["tau_range"] = to_string(*c.tau_range);
    if (c.beta_range) g["beta_range"] = to_string(*c.beta_range);
    if (c.eta_range) g["eta_range"] = to_string(*c.eta_range);
    if (c.tau0_range) g["tau0_range"] = to_string(*c.tau0_range);
    j["grids"] = g;
    ojson d;
    d["u0"] = c.u0;
    d["q_perp"] = c.q_perp;
    d["profile"] = c.profile;
    d["tail_exponent"] = c.tail_exponent;
    d["bump_lo"] = c.bump_lo;
    d["bump_hi"] = c.bump_hi;
    d["k"] = c.k;
    d["ell"] = c.ell;
    j["data"] = d;
    ojson a;
    a["fit_t_min"] = c.fit_t_min;
    a["fit_t_max"] = c.fit_t_max;
    a["slope_tol"] = c.slope_tol;
    a["limit"] = c.limit;
    a["ladder_points"] = c.ladder_points;
    a["probes"] = c.probes;
    a["with_decay"] = c.with_decay;
    j["analysis"] = a;
    j["tolerances"] = {{"propagation", c.tol}};
    j["seed"] = c.seed;
    if (with_runtime) {
        j["output_dir"] = c.output_dir;
        j["workers"] = c.workers;
    }
    return j;
}

struct Artifacts {
    std::filesystem::path dir;
    std::string stem;
    std::vector<std::string> files;

    std::filesystem::path path(const std::string& ext) const { return dir / (stem + ext); }

    void write(const std::string& ext, const std::string& content) {
        std::filesystem::create_directories(dir);
        std::ofstream os(path(ext), std::ios::binary);
        if (!os) throw ConfigError("cannot write " + path(ext).string());
        os << content;
        files.push_back(path(ext).string());
    }
};

ojson verdict_json(const StabilityVerdict& v) {
    return {{"verdict", to_string(v.verdict)}, {"minors", v.minors}, {"max_re_root", v.witness},
            {"roots_agree", v.roots_agree}};
}

// Uniform grid fine enough for 5-point differences: 0.02 / spectral radius per step.
std::vector<double> derivative_grid(const Eigen::MatrixXcd& a, double t_max, int max_steps = 4000) {
    const double rho = std::max(1.0, a.eigenvalues().cwiseAbs().maxCoeff());
    const double dt = 0.02 / rho;
    const double T = std::min(t_max, dt * max_steps);
    const int n = std::max(8, static_cast<int>(std::ceil(T / dt)));
    return uniform_time_grid(T, n);
}

ModeState initial_state(const RunConfig& c, Variant v) {
    const int n = state_size(v);
    Eigen::VectorXcd amp = Eigen::VectorXcd::Ones(n);
    if (!c.u0.empty()) {
        if (static_cast<int>(c.u0.size()) != n)
            throw ConfigError("u0 needs " + std::to_string(n) + " components for this variant");
        for (int i = 0; i < n; ++i) amp(i) = c.u0[i];
    }
    if (c.q_perp != 0.0 && v != Variant::CattaneoHeat) throw ConfigError("qperp needs the cattaneo variant");
    return ModeState(amp, c.q_perp);
}

Regime effective_regime(const RunConfig& c, const ModelParams& p) {
    return c.regime ? *c.regime : classify_regime(p);
}

ojson run_simulate(const RunConfig& c, const ModelParams& p, Artifacts& art) {
    if (c.xi.size() != 1) throw ConfigError("simulate takes a single xi");
    const double xi = c.xi[0];
    Generator g = build_generator(p, c.variant, xi);
    ModeState s0 = initial_state(c, c.variant);
    Trajectory tr = propagate_mode(g, s0, log_time_grid(c.t_min, c.t_max, c.t_per_decade), c.tol);
    std::ostringstream csv;
    write_trajectory_csv(csv, tr, p, c.variant);
    art.write(".csv", csv.str());

    ojson rep;
    rep["xi"] = xi;
    rep["method"] = tr.method;
    rep["accuracy"] = tr.accuracy;
    rep["degraded"] = tr.degraded;
    if (xi > 0) rep["stability"] = verdict_json(rh_verdict(p, c.variant, xi));
    const Regime regime = classify_regime(p);
    if (regime != Regime::TauGreaterBeta) {
        Trajectory fine = propagate_mode(g, s0, derivative_grid(g.entries, c.t_max), c.tol);
        EnergyIdentityReport e = check_energy_identity(c.variant, regime, fine, p);
        rep["energy_identity"] = {{"window", fine.times.back()}, {"max_residual", e.max_residual},
                                  {"relative", e.relative}, {"worst_time", e.worst_time}, {"pass", e.pass}};
    } else {
        rep["energy_identity"] = "skipped: energy is indefinite for tau > beta";
    }
    return rep;
}

std::vector<double> range_or(const std::optional<Range>& r, double v) { return r ? r->values() : std::vector<double>{v}; }

ojson run_stability_map(const RunConfig& c, const ModelParams& base, Artifacts& art, int workers) {
    const auto taus = range_or(c.tau_range, base.tau), betas = range_or(c.beta_range, base.beta),
               etas = range_or(c.eta_range, base.eta), tau0s = range_or(c.tau0_range, base.tau0);
    const std::size_t cells = taus.size() * betas.size() * etas.size() * tau0s.size() * c.xi.size();
    if (cells > kMaxCells) throw ConfigError("sweep exceeds 10^6 cells");
    std::vector<std::string> rows(cells);
    std::vector<int> status(cells, 0);  // 0 stable, 1 marginal, 2 unstable, 3 failed
    parallel_for(cells, workers, [&](std::size_t idx) {
        std::size_t r = idx;
        const double xi = c.xi[r % c.xi.size()];
        r /= c.xi.size();
        ModelParams q = base;
        q.tau0 = tau0s[r % tau0s.size()];
        r /= tau0s.size();
        q.eta = etas[r % etas.size()];
        r /= etas.size();
        q.beta = betas[r % betas.size()];
        r /= betas.size();
        q.tau = taus[r];
        std::ostringstream os;
        os << fmt17(q.tau) << ',' << fmt17(q.beta) << ',' << fmt17(q.eta) << ',' << fmt17(q.tau0) << ','
           << fmt17(xi) << ',';
        try {
            StabilityVerdict v = rh_verdict(q, c.variant, xi);
            for (int i = 0; i < 5; ++i) os << (i < static_cast<int>(v.minors.size()) ? fmt17(v.minors[i]) : "") << ',';
            os << fmt17(v.witness) << ',' << to_string(v.verdict);
            status[idx] = static_cast<int>(v.verdict);
            if (c.with_decay) {
                os << ',';
                const Regime regime = classify_regime(q);
                if (v.verdict == Verdict::Stable && regime != Regime::TauGreaterBeta && xi > 0) {
                    Generator g = build_generator(q, c.variant, xi);
                    const double T = 40.0 / -v.witness;
                    Trajectory tr = propagate_mode(g, ModeState(Eigen::VectorXcd::Ones(state_size(c.variant))),
                                                   uniform_time_grid(T, 400), c.tol);
                    DecayFit f = pointwise_decay_fit(tr, envelope(case_for(c.variant, regime)), q, c.variant,
                                                     default_observable(c.variant, regime));
                    os << fmt17(f.rate);
                }
            }
            os << ',';
        } catch (const std::exception& e) {
            rows[idx].clear();
            std::ostringstream fail;
            fail << fmt17(q.tau) << ',' << fmt17(q.beta) << ',' << fmt17(q.eta) << ',' << fmt17(q.tau0) << ','
                 << fmt17(xi) << ",,,,,,," << (c.with_decay ? "," : "") << ',' << csv_field(e.what());
            rows[idx] = fail.str();
            status[idx] = 3;
            return;
        }
        rows[idx] = os.str();
    });
    std::ostringstream csv;
    csv << "# variant=" << to_string(c.variant) << " cells=" << cells << "\n";
    csv << "tau,beta,eta,tau0,xi,A1,A2,A3,A4,A5,max_re_root,verdict" << (c.with_decay ? ",decay_rate" : "")
        << ",error\n";
    for (const auto& r : rows) csv << r << '\n';
    art.write(".csv", csv.str());
    std::size_t counts[4] = {0, 0, 0, 0};
    for (int s : status) ++counts[s];
    return {{"cells", cells}, {"stable", counts[0]}, {"marginal", counts[1]}, {"unstable", counts[2]},
            {"failed", counts[3]}};
}

ojson run_eig_expand(const RunConfig& c, const ModelParams& p, Artifacts& art) {
    const Regime regime = effective_regime(c, p);
    std::vector<Limit> limits;
    if (c.limit != "large") limits.push_back(Limit::SmallXi);
    if (c.limit != "small") limits.push_back(Limit::LargeXi);
    std::ostringstream csv;
    csv << "limit,branch,power,predicted_coeff,measured_coeff,coeff_rel_error,expected_order,measured_order,"
           "noise_floor,pass\n";
    ojson rep = ojson::array();
    bool all = true;
    for (Limit l : limits) {
        EigenExpansion e = l == Limit::SmallXi ? expansion_small_xi(p, c.variant, regime)
                                               : expansion_large_xi(p, c.variant, regime);
        ExpansionReport r = verify_expansion(e, p, c.variant, default_ladder(l, c.ladder_points));
        all = all && r.pass;
        ojson jl;
        jl["limit"] = to_string(l);
        jl["degenerate"] = e.degenerate;
        jl["ladder"] = r.ladder;
        jl["crossing_xi"] = r.crossing_xi;
        jl["pass"] = r.pass;
        ojson br = ojson::array();
        for (std::size_t i = 0; i < e.branches.size(); ++i) {
            const Branch& b = e.branches[i];
            const BranchReport& m = r.branches[i];
            br.push_back({{"id", b.id}, {"coeff", b.coeff}, {"power", b.power}, {"remainder", b.remainder},
                          {"measured_coeff", m.measured_coeff}, {"coeff_rel_error", m.coeff_rel_error},
                          {"measured_order", m.measured_order}, {"noise_floor", m.at_noise_floor},
                          {"pass", m.pass}});
            csv << to_string(l) << ',' << b.id << ',' << fmt17(b.power) << ',' << fmt17(m.predicted_coeff) << ','
                << fmt17(m.measured_coeff) << ',' << fmt17(m.coeff_rel_error) << ',' << fmt17(m.expected_order)
                << ',' << fmt17(m.measured_order) << ',' << (m.at_noise_floor ? "true" : "false") << ','
                << (m.pass ? "true" : "false") << '\n';
        }
        jl["branches"] = br;
        if (!e.side_data.empty()) {
            ojson sd = ojson::array();
            for (cplx z : e.side_data) sd.push_back({z.real(), z.imag()});
            jl["cubic_roots"] = sd;
        }
        rep.push_back(jl);
    }
    art.write(".csv", csv.str());
    return {{"regime", to_string(regime)}, {"limits", rep}, {"pass", all}};
}

ojson run_lyapunov_check(const RunConfig& c, const ModelParams& p, Artifacts& art, int workers) {
    const Regime regime = effective_regime(c, p);
    FunctionalRecipe rc = select_coefficients(p, c.variant, regime);
    const std::vector<double> grid = log_xi_grid(c.xi_min, c.xi_max, 8);
    std::vector<CertificateCheck> certs(grid.size());
    parallel_for(grid.size(), workers, [&](std::size_t i) { certs[i] = check_certificate(rc, grid[i]); });
    std::ostringstream csv;
    csv << "xi,lower,upper,max_rate_margin,rho,pass\n";
    std::size_t cert_pass = 0;
    for (const auto& ck : certs) {
        csv << fmt17(ck.xi_abs) << ',' << fmt17(ck.lower) << ',' << fmt17(ck.upper) << ','
            << fmt17(ck.max_rate_margin) << ',' << fmt17(envelope_value(rc.case_id, ck.xi_abs)) << ','
            << (ck.pass ? "true" : "false") << '\n';
        cert_pass += ck.pass;
    }
    art.write(".csv", csv.str());

    // Random probe trajectories, drawn serially so the set does not depend on the worker count.
    std::mt19937_64 rng(c.seed);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> ud(std::log(c.xi_min), std::log(c.xi_max));
    const int n = state_size(c.variant);
    struct Probe {
        double xi;
        ModeState s;
    };
    std::vector<Probe> probes;
    for (int i = 0; i < c.probes; ++i) {
        Probe pr{std::exp(ud(rng)), ModeState::zero(c.variant)};
        for (int j = 0; j < n; ++j) pr.s.amp(j) = cplx(nd(rng), nd(rng));
        if (c.variant == Variant::CattaneoHeat) pr.s.q_perp = nd(rng);
        probes.push_back(pr);
    }
    std::vector<MonotonicityReport> mono(probes.size());
    parallel_for(probes.size(), workers, [&](std::size_t i) {
        Generator g = build_generator(rc.params, c.variant, probes[i].xi);
        Trajectory tr = propagate_mode(g, probes[i].s, derivative_grid(g.entries, c.t_max), c.tol);
        mono[i] = check_monotonicity(rc, tr, rc.params);
    });
    std::size_t mono_pass = 0;
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& m : mono) {
        mono_pass += m.pass;
        worst = std::max(worst, m.max_dLdt);
    }
    ojson rep;
    rep["case"] = to_string(rc.case_id);
    rep["epsilons"] = rc.epsilons;
    rep["weights"] = rc.weights;
    rep["chain_rate"] = rc.chain_rate;
    rep["gamma3"] = rc.gamma3;
    rep["gamma4"] = rc.gamma4;
    rep["implied_c"] = rc.implied_c;
    rep["tightenings"] = rc.tightenings;
    rep["derivation"] = rc.derivation_log;
    rep["certificate"] = {{"frequencies", certs.size()}, {"pass", cert_pass}};
    rep["monotonicity"] = {{"trajectories", mono.size()}, {"pass", mono_pass},
                           {"max_normalized_dLdt", mono.empty() ? 0.0 : worst}};
    rep["pass"] = cert_pass == certs.size() && mono_pass == mono.size();
    return rep;
}

InitialDataSpec data_spec(const RunConfig& c) {
    InitialDataSpec s;
    s.profile = parse_profile(c.profile);
    if (s.profile == Profile::AlgebraicTail) {
        if (!(c.tail_exponent > 0)) throw ConfigError("algebraic profile needs a positive tail exponent");
        s.tail_exponent = c.tail_exponent;
    }
    s.bump_lo = c.bump_lo;
    s.bump_hi = c.bump_hi;
    s.q_perp = c.q_perp;
    s.target_order = c.k;
    return s;
}

ojson run_decay_fit(const RunConfig& c, const ModelParams& p, Artifacts& art, int workers) {
    const Regime regime = effective_regime(c, p);
    if (regime == Regime::TauGreaterBeta) throw ConfigError("decay-fit needs tau <= beta");
    const std::vector<double> grid = log_xi_grid(c.xi_min, c.xi_max, c.xi_per_decade);
    SpectralData d = sample_initial_data(data_spec(c), grid, p, c.variant, default_observable(c.variant, regime));
    const std::vector<double> times = log_time_grid(std::min(1.0, c.fit_t_min), c.fit_t_max, 16);
    NormSeries ns = evolve_norm_series(p, c.variant, d, c.k, times, workers);
    ExponentFit f = fit_decay_exponent(ns, c.fit_t_min, c.fit_t_max);
    std::ostringstream csv;
    write_norm_series_csv(csv, ns);
    art.write(".csv", csv.str());
    const double ref = theorem_low_frequency_slope(regime, p.dim, c.k);
    double max_err = 0.0;
    for (double e : ns.error) max_err = std::max(max_err, e);
    return {{"regime", to_string(regime)},
            {"N", p.dim},
            {"k", c.k},
            {"window", {c.fit_t_min, c.fit_t_max}},
            {"slope", f.slope},
            {"slope_stderr", f.stderr_},
            {"rms_residual", f.rms_residual},
            {"power_law", f.power_law},
            {"theorem_slope", ref},
            {"within_tolerance", std::abs(f.slope - ref) <= c.slope_tol},
            {"tolerance", c.slope_tol},
            {"quadrature_converged", ns.converged},
            {"max_quadrature_error", max_err}};
}

ojson run_regloss(const RunConfig& c, const ModelParams& p, Artifacts& art, int workers) {
    if (c.variant != Variant::CattaneoHeat)
        throw ConfigError("regloss compares both heat laws; pass --variant cattaneo");
    RegularityLossConfig cfg;
    cfg.params = p;
    cfg.k = c.k;
    cfg.ell = c.ell;
    cfg.tail_exponent = c.tail_exponent;
    cfg.workers = workers;
    cfg.t_min = c.fit_t_min;
    cfg.t_max = c.fit_t_max;
    RegularityLossReport r = regularity_loss_experiment(cfg);
    std::ostringstream csv;
    write_norm_series_csv(csv, r.cattaneo);
    art.write(".csv", csv.str());
    return {{"regime", to_string(r.regime)},
            {"tail_exponent", r.tail_exponent},
            {"fourier", {{"gap", r.fourier_gap}, {"time", r.fourier_time}, {"ratio", r.fourier_ratio},
                         {"exponential", r.fourier_exponential}}},
            {"cattaneo", {{"slope", r.cattaneo_fit.slope}, {"slope_stderr", r.cattaneo_fit.stderr_},
                          {"rms_residual", r.cattaneo_fit.rms_residual}, {"power_law", r.cattaneo_fit.power_law},
                          {"theorem_slope", r.theorem_slope}, {"optimal_reference", r.optimal_slope},
                          {"consistent", r.cattaneo_consistent}}}};
}

void write_manifest(const RunConfig& c, Artifacts& art, int workers, const std::string& status) {
    ojson m;
    m["experiment"] = c.experiment;
    m["hash"] = config_hash(c);
    m["status"] = status;
    m["config"] = config_json(c, true);
    m["resolved_workers"] = workers;
    m["artifacts"] = art.files;
    m["versions"] = {{"mgt", kVersion},
                     {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                   std::to_string(EIGEN_MINOR_VERSION)},
                     {"compiler", __VERSION__}};
    m["timestamp"] = timestamp();
    art.write(".manifest.json", m.dump(2) + "\n");
}

}  // namespace

std::vector<double> Range::values() const {
    std::vector<double> out;
    if (count == 1) return {start};
    for (int i = 0; i < count; ++i) out.push_back(start + (stop - start) * i / (count - 1));
    if (count > 1) out.back() = stop;
    return out;
}

Range parse_range(const std::string& s) {
    Range r;
    const auto a = s.find(':');
    if (a == std::string::npos) {
        r.start = r.stop = parse_double("range", s);
        r.count = 1;
        return r;
    }
    const auto b = s.find(':', a + 1);
    if (b == std::string::npos) throw ConfigError("range must be start:stop:count, got '" + s + "'");
    r.start = parse_double("range", s.substr(0, a));
    r.stop = parse_double("range", s.substr(a + 1, b - a - 1));
    const long long n = parse_int("range", s.substr(b + 1));
    if (n < 0 || n > static_cast<long long>(kMaxCells)) throw ConfigError("range count out of bounds");
    r.count = static_cast<int>(n);
    return r;
}

std::string to_string(const Range& r) {
    return fmt17(r.start) + ":" + fmt17(r.stop) + ":" + std::to_string(r.count);
}

RunConfig config_from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    RunConfig c;
    for (const auto& [key, val] : j.items()) {
        if (key == "experiment") {
            if (!val.is_string()) throw ConfigError("'experiment' must be a string");
            c.experiment = val.get<std::string>();
        } else if (auto t = kTopLevel.find(key); t != kTopLevel.end()) {
            apply_setting(c, t->second, json_scalar(key, val));
        } else if (auto s = kSections.find(key); s != kSections.end()) {
            if (!val.is_object()) throw ConfigError("'" + key + "' must be an object");
            for (const auto& [name, v] : val.items()) {
                auto f = s->second.find(name);
                if (f == s->second.end()) throw ConfigError("unknown key '" + key + "." + name + "'");
                apply_setting(c, f->second, json_scalar(key + "." + name, v));
            }
        } else {
            throw ConfigError("unknown key '" + key + "'");
        }
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    const std::string ext = std::filesystem::path(path).extension().string();
    if (ext == ".toml") throw ConfigError("TOML configuration is not supported; use a JSON file");
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read config file " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return config_from_json_text(ss.str());
}

std::string config_to_json(const RunConfig& c) { return config_json(c, true).dump(2); }

ModelParams resolve_params(const RunConfig& c) {
    const ParamOverrides& o = c.params;
    ModelParams p;
    p.beta = o.beta.value_or(1.0);
    if (o.tau) {
        p.tau = *o.tau;
    } else if (c.regime == Regime::TauEqualsBeta) {
        p.tau = p.beta;
    } else if (c.regime == Regime::TauGreaterBeta) {
        p.tau = 2.0 * p.beta;
    } else {
        p.tau = 0.5 * p.beta;
    }
    p.a = o.a.value_or(1.0);
    p.gamma = o.gamma.value_or(1.0);
    p.kappa = o.kappa.value_or(1.0);
    p.eta = o.eta.value_or(c.variant == Variant::NoHeat ? 0.0 : 1.0);
    p.tau0 = o.tau0.value_or(c.variant == Variant::CattaneoHeat ? 0.2 : 0.0);
    p.dim = o.dim.value_or(1);
    validate(p, c.variant);
    if (c.regime && classify_regime(p) != *c.regime)
        throw ConfigError("parameters (tau=" + fmt17(p.tau) + ", beta=" + fmt17(p.beta) + ") are not in regime " +
                          to_string(*c.regime));
    return p;
}

std::string config_hash(const RunConfig& c) {
    const std::string s = config_json(c, false).dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

std::vector<std::string> run(const RunConfig& c, std::ostream& log) {
    validate_config(c);
    const int workers = c.workers > 0 ? c.workers : default_workers();
    Artifacts art{c.output_dir, c.experiment + "-" + config_hash(c), {}};
    ojson report;
    if (c.experiment == "stability-map") {
        ModelParams base = resolve_params(c);
        // Swept parameters are validated per cell; only the fixed ones must be consistent here.
        report = run_stability_map(c, base, art, workers);
    } else {
        const ModelParams p = resolve_params(c);
        log << "running " << c.experiment << " (" << to_string(c.variant) << ", tau=" << p.tau << ", beta=" << p.beta
            << ", eta=" << p.eta << ", tau0=" << p.tau0 << ", workers=" << workers << ")\n";
        if (c.experiment == "simulate") report = run_simulate(c, p, art);
        else if (c.experiment == "eig-expand") report = run_eig_expand(c, p, art);
        else if (c.experiment == "lyapunov-check") report = run_lyapunov_check(c, p, art, workers);
        else if (c.experiment == "decay-fit") report = run_decay_fit(c, p, art, workers);
        else report = run_regloss(c, p, art, workers);
    }
    ojson out;
    out["experiment"] = c.experiment;
    out["hash"] = config_hash(c);
    out["report"] = report;
    art.write(".json", out.dump(2) + "\n");
    write_manifest(c, art, workers, "ok");
    for (const auto& f : art.files) log << "wrote " << f << "\n";
    return art.files;
}

int main_entry(int argc, char** argv) {
    CLI::App app{"Per-mode stability, Lyapunov and decay experiments for the viscoelastic-thermal model"};
    app.require_subcommand(1);
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> settings;
    std::map<std::string, CLI::App*> subs;
    for (const auto& name : kExperiments) {
        CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
        sub->add_option("--config", config_path, "JSON configuration file");
        for (const auto& f : kFlags) {
            const std::string key = f.key;
            sub->add_option_function<std::string>(
                "--" + key, [&settings, key](const std::string& v) { settings.emplace_back(key, v); }, f.help);
        }
        subs[name] = sub;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    std::string experiment;
    for (const auto& [name, sub] : subs)
        if (sub->parsed()) experiment = name;

    RunConfig cfg;
    try {
        if (!config_path.empty()) cfg = load_config(config_path);
        if (!cfg.experiment.empty() && cfg.experiment != experiment)
            throw ConfigError("config is for '" + cfg.experiment + "' but the command is '" + experiment + "'");
        cfg.experiment = experiment;
        for (const auto& [k, v] : settings) apply_setting(cfg, k, v);
        run(cfg, std::cerr);
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        ojson diag = {{"experiment", cfg.experiment}, {"status", "numerical-failure"}, {"error", e.what()}};
        try {
            diag["config"] = config_json(cfg, true);
            Artifacts art{cfg.output_dir, cfg.experiment + "-" + config_hash(cfg), {}};
            art.write(".error.json", diag.dump(2) + "\n");
        } catch (const std::exception&) {
        }
        std::cerr << diag.dump() << "\n";
        return 2;
    }
}

}  // namespace mgt::cli
