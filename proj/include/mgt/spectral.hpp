#pragma once

#include <string>
#include <vector>

#include "mgt/model.hpp"

namespace mgt {

// Characteristic polynomial in descending powers of lambda, monic.
// `scale` recovers the unnormalized form used for Hurwitz minors (tau, or tau*tau0).
struct CharPoly {
    int degree = 0;
    std::vector<cplx> coeffs;
    double xi_abs = 0.0;
    double scale = 1.0;
    bool is_real = true;
    bool from_determinant = false;  // true when the closed form did not apply
};

// True when the closed-form coefficients apply (a = 1 and gamma*kappa = 1, or gamma = kappa).
bool has_closed_form(const ModelParams& p, Variant variant);

CharPoly char_poly(const ModelParams& p, Variant variant, double xi_abs);

// Coefficients of det(lambda I - M), monic, from the permutation expansion in extended precision.
// Intended for the small generators here; throws ConfigError above 8 x 8.
std::vector<cplx> matrix_char_poly(const Eigen::MatrixXcd& m);

cplx poly_eval(const std::vector<cplx>& coeffs, cplx x);

// Balanced companion-matrix eigensolve, then Aberth and Newton polish in extended precision.
// Throws NumericalError if the componentwise backward error stays above 1e-10.
std::vector<cplx> poly_roots(const CharPoly& p);
std::vector<cplx> poly_roots(const std::vector<cplx>& coeffs);

// Leading Hurwitz minors A_1..A_n of the unnormalized real polynomial.
std::vector<double> hurwitz_minors(const CharPoly& p);

// Permanents of |H_k|: bounds on the sum of absolute Leibniz terms of each minor.
// A minor within 1e3 * eps of its bound is treated as zero (marginal).
std::vector<double> hurwitz_minor_bounds(const CharPoly& p);

enum class Verdict { Stable, Marginal, Unstable };
std::string to_string(Verdict v);

struct StabilityVerdict {
    Verdict verdict = Verdict::Marginal;
    std::vector<double> minors;
    double witness = 0.0;  // max real part of the numeric roots
    bool roots_agree = true;
};

StabilityVerdict rh_verdict(const ModelParams& p, Variant variant, double xi_abs);

enum class Limit { SmallXi, LargeXi };
std::string to_string(Limit l);

struct Branch {
    std::string id;
    double coeff = 0.0;      // Re lambda ~ coeff * |xi|^power
    double power = 0.0;
    double remainder = 0.0;  // |Re lambda - coeff |xi|^power| = O(|xi|^remainder)
};

struct EigenExpansion {
    Limit limit = Limit::SmallXi;
    Variant variant = Variant::FourierHeat;
    Regime regime = Regime::TauLessBeta;
    std::vector<Branch> branches;
    std::vector<cplx> side_data;  // cubic roots feeding the Cattaneo bounded branches
    bool degenerate = false;      // double root in the leading balance
};

EigenExpansion expansion_small_xi(const ModelParams& p, Variant variant, Regime regime);
EigenExpansion expansion_large_xi(const ModelParams& p, Variant variant, Regime regime);

struct SigmaRoots {
    std::vector<cplx> roots;
    double real_root = 0.0;
    bool real_root_bracketed = false;  // lies in (-1/tau - 1/tau0, 0)
    bool all_negative = false;
};

// Roots of tau eta^2 tau0 s^3 + eta^2 (tau0 + tau) s^2 + (eta^2 + beta kappa^2) s + kappa^2.
SigmaRoots sigma_cubic(const ModelParams& p);

struct BranchReport {
    std::string id;
    double predicted_coeff = 0.0;
    double measured_coeff = 0.0;   // Re lambda / |xi|^power at the ladder end
    double coeff_rel_error = 0.0;
    double expected_order = 0.0;   // remainder order in the expansion variable
    double measured_order = 0.0;   // fitted log-log slope of the remainder
    bool at_noise_floor = false;   // remainder indistinguishable from rounding
    bool pass = false;
};

struct ExpansionReport {
    Limit limit = Limit::SmallXi;
    std::vector<double> ladder;
    std::vector<BranchReport> branches;
    double crossing_xi = 0.0;  // nonzero when branch continuation hit a collision
    bool pass = false;
};

// Default geometric ladders: 2^-2 .. 2^-13 toward zero, 2^2 .. 2^13 toward infinity.
std::vector<double> default_ladder(Limit limit, int points = 12);

// Compares extended-precision roots along the ladder to the expansion.
// A branch passes when its remainder slope is at least the stated order minus `slope_tol`
// (relaxed by 0.5 for degenerate expansions) and the leading coefficient matches within
// `coeff_tol` at the ladder end.
ExpansionReport verify_expansion(const EigenExpansion& e, const ModelParams& p, Variant variant,
                                 const std::vector<double>& ladder, double slope_tol = 0.2,
                                 double coeff_tol = 0.01);

}  // namespace mgt
