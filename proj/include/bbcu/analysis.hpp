#pragma once

#include <array>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "bbcu/control.hpp"
#include "bbcu/plant.hpp"

namespace bbcu {

class AnalysisError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Steady state of the sliding dynamics for the active objective. The
// manifold ties k*, x2* and x1* = k* x2* together; x3* = R_L x1* + E_L.
struct ReducedSteadyState {
    double k_star;
    double x2_star;
    double x3_star;
};

// Asymptotic gain for constant-current battery recharge at reference x1_ref.
// Throws AnalysisError when the discriminant is negative (reference too
// aggressive for the load).
double k_infinity_current(double x1_ref, const PlantParams& p);

// Asymptotic gain for HV voltage regulation at reference x2_ref. Throws
// AnalysisError outside (0, x2_ref_upper_bound) or on negative discriminant.
double k_infinity_voltage(double x2_ref, const PlantParams& p);

// Upper admissible voltage reference (battery-assist feasibility bound).
double x2_ref_upper_bound(const PlantParams& p);

ReducedSteadyState mode1_steady_state(double x1_ref, const PlantParams& p);
ReducedSteadyState mode2_steady_state(double x2_ref, const PlantParams& p);

// Sliding dynamics of the current-tracking objective (k, x2, x3 on the
// manifold x1 = k x2); used for cross-checks against the equivalent control.
std::array<double, 3> mode1_reduced_rhs(double k, double x2, double x3, double gamma1,
                                        double x1_ref, const PlantParams& p);

struct Theorem1Constants {
    double psi1, psi2, psi3;
    double k_max_bound;       // +inf when no corner constrains it
    double gamma1_bound;      // min of the two reaching bounds at k_max_bound
    double a_of_gamma1;
    double b_of_gamma1;
    double nu;                // min(a, b); > 0 required for manifold stability
    double omega;             // worst-case reaching rate over the box (small-gain limit)
    double cylinder_radius;   // sqrt(2/(gamma1 L x2*)) nu
    ReducedSteadyState steady;
    bool hyp_reference_ok;    // x10* < x1_ref < x11*
    bool hyp_box_ok;          // x3_max < x2_min
    bool hyp_ratio_ok;        // x3*/x2* < 1 at the reduced steady state
    bool gamma1_ok;           // gamma1 below both reaching bounds
    bool valid;               // all of the above and nu > 0
    std::string violation;    // first failed hypothesis, empty when valid
};

Theorem1Constants theorem1_constants(const StateBox& box, double x1_ref, double gamma1,
                                     double k_max, const PlantParams& p);

enum class LoadRegime { RDhigh, RDlow };

struct Theorem2Constants {
    double delta_e;
    double gamma2_hat;        // +inf in the RDhigh regime
    double a0, a10, a11, a20, a21, a3;   // reported as printed (R read as R_L)
    std::array<double, 3> p_quad;        // exact Routh product quadratic in gamma2
    double gamma_prime, gamma_second;    // real roots of p_quad, NaN when complex
    double gamma_plus;        // smallest real positive root, +inf when none
    double gamma2_bound;      // box-based reaching bound on gamma2
    LoadRegime regime;
    double gamma2_admissible; // +inf in RDhigh, min(gamma2_hat, gamma_plus) in RDlow
    ReducedSteadyState steady;
    bool hyp_reference_ok;    // x21* < x2_ref < x20*
    bool valid;
};

// Requires a real delta_e discriminant; hypothesis flags are reported, not
// enforced (the scenario ladder intentionally exercises x2_ref > x20*).
Theorem2Constants theorem2_constants(double x2_ref, double gamma2, const StateBox& box,
                                     double k_max, const PlantParams& p);

// Worst-case reaching rate over the box, evaluated in the vanishing-gain
// limit of the admissible adaptation set: min(x3_min, x2_min - x3_max)/L.
// Throws AnalysisError when the box yields a non-positive rate.
double reaching_rate(const StateBox& box, const ControllerState& cs, const PlantParams& p);

// t_reach <= |sigma0| / omega.
double reaching_time_bound(double sigma0, double omega);

// Linearization of the voltage-regulated sliding dynamics around its steady
// state, row-major.
std::array<double, 9> mode2_dynamic_matrix(double k_star, double x2_ref, double x3_star,
                                           double gamma2, const PlantParams& p);

// Characteristic polynomial of mode2_dynamic_matrix as q(s) = a(s) + g2 b(s),
// returned monic: {1, c2, c1, c0}.
std::array<double, 4> mode2_char_poly(double k_star, double x2_ref, double x3_star,
                                      double gamma2, const PlantParams& p);

// Monic-normalized Routh-Hurwitz test for a cubic given as {a3, a2, a1, a0}
// (descending powers). Requires a3 > 0.
bool routh_hurwitz_cubic(const std::array<double, 4>& coeffs);

// Roots of a cubic, deterministic ordering by (Re, Im).
std::vector<std::complex<double>> cubic_roots(const std::array<double, 4>& coeffs);

// Characteristic polynomial {1, c2, c1, c0} of a row-major 3x3 matrix.
std::array<double, 4> char_poly_3x3(const std::array<double, 9>& m);

// max Re over the eigenvalues of a row-major 3x3 matrix.
double spectral_abscissa(const std::array<double, 9>& m);

}  // namespace bbcu
