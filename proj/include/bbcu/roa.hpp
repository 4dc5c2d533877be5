#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "bbcu/plant.hpp"

namespace bbcu {

class RoaError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

using Mat3 = std::array<double, 9>;   // row-major
using Vec3 = std::array<double, 3>;

// Quadratic certificate V(z) = z'Pz around an equilibrium of the sliding
// dynamics, z = (k - k*, x2 - x2_ref, x3 - x3*).
struct QuadraticLyapunov {
    Mat3 P;
    Vec3 center;   // (k*, x2_ref, x3*)
    double decay;  // shift used for the Lyapunov solve, or lambda* from the GEVP
};

struct CertificationParams {
    int grid_res = 33;
    int n_random = 100000;
    int levels = 21;            // geometric schedule c_max .. c_max/1024
    int lattice_dirs = 16384;   // deterministic spherical net
    int cap_res = 21;           // per-axis pole-cap net resolution
    int refine_starts = 64;
    int refine_iters = 120;
    std::uint64_t seed = 12345;
};

struct CertificationMeta {
    int grid_res;
    int n_random;
    std::uint64_t seed;
    double margin;         // refined max of Vdot at the certified level (<0)
    double c_max;
    int level_index;       // schedule index that certified, -1 when none
};

struct RoaEstimate {
    QuadraticLyapunov lyap;
    double level = 0.0;    // certified sublevel value c; 0 when none certifies
    CertificationMeta meta{};
    bool certified() const { return level > 0.0; }
};

// Solves (A + shift I)' P + P (A + shift I) = -I through the 9x9 vectorized
// system; empty when the system is singular or P is not positive definite.
std::optional<Mat3> lyapunov_solve(const Mat3& A, double shift);

// Largest decay rate with a common quadratic certificate, by bisection on
// the shifted Lyapunov feasibility. Requires A Hurwitz. For a single matrix
// this equals the negated spectral abscissa.
struct GevpResult {
    double lambda_star;
    Mat3 P;
};
GevpResult max_decay_gevp(const Mat3& A, double tol = 1e-6);

// Sliding dynamics of the generator-current objective in translated
// coordinates; the denominator L(z1+k*)^2 + C_H stays positive everywhere.
struct Mode2ReducedDynamics {
    double k_star, x2_ref, x3_star, gamma2, alpha;
    double L, C_H, R_L, C_L;
    Vec3 operator()(const Vec3& z) const;
};

Mode2ReducedDynamics mode2_reduced_dynamics(double x2_ref, double gamma2,
                                            const PlantParams& p);

// Largest level from the geometric schedule whose shell {c/2 <= V <= c}
// shows no nonnegative Vdot across the deterministic nets, the refined
// ascent, the grid and the seeded random samples.
RoaEstimate certify_level(const QuadraticLyapunov& lyap,
                          const std::function<Vec3(const Vec3&)>& reduced_dynamics,
                          const StateBox& box, double k_max,
                          const CertificationParams& cp);

// Full pipeline for one (R_D, I_OL) pair: 0.75-shift Lyapunov solve with a
// GEVP fallback, then sublevel certification.
RoaEstimate roa_estimate(const PlantParams& p, double iol, double gamma2,
                         const StateBox& box, double k_max,
                         const CertificationParams& cp);

// Closed-sublevel membership test, z built from the original coordinates.
// Throws RoaError on an uncertified estimate.
bool contains(const RoaEstimate& roa, const PlantState& x, double k);

// V(z) for diagnostics.
double level_value(const RoaEstimate& roa, const PlantState& x, double k);

// Boundary of the level set projected onto a coordinate pair (shadow of the
// ellipsoid), as a closed polyline of >= n_points in original coordinates.
// Axes are indices into (k, x2, x3).
std::vector<std::array<double, 2>> project_roa(const RoaEstimate& roa, int axis_a,
                                               int axis_b, int n_points = 128);

}  // namespace bbcu
