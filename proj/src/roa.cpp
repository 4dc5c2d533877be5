#include "bbcu/roa.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

#include "bbcu/analysis.hpp"

namespace bbcu {

namespace {

using EMat3 = Eigen::Matrix3d;

EMat3 to_eigen(const Mat3& m) {
    return Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(m.data());
}

Mat3 from_eigen(const EMat3& m) {
    Mat3 out;
    Eigen::Map<Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(out.data()) = m;
    return out;
}

// xorshift-based generator with explicit distributions so that traces are
// reproducible independent of the standard library.
struct Rng {
    std::uint64_t s;
    explicit Rng(std::uint64_t seed) : s(seed ? seed : 0x9e3779b97f4a7c15ULL) {}
    std::uint64_t next() {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        return s;
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double normal() {
        // Box-Muller; discard the second value for simplicity
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 1e-300)
            u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }
};

}  // namespace

std::optional<Mat3> lyapunov_solve(const Mat3& A, double shift) {
    const EMat3 As = to_eigen(A) + shift * EMat3::Identity();
    Eigen::Matrix<double, 9, 9> M = Eigen::Matrix<double, 9, 9>::Zero();
    // vec(As' P + P As) = (I (x) As' + As' (x) I) vec(P), column-major vec
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) {
                M(3 * j + i, 3 * j + k) += As(k, i);  // As' P
                M(3 * j + i, 3 * k + i) += As(k, j);  // P As
            }
    Eigen::Matrix<double, 9, 1> b;
    b.setZero();
    b(0) = b(4) = b(8) = -1.0;
    const Eigen::FullPivLU<Eigen::Matrix<double, 9, 9>> lu(M);
    if (!lu.isInvertible())
        return std::nullopt;
    const Eigen::Matrix<double, 9, 1> vecP = lu.solve(b);
    EMat3 P;
    for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i)
            P(i, j) = vecP(3 * j + i);
    P = 0.5 * (P + P.transpose()).eval();
    const Eigen::SelfAdjointEigenSolver<EMat3> es(P);
    if (es.eigenvalues().minCoeff() <= 0.0)
        return std::nullopt;
    return from_eigen(P);
}

GevpResult max_decay_gevp(const Mat3& A, double tol) {
    if (!(spectral_abscissa(A) < 0.0))
        throw RoaError("max_decay_gevp: matrix is not Hurwitz");
    double lo = 0.0;
    double hi = 1.0;
    auto feasible = [&](double lam) { return lyapunov_solve(A, lam).has_value(); };
    if (!feasible(0.0))
        throw RoaError("max_decay_gevp: Lyapunov solve infeasible at zero shift");
    while (feasible(hi)) {
        hi *= 2.0;
        if (hi > 1e12)
            throw RoaError("max_decay_gevp: no finite feasibility boundary");
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (feasible(mid) ? lo : hi) = mid;
    }
    return {lo, *lyapunov_solve(A, lo)};
}

Vec3 Mode2ReducedDynamics::operator()(const Vec3& z) const {
    const double z1 = z[0], z2 = z[1], z3 = z[2];
    const double D = L * (z1 + k_star) * (z1 + k_star) + C_H;
    const double f1 = gamma2 * z2;
    const double f2 = (-L * (z1 + k_star) * (z2 + x2_ref) * gamma2 * z2 -
                       alpha * C_H * z2 - z3 * (z1 + k_star) - x3_star * z1) /
                      D;
    const double f3 = -z3 / (R_L * C_L) + (z1 * z2 + k_star * z2 + x2_ref * z1) / C_L;
    return {f1, f2, f3};
}

Mode2ReducedDynamics mode2_reduced_dynamics(double x2_ref, double gamma2,
                                            const PlantParams& p) {
    const ReducedSteadyState ss = mode2_steady_state(x2_ref, p);
    const DerivedParams d = derive(p);
    return {ss.k_star, x2_ref, ss.x3_star, gamma2, d.alpha, p.L, p.C_H, p.R_L, p.C_L};
}

namespace {

struct ShellChecker {
    const std::function<Vec3(const Vec3&)>& f;
    EMat3 P;
    EMat3 Rinv;  // inverse of the Cholesky factor, P = R'R

    double vdot(const Eigen::Vector3d& z) const {
        const Vec3 fz = f({z(0), z(1), z(2)});
        const Eigen::Vector3d fv(fz[0], fz[1], fz[2]);
        return 2.0 * z.dot(P * fv);
    }
    double vdot_w(const Eigen::Vector3d& w) const { return vdot(Rinv * w); }
};

// Deterministic spherical Fibonacci net.
std::vector<Eigen::Vector3d> fib_directions(int n) {
    std::vector<Eigen::Vector3d> d;
    d.reserve(n);
    const double golden = 3.141592653589793 * (1.0 + std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
        const double ci = 1.0 - 2.0 * (i + 0.5) / n;
        const double phi = std::acos(std::clamp(ci, -1.0, 1.0));
        const double th = golden * (i + 0.5);
        d.emplace_back(std::cos(th) * std::sin(phi), std::sin(th) * std::sin(phi),
                       std::cos(phi));
    }
    return d;
}

// Caps around the +-principal axes: the falsification lobes of these
// dynamics concentrate in narrow cones at the gain-axis tips.
std::vector<Eigen::Vector3d> cap_directions(int res) {
    std::vector<Eigen::Vector3d> d;
    const double extent = 0.25;
    for (int ax = 0; ax < 3; ++ax)
        for (int sgn = -1; sgn <= 1; sgn += 2)
            for (int i = 0; i < res; ++i)
                for (int j = 0; j < res; ++j) {
                    Eigen::Vector3d v = Eigen::Vector3d::Zero();
                    v(ax) = sgn;
                    v((ax + 1) % 3) = extent * (2.0 * i / (res - 1) - 1.0);
                    v((ax + 2) % 3) = extent * (2.0 * j / (res - 1) - 1.0);
                    d.push_back(v.normalized());
                }
    return d;
}

// Projected ascent of Vdot on the shell in whitened coordinates; returns the
// refined local maximum.
double ascend(const ShellChecker& sc, Eigen::Vector3d w, double c, int iters) {
    const double rlo = std::sqrt(0.5 * c), rhi = std::sqrt(c);
    double step = 0.05 * std::sqrt(c);
    double fcur = sc.vdot_w(w);
    for (int it = 0; it < iters; ++it) {
        const double h = 1e-7 * std::sqrt(c);
        Eigen::Vector3d g;
        for (int j = 0; j < 3; ++j) {
            Eigen::Vector3d wp = w, wm = w;
            wp(j) += h;
            wm(j) -= h;
            g(j) = (sc.vdot_w(wp) - sc.vdot_w(wm)) / (2.0 * h);
        }
        const double gn = g.norm();
        if (gn == 0.0)
            break;
        Eigen::Vector3d wn = w + step / gn * g;
        const double r = wn.norm();
        wn *= std::clamp(r, rlo, rhi) / r;
        const double fn = sc.vdot_w(wn);
        if (fn > fcur) {
            w = wn;
            fcur = fn;
            step *= 1.3;
        } else {
            step *= 0.5;
            if (step < 1e-9 * std::sqrt(c))
                break;
        }
    }
    return fcur;
}

}  // namespace

RoaEstimate certify_level(const QuadraticLyapunov& lyap,
                          const std::function<Vec3(const Vec3&)>& reduced_dynamics,
                          const StateBox& box, double k_max,
                          const CertificationParams& cp) {
    const EMat3 P = to_eigen(lyap.P);
    const Eigen::LLT<EMat3> llt(P);
    if (llt.info() != Eigen::Success)
        throw RoaError("certify_level: P is not positive definite");
    const EMat3 R = llt.matrixU();
    const EMat3 Rinv = R.inverse();
    const EMat3 Pinv = P.inverse();
    const ShellChecker sc{reduced_dynamics, P, Rinv};

    // outer level scale from the translated box corners
    const double kc = lyap.center[0];
    const double z1r[2] = {-k_max - kc, k_max - kc};
    const double z2r[2] = {box.x2_min - lyap.center[1], box.x2_max - lyap.center[1]};
    const double z3r[2] = {box.x3_min - lyap.center[2], box.x3_max - lyap.center[2]};
    double c_max = 0.0;
    for (double a : z1r)
        for (double b : z2r)
            for (double g : z3r) {
                const Eigen::Vector3d z(a, b, g);
                c_max = std::max(c_max, z.dot(P * z));
            }

    const auto fib = fib_directions(cp.lattice_dirs);
    const auto caps = cap_directions(cp.cap_res);
    std::vector<double> radii;
    for (int i = 0; i < 8; ++i)
        radii.push_back(std::sqrt(0.5 + 0.5 * i / 7.0));

    RoaEstimate out;
    out.lyap = lyap;
    out.meta = {cp.grid_res, cp.n_random, cp.seed, 0.0, c_max, -1};

    for (int li = 0; li < cp.levels; ++li) {
        const double c = c_max * std::pow(2.0, -0.5 * li);
        const double rs = std::sqrt(c);

        // deterministic nets, tracking the worst points for refinement
        std::vector<std::pair<double, Eigen::Vector3d>> worst;
        bool bad = false;
        auto scan = [&](const std::vector<Eigen::Vector3d>& dirs) {
            for (const auto& dir : dirs) {
                for (double fr : radii) {
                    const Eigen::Vector3d w = dir * (rs * fr);
                    const double v = sc.vdot_w(w);
                    if (v >= 0.0) {
                        bad = true;
                        return;
                    }
                    worst.emplace_back(v, w);
                }
            }
        };
        scan(fib);
        if (!bad)
            scan(caps);
        if (bad)
            continue;

        std::nth_element(worst.begin(),
                         worst.begin() + std::min<std::size_t>(cp.refine_starts, worst.size()) - 1,
                         worst.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
        double refined_max = -std::numeric_limits<double>::infinity();
        const std::size_t ns = std::min<std::size_t>(cp.refine_starts, worst.size());
        for (std::size_t i = 0; i < ns && !bad; ++i) {
            refined_max = std::max(refined_max, ascend(sc, worst[i].second, c, cp.refine_iters));
            if (refined_max >= 0.0)
                bad = true;
        }
        if (bad)
            continue;

        // spec grid over the bounding box of the ellipsoid
        const Eigen::Vector3d bb =
            (c * Pinv.diagonal().array()).sqrt().matrix();
        for (int i = 0; i < cp.grid_res && !bad; ++i)
            for (int j = 0; j < cp.grid_res && !bad; ++j)
                for (int k = 0; k < cp.grid_res; ++k) {
                    const Eigen::Vector3d z(
                        bb(0) * (2.0 * i / (cp.grid_res - 1) - 1.0),
                        bb(1) * (2.0 * j / (cp.grid_res - 1) - 1.0),
                        bb(2) * (2.0 * k / (cp.grid_res - 1) - 1.0));
                    const double V = z.dot(P * z);
                    if (V < 0.5 * c || V > c)
                        continue;
                    if (sc.vdot(z) >= 0.0) {
                        bad = true;
                        break;
                    }
                }
        if (bad)
            continue;

        // seeded random shell samples
        Rng rng(cp.seed ^ (0x5bd1e995ULL * (li + 1)));
        for (int i = 0; i < cp.n_random; ++i) {
            Eigen::Vector3d w(rng.normal(), rng.normal(), rng.normal());
            const double n = w.norm();
            if (n == 0.0)
                continue;
            const double r2 = 0.5 * c + 0.5 * c * rng.uniform();
            w *= std::sqrt(r2) / n;
            if (sc.vdot_w(w) >= 0.0) {
                bad = true;
                break;
            }
        }
        if (bad)
            continue;

        out.level = c;
        out.meta.margin = refined_max;
        out.meta.level_index = li;
        return out;
    }
    return out;  // level 0: nothing certified
}

RoaEstimate roa_estimate(const PlantParams& p, double iol, double gamma2,
                         const StateBox& box, double k_max,
                         const CertificationParams& cp) {
    const double x2_ref = p.E_H - p.R_H * iol;
    const Mode2ReducedDynamics dyn = mode2_reduced_dynamics(x2_ref, gamma2, p);
    const Mat3 A =
        mode2_dynamic_matrix(dyn.k_star, x2_ref, dyn.x3_star, gamma2, p);

    QuadraticLyapunov lyap;
    lyap.center = {dyn.k_star, x2_ref, dyn.x3_star};
    if (auto P = lyapunov_solve(A, 0.75)) {
        lyap.P = *P;
        lyap.decay = 0.75;
    } else {
        const GevpResult g = max_decay_gevp(A);
        lyap.P = g.P;
        lyap.decay = g.lambda_star;
    }
    return certify_level(
        lyap, [dyn](const Vec3& z) { return dyn(z); }, box, k_max, cp);
}

double level_value(const RoaEstimate& roa, const PlantState& x, double k) {
    const Eigen::Vector3d z(k - roa.lyap.center[0], x.x2 - roa.lyap.center[1],
                            x.x3 - roa.lyap.center[2]);
    return z.dot(to_eigen(roa.lyap.P) * z);
}

bool contains(const RoaEstimate& roa, const PlantState& x, double k) {
    if (!roa.certified())
        throw RoaError("contains: estimate is not certified");
    return level_value(roa, x, k) <= roa.level;
}

std::vector<std::array<double, 2>> project_roa(const RoaEstimate& roa, int axis_a,
                                               int axis_b, int n_points) {
    if (!roa.certified())
        throw RoaError("project_roa: estimate is not certified");
    if (axis_a == axis_b || axis_a < 0 || axis_b < 0 || axis_a > 2 || axis_b > 2)
        throw RoaError("project_roa: invalid axis pair");
    // shadow of {z'Pz <= c} on (a, b): Schur complement of the third block
    const EMat3 P = to_eigen(roa.lyap.P);
    int other = 3 - axis_a - axis_b;
    Eigen::Matrix2d S;
    const int idx[2] = {axis_a, axis_b};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            S(i, j) = P(idx[i], idx[j]) - P(idx[i], other) * P(other, idx[j]) / P(other, other);
    const Eigen::LLT<Eigen::Matrix2d> llt(S);
    const Eigen::Matrix2d Rinv = Eigen::Matrix2d(llt.matrixU()).inverse();
    std::vector<std::array<double, 2>> pts;
    pts.reserve(n_points + 1);
    for (int i = 0; i <= n_points; ++i) {
        const double th = 6.283185307179586 * i / n_points;
        const Eigen::Vector2d w(std::cos(th), std::sin(th));
        const Eigen::Vector2d z = std::sqrt(roa.level) * (Rinv * w);
        pts.push_back({roa.lyap.center[axis_a] + z(0), roa.lyap.center[axis_b] + z(1)});
    }
    return pts;
}

}  // namespace bbcu
