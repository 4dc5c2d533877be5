#include "bbcu/analysis.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace bbcu {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double k_infinity_current(double x1_ref, const PlantParams& p) {
    const DerivedParams d = derive(p);
    const double x3s = p.R_L * x1_ref + p.E_L;
    const double disc = p.E_H * p.E_H - 4.0 * p.R_H * p.R_H * p.C_H * x1_ref * x3s * d.alpha;
    if (disc < 0.0)
        throw AnalysisError("k_infinity_current: reference infeasible for this load");
    return (p.E_H - std::sqrt(disc)) / (2.0 * p.R_H * x3s);
}

double x2_ref_upper_bound(const PlantParams& p) {
    const double r = p.R_D / (p.R_D + p.R_H);
    const double el_eh = p.E_L / p.E_H;
    return 0.5 * r * p.E_H *
           (1.0 + std::sqrt(1.0 + (p.R_D + p.R_H) / p.R_D * (p.C_H / p.C_L) * el_eh * el_eh));
}

double k_infinity_voltage(double x2_ref, const PlantParams& p) {
    if (!(x2_ref > 0.0) || !(x2_ref < x2_ref_upper_bound(p)))
        throw AnalysisError("k_infinity_voltage: x2_ref outside (0, upper bound)");
    const DerivedParams d = derive(p);
    const double disc =
        p.E_L * p.E_L - 4.0 * p.R_L * x2_ref * (d.alpha * p.C_H * x2_ref - p.E_H / p.R_H);
    if (disc < 0.0)
        throw AnalysisError("k_infinity_voltage: negative discriminant");
    return (-p.E_L + std::sqrt(disc)) / (2.0 * p.R_L * x2_ref);
}

ReducedSteadyState mode1_steady_state(double x1_ref, const PlantParams& p) {
    const double k = k_infinity_current(x1_ref, p);
    const double x3s = p.R_L * x1_ref + p.E_L;
    // x2* from the manifold identity; at x1_ref = 0 the gain vanishes and the
    // HV node sits at the unloaded equilibrium.
    const double x2s = k != 0.0 ? x1_ref / k : equilibrium(0, p).x2;
    return {k, x2s, x3s};
}

ReducedSteadyState mode2_steady_state(double x2_ref, const PlantParams& p) {
    const double k = k_infinity_voltage(x2_ref, p);
    return {k, x2_ref, p.R_L * k * x2_ref + p.E_L};
}

std::array<double, 3> mode1_reduced_rhs(double k, double x2, double x3, double gamma1,
                                        double x1_ref, const PlantParams& p) {
    const DerivedParams d = derive(p);
    const double kd = gamma1 * (x1_ref - k * x2);
    const double ueq = equivalent_control(k, kd, {k * x2, x2, x3}, d, p);
    return {kd, -d.alpha * x2 - k * x2 * ueq / p.C_H + d.beta_H,
            k * x2 / p.C_L - x3 / (p.R_L * p.C_L) + d.beta_L};
}

Theorem1Constants theorem1_constants(const StateBox& box, double x1_ref, double gamma1,
                                     double k_max, const PlantParams& p) {
    validate(box);
    const DerivedParams d = derive(p);
    Theorem1Constants c{};
    c.psi1 = std::min(d.beta_H - d.alpha * box.x2_max, -(d.beta_H - d.alpha * box.x2_min));
    c.psi2 = std::min(box.x1_min, -box.x1_max);
    c.psi3 = std::max(d.beta_H - d.alpha * box.x2_max, -(d.beta_H - d.alpha * box.x2_min));

    // Each corner constraint binds only where its denominator is positive.
    const double den2 = std::abs(c.psi2) / p.C_H + c.psi3;
    const double kb1 = c.psi1 < 0.0 ? box.x3_min / (p.L * std::abs(c.psi1)) : kInf;
    const double kb2 = den2 > 0.0 ? (box.x2_min - box.x3_max) / (p.L * den2) : kInf;
    c.k_max_bound = std::min(kb1, kb2);

    const double km = std::min(k_max, c.k_max_bound);
    const double g1 = (box.x3_min / p.L + km * c.psi1) /
                      ((box.x1_max - x1_ref) * box.x2_max);
    const double g2 = ((box.x2_min - box.x3_max) / p.L - km * den2) /
                      ((x1_ref - box.x1_min) * box.x2_max);
    c.gamma1_bound = std::min(g1, g2);

    c.steady = mode1_steady_state(x1_ref, p);
    const double x2s = c.steady.x2_star, x3s = c.steady.x3_star, ks = c.steady.k_star;
    c.a_of_gamma1 = gamma1 * p.L * x2s * x2s * x2s -
                    p.R_L / 4.0 * x2s * x2s * x2s / x3s -
                    0.25 * x3s * x3s / (gamma1 * p.L * ks * x1_ref);
    c.b_of_gamma1 = d.alpha * p.C_H - 3.0 * gamma1 * p.L * ks * x1_ref;
    c.nu = std::min(c.a_of_gamma1, c.b_of_gamma1);
    c.cylinder_radius = std::sqrt(2.0 / (gamma1 * p.L * x2s)) * c.nu;

    c.omega = std::min(box.x3_min, box.x2_min - box.x3_max) / p.L;

    const PlantState e0 = equilibrium(0, p);
    const PlantState e1 = equilibrium(1, p);
    c.hyp_reference_ok = e0.x1 < x1_ref && x1_ref < e1.x1;
    c.hyp_box_ok = box.x3_max < box.x2_min;
    c.hyp_ratio_ok = x3s / x2s < 1.0;
    c.gamma1_ok = gamma1 < c.gamma1_bound;
    c.valid = c.hyp_reference_ok && c.hyp_box_ok && c.hyp_ratio_ok && c.gamma1_ok && c.nu > 0.0;
    if (!c.hyp_reference_ok)
        c.violation = "x1_ref outside (x10*, x11*)";
    else if (!c.hyp_box_ok)
        c.violation = "x3_max >= x2_min";
    else if (!c.hyp_ratio_ok)
        c.violation = "x3*/x2* >= 1 at the reduced steady state";
    else if (!c.gamma1_ok)
        c.violation = "gamma1 above the reaching bound";
    else if (!(c.nu > 0.0))
        c.violation = "nu <= 0";
    return c;
}

namespace {

// Coefficients of q(s) = a(s) + g2 b(s) split as c2 = A2 + g2 B2,
// c1 = A1 + g2 B1, c0 = g2 B0 (monic cubic).
struct QSplit {
    double A2, A1, B2, B1, B0;
};

QSplit q_split(double ks, double x2r, double x3s, const PlantParams& p,
               const DerivedParams& d) {
    const double D = p.L * ks * ks + p.C_H;
    const double rlcl = p.R_L * p.C_L;
    QSplit q;
    q.A2 = (p.L * ks * ks + p.C_H + d.alpha * p.C_H * rlcl) / (rlcl * D);
    q.A1 = (p.R_L * ks * ks + d.alpha * p.C_H) / (rlcl * D);
    q.B2 = p.L * ks * x2r / D;
    q.B1 = (rlcl * x3s + p.L * ks * x2r) / (rlcl * D);
    q.B0 = (p.R_L * ks * x2r + x3s) / (rlcl * D);
    return q;
}

}  // namespace

Theorem2Constants theorem2_constants(double x2_ref, double gamma2, const StateBox& box,
                                     double k_max, const PlantParams& p) {
    validate(box);
    const DerivedParams d = derive(p);
    Theorem2Constants c{};
    const double disc =
        p.E_L * p.E_L -
        4.0 * x2_ref * (p.R_L / p.R_H) * ((1.0 + p.R_H / p.R_D) * x2_ref - p.E_H);
    if (disc < 0.0)
        throw AnalysisError("theorem2_constants: infeasible reference (negative discriminant)");
    const double sq = std::sqrt(disc);
    c.delta_e = sq - p.E_L;
    c.regime = p.R_D > x2_ref * p.R_H / (p.E_H - x2_ref) ? LoadRegime::RDhigh
                                                         : LoadRegime::RDlow;

    // The printed bound divides by delta_e, which is negative exactly in the
    // regime where it applies; |delta_e| matches the exact c2 > 0 condition.
    const double ade = std::abs(c.delta_e);
    c.gamma2_hat =
        ade > 0.0
            ? (2.0 / p.L) * (p.C_H / p.C_L) *
                      (1.0 + (1.0 + p.R_H / p.R_D) * (p.R_L / p.R_H) * (p.C_L / p.C_H)) / ade +
                  ade / (2.0 * p.C_L * p.R_L * p.R_L * x2_ref * x2_ref)
            : kInf;

    c.a0 = 0.5 * (c.delta_e + p.E_L);
    c.a10 = (p.E_H / p.R_H - p.E_L / p.R_L * (c.delta_e - p.E_L) / (2.0 * x2_ref)) / x2_ref;
    c.a11 = p.L / p.R_L * (c.delta_e - p.E_L) + p.R_L * p.C_L * (c.delta_e + p.E_L);
    const double ghat = std::isfinite(c.gamma2_hat) ? c.gamma2_hat : 0.0;
    c.a20 = 0.5 * p.L * p.C_L * ghat * (c.delta_e - p.E_L);
    c.a21 = 0.5 * p.L * p.C_L * (c.delta_e - p.E_L);
    c.a3 = p.R_L * p.C_L * p.R_L * p.C_L *
           (0.5 * p.L / p.R_L * ghat * (c.delta_e - p.E_L) -
            (p.R_D + p.R_H) / (p.R_D * p.R_H));

    c.steady = {c.delta_e / (2.0 * p.R_L * x2_ref), x2_ref,
                p.R_L * c.delta_e / 2.0 + p.E_L};
    const QSplit q = q_split(c.steady.k_star, x2_ref, c.steady.x3_star, p, d);
    c.p_quad = {q.B2 * q.B1, q.A2 * q.B1 + q.A1 * q.B2 - q.B0, q.A2 * q.A1};

    c.gamma_prime = std::numeric_limits<double>::quiet_NaN();
    c.gamma_second = std::numeric_limits<double>::quiet_NaN();
    c.gamma_plus = kInf;
    const double pa = c.p_quad[0], pb = c.p_quad[1], pc = c.p_quad[2];
    if (pa != 0.0) {
        const double qd = pb * pb - 4.0 * pa * pc;
        if (qd >= 0.0) {
            // sign-aware quadratic roots
            const double s = pb >= 0.0 ? 1.0 : -1.0;
            const double t = -0.5 * (pb + s * std::sqrt(qd));
            double r1 = t / pa;
            double r2 = t != 0.0 ? pc / t : 0.0;
            if (r1 > r2)
                std::swap(r1, r2);
            c.gamma_prime = r1;
            c.gamma_second = r2;
            if (r1 > 0.0)
                c.gamma_plus = r1;
            else if (r2 > 0.0)
                c.gamma_plus = r2;
        }
    } else if (pb != 0.0) {
        const double r = -pc / pb;
        c.gamma_prime = r;
        if (r > 0.0)
            c.gamma_plus = r;
    }

    // Box-based reaching bound, same corner structure as Theorem 1 with the
    // voltage-error rate |k'| <= gamma2 (x2_ref - x2_min).
    const double psi1 =
        std::min(d.beta_H - d.alpha * box.x2_max, -(d.beta_H - d.alpha * box.x2_min));
    const double psi2 = std::min(box.x1_min, -box.x1_max);
    const double psi3 =
        std::max(d.beta_H - d.alpha * box.x2_max, -(d.beta_H - d.alpha * box.x2_min));
    const double den2 = std::abs(psi2) / p.C_H + psi3;
    const double kb1 = psi1 < 0.0 ? box.x3_min / (p.L * std::abs(psi1)) : kInf;
    const double kb2 = den2 > 0.0 ? (box.x2_min - box.x3_max) / (p.L * den2) : kInf;
    const double km = std::min(k_max, std::min(kb1, kb2));
    const double err = (x2_ref - box.x2_min) * box.x2_max;
    const double g1 = (box.x3_min / p.L + km * psi1) / err;
    const double g2 = ((box.x2_min - box.x3_max) / p.L - km * den2) / err;
    c.gamma2_bound = std::min(g1, g2);

    c.gamma2_admissible =
        c.regime == LoadRegime::RDhigh ? kInf : std::min(c.gamma2_hat, c.gamma_plus);

    const PlantState e0 = equilibrium(0, p);
    const PlantState e1 = equilibrium(1, p);
    c.hyp_reference_ok = e1.x2 < x2_ref && x2_ref < e0.x2;
    c.valid = c.hyp_reference_ok &&
              (c.regime == LoadRegime::RDhigh ? gamma2 > 0.0
                                              : gamma2 < c.gamma2_admissible);
    return c;
}

double reaching_rate(const StateBox& box, const ControllerState& cs, const PlantParams& p) {
    validate(box);
    if (!(cs.law.gain > 0.0))
        throw AnalysisError("reaching_rate: adaptation gain must be positive");
    const double omega = std::min(box.x3_min, box.x2_min - box.x3_max) / p.L;
    if (!(omega > 0.0))
        throw AnalysisError("reaching_rate: box yields no positive reaching rate");
    return omega;
}

double reaching_time_bound(double sigma0, double omega) {
    return std::abs(sigma0) / omega;
}

std::array<double, 9> mode2_dynamic_matrix(double k_star, double x2_ref, double x3_star,
                                           double gamma2, const PlantParams& p) {
    const DerivedParams d = derive(p);
    const double D = p.L * k_star * k_star + p.C_H;
    return {0.0,
            gamma2,
            0.0,
            -x3_star / D,
            -(d.alpha * p.C_H + gamma2 * p.L * k_star * x2_ref) / D,
            -k_star / D,
            x2_ref / p.C_L,
            k_star / p.C_L,
            -1.0 / (p.R_L * p.C_L)};
}

std::array<double, 4> mode2_char_poly(double k_star, double x2_ref, double x3_star,
                                      double gamma2, const PlantParams& p) {
    const DerivedParams d = derive(p);
    const QSplit q = q_split(k_star, x2_ref, x3_star, p, d);
    return {1.0, q.A2 + gamma2 * q.B2, q.A1 + gamma2 * q.B1, gamma2 * q.B0};
}

bool routh_hurwitz_cubic(const std::array<double, 4>& coeffs) {
    if (!(coeffs[0] > 0.0))
        throw AnalysisError("routh_hurwitz_cubic: leading coefficient must be positive");
    const double a2 = coeffs[1] / coeffs[0];
    const double a1 = coeffs[2] / coeffs[0];
    const double a0 = coeffs[3] / coeffs[0];
    return a2 > 0.0 && a1 > 0.0 && a0 > 0.0 && a2 * a1 > a0;
}

std::vector<std::complex<double>> cubic_roots(const std::array<double, 4>& coeffs) {
    if (coeffs[0] == 0.0)
        throw AnalysisError("cubic_roots: leading coefficient is zero");
    const double a2 = coeffs[1] / coeffs[0];
    const double a1 = coeffs[2] / coeffs[0];
    const double a0 = coeffs[3] / coeffs[0];
    Eigen::Matrix3d comp;
    comp << 0, 0, -a0, 1, 0, -a1, 0, 1, -a2;
    const Eigen::EigenSolver<Eigen::Matrix3d> es(comp);
    std::vector<std::complex<double>> roots;
    for (int i = 0; i < 3; ++i) {
        std::complex<double> r = es.eigenvalues()(i);
        // one Newton polish pass
        for (int it = 0; it < 2; ++it) {
            const std::complex<double> f = ((r + a2) * r + a1) * r + a0;
            const std::complex<double> df = (3.0 * r + 2.0 * a2) * r + a1;
            if (std::abs(df) > 0.0)
                r -= f / df;
        }
        roots.push_back(r);
    }
    std::sort(roots.begin(), roots.end(), [](const auto& a, const auto& b) {
        if (a.real() != b.real())
            return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return roots;
}

std::array<double, 4> char_poly_3x3(const std::array<double, 9>& m) {
    const Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>> A(m.data());
    const double tr = A.trace();
    const double m2 = 0.5 * (tr * tr - (A * A).trace());  // sum of principal 2x2 minors
    return {1.0, -tr, m2, -A.determinant()};
}

double spectral_abscissa(const std::array<double, 9>& m) {
    const auto roots = cubic_roots(char_poly_3x3(m));
    double a = -kInf;
    for (const auto& r : roots)
        a = std::max(a, r.real());
    return a;
}

}  // namespace bbcu
