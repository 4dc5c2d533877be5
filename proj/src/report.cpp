#include "bbcu/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "bbcu/analysis.hpp"

namespace bbcu {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path);
    if (!f)
        throw ConfigError("cannot write " + path);
    f << content;
}

namespace {

std::string fmt(double v) { return format_double(v); }

std::vector<double> scenario_loads(const ScenarioSpec& spec) {
    std::set<double> loads;
    for (const auto& s : spec.load.segments)
        loads.insert(s.r_d);
    for (double rd : spec.supervisor.rd_ladder)
        loads.insert(rd);
    return {loads.begin(), loads.end()};
}

}  // namespace

std::string analysis_report(const ScenarioSpec& spec) {
    std::ostringstream o;
    const PlantParams base = spec.plant;
    o << "BBCU analysis report (" << spec.name << ")\n";
    o << "=========================================\n\n";

    o << "[plant] E_H=" << fmt(base.E_H) << " V, R_H=" << fmt(base.R_H)
      << " ohm, L=" << fmt(base.L) << " H, C_H=" << fmt(base.C_H)
      << " F, E_L=" << fmt(base.E_L) << " V, R_L=" << fmt(base.R_L)
      << " ohm, C_L=" << fmt(base.C_L) << " F\n";
    o << "[box] x1=[" << fmt(spec.box.x1_min) << "," << fmt(spec.box.x1_max) << "] A, x2=["
      << fmt(spec.box.x2_min) << "," << fmt(spec.box.x2_max) << "] V, x3=["
      << fmt(spec.box.x3_min) << "," << fmt(spec.box.x3_max) << "] V\n\n";

    for (double rd : scenario_loads(spec)) {
        PlantParams p = base;
        p.R_D = rd;
        const DerivedParams d = derive(p);
        const PlantState e0 = equilibrium(0, p);
        const PlantState e1 = equilibrium(1, p);
        o << "---- R_D = " << fmt(rd) << " ohm ----\n";
        o << "derived: R_DH=" << fmt(d.R_DH) << " alpha=" << fmt(d.alpha)
          << " beta_H=" << fmt(d.beta_H) << " beta_L=" << fmt(d.beta_L) << "\n";
        o << "equilibrium u=0: (" << fmt(e0.x1) << ", " << fmt(e0.x2) << ", " << fmt(e0.x3)
          << ")  u=1: (" << fmt(e1.x1) << ", " << fmt(e1.x2) << ", " << fmt(e1.x3) << ")\n";
        o << "x3/x2 ratio at u=0: " << fmt(e0.x3 / e0.x2) << ", at u=1: " << fmt(e1.x3 / e1.x2)
          << "\n";
        const auto A1 = dynamic_matrix_u1(p);
        o << "u=1 matrix Hurwitz: " << (routh_hurwitz_cubic(char_poly_3x3(A1)) ? "yes" : "no")
          << " (abscissa " << fmt(spectral_abscissa(A1)) << ")\n";

        const Theorem1Constants t1 =
            theorem1_constants(spec.box, spec.x1_ref, spec.gamma1, spec.k_max, p);
        o << "mode 1 (x1_ref=" << fmt(spec.x1_ref) << "): k_inf1=" << fmt(t1.steady.k_star)
          << " x2*=" << fmt(t1.steady.x2_star) << " x3*=" << fmt(t1.steady.x3_star) << "\n";
        o << "  psi1=" << fmt(t1.psi1) << " psi2=" << fmt(t1.psi2) << " psi3=" << fmt(t1.psi3)
          << "\n  K_max_bound=" << fmt(t1.k_max_bound)
          << " gamma1_bound=" << fmt(t1.gamma1_bound) << " a=" << fmt(t1.a_of_gamma1)
          << " b=" << fmt(t1.b_of_gamma1) << " nu=" << fmt(t1.nu) << "\n";
        o << "  cylinder radius=" << fmt(t1.cylinder_radius) << " valid="
          << (t1.valid ? "yes" : "no");
        if (!t1.valid)
            o << " (" << t1.violation << ")";
        o << "\n";
        const double sigma0 = base.E_L / base.R_L;
        o << "  reaching: omega=" << fmt(t1.omega) << " 1/s, sigma0=" << fmt(sigma0)
          << " A (converter-off), t_reach <= " << fmt(reaching_time_bound(sigma0, t1.omega))
          << " s\n";

        for (double iol : spec.supervisor.iol_ladder) {
            const double x2r = base.E_H - base.R_H * iol;
            o << "mode 2 (I_OL=" << fmt(iol) << ", x2_ref=" << fmt(x2r) << "):\n";
            const double bound = x2_ref_upper_bound(p);
            o << "  x2_ref upper bound " << fmt(bound)
              << (x2r < bound ? "" : "  ** reference above admissible bound **") << "\n";
            Theorem2Constants t2;
            try {
                t2 = theorem2_constants(x2r, spec.gamma2, spec.box, spec.k_max, p);
            } catch (const AnalysisError& e) {
                o << "  infeasible: " << e.what() << "\n";
                continue;
            }
            o << "  regime=" << (t2.regime == LoadRegime::RDhigh ? "RDhigh" : "RDlow")
              << " delta_e=" << fmt(t2.delta_e) << " k_inf2=" << fmt(t2.steady.k_star)
              << " x3*=" << fmt(t2.steady.x3_star) << "\n";
            o << "  gamma2_hat=" << fmt(t2.gamma2_hat) << " gamma_plus=" << fmt(t2.gamma_plus)
              << " admissible gamma2 < " << fmt(t2.gamma2_admissible)
              << " (active gamma2=" << fmt(spec.gamma2) << ")\n";
            o << "  printed coefficients (R read as R_L): a0=" << fmt(t2.a0)
              << " a10=" << fmt(t2.a10) << " a11=" << fmt(t2.a11) << " a20=" << fmt(t2.a20)
              << " a21=" << fmt(t2.a21) << " a3=" << fmt(t2.a3) << "\n";
            o << "  hypothesis x21* < x2_ref < x20*: " << (t2.hyp_reference_ok ? "yes" : "no")
              << "\n";
            const auto A = mode2_dynamic_matrix(t2.steady.k_star, x2r, t2.steady.x3_star,
                                                spec.gamma2, p);
            const auto roots = cubic_roots(char_poly_3x3(A));
            o << "  eigenvalues:";
            for (const auto& r : roots)
                o << " (" << fmt(r.real()) << (r.imag() >= 0 ? "+" : "") << fmt(r.imag()) << "j)";
            const double absc = spectral_abscissa(A);
            o << "\n  abscissa=" << fmt(absc);
            if (absc < 0.0) {
                const GevpResult g = max_decay_gevp(A);
                o << " lambda*=" << fmt(g.lambda_star)
                  << " t90=ln(10)/lambda*=" << fmt(std::log(10.0) / g.lambda_star) << " s";
            }
            o << "\n";
        }
        o << "\n";
    }
    // mode-2 reaching estimate at the harshest ladder load
    const double rd_w =
        *std::min_element(spec.supervisor.rd_ladder.begin(), spec.supervisor.rd_ladder.end());
    PlantParams pw = base;
    pw.R_D = rd_w;
    const double x2r = base.E_H - base.R_H * spec.supervisor.I_OL_nominal;
    try {
        const ReducedSteadyState ss = mode2_steady_state(x2r, pw);
        const double omega = std::min(spec.box.x3_min, spec.box.x2_min - spec.box.x3_max) / base.L;
        const double sigma0 = std::abs(spec.x1_ref - ss.k_star * x2r);
        o << "mode-2 reaching at R_D=" << fmt(rd_w) << ": sigma0=" << fmt(sigma0)
          << " A, t_reach <= " << fmt(reaching_time_bound(sigma0, omega)) << " s\n";
    } catch (const AnalysisError&) {
        o << "mode-2 reaching at R_D=" << fmt(rd_w) << ": infeasible reference\n";
    }
    return o.str();
}

std::string roa_report(const ScenarioSpec& spec, const std::string& out_dir) {
    std::ostringstream o;
    o << "# sampled sublevel certification: falsification by deterministic nets,\n"
         "# ascent refinement, grid and seeded random shells; not a soundness proof.\n";
    o << "RD,IOL,k_star,x2_ref,x3_star,decay,lambda_star,c,P11,P12,P13,P22,P23,P33,"
         "grid_res,n_random,seed,level_index,margin\n";
    std::filesystem::create_directories(out_dir);
    for (double rd : spec.supervisor.rd_ladder) {
        for (double iol : spec.supervisor.iol_ladder) {
            PlantParams p = spec.plant;
            p.R_D = rd;
            CertificationParams cp = spec.roa;
            cp.seed = spec.roa.seed ^ (0x9e3779b97f4a7c15ULL *
                                       static_cast<std::uint64_t>(
                                           std::lround(rd * 1000.0) * 131071 +
                                           std::lround(iol * 1000.0)));
            const RoaEstimate roa =
                roa_estimate(p, iol, spec.gamma2, spec.box, spec.k_max, cp);
            const double x2r = p.E_H - p.R_H * iol;
            const auto A = mode2_dynamic_matrix(roa.lyap.center[0], x2r, roa.lyap.center[2],
                                                spec.gamma2, p);
            const double lam = max_decay_gevp(A).lambda_star;
            char buf[512];
            std::snprintf(buf, sizeof buf,
                          "%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,"
                          "%.10g,%.10g,%.10g,%d,%d,%llu,%d,%.10g\n",
                          rd, iol, roa.lyap.center[0], roa.lyap.center[1], roa.lyap.center[2],
                          roa.lyap.decay, lam, roa.level, roa.lyap.P[0], roa.lyap.P[1],
                          roa.lyap.P[2], roa.lyap.P[4], roa.lyap.P[5], roa.lyap.P[8],
                          roa.meta.grid_res, roa.meta.n_random,
                          static_cast<unsigned long long>(roa.meta.seed),
                          roa.meta.level_index, roa.meta.margin);
            o << buf;
            if (roa.certified()) {
                // (x3, k) projection, matching the figures' plane
                const auto poly = project_roa(roa, 2, 0);
                char name[128];
                std::snprintf(name, sizeof name, "%s/roa_RD%g_IOL%g_x3k.csv", out_dir.c_str(),
                              rd, iol);
                std::ofstream pf(name);
                pf << "x3,k\n";
                for (const auto& pt : poly) {
                    std::snprintf(buf, sizeof buf, "%.10g,%.10g\n", pt[0], pt[1]);
                    pf << buf;
                }
            }
        }
    }
    return o.str();
}

}  // namespace bbcu
