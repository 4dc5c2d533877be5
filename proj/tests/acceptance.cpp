// Acceptance suite: one line per criterion, nonzero exit on any failure.
// Scenario traces are produced by the same artifact pipeline as the CLI.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <vector>

#include "bbcu/analysis.hpp"
#include "bbcu/roa.hpp"
#include "bbcu/scenario.hpp"
#include "bbcu/sim.hpp"

using namespace bbcu;

namespace {

int g_failures = 0;

void report(int crit, bool pass, const std::string& detail) {
    std::printf("[criterion %2d] %s  %s\n", crit, pass ? "PASS" : "FAIL", detail.c_str());
    if (!pass)
        ++g_failures;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

PlantParams table1(double rd) {
    PlantParams p;
    p.R_D = rd;
    return p;
}

struct Window {
    double t0, t1;
};

double mean_of(const SimTrace& tr, const Window& w, double TraceRow::*field) {
    double sum = 0.0;
    long n = 0;
    for (const auto& r : tr)
        if (r.t >= w.t0 && r.t < w.t1) {
            sum += r.*field;
            ++n;
        }
    return n ? sum / n : std::nan("");
}

bool all_in(const SimTrace& tr, const Window& w, double TraceRow::*field, double lo,
            double hi) {
    for (const auto& r : tr)
        if (r.t >= w.t0 && r.t < w.t1 && (r.*field < lo || r.*field > hi))
            return false;
    return true;
}

std::string file_bytes(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

int main() {
    const auto tmp = std::filesystem::temp_directory_path() / "bbcu_acceptance";
    std::filesystem::remove_all(tmp);

    // ---- criterion 1: equilibrium oracle ----
    {
        const auto t_start = std::chrono::steady_clock::now();
        const PlantParams p = table1(300.0);
        bool ok = true;
        std::string detail;
        for (int u = 0; u <= 1; ++u) {
            const PlantState e = equilibrium(u, p);
            const PlantState x = integrate_fixed_u({0.0, 270.0, 28.0}, double(u), 5.0, 1e-6, p);
            const double scale = std::sqrt(e.x1 * e.x1 + e.x2 * e.x2 + e.x3 * e.x3);
            const double err = std::sqrt((x.x1 - e.x1) * (x.x1 - e.x1) +
                                         (x.x2 - e.x2) * (x.x2 - e.x2) +
                                         (x.x3 - e.x3) * (x.x3 - e.x3)) /
                               scale;
            ok = ok && err < 1e-4;
            detail += "u=" + std::to_string(u) + " rel_err=" + fmt(err) + "  ";
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
        ok = ok && secs < 10.0;
        report(1, ok, "equilibrium oracle: " + detail + "runtime=" + fmt(secs) + " s");
    }

    // ---- criterion 2: uniform stability along trajectory pairs ----
    {
        const PlantParams p = table1(300.0);
        const DerivedParams d = derive(p);
        std::mt19937_64 rng(20250810);
        std::uniform_real_distribution<double> ux(-40.0, 40.0);
        std::uniform_real_distribution<double> uu(0.0, 1.0);
        const double dt = 1e-6;
        bool ok = true;
        double worst = 0.0;
        for (int trial = 0; trial < 100 && ok; ++trial) {
            PlantState a{ux(rng), 240.0 + ux(rng), 28.0 + 0.2 * ux(rng)};
            PlantState b{ux(rng), 240.0 + ux(rng), 28.0 + 0.2 * ux(rng)};
            auto V = [&] {
                const double y1 = a.x1 - b.x1, y2 = a.x2 - b.x2, y3 = a.x3 - b.x3;
                return 0.5 * (p.L * y1 * y1 + p.C_H * y2 * y2 + p.C_L * y3 * y3);
            };
            double Vprev = V();
            const double V0 = Vprev;
            for (int seg = 0; seg < 25 && ok; ++seg) {
                const double u = uu(rng);  // piecewise-constant bounded control
                for (int i = 0; i < 400; ++i) {
                    a = rk4_step(a, u, dt, d, p);
                    b = rk4_step(b, u, dt, d, p);
                }
                const double Vnow = V();
                worst = std::max(worst, Vnow - Vprev);
                if (Vnow > Vprev * (1.0 + 1e-12) + 1e-12 * V0)
                    ok = false;
                Vprev = Vnow;
            }
        }
        report(2, ok, "pairwise energy non-increasing; worst increment=" + fmt(worst));
    }

    // ---- scenario runs shared by criteria 3, 4, 6 and 10 ----
    ScenarioSpec s1 = builtin_scenario("scenario1");
    s1.out_dir = (tmp / "s1a").string();
    ScenarioSpec s2 = builtin_scenario("scenario2");
    s2.out_dir = (tmp / "s2a").string();
    const ScenarioArtifacts a1 = run_scenario(s1);
    const ScenarioArtifacts a2 = run_scenario(s2);
    const SimTrace& tr1 = a1.result.trace;
    const SimTrace& tr2 = a2.result.trace;

    // ---- criterion 3: scenario 1 regression ----
    {
        double t_switch = -1.0;
        bool pre21 = true;
        for (const auto& e : a1.result.mode_events)
            if (e.from_mode == 1 && e.to_mode == 2) {
                t_switch = e.t;
                break;
            }
        for (const auto& r : tr1)
            if (r.t < 21.0 && r.mode != 1)
                pre21 = false;

        const double ig18 = mean_of(tr1, {20.0, 21.0}, &TraceRow::I_g);
        const bool ig_ok = ig18 >= 16.1 && ig18 <= 16.7;

        const ReducedSteadyState m2 = mode2_steady_state(270.0 - 0.1 * 16.0, table1(17.0));
        const double sigma0 = std::abs(10.0 - m2.k_star * m2.x2_star);
        const double window = s1.sim.dt_control + reaching_time_bound(sigma0, 2000.0);
        const bool switch_ok = t_switch >= 21.0 && t_switch <= 21.0 + window;

        const bool x1_ok = all_in(tr1, {19.5, 21.0}, &TraceRow::x1, 9.8, 10.2);

        report(3, pre21 && ig_ok && switch_ok && x1_ok,
               "scenario 1: mode1 through 18 ohm=" + std::string(pre21 ? "yes" : "no") +
                   ", Ig(18 ohm)=" + fmt(ig18) + " A (band [16.1,16.7])" +
                   ", mode2 at t=" + fmt(t_switch) + " (limit " + fmt(21.0 + window) + ")" +
                   ", x1 in 10+-0.2: " + (x1_ok ? "yes" : "no"));
    }

    // ---- criterion 4: scenario 2 regression ----
    {
        bool capability = true;
        for (double onset : {10.0, 15.0}) {
            const double seg_end = onset + 5.0;
            if (!all_in(tr2, {onset + 5.0 - 0.05, seg_end}, &TraceRow::I_g, 15.5, 16.5))
                capability = false;
        }
        const double x1_15 = mean_of(tr2, {19.0, 20.0}, &TraceRow::x1);
        const bool reversed = x1_15 < 0.0;
        report(4, capability && reversed,
               "scenario 2: 5 s capability=" + std::string(capability ? "yes" : "no") +
                   ", x1 at 15 ohm=" + fmt(x1_15) + " A (battery assists)");
    }

    // ---- criterion 5: reaching-time bound ----
    {
        ScenarioSpec spec;
        spec.load.segments = {{0.0, 0.5, 300.0}};
        spec.sim.t_end = 0.5;
        spec.sim.record_stride = 1;
        spec.supervisor.I_OL_nominal = 1e6;
        spec.k0_policy = InitialGainPolicy::Zero;
        spec.x0 = equilibrium(0, table1(300.0));
        spec.x0_set = true;
        CachingRoaProvider roas(spec);
        const SimResult res = simulate(spec, roas);

        ControllerState cs;
        cs.law = {LawKind::CurrentTracking, 4.0, 10.0};
        const double omega = reaching_rate(StateBox{}, cs, table1(300.0));
        const double sigma0 = sigma(0.0, spec.x0);
        const double bound = reaching_time_bound(sigma0, omega);
        const bool crossed = res.first_sigma_cross >= 0.0 && res.first_sigma_cross <= bound;
        const bool near_paper = std::abs(bound - 0.14) / 0.14 <= 0.20;
        report(5, crossed && near_paper,
               "reaching: first crossing at " + fmt(res.first_sigma_cross) + " s <= bound " +
                   fmt(bound) + " s; bound within 20% of 0.14 s: " +
                   (near_paper ? "yes" : "no"));
    }

    // ---- criterion 6: gain convergence ----
    {
        const double kinf_300 = k_infinity_current(10.0, table1(300.0));
        const double k300 = mean_of(tr1, {2.0, 3.0}, &TraceRow::k);
        const double e300 = std::abs(k300 - kinf_300) / std::abs(kinf_300);

        const double kinf_18 = k_infinity_current(10.0, table1(18.0));
        const double k18 = mean_of(tr1, {20.0, 21.0}, &TraceRow::k);
        const double e18 = std::abs(k18 - kinf_18) / std::abs(kinf_18);

        const double kinf2_15 = k_infinity_voltage(270.0 - 0.1 * 16.0, table1(15.0));
        const double k15a = mean_of(tr1, {35.0, 36.0}, &TraceRow::k);
        const double e15a = std::abs(k15a - kinf2_15) / std::abs(kinf2_15);
        const double k15b = mean_of(tr2, {19.0, 20.0}, &TraceRow::k);
        const double e15b = std::abs(k15b - kinf2_15) / std::abs(kinf2_15);

        const bool ok = e300 < 0.01 && e18 < 0.01 && e15a < 0.01 && e15b < 0.01;
        report(6, ok,
               "gain convergence: mode1 err=" + fmt(100 * e300) + "% / " + fmt(100 * e18) +
                   "%, mode2 err=" + fmt(100 * e15a) + "% / " + fmt(100 * e15b) + "%");
    }

    // ---- criterion 7: GEVP oracle ----
    {
        std::mt19937_64 rng(424242);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        bool ok = true;
        double worst_gap = 0.0, worst_res = 0.0;
        auto check_matrix = [&](const Mat3& A) {
            const GevpResult g = max_decay_gevp(A);
            const double gap = std::abs(g.lambda_star - (-spectral_abscissa(A)));
            // residual of the shifted equation
            Mat3 As = A;
            As[0] += g.lambda_star;
            As[4] += g.lambda_star;
            As[8] += g.lambda_star;
            double worst_row = 0.0;
            for (int i = 0; i < 3; ++i) {
                double row = 0.0;
                for (int j = 0; j < 3; ++j) {
                    double v = (i == j) ? 1.0 : 0.0;
                    for (int k = 0; k < 3; ++k)
                        v += As[3 * k + i] * g.P[3 * k + j] + g.P[3 * i + k] * As[3 * k + j];
                    row += std::abs(v);
                }
                worst_row = std::max(worst_row, row);
            }
            worst_gap = std::max(worst_gap, gap);
            worst_res = std::max(worst_res, worst_row);
            if (gap > 1e-5 || worst_row > 1e-9)
                ok = false;
        };
        for (int i = 0; i < 100; ++i) {
            Mat3 A;
            for (double& v : A)
                v = 5.0 * u(rng);
            const double shift = spectral_abscissa(A) + 0.1 + 2.0 * std::abs(u(rng));
            A[0] -= shift;
            A[4] -= shift;
            A[8] -= shift;
            check_matrix(A);
        }
        for (auto [rd, iol] : {std::pair{17.0, 16.0}, {16.5, 16.0}, {16.0, 16.0},
                               {15.5, 16.0}, {15.0, 16.0}, {15.0, 16.5}, {15.0, 17.0},
                               {15.0, 17.5}}) {
            const PlantParams p = table1(rd);
            const double x2r = p.E_H - p.R_H * iol;
            const ReducedSteadyState ss = mode2_steady_state(x2r, p);
            check_matrix(mode2_dynamic_matrix(ss.k_star, x2r, ss.x3_star, 4.0, p));
        }
        report(7, ok,
               "gevp oracle: worst |lambda - abscissa|=" + fmt(worst_gap) +
                   ", worst residual=" + fmt(worst_res));
    }

    // ---- criterion 8: Routh-Hurwitz boundary in the RDlow regime ----
    {
        const PlantParams p = table1(15.0);
        const double x2r = 270.0 - 0.1 * 16.0;
        const Theorem2Constants t2 = theorem2_constants(x2r, 4.0, StateBox{}, 0.25, p);
        const double predicted = t2.gamma2_admissible;
        const ReducedSteadyState ss = mode2_steady_state(x2r, p);
        auto absc = [&](double g2) {
            return spectral_abscissa(mode2_dynamic_matrix(ss.k_star, x2r, ss.x3_star, g2, p));
        };
        double lo = 1e-3, hi = 1000.0;
        bool bracket = absc(lo) < 0.0 && absc(hi) > 0.0;
        for (int i = 0; i < 200 && bracket; ++i) {
            const double mid = 0.5 * (lo + hi);
            (absc(mid) < 0.0 ? lo : hi) = mid;
        }
        const double crossing = 0.5 * (lo + hi);
        const bool match = bracket && std::abs(crossing - predicted) / predicted <= 0.05;
        const bool flank = absc(0.95 * predicted) < 0.0 && absc(1.05 * predicted) > 0.0;
        report(8, match && flank,
               "RDlow boundary: predicted gamma2=" + fmt(predicted) + ", eigencrossing=" +
                   fmt(crossing) + ", stable/unstable at -/+5%: " + (flank ? "yes" : "no"));
    }

    // ---- criterion 9: ROA nesting ----
    {
        CachingRoaProvider roas(s1);
        const RoaEstimate* r165 = roas.get(16.5, 16.0);
        const RoaEstimate* r15h = roas.get(15.0, 17.5);
        const RoaEstimate* r15l = roas.get(15.0, 16.0);
        const RoaEstimate* r17 = roas.get(17.0, 16.0);
        bool ok = r165 && r15h && r17;
        std::string detail;
        if (ok) {
            const ReducedSteadyState c17 = mode2_steady_state(270.0 - 1.6, table1(17.0));
            const PlantState center{0.0, c17.x2_star, c17.x3_star};
            const bool in_165 = contains(*r165, center, c17.k_star);
            const bool in_15h = contains(*r15h, center, c17.k_star);
            const bool in_15l = r15l != nullptr && contains(*r15l, center, c17.k_star);
            ok = in_165 && in_15h && !in_15l;
            detail = "center(17,16) in (16.5,16): " + std::string(in_165 ? "yes" : "no") +
                     ", in (15,17.5): " + std::string(in_15h ? "yes" : "no") +
                     ", in (15,16): " + std::string(in_15l ? "yes" : "no") + " (must be no)";
        } else {
            detail = "required certificates missing";
        }
        report(9, ok, "roa nesting: " + detail);
    }

    // ---- criterion 10: determinism ----
    {
        ScenarioSpec s1b = builtin_scenario("scenario1");
        s1b.out_dir = (tmp / "s1b").string();
        ScenarioSpec s2b = builtin_scenario("scenario2");
        s2b.out_dir = (tmp / "s2b").string();
        const ScenarioArtifacts b1 = run_scenario(s1b);
        const ScenarioArtifacts b2 = run_scenario(s2b);
        const bool same1 = file_bytes(a1.trace_path) == file_bytes(b1.trace_path) &&
                           file_bytes(a1.modes_path) == file_bytes(b1.modes_path);
        const bool same2 = file_bytes(a2.trace_path) == file_bytes(b2.trace_path) &&
                           file_bytes(a2.modes_path) == file_bytes(b2.modes_path);
        report(10, same1 && same2,
               std::string("determinism: scenario1 byte-identical=") + (same1 ? "yes" : "no") +
                   ", scenario2 byte-identical=" + (same2 ? "yes" : "no"));
    }

    // supervisor safety properties asserted alongside the criteria
    {
        bool sep_ok = true;
        double last = -1e9;
        for (const auto& e : a1.result.mode_events)
            if (e.from_mode != e.to_mode) {
                if (e.t - last < 0.1)
                    sep_ok = false;
                last = e.t;
            }
        double last2 = -1e9;
        for (const auto& e : a2.result.mode_events)
            if (e.from_mode != e.to_mode) {
                if (e.t - last2 < 0.1)
                    sep_ok = false;
                last2 = e.t;
            }
        bool gate_ok = true;
        for (const auto& e : a1.result.mode_events)  // known-load gating
            if (e.to_mode == 2 && e.from_mode == 1 && !e.gate_contains)
                gate_ok = false;
        bool ramp_ok = true;
        double prev_iol = 1e9;
        for (const auto& r : tr2) {
            if (r.t >= 10.0 && r.t < 15.0) {  // between activations
                if (r.I_OL_active > prev_iol + 1e-12)
                    ramp_ok = false;
                prev_iol = r.I_OL_active;
            }
        }
        std::printf("[supervisor ] %s  switch separation >= 0.1 s: %s; known-load gate safety: "
                    "%s; ramp monotone: %s\n",
                    sep_ok && gate_ok && ramp_ok ? "PASS" : "FAIL", sep_ok ? "yes" : "no",
                    gate_ok ? "yes" : "no", ramp_ok ? "yes" : "no");
        if (!(sep_ok && gate_ok && ramp_ok))
            ++g_failures;
    }

    std::filesystem::remove_all(tmp);
    std::printf("%d criterion(s) failed\n", g_failures);
    return g_failures;
}
