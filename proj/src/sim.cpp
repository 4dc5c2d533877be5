#include "bbcu/sim.hpp"

#include <cmath>

namespace bbcu {

void validate(const SimConfig& c) {
    if (!(c.dt_plant > 0.0) || !(c.dt_control > 0.0))
        throw ConfigError("sim: step sizes must be positive");
    if (c.dt_plant > c.dt_control)
        throw ConfigError("sim: dt_plant must not exceed dt_control");
    const double ratio = c.dt_control / c.dt_plant;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
        throw ConfigError("sim: dt_control must be an integer multiple of dt_plant");
    if (c.t_end < 0.0)
        throw ConfigError("sim: t_end must be nonnegative");
    if (c.record_stride < 1)
        throw ConfigError("sim: record_stride must be positive");
}

void LoadProfile::validate_cover(double t_end) const {
    if (segments.empty())
        throw ConfigError("load profile: no segments");
    if (std::abs(segments.front().t_start) > 1e-12)
        throw ConfigError("load profile: must start at t = 0");
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const auto& s = segments[i];
        if (!(s.t_end > s.t_start))
            throw ConfigError("load profile: empty segment");
        if (!(s.r_d > 0.0))
            throw ConfigError("load profile: R_D must be positive");
        if (i + 1 < segments.size() &&
            std::abs(segments[i + 1].t_start - s.t_end) > 1e-9)
            throw ConfigError("load profile: segments must be contiguous");
    }
    if (segments.back().t_end < t_end - 1e-9)
        throw ConfigError("load profile: does not cover the horizon");
}

double LoadProfile::at(double t) const {
    for (const auto& s : segments)
        if (t < s.t_end)
            return s.r_d;
    return segments.back().r_d;
}

PlantState rk4_step(const PlantState& x, double u, double dt, const DerivedParams& d,
                    const PlantParams& p) {
    const PlantState k1 = rhs(x, u, d, p);
    const PlantState x2{x.x1 + 0.5 * dt * k1.x1, x.x2 + 0.5 * dt * k1.x2,
                        x.x3 + 0.5 * dt * k1.x3};
    const PlantState k2 = rhs(x2, u, d, p);
    const PlantState x3{x.x1 + 0.5 * dt * k2.x1, x.x2 + 0.5 * dt * k2.x2,
                        x.x3 + 0.5 * dt * k2.x3};
    const PlantState k3 = rhs(x3, u, d, p);
    const PlantState x4{x.x1 + dt * k3.x1, x.x2 + dt * k3.x2, x.x3 + dt * k3.x3};
    const PlantState k4 = rhs(x4, u, d, p);
    return {x.x1 + dt / 6.0 * (k1.x1 + 2.0 * k2.x1 + 2.0 * k3.x1 + k4.x1),
            x.x2 + dt / 6.0 * (k1.x2 + 2.0 * k2.x2 + 2.0 * k3.x2 + k4.x2),
            x.x3 + dt / 6.0 * (k1.x3 + 2.0 * k2.x3 + 2.0 * k3.x3 + k4.x3)};
}

PlantState integrate_fixed_u(PlantState x, double u, double t_end, double dt,
                             const PlantParams& p) {
    const DerivedParams d = derive(p);
    const long n = std::lround(t_end / dt);
    for (long i = 0; i < n; ++i)
        x = rk4_step(x, u, dt, d, p);
    return x;
}

SimResult run_closed_loop(const PlantParams& base, const LoadProfile& profile,
                          const ControllerState& c0, Supervisor& sup,
                          const SimConfig& cfg, const PlantState& x0) {
    validate(cfg);
    profile.validate_cover(cfg.t_end);

    const long n_ctrl = std::lround(cfg.t_end / cfg.dt_control);
    const int n_sub = static_cast<int>(std::lround(cfg.dt_control / cfg.dt_plant));

    PlantParams p = base;
    p.R_D = profile.at(0.0);
    DerivedParams d = derive(p);

    PlantState x = x0;
    ControllerState cs = c0;
    sup.reset((p.E_H - x.x2) / p.R_H);

    SimResult res;
    res.trace.reserve(static_cast<std::size_t>(n_ctrl / cfg.record_stride) + 2);
    double sigma_prev = 0.0;
    bool have_prev = false;

    for (long i = 0; i <= n_ctrl; ++i) {
        const double t = i * cfg.dt_control;
        if (!std::isfinite(x.x1) || !std::isfinite(x.x2) || !std::isfinite(x.x3))
            throw NumericError("state diverged (non-finite)", t);

        const double rd = profile.at(t);
        if (rd != p.R_D) {
            p.R_D = rd;
            d = derive(p);
        }
        const double ig = (p.E_H - x.x2) / p.R_H;
        cs.law = sup.decide(t, x, cs.k, ig, rd);
        cs.k = adapt_k(cs, x, ig, cfg.dt_control);
        const double s = sigma(cs.k, x);
        const int u = relay(s);

        if (res.first_sigma_cross < 0.0 &&
            (s == 0.0 || (have_prev && (s > 0.0) != (sigma_prev > 0.0))))
            res.first_sigma_cross = t;
        sigma_prev = s;
        have_prev = true;

        if (i % cfg.record_stride == 0 || i == n_ctrl)
            res.trace.push_back(
                {t, x.x1, x.x2, x.x3, u, s, cs.k, ig, sup.mode(), sup.iol_active()});
        if (i == n_ctrl)
            break;

        for (int j = 0; j < n_sub; ++j)
            x = rk4_step(x, u, cfg.dt_plant, d, p);
    }
    res.mode_events = sup.events();
    res.final_state = x;
    res.final_k = cs.k;
    return res;
}

}  // namespace bbcu
