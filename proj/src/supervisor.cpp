#include "bbcu/supervisor.hpp"

#include <algorithm>
#include <cmath>

#include "bbcu/analysis.hpp"

namespace bbcu {

Supervisor::Supervisor(const SupervisorConfig& cfg, const PlantParams& plant,
                       RoaProvider* roas)
    : cfg_(cfg), plant_(plant), roas_(roas), iol_active_(cfg.I_OL_nominal) {
    if (cfg_.iol_ladder.empty())
        throw SupervisorError("supervisor: empty I_OL ladder");
    if (cfg_.rd_ladder.empty())
        throw SupervisorError("supervisor: empty R_D ladder");
}

void Supervisor::reset(double I_g0) {
    mode_ = 1;
    iol_active_ = cfg_.I_OL_nominal;
    ig_filt_ = I_g0;
    last_t_ = -1.0;
    below_since_ = -1.0;
    events_.clear();
}

AdaptiveLaw Supervisor::mode1_law() const {
    return {LawKind::CurrentTracking, cfg_.gamma1, cfg_.mode1_x1_ref};
}

AdaptiveLaw Supervisor::mode2_law() const {
    return {LawKind::GeneratorCurrent, plant_.R_H * cfg_.gamma2, iol_active_};
}

GateDecision Supervisor::gate(double rd, const PlantState& x, double k) const {
    if (roas_ == nullptr)
        throw SupervisorError("supervisor: no ROA provider configured");
    if (cfg_.gate_policy == GatePolicy::WorstCase) {
        // unknown load: assume the harshest ladder entry and enter at the top
        const double rd_worst = *std::min_element(cfg_.rd_ladder.begin(), cfg_.rd_ladder.end());
        const double top = *std::max_element(cfg_.iol_ladder.begin(), cfg_.iol_ladder.end());
        const RoaEstimate* roa = roas_->get(rd_worst, top);
        const bool inside = roa != nullptr && roa->certified() && contains(*roa, x, k);
        return {GateDecision::Kind::EnterReduced, top, inside, rd_worst};
    }
    std::vector<double> ladder = cfg_.iol_ladder;
    std::sort(ladder.begin(), ladder.end());
    for (double iol : ladder) {
        const RoaEstimate* roa = roas_->get(rd, iol);
        if (roa == nullptr || !roa->certified())
            continue;
        if (contains(*roa, x, k)) {
            const bool nominal = iol <= cfg_.I_OL_nominal;
            return {nominal ? GateDecision::Kind::EnterNominal
                            : GateDecision::Kind::EnterReduced,
                    nominal ? cfg_.I_OL_nominal : iol, true, rd};
        }
    }
    return {GateDecision::Kind::Hold, iol_active_, false, rd};
}

bool Supervisor::mode1_gate(const PlantState& x, double k, double rd) const {
    // cylinder estimate around the battery-recharge steady state
    PlantParams p = plant_;
    p.R_D = rd;
    const ReducedSteadyState ss = mode1_steady_state(cfg_.mode1_x1_ref, p);
    const DerivedParams d = derive(p);
    const double b_g = d.alpha * p.C_H - 3.0 * cfg_.gamma1 * p.L * ss.k_star * cfg_.mode1_x1_ref;
    const double a_g = cfg_.gamma1 * p.L * std::pow(ss.x2_star, 3) -
                       p.R_L / 4.0 * std::pow(ss.x2_star, 3) / ss.x3_star -
                       0.25 * ss.x3_star * ss.x3_star /
                           (cfg_.gamma1 * p.L * ss.k_star * cfg_.mode1_x1_ref);
    const double nu = std::min(a_g, b_g);
    if (!(nu > 0.0))
        return false;
    const double radius = std::sqrt(2.0 / (cfg_.gamma1 * p.L * ss.x2_star)) * nu;
    const double dz1 = k - ss.k_star;
    const double dz2 = x.x2 - ss.x2_star;
    return std::sqrt(dz1 * dz1 + dz2 * dz2) < radius;
}

void Supervisor::enter_mode2(double t, const PlantState& x, double k, double rd_active,
                             const char* reason) {
    const GateDecision g = gate(rd_active, x, k);
    if (g.kind == GateDecision::Kind::Hold) {
        events_.push_back({t, mode_, mode_, std::string(reason) + ":hold", iol_active_, false});
        return;
    }
    const int from = mode_;
    mode_ = 2;
    iol_active_ = g.iol;
    ramp_next_ = t + cfg_.ramp_dwell;
    below_since_ = -1.0;
    events_.push_back({t, from, 2, std::string(reason), iol_active_, g.contains});
}

void Supervisor::ramp_tick(double t) {
    if (iol_active_ > cfg_.I_OL_nominal && t >= ramp_next_) {
        iol_active_ = std::max(iol_active_ - cfg_.ramp_step, cfg_.I_OL_nominal);
        ramp_next_ += cfg_.ramp_dwell;
    }
}

AdaptiveLaw Supervisor::decide(double t, const PlantState& x, double k, double I_g_raw,
                               double rd_active) {
    if (last_t_ < 0.0) {
        ig_filt_ = I_g_raw;
        filter_alpha_ = 0.0;
    } else {
        const double dt = t - last_t_;
        if (dt > 0.0)
            filter_alpha_ = 1.0 - std::exp(-dt / cfg_.ig_filter_tau);
        ig_filt_ += filter_alpha_ * (I_g_raw - ig_filt_);
    }
    last_t_ = t;

    if (mode_ == 1) {
        if (ig_filt_ > cfg_.I_OL_nominal + cfg_.eta)
            enter_mode2(t, x, k, rd_active, "overload");
        return mode_ == 1 ? mode1_law() : mode2_law();
    }

    ramp_tick(t);
    if (ig_filt_ > iol_active_ + cfg_.eta) {
        enter_mode2(t, x, k, rd_active, "overload-retrigger");
        return mode2_law();
    }

    // return path: overload cleared and recharge would stay below the band
    const bool below = ig_filt_ < cfg_.I_OL_nominal - cfg_.eta;
    if (below) {
        const double conv = x.x2 > 0.0 ? x.x1 * x.x3 / x.x2 : 0.0;
        const double predicted =
            (ig_filt_ - conv) + cfg_.mode1_x1_ref * x.x3 / std::max(x.x2, 1.0);
        if (predicted < cfg_.I_OL_nominal - cfg_.eta) {
            if (below_since_ < 0.0)
                below_since_ = t;
            if (t - below_since_ >= cfg_.return_confirm) {
                const double rd_gate = cfg_.gate_policy == GatePolicy::KnownLoad
                                           ? rd_active
                                           : *std::min_element(cfg_.rd_ladder.begin(),
                                                               cfg_.rd_ladder.end());
                if (mode1_gate(x, k, rd_gate)) {
                    mode_ = 1;
                    iol_active_ = cfg_.I_OL_nominal;
                    below_since_ = -1.0;
                    events_.push_back({t, 2, 1, "offload", iol_active_, true});
                    return mode1_law();
                }
            }
        } else {
            below_since_ = -1.0;
        }
    } else {
        below_since_ = -1.0;
    }
    return mode2_law();
}

}  // namespace bbcu
