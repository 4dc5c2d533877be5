#include <doctest.h>

#include <cmath>
#include <map>

#include "bbcu/analysis.hpp"
#include "bbcu/supervisor.hpp"

using namespace bbcu;

namespace {

// hand-built provider with controllable certificates
class StubProvider : public RoaProvider {
  public:
    const RoaEstimate* get(double rd, double iol) override {
        const auto it = estimates.find({rd, iol});
        return it == estimates.end() ? nullptr : &it->second;
    }
    std::map<std::pair<double, double>, RoaEstimate> estimates;
};

RoaEstimate ball(double k_c, double x2_c, double x3_c, double radius2) {
    RoaEstimate r;
    r.lyap.P = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    r.lyap.center = {k_c, x2_c, x3_c};
    r.lyap.decay = 0.75;
    r.level = radius2;
    return r;
}

SupervisorConfig base_cfg() {
    SupervisorConfig c;
    c.ig_filter_tau = 1e-6;  // effectively unfiltered for the unit tests
    return c;
}

}  // namespace

TEST_CASE("hysteresis boundary is strict and gated transitions fire") {
    StubProvider roas;
    roas.estimates[{15.0, 16.0}] = ball(0.03, 268.4, 28.0, 1e6);
    const PlantParams p;
    Supervisor sup(base_cfg(), p, &roas);
    sup.reset(10.0);

    const PlantState x{10.0, 268.4, 28.0};
    // I_g = I_OL + eta exactly: stays in mode 1
    sup.decide(1e-5, x, 0.037, 16.5, 15.0);
    sup.decide(2e-5, x, 0.037, 16.5, 15.0);
    CHECK(sup.mode() == 1);
    // strictly above: switches, and the law becomes generator-current
    const AdaptiveLaw law = sup.decide(3e-5, x, 0.037, 16.5001, 15.0);
    CHECK(sup.mode() == 2);
    CHECK(law.kind == LawKind::GeneratorCurrent);
    CHECK(law.gain == doctest::Approx(p.R_H * 4.0));
    REQUIRE(sup.events().size() == 1);
    CHECK(sup.events().front().gate_contains);
}

TEST_CASE("known-load gate picks the smallest containing ladder entry") {
    StubProvider roas;
    // only the 17 A entry contains the probe state
    roas.estimates[{15.0, 16.0}] = ball(1.0, 268.4, 28.0, 1e-4);
    roas.estimates[{15.0, 16.5}] = ball(1.0, 268.4, 28.0, 1e-4);
    roas.estimates[{15.0, 17.0}] = ball(0.03, 268.4, 28.0, 1.0);
    roas.estimates[{15.0, 17.5}] = ball(0.03, 268.4, 28.0, 1e6);
    Supervisor sup(base_cfg(), PlantParams{}, &roas);
    sup.reset(10.0);
    const GateDecision g = sup.gate(15.0, {10.0, 268.4, 28.0}, 0.03);
    CHECK(g.kind == GateDecision::Kind::EnterReduced);
    CHECK(g.iol == doctest::Approx(17.0));
    CHECK(g.contains);

    // nothing contains: hold
    StubProvider none;
    none.estimates[{15.0, 16.0}] = ball(5.0, 0.0, 0.0, 1e-6);
    Supervisor sup2(base_cfg(), PlantParams{}, &none);
    sup2.reset(10.0);
    const GateDecision h = sup2.gate(15.0, {10.0, 268.4, 28.0}, 0.03);
    CHECK(h.kind == GateDecision::Kind::Hold);

    // state at a center: nominal entry
    StubProvider at_center;
    at_center.estimates[{15.0, 16.0}] = ball(0.03, 268.4, 28.0, 1e-9);
    Supervisor sup3(base_cfg(), PlantParams{}, &at_center);
    sup3.reset(10.0);
    const GateDecision n = sup3.gate(15.0, {0.0, 268.4, 28.0}, 0.03);
    CHECK(n.kind == GateDecision::Kind::EnterNominal);
    CHECK(n.iol == doctest::Approx(16.0));
}

TEST_CASE("worst-case policy enters at the ladder top and logs the verdict") {
    StubProvider roas;
    roas.estimates[{15.0, 17.5}] = ball(0.03, 268.4, 28.0, 1e-9);  // will not contain
    SupervisorConfig cfg = base_cfg();
    cfg.gate_policy = GatePolicy::WorstCase;
    Supervisor sup(cfg, PlantParams{}, &roas);
    sup.reset(10.0);
    sup.decide(1e-5, {10.0, 268.0, 29.0}, 0.037, 17.0, 200.0);
    CHECK(sup.mode() == 2);
    CHECK(sup.iol_active() == doctest::Approx(17.5));
    REQUIRE(sup.events().size() == 1);
    CHECK_FALSE(sup.events().front().gate_contains);  // logged, not enforced
}

TEST_CASE("reduced-performance ramp steps down every dwell and clamps") {
    StubProvider roas;
    roas.estimates[{15.0, 17.5}] = ball(0.03, 268.4, 28.0, 1e6);
    SupervisorConfig cfg = base_cfg();
    cfg.gate_policy = GatePolicy::WorstCase;
    Supervisor sup(cfg, PlantParams{}, &roas);
    sup.reset(10.0);
    const PlantState x{10.0, 268.0, 29.0};
    sup.decide(0.0, x, 0.037, 17.0, 15.0);  // overload -> mode 2 at 17.5
    REQUIRE(sup.mode() == 2);
    CHECK(sup.iol_active() == doctest::Approx(17.5));

    auto at = [&](double t) {
        sup.decide(t, x, 0.03, 17.4, 15.0);  // stays above the return band
        return sup.iol_active();
    };
    CHECK(at(0.50) == doctest::Approx(17.5));  // dwell not yet elapsed
    CHECK(at(0.79) == doctest::Approx(17.0));
    CHECK(at(1.20) == doctest::Approx(17.0));
    CHECK(at(1.58) == doctest::Approx(16.5));
    CHECK(at(2.37) == doctest::Approx(16.0));
    CHECK(at(3.16) == doctest::Approx(16.0));  // clamped at nominal
}

TEST_CASE("return to mode 1 needs a confirmed offload and the cylinder gate") {
    StubProvider roas;
    roas.estimates[{300.0, 17.5}] = ball(0.03, 268.4, 28.0, 1e6);
    roas.estimates[{15.0, 17.5}] = ball(0.03, 268.4, 28.0, 1e6);
    SupervisorConfig cfg = base_cfg();
    cfg.gate_policy = GatePolicy::WorstCase;
    cfg.return_confirm = 0.025;
    Supervisor sup(cfg, PlantParams{}, &roas);
    sup.reset(10.0);
    const PlantState x{10.0, 268.0, 29.0};
    sup.decide(0.0, x, 0.037, 17.0, 15.0);
    REQUIRE(sup.mode() == 2);

    // near the mode-1 operating point, offload holds: I_g below band
    const PlantState xr{9.0, 269.6, 28.9};
    double t = 1.0;
    sup.decide(t, xr, 0.036, 1.9, 300.0);
    CHECK(sup.mode() == 2);  // confirm window not yet elapsed
    t += 0.010;
    sup.decide(t, xr, 0.036, 1.9, 300.0);
    CHECK(sup.mode() == 2);
    t += 0.016;
    sup.decide(t, xr, 0.036, 1.9, 300.0);
    CHECK(sup.mode() == 1);  // confirmed and inside the recharge cylinder

    // a brief dip that recovers does not return
    sup.decide(t + 0.001, xr, 0.036, 17.0, 15.0);
    CHECK(sup.mode() == 2);
    sup.decide(t + 0.002, xr, 0.036, 1.9, 300.0);
    sup.decide(t + 0.010, xr, 0.036, 16.0, 300.0);  // recovers inside the band
    sup.decide(t + 0.040, xr, 0.036, 1.9, 300.0);   // below again, timer restarted
    CHECK(sup.mode() == 2);
}

TEST_CASE("empty ladders are configuration errors") {
    StubProvider roas;
    SupervisorConfig cfg = base_cfg();
    cfg.iol_ladder.clear();
    CHECK_THROWS_AS(Supervisor(cfg, PlantParams{}, &roas), SupervisorError);
}
