#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bbcu/control.hpp"
#include "bbcu/plant.hpp"
#include "bbcu/roa.hpp"

namespace bbcu {

class SupervisorError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class GatePolicy { KnownLoad, WorstCase };

struct SupervisorConfig {
    double I_OL_nominal = 16.0;  // generator overload threshold [A]
    double eta = 0.5;            // hysteresis half-band [A]
    double ramp_step = 0.5;      // reduced-performance decrement [A]
    double ramp_dwell = 0.79;    // time between decrements [s]
    std::vector<double> iol_ladder = {16.0, 16.5, 17.0, 17.5};
    std::vector<double> rd_ladder = {17.0, 16.5, 16.0, 15.5, 15.0};
    GatePolicy gate_policy = GatePolicy::KnownLoad;
    double ig_filter_tau = 2e-3;     // EMA time constant on the I_g measurement [s]
    double return_confirm = 25e-3;   // below-band dwell before Mode 2 -> 1 [s]
    double mode1_x1_ref = 10.0;
    double gamma1 = 4.0;
    double gamma2 = 4.0;  // gamma2' = R_H * gamma2 feeds the robust law
};

// Supplies certified ROA estimates per (R_D, I_OL); implementations may
// compute lazily. Returns nullptr when no level certifies.
class RoaProvider {
  public:
    virtual ~RoaProvider() = default;
    virtual const RoaEstimate* get(double rd, double iol) = 0;
};

struct ModeEvent {
    double t;
    int from_mode;
    int to_mode;          // equal to from_mode for regate/hold events
    std::string reason;
    double I_OL_active;
    bool gate_contains;   // verdict of the containment check that was logged
};

struct GateDecision {
    enum class Kind { EnterNominal, EnterReduced, Hold } kind;
    double iol;            // chosen overload reference
    bool contains;         // containment verdict for the chosen (or top) ROA
    double rd_used;        // load value the gate evaluated against
};

// Two-mode automaton: Mode 1 recharges the battery at constant current,
// Mode 2 regulates the generator current to I_OL via the robust law. Mode
// transitions are gated on the ROA table and happen only at control samples.
class Supervisor {
  public:
    Supervisor(const SupervisorConfig& cfg, const PlantParams& plant, RoaProvider* roas);

    // Called once per control sample; returns the adaptation law to apply
    // over the next period. rd_active is the current load segment value.
    AdaptiveLaw decide(double t, const PlantState& x, double k, double I_g_raw,
                       double rd_active);

    // Containment search over the I_OL ladder against the given load.
    GateDecision gate(double rd, const PlantState& x, double k) const;

    int mode() const { return mode_; }
    double iol_active() const { return iol_active_; }
    double ig_filtered() const { return ig_filt_; }
    const std::vector<ModeEvent>& events() const { return events_; }

    void reset(double I_g0);

  private:
    AdaptiveLaw mode1_law() const;
    AdaptiveLaw mode2_law() const;
    void enter_mode2(double t, const PlantState& x, double k, double rd_active,
                     const char* reason);
    void ramp_tick(double t);
    bool mode1_gate(const PlantState& x, double k, double rd) const;

    SupervisorConfig cfg_;
    PlantParams plant_;
    RoaProvider* roas_;
    int mode_ = 1;
    double iol_active_;
    double ig_filt_ = 0.0;
    double filter_alpha_ = 0.0;  // set on first sample from the sample period
    double last_t_ = -1.0;
    double ramp_next_ = 0.0;
    double below_since_ = -1.0;
    std::vector<ModeEvent> events_;
};

}  // namespace bbcu
