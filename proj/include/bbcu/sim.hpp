#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "bbcu/control.hpp"
#include "bbcu/plant.hpp"
#include "bbcu/supervisor.hpp"

namespace bbcu {

class NumericError : public std::runtime_error {
  public:
    NumericError(const std::string& what, double t) : std::runtime_error(what), t_fail(t) {}
    double t_fail;
};

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct SimConfig {
    double dt_plant = 1e-6;     // integrator step [s]
    double dt_control = 5e-6;   // relay/adaptation sample period [s]
    double t_end = 1.0;
    int record_stride = 200;    // control samples per recorded row
};

void validate(const SimConfig& c);

// One load segment [t_start, t_end) with a constant R_D.
struct LoadSegment {
    double t_start;
    double t_end;
    double r_d;
};

struct LoadProfile {
    std::vector<LoadSegment> segments;
    // Throws ConfigError unless segments are contiguous, non-overlapping and
    // cover [0, t_end].
    void validate_cover(double t_end) const;
    double at(double t) const;
};

struct TraceRow {
    double t, x1, x2, x3;
    int u;
    double sigma, k, I_g;
    int mode;
    double I_OL_active;
};

using SimTrace = std::vector<TraceRow>;

// Classical 4th-order step of the switched model at fixed u.
PlantState rk4_step(const PlantState& x, double u, double dt, const DerivedParams& d,
                    const PlantParams& p);

struct SimResult {
    SimTrace trace;
    std::vector<ModeEvent> mode_events;
    PlantState final_state;
    double final_k;
    double first_sigma_cross = -1.0;  // first control sample where sigma changed sign
};

// Sample-and-hold closed loop: at every control sample the supervisor picks
// the law, k is advanced one Euler step (saturated), the relay fixes u, then
// the plant integrates dt_control/dt_plant RK4 substeps. Load segments swap
// R_D (and the derived constants) at control-sample resolution.
SimResult run_closed_loop(const PlantParams& base, const LoadProfile& profile,
                          const ControllerState& c0, Supervisor& sup,
                          const SimConfig& cfg, const PlantState& x0);

// Open-loop fixed-u integration helper used by equilibrium checks.
PlantState integrate_fixed_u(PlantState x, double u, double t_end, double dt,
                             const PlantParams& p);

}  // namespace bbcu
