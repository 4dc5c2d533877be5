#pragma once

#include "bbcu/plant.hpp"

namespace bbcu {

// Active adaptation law for the gain k in sigma = k x2 - x1.
enum class LawKind {
    CurrentTracking,   // k' = gamma1 (x1_ref - x1), battery recharge
    VoltageTracking,   // k' = gamma2 (x2 - x2_ref), HV voltage regulation
    GeneratorCurrent,  // k' = gamma2p (I_OL - I_g), robust overload limitation
};

struct AdaptiveLaw {
    LawKind kind = LawKind::CurrentTracking;
    double gain = 4.0;       // gamma1 | gamma2 | gamma2p
    double reference = 10.0; // x1_ref | x2_ref | I_OL
};

struct ControllerState {
    double k = 0.0;
    AdaptiveLaw law;
    double k_max = 0.25;  // saturation bound on |k|
};

// sigma(k, x) = k x2 - x1
double sigma(double k, const PlantState& x);

// Relay: u = 0 for sigma <= 0, u = 1 for sigma > 0.
int relay(double sigma_value);

// One explicit-Euler step of the active adaptation law, hard-saturated at
// +-k_max. I_g is the measured generator current (used by GeneratorCurrent).
double adapt_k(const ControllerState& cs, const PlantState& x, double I_g, double dt);

// Rate k' of the active law at the given operating point.
double k_dot(const AdaptiveLaw& law, const PlantState& x, double I_g);

// Equivalent control keeping the state on the manifold; diagnostic only,
// never used in the relay loop. Requires x2 > 0.
double equivalent_control(double k, double k_dot_value, const PlantState& x,
                          const DerivedParams& d, const PlantParams& p);

// On-manifold initial gain: x1/x2 when x2 > 0, else 0.
double initial_gain(const PlantState& x0);

}  // namespace bbcu
