#include "bbcu/control.hpp"

#include <algorithm>
#include <stdexcept>

namespace bbcu {

double sigma(double k, const PlantState& x) { return k * x.x2 - x.x1; }

int relay(double sigma_value) { return sigma_value > 0.0 ? 1 : 0; }

double k_dot(const AdaptiveLaw& law, const PlantState& x, double I_g) {
    switch (law.kind) {
    case LawKind::CurrentTracking:
        return law.gain * (law.reference - x.x1);
    case LawKind::VoltageTracking:
        return law.gain * (x.x2 - law.reference);
    case LawKind::GeneratorCurrent:
        return law.gain * (law.reference - I_g);
    }
    return 0.0;
}

double adapt_k(const ControllerState& cs, const PlantState& x, double I_g, double dt) {
    const double k_next = cs.k + dt * k_dot(cs.law, x, I_g);
    return std::clamp(k_next, -cs.k_max, cs.k_max);
}

double equivalent_control(double k, double k_dot_value, const PlantState& x,
                          const DerivedParams& d, const PlantParams& p) {
    if (!(x.x2 > 0.0))
        throw std::domain_error("equivalent_control: requires x2 > 0");
    const double denom = (p.L * k * k + p.C_H) * x.x2;
    return p.L * p.C_H / denom *
           ((k_dot_value - d.alpha * k) * x.x2 + x.x3 / p.L + d.beta_H * k);
}

double initial_gain(const PlantState& x0) { return x0.x2 > 0.0 ? x0.x1 / x0.x2 : 0.0; }

}  // namespace bbcu
