#pragma once

#include <array>
#include <stdexcept>

namespace bbcu {

// Electrical constants of the converter and its terminations. R_D is the
// (piecewise-constant) HV load; all values in SI units.
struct PlantParams {
    double E_H = 270.0;    // HV source voltage [V]
    double R_H = 0.1;      // HV source resistance [ohm]
    double L = 10e-3;      // inductor [H]
    double C_H = 0.8e-3;   // HV capacitor [F]
    double E_L = 28.0;     // battery voltage [V]
    double R_L = 0.1;      // battery resistance [ohm]
    double C_L = 0.4e-3;   // LV capacitor [F]
    double R_D = 300.0;    // HV load [ohm]
};

struct DerivedParams {
    double R_DH;     // R_D || R_H
    double alpha;    // 1/(R_DH C_H)
    double beta_H;   // E_H/(R_H C_H)
    double beta_L;   // E_L/(R_L C_L)
};

// (x1, x2, x3) = inductor current, HV capacitor voltage, LV capacitor voltage.
struct PlantState {
    double x1 = 0.0;
    double x2 = 0.0;
    double x3 = 0.0;
};

// Operating box assumed by the gain-bound and reaching analysis. The lower
// LV bound x3_min is configured; the analysis needs it even though the
// model assumptions only bound x3 from above.
struct StateBox {
    double x1_min = -300.0, x1_max = 300.0;
    double x2_min = 100.0, x2_max = 300.0;
    double x3_min = 20.0, x3_max = 60.0;
};

class ParamError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Throws ParamError unless all fields are positive and the source/battery
// voltage margin E_H > (1 + R_H/R_D) E_L holds.
void validate(const PlantParams& p);
void validate(const StateBox& box);

DerivedParams derive(const PlantParams& p);

// Right-hand side of the switched model; u in [0,1] (relay values and
// averaged values are both admitted).
PlantState rhs(const PlantState& x, double u, const DerivedParams& d, const PlantParams& p);

// Closed-form equilibrium for fixed u in {0,1}.
PlantState equilibrium(int u_fixed, const PlantParams& p);

// Dynamic matrix of the u==1 configuration, row-major.
std::array<double, 9> dynamic_matrix_u1(const PlantParams& p);

}  // namespace bbcu
