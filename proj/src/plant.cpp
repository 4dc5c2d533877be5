#include "bbcu/plant.hpp"

#include <cmath>
#include <string>

namespace bbcu {

void validate(const PlantParams& p) {
    auto pos = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw ParamError(std::string("plant parameter must be positive: ") + name);
    };
    pos(p.E_H, "E_H");
    pos(p.R_H, "R_H");
    pos(p.L, "L");
    pos(p.C_H, "C_H");
    pos(p.E_L, "E_L");
    pos(p.R_L, "R_L");
    pos(p.C_L, "C_L");
    pos(p.R_D, "R_D");
    if (!(p.E_H > (1.0 + p.R_H / p.R_D) * p.E_L))
        throw ParamError("voltage margin violated: E_H <= (1 + R_H/R_D) E_L");
}

void validate(const StateBox& b) {
    if (!(b.x1_min <= b.x1_max) || !(0.0 < b.x2_min) || !(b.x2_min <= b.x2_max) ||
        !(0.0 < b.x3_min) || !(b.x3_min <= b.x3_max))
        throw ParamError("state box bounds out of order");
    if (!(b.x3_max < b.x2_min))
        throw ParamError("state box requires x3_max < x2_min");
}

DerivedParams derive(const PlantParams& p) {
    validate(p);
    DerivedParams d;
    d.R_DH = p.R_D * p.R_H / (p.R_D + p.R_H);
    d.alpha = 1.0 / (d.R_DH * p.C_H);
    d.beta_H = p.E_H / (p.R_H * p.C_H);
    d.beta_L = p.E_L / (p.R_L * p.C_L);
    return d;
}

PlantState rhs(const PlantState& x, double u, const DerivedParams& d, const PlantParams& p) {
    return {-x.x3 / p.L + x.x2 * u / p.L,
            -d.alpha * x.x2 - x.x1 * u / p.C_H + d.beta_H,
            x.x1 / p.C_L - x.x3 / (p.R_L * p.C_L) + d.beta_L};
}

PlantState equilibrium(int u_fixed, const PlantParams& p) {
    const DerivedParams d = derive(p);
    if (u_fixed == 0)
        return {-p.E_L / p.R_L, d.R_DH / p.R_H * p.E_H, 0.0};
    if (u_fixed == 1) {
        const double x21 =
            d.R_DH * p.R_L / (d.R_DH + p.R_L) * (p.E_H / p.R_H + p.E_L / p.R_L);
        const double x11 = (d.R_DH / p.R_H * p.E_H - p.E_L) / (d.R_DH + p.R_L);
        return {x11, x21, x21};
    }
    throw std::invalid_argument("equilibrium: u_fixed must be 0 or 1");
}

std::array<double, 9> dynamic_matrix_u1(const PlantParams& p) {
    const DerivedParams d = derive(p);
    return {0.0,        1.0 / p.L, -1.0 / p.L,
            -1.0 / p.C_H, -d.alpha, 0.0,
            1.0 / p.C_L, 0.0,      -1.0 / (p.R_L * p.C_L)};
}

}  // namespace bbcu
