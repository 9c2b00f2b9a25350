#pragma once

#include <string>
#include <vector>

#include "cbf/operators.hpp"

namespace cbf {

/// Coefficients of the controlled CBF equation
///   dZ/ds = -mu A Z - alpha Z - B(Z) - beta C(Z) + f(s, a(s)).
/// alpha defaults to 0 so the abstract reference dynamics is recovered
/// exactly; convection can be switched off for linear-exactness runs.
struct CBFParams {
    double mu = 1.0;
    double alpha = 0.0;
    double beta = 1.0;
    AbsorptionExponent r{3.0};
    int dim = 2;
    bool convection = true;

    void validate() const {
        if (!(mu > 0.0)) throw std::invalid_argument("CBFParams: mu must be > 0");
        if (!(alpha >= 0.0)) throw std::invalid_argument("CBFParams: alpha must be >= 0");
        if (!(beta >= 0.0)) throw std::invalid_argument("CBFParams: beta must be >= 0");
        if (dim != 2 && dim != 3) throw std::invalid_argument("CBFParams: dim must be 2 or 3");
    }
};

/// Classification against the well-posedness tables. Out-of-regime parameter
/// choices yield warnings, never errors.
struct RegimeInfo {
    bool uniqueness_ok = false;   // r > 3 any mu,beta; r = 3 with 2 beta mu >= 1
    bool viscosity_ok = false;    // d = 2: r > 3; d = 3: r in (3,5]; r = 3 with 2 beta mu >= 1
    std::vector<std::string> warnings;
};

inline RegimeInfo classify_regime(const CBFParams& p) {
    RegimeInfo info;
    const double r = p.r.r;
    const bool critical_ok = (r == 3.0) && (2.0 * p.beta * p.mu >= 1.0);
    info.uniqueness_ok = (r > 3.0) || critical_ok;
    if (p.dim == 2)
        info.viscosity_ok = (r > 3.0) || critical_ok;
    else
        info.viscosity_ok = (r > 3.0 && r <= 5.0) || critical_ok;

    if (r < 3.0)
        info.warnings.push_back("subcritical exponent r < 3: global uniqueness is open");
    else if (r == 3.0 && 2.0 * p.beta * p.mu < 1.0)
        info.warnings.push_back("critical exponent r = 3 needs 2*beta*mu >= 1 for uniqueness");
    if (!info.viscosity_ok && info.uniqueness_ok)
        info.warnings.push_back("d = 3 viscosity-solution theory covers r in (3,5] only");
    return info;
}

}  // namespace cbf
