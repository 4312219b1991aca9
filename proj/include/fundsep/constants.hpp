#pragma once

#include <vector>

#include "fundsep/types.hpp"

namespace fundsep {

// throws InvalidSpec on dimension mismatches, p >= 0, |rho| > 1,
// non-invertible / badly conditioned sigma, non-positive model parameters
void validate(const PreferenceMarketSpec& spec);
void validate(const StateModelSpec& model);

// all closed-form constants for one (preferences, market, state-model) triple.
// Sets assumption_ok=false (with a message) instead of throwing when only the
// risk-adjusted-reversion assumption fails, so callers can report it.
DerivedConstants derive_constants(const PreferenceMarketSpec& spec, const StateModelSpec& model);

// filtered OU variant that keeps the observation loading theta_vec fixed while
// a moves; used by sensitivity conventions where theta is frozen
DerivedConstants derive_constants_fixed_theta(const PreferenceMarketSpec& spec,
                                              const StateModelSpec& model, const Vec& theta_vec,
                                              double P0);

// principal eigenpair (lambda, phi) with phi > 0 on the state space
Eigenpair eigenpair(const StateModelSpec& model, const DerivedConstants& c);

// max over the grid of |L phi + lambda phi| / max(1, |phi|),
// with L phi evaluated from the closed-form derivatives
double eigen_residual(const StateModelSpec& model, const DerivedConstants& c,
                      const std::vector<double>& grid);

// generator pieces under the original measure:
//   drift      mu_L(z) = (b - q (Sigma^-1 mu)' rho sigma_state)(z), model shape
//   diffusion  sigma_L(z)
//   potential  V(z) = pot_const + pot_slope * g(z)
double fk_drift(const StateModelSpec& model, const DerivedConstants& c, double z);
double fk_diffusion(const StateModelSpec& model, const DerivedConstants& c, double z);
double potential(const DerivedConstants& c, double z);

// drift of the state under a given measure, written as a (level B, slope A)
// pair: 3/2 drift (B - A z) z, invB (B - A z) z^2, FOU B - A z
struct DriftPair {
    double B = 0.0;
    double A = 0.0;
};
DriftPair drift_pair(const StateModelSpec& model, const DerivedConstants& c, MeasureTag measure);

// steady-state filter variance for the filtered OU model (positive Riccati root)
double steady_state_variance(const PreferenceMarketSpec& spec, const StateModelSpec& model);

} // namespace fundsep
