#pragma once

#include "fundsep/types.hpp"

namespace fundsep {

// Monte Carlo value function u(t,z) = E_z[exp(-int_0^t V(Z_s) ds)] under the
// base measure
McEstimate estimate_u(const StateModelSpec& model, const DerivedConstants& c, double z, double t,
                      const SimConfig& cfg);

// remainder f(t,z) = E^tilted_z[1/phi(Z_t)], estimated under the tilted drift
McEstimate estimate_f(const StateModelSpec& model, const DerivedConstants& c, double z, double t,
                      const SimConfig& cfg);

// spatial derivative f_z(t,z). Tilted keeps the expectation under the tilted
// measure with an exponential path weight; DoublyTilted moves the exponential
// into a second eigenpair change of measure, so the decay rate e^{-rate t}
// factors out exactly (lower variance for long horizons). Auto picks
// DoublyTilted for 3/2 & inverse Bessel, Tilted for the filtered OU model
// (whose prefactor is already exact).
enum class FzRepresentation { Auto, Tilted, DoublyTilted };

McEstimate estimate_f_z(const StateModelSpec& model, const DerivedConstants& c, double z, double t,
                        const SimConfig& cfg, FzRepresentation rep = FzRepresentation::Auto);

// building blocks for callers that manage their own path batches (common
// random number sensitivities): which measure/functionals a representation
// needs, and the per-path integrand values on a matching batch
FzRepresentation resolve_fz_representation(ModelKind kind, FzRepresentation rep);
MeasureTag fz_measure(ModelKind kind, FzRepresentation rep);
std::vector<Functional> fz_functionals(ModelKind kind, FzRepresentation rep);
std::vector<double> f_values(const DerivedConstants& c, const PathBatch& batch);
std::vector<double> fz_values(const DerivedConstants& c, const PathBatch& batch,
                              FzRepresentation rep);

// closed forms for the filtered OU model: the tilted state is Gaussian, so
// f and f_z reduce to quadratic-exponential Gaussian moments
double gaussian_f_oracle(const DerivedConstants& c, double z, double t);
double gaussian_fz_oracle(const DerivedConstants& c, double z, double t);

// fractional moment E[Y_t^nu] of the 3/2 process dY = (b - aY)Y dt + sigma Y^{3/2} dB,
// by quadrature of the transition-density moment representation;
// valid for 0 < nu < 2a/sigma^2 + 2
double moment_32(double b, double a, double sigma, double y0, double nu, double t);

// f for the 3/2 model via the fractional-moment quadrature (no Monte Carlo)
double f_quadrature_32(const DerivedConstants& c, double z, double t);

// E[f(T-t, Z_t)] vs f(T, z): equal in expectation by the tower property
struct MartingaleCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    double se = 0.0; // combined standard error
};
MartingaleCheck martingale_f_check(const StateModelSpec& model, const DerivedConstants& c,
                                   double z, double t, double T, const SimConfig& cfg,
                                   std::size_t inner_paths = 1000);

} // namespace fundsep
