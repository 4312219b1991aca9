#pragma once

#include <functional>

#include "fundsep/types.hpp"

namespace fundsep {

// stationary density of the state under a given measure's drift, in closed
// form: inverse-gamma for the 3/2 and inverse-Bessel families, Gaussian for
// the filtered OU model
struct InvariantDensity {
    std::function<double(double)> pdf;
    double lower = 0.0;     // support
    double upper = 0.0;     // +inf encoded as infinity()
    double shape = 0.0;     // inverse-gamma alpha / Gaussian mean
    double scale = 0.0;     // inverse-gamma beta  / Gaussian std dev
    double mean = 0.0;      // stationary mean (NaN if undefined)
};

InvariantDensity invariant_density(const StateModelSpec& model, const DerivedConstants& c,
                                   MeasureTag measure);

// quadrature of g against the density (throws QuadratureFailure on trouble)
double density_moment(const InvariantDensity& d, const std::function<double(double)>& g);

// scale/speed criterion for positive recurrence of dX = drift dt + diff dB on
// (lo, hi) around the interior point center: both boundary scale integrals
// must diverge and the speed integral must converge. Divergence is detected
// numerically: overflow, exceeding `threshold`, or sustained growth across
// two domain-refinement levels.
struct RecurrenceReport {
    bool scale_diverges_lower = false;
    bool scale_diverges_upper = false;
    bool speed_finite = false;
    bool positive_recurrent = false;
    double speed_mass = 0.0; // last finite speed integral (unnormalized)
};

RecurrenceReport positive_recurrence_check(const std::function<double(double)>& drift,
                                           const std::function<double(double)>& diffusion,
                                           double lo, double hi, double center,
                                           double threshold = 1e8);

// convenience overload for a model/measure pair
RecurrenceReport positive_recurrence_check(const StateModelSpec& model,
                                           const DerivedConstants& c, MeasureTag measure,
                                           double threshold = 1e8);

} // namespace fundsep
