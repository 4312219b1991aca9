#pragma once

#include <vector>

#include "fundsep/types.hpp"

namespace fundsep {

// simulate n_paths of the state under the drift selected by `measure`.
// Schemes: 3/2 state -> full-truncation Euler on the reciprocal (a CIR
// process), inverse Bessel -> full-truncation Euler on the reciprocal square,
// filtered OU -> exact Gaussian transition sampled jointly with the Brownian
// increment. Requested functionals are accumulated along the way (left-point
// rule for dB integrals, trapezoid for dt integrals); their horizon values
// land in the returned batch.
PathBatch simulate(const StateModelSpec& model, const DerivedConstants& c, MeasureTag measure,
                   double z0, const SimConfig& cfg, const std::vector<Functional>& funcs = {},
                   StoragePolicy storage = StoragePolicy::TerminalOnly);

// pathwise derivative of the state flow with respect to its starting point,
// evaluated at the batch horizon. Needs IntZ (3/2) or IntZ2 (invB) in the
// batch; the filtered OU flow derivative is deterministic.
std::vector<double> flow_derivative(const StateModelSpec& model, const DerivedConstants& c,
                                    const PathBatch& batch);

// per-path Radon-Nikodym weights d(target)/d(batch.measure) at the horizon.
// Supported pairs: P -> PTilde, PTilde -> P (both need IntV), and
// PTilde -> PHat (needs IntZ for 3/2, IntZ2 for invB).
std::vector<double> girsanov_weights(const StateModelSpec& model, const DerivedConstants& c,
                                     MeasureTag target, const PathBatch& batch);

// mean / standard error of per-path values; antithetic batches are reduced
// over pair means. Accumulation is in fixed path order, so the result does
// not depend on the worker count.
McEstimate reduce_mc(const PathBatch& batch, const std::vector<double>& per_path);

} // namespace fundsep
