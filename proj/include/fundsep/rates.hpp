#pragma once

#include <vector>

#include "fundsep/types.hpp"

namespace fundsep {

// simple OLS y = intercept + slope * x
struct OlsFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};
OlsFit ols(const std::vector<double>& x, const std::vector<double>& y);

struct RateFit {
    double slope = 0.0;      // fitted slope of log|f_z/f| against t
    double intercept = 0.0;
    double r_squared = 0.0;
    std::vector<double> t_grid;
    std::vector<double> log_ratio; // fitted data
    std::vector<double> ratio_se;  // standard error of each f_z/f point
    double analytic_rate = 0.0;    // lambda_hat
    double rel_error = 0.0;        // |slope + lambda_hat| / lambda_hat
};

// OLS of log|f_z(t,z)/f(t,z)| (Monte Carlo values, fresh seed per grid point)
// against t; burn_in defaults to 1/lambda_hat when negative
RateFit fit_decay_rate(const StateModelSpec& model, const DerivedConstants& c, double z,
                       const std::vector<double>& t_grid, const SimConfig& cfg,
                       double burn_in = -1.0);

struct SandwichReport {
    double ratio_min = 0.0; // min over grid of e^{lambda_hat t} |f_z/f|
    double ratio_max = 0.0;
    bool bounded = false;   // ratio_max / ratio_min <= bound
    std::vector<double> t_grid;
    std::vector<double> rescaled;
};

// two-sided bound check: the exponentially rescaled weight must stay within a
// bounded band after burn-in
SandwichReport sandwich_check(const StateModelSpec& model, const DerivedConstants& c, double z,
                              const std::vector<double>& t_grid, const SimConfig& cfg,
                              double bound = 10.0, double burn_in = -1.0);

} // namespace fundsep
