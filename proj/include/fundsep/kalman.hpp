#pragma once

#include <limits>
#include <string>
#include <vector>

#include "fundsep/types.hpp"

namespace fundsep {

// observed asset prices on a strictly increasing time grid
struct PriceSeries {
    std::vector<double> times;  // size m+1
    Mat prices;                 // n_assets x (m+1), strictly positive

    std::size_t n_assets() const { return static_cast<std::size_t>(prices.rows()); }
    std::size_t n_times() const { return times.size(); }
};

void validate(const PriceSeries& series);

// one simulated draw of the partially observed system: the hidden state, the
// prices built from it, and the driving increments (kept for correlation
// diagnostics)
struct JointSample {
    std::vector<double> times;
    std::vector<double> y;  // hidden OU state on the grid
    PriceSeries prices;
    Mat d_w;                   // n_assets x m price Brownian increments
    std::vector<double> d_b;   // state Brownian increments, d<W,B> = rho dt
};

struct FilterState {
    double y_hat = 0.0;
    double P = 0.0;  // steady-state conditional variance
    Vec gain;        // (P0 mu' + sigma rho') Sigma^{-1}, stored as a column
};

struct FilterResult {
    std::vector<double> times;
    std::vector<double> y_hat;  // size m+1
    Mat innovations;            // n_assets x m
    Vec gain;
    double P0 = 0.0;
};

// algebraic Riccati defect -2(a + sigma rho'mu) P + sigma^2 (1-rho'rho) - |mu|^2 P^2
double riccati_residual(const PreferenceMarketSpec& spec, const StateModelSpec& model, double P);

// filter gain at conditional variance P0
Vec filter_gain(const PreferenceMarketSpec& spec, const StateModelSpec& model, double P0);

// exact-OU hidden state + log-Euler prices with correlated increments; one
// path per call, cfg.n_paths is ignored. y0 = NaN starts at the OU mean b/a.
JointSample simulate_joint(const PreferenceMarketSpec& spec, const StateModelSpec& model,
                           const SimConfig& cfg,
                           double y0 = std::numeric_limits<double>::quiet_NaN());

// steady-state Kalman-Bucy filter on observed prices: innovations from
// log-returns with the Ito correction, left-point y_hat in the drift terms
FilterResult run_filter(const PreferenceMarketSpec& spec, const StateModelSpec& model, double P0,
                        const PriceSeries& prices,
                        double y0_hat = std::numeric_limits<double>::quiet_NaN());

// time-average of (Y - y_hat)^2 after discarding the leading transient
double filter_mse(const JointSample& joint, const FilterResult& filtered,
                  double discard_fraction = 0.5);

// CSV with header "time,<asset>,<asset>,..." -> validated PriceSeries
PriceSeries ingest_prices(const std::string& path);

} // namespace fundsep
