#pragma once

#include <string>
#include <vector>

#include "fundsep/types.hpp"

namespace fundsep {

// optional rescaling of the 3/2 market layer in which myopic, state hedge and
// intertemporal terms all pick up a factor sqrt(z)
enum class MyopicScaling { Standard, SqrtZ };

struct FundInfo {
    std::string name;
    std::string weight_desc; // human-readable weight formula
    bool in_static = true;   // present in the long-horizon portfolio
};

// the distinct funds spanned by the optimal portfolio (safe asset included)
std::vector<FundInfo> fund_table(const StateModelSpec& model);

// long-horizon optimal weights pi_inf(z): myopic plus state hedges, no
// intertemporal component
Vec static_portfolio(const PreferenceMarketSpec& spec, const StateModelSpec& model,
                     const DerivedConstants& c, double z,
                     MyopicScaling scaling = MyopicScaling::Standard);

struct PortfolioDecomposition {
    Vec myopic;
    Vec hedge_static;            // sum of the static hedge funds
    Vec intertemporal;           // direction * estimated weight
    double fz_over_f = 0.0;      // MC estimate of (f_z/f)(T-t, z)
    double fz_over_f_se = 0.0;
    Vec total;                   // myopic + hedge_static + intertemporal
    Vec total_via_uz;            // same weights assembled through u_z/u
    double safe_weight = 0.0;    // 1 - sum(total)
};

// finite-horizon optimal weights pi_T(t,z); t = T gives the myopic portfolio
// exactly (no Monte Carlo needed), t < T estimates f and f_z by Monte Carlo
// with independent sub-seeds derived from cfg.seed
PortfolioDecomposition dynamic_portfolio(const PreferenceMarketSpec& spec,
                                         const StateModelSpec& model, const DerivedConstants& c,
                                         double z, double t, double T, const SimConfig& cfg,
                                         MyopicScaling scaling = MyopicScaling::Standard);

// shared solves: (Sigma')^{-1} v by partial-pivot LU
Vec solve_sigma_t(const PreferenceMarketSpec& spec, const Vec& v);

// raw building blocks of the decomposition: the dynamic portfolio is
// myopic + hedge + inter_dir * h_scale * (f_z/f)(T-t,z), and
// hedge == inter_dir * h_scale * dlog_phi
struct PortfolioPieces {
    Vec myopic;
    Vec hedge;
    Vec inter_dir;
    double dlog_phi = 0.0;
    double h_scale = 1.0;
};
PortfolioPieces portfolio_pieces(const PreferenceMarketSpec& spec, const StateModelSpec& model,
                                 const DerivedConstants& c, double z,
                                 MyopicScaling scaling = MyopicScaling::Standard);

} // namespace fundsep
