#include "fundsep/rates.hpp"

#include <cmath>

#include "fundsep/feynman_kac.hpp"

namespace fundsep {

OlsFit ols(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw DegenerateFit("OLS needs >= 2 points");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0) throw DegenerateFit("OLS abscissae are degenerate");
    OlsFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return f;
}

namespace {

struct RatioPoint {
    double ratio, se;
};

RatioPoint fz_over_f(const StateModelSpec& model, const DerivedConstants& c, double z, double t,
                     SimConfig cfg) {
    const McEstimate f = estimate_f(model, c, z, t, cfg);
    cfg.seed ^= 0x517CC1B727220A95ull;
    const McEstimate fz = estimate_f_z(model, c, z, t, cfg);
    if (!(f.value > 0.0) || !std::isfinite(fz.value))
        throw DegenerateFit("Monte Carlo f or f_z is unusable at t=" + std::to_string(t));
    const double ratio = fz.value / f.value;
    const double rel2 = (fz.std_error * fz.std_error) / (fz.value * fz.value) +
                        (f.std_error * f.std_error) / (f.value * f.value);
    return {ratio, std::abs(ratio) * std::sqrt(rel2)};
}

std::vector<double> checked_grid(const std::vector<double>& t_grid, double burn_in,
                                 double lambda_hat, std::size_t min_points) {
    if (burn_in < 0.0) burn_in = 1.0 / lambda_hat;
    std::vector<double> grid;
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (i > 0 && !(t_grid[i] > t_grid[i - 1]))
            throw DegenerateFit("time grid must be strictly increasing");
        if (t_grid[i] >= burn_in - 1e-12) grid.push_back(t_grid[i]);
    }
    if (grid.size() < min_points)
        throw DegenerateFit("need at least " + std::to_string(min_points) +
                            " grid points past the burn-in");
    return grid;
}

} // namespace

RateFit fit_decay_rate(const StateModelSpec& model, const DerivedConstants& c, double z,
                       const std::vector<double>& t_grid, const SimConfig& cfg, double burn_in) {
    RateFit out;
    out.analytic_rate = c.lambda_hat;
    out.t_grid = checked_grid(t_grid, burn_in, c.lambda_hat, 5);
    out.log_ratio.reserve(out.t_grid.size());
    out.ratio_se.reserve(out.t_grid.size());
    for (std::size_t i = 0; i < out.t_grid.size(); ++i) {
        SimConfig point_cfg = cfg;
        point_cfg.seed = cfg.seed + 101 * (i + 1); // fresh independent seed per point
        const RatioPoint rp = fz_over_f(model, c, z, out.t_grid[i], point_cfg);
        if (!(std::abs(rp.ratio) > 0.0) || !std::isfinite(rp.ratio))
            throw DegenerateFit("f_z/f vanished or blew up at t=" + std::to_string(out.t_grid[i]));
        out.log_ratio.push_back(std::log(std::abs(rp.ratio)));
        out.ratio_se.push_back(rp.se);
    }
    const OlsFit fit = ols(out.t_grid, out.log_ratio);
    out.slope = fit.slope;
    out.intercept = fit.intercept;
    out.r_squared = fit.r_squared;
    out.rel_error = std::abs(fit.slope + c.lambda_hat) / c.lambda_hat;
    return out;
}

SandwichReport sandwich_check(const StateModelSpec& model, const DerivedConstants& c, double z,
                              const std::vector<double>& t_grid, const SimConfig& cfg,
                              double bound, double burn_in) {
    SandwichReport rep;
    rep.t_grid = checked_grid(t_grid, burn_in, c.lambda_hat, 2);
    rep.rescaled.reserve(rep.t_grid.size());
    for (std::size_t i = 0; i < rep.t_grid.size(); ++i) {
        SimConfig point_cfg = cfg;
        point_cfg.seed = cfg.seed + 211 * (i + 1);
        const RatioPoint rp = fz_over_f(model, c, z, rep.t_grid[i], point_cfg);
        rep.rescaled.push_back(std::exp(c.lambda_hat * rep.t_grid[i]) * std::abs(rp.ratio));
    }
    rep.ratio_min = rep.rescaled[0];
    rep.ratio_max = rep.rescaled[0];
    for (double v : rep.rescaled) {
        rep.ratio_min = std::min(rep.ratio_min, v);
        rep.ratio_max = std::max(rep.ratio_max, v);
    }
    rep.bounded = rep.ratio_max <= bound * rep.ratio_min;
    return rep;
}

} // namespace fundsep
