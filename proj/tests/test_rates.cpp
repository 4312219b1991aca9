#include <cmath>
#include <vector>

#include "doctest.h"
#include "fundsep/constants.hpp"
#include "fundsep/rates.hpp"
#include "fundsep/sensitivity.hpp"

using namespace fundsep;

namespace {

PreferenceMarketSpec default_market() {
    PreferenceMarketSpec s;
    s.p = -1.0;
    s.r = 0.02;
    s.mu = Vec(2);
    s.mu << 0.8, 0.6;
    s.sigma = Mat(2, 2);
    s.sigma << 0.2, 0.0, 0.05, 0.25;
    s.rho = Vec(2);
    s.rho << -0.3, -0.1;
    return s;
}

} // namespace

TEST_CASE("ordinary least squares on exact and noisy lines") {
    std::vector<double> x{1.0, 2.0, 3.0, 4.0, 5.0};
    std::vector<double> y;
    for (double v : x) y.push_back(2.5 - 0.7 * v);
    auto fit = ols(x, y);
    CHECK(fit.slope == doctest::Approx(-0.7).epsilon(1e-12));
    CHECK(fit.intercept == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));

    // perpendicular noise reduces R^2 but barely moves the slope
    std::vector<double> yn = y;
    const double eps[5] = {0.01, -0.02, 0.015, -0.005, 0.0};
    for (int i = 0; i < 5; ++i) yn[i] += eps[i];
    fit = ols(x, yn);
    CHECK(std::abs(fit.slope + 0.7) < 0.02);
    CHECK(fit.r_squared > 0.99);
}

TEST_CASE("envelope fit recovers synthetic decay shapes") {
    std::vector<double> T{1.0, 2.0, 3.0, 4.0, 5.0, 6.0};

    // pure exponential: gap = 5 e^{-2T}; degree 0 carries no shift term, so C = 5
    {
        std::vector<double> gap;
        for (double t : T) gap.push_back(5.0 * std::exp(-2.0 * t));
        const auto fit = envelope_fit(T, gap, 2.0);
        CHECK(fit.degree == doctest::Approx(0.0));
        CHECK(fit.rate == doctest::Approx(2.0).epsilon(1e-10));
        CHECK(fit.C == doctest::Approx(5.0).epsilon(1e-10));
        CHECK(fit.residual < 1e-10);
    }

    // polynomially corrected: gap = (1 + T) e^{-T}
    {
        std::vector<double> gap;
        for (double t : T) gap.push_back((1.0 + t) * std::exp(-t));
        const auto fit = envelope_fit(T, gap, 1.0);
        CHECK(fit.degree == doctest::Approx(1.0));
        CHECK(fit.rate == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(fit.C == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(fit.residual < 1e-10);
    }

    // square-root correction: gap = 3 (1 + sqrt(T)) e^{-0.5 T}
    {
        std::vector<double> gap;
        for (double t : T) gap.push_back(3.0 * (1.0 + std::sqrt(t)) * std::exp(-0.5 * t));
        const auto fit = envelope_fit(T, gap, 0.5);
        CHECK(fit.degree == doctest::Approx(0.5));
        CHECK(fit.rate == doctest::Approx(0.5).epsilon(1e-10));
        CHECK(fit.C == doctest::Approx(3.0).epsilon(1e-10));
    }
}

TEST_CASE("degenerate envelope inputs throw") {
    CHECK_THROWS_AS(envelope_fit({1.0, 2.0}, {0.1, 0.05}, 1.0), DegenerateFit);
    CHECK_THROWS_AS(envelope_fit({2.0, 2.0, 2.0}, {0.1, 0.1, 0.1}, 1.0), DegenerateFit);
    CHECK_THROWS_AS(envelope_fit({1.0, 2.0, 3.0}, {0.1, -0.05, 0.02}, 1.0), DegenerateFit);
}

TEST_CASE("decay-rate regression produces a negative slope near the analytic rate") {
    const auto spec = default_market();
    StateModelSpec m; // 3/2 defaults
    const auto c = derive_constants(spec, m);
    SimConfig cfg;
    cfg.n_paths = 4000;
    cfg.seed = 4242;
    cfg.dt = 2e-3;
    const std::vector<double> grid{1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
    const auto fit = fit_decay_rate(m, c, 1.0, grid, cfg);
    CHECK(fit.analytic_rate == doctest::Approx(c.lambda_hat));
    CHECK(fit.slope < 0.0);
    CHECK(fit.t_grid.size() == 6);
    CHECK(fit.log_ratio.size() == 6);
    // loose sanity: within 25% at this budget; the acceptance run is tighter
    CHECK(std::abs(-fit.slope - c.lambda_hat) / c.lambda_hat < 0.25);
    CHECK(fit.rel_error == doctest::Approx(std::abs(fit.slope + c.lambda_hat) / c.lambda_hat));
}

TEST_CASE("rescaled weight ratio stays inside a band") {
    const auto spec = default_market();
    StateModelSpec m;
    const auto c = derive_constants(spec, m);
    SimConfig cfg;
    cfg.n_paths = 3000;
    cfg.seed = 99;
    cfg.dt = 2e-3;
    const auto rep = sandwich_check(m, c, 1.0, {1.0, 2.0, 3.0, 4.0}, cfg);
    CHECK(rep.ratio_min > 0.0);
    CHECK(rep.ratio_max >= rep.ratio_min);
    CHECK(rep.bounded);
}
