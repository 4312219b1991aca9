#include <cmath>

#include "doctest.h"
#include "fundsep/constants.hpp"
#include "fundsep/feynman_kac.hpp"
#include "fundsep/simulate.hpp"

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

StateModelSpec model(ModelKind k) {
    StateModelSpec m;
    m.kind = k;
    if (k == ModelKind::FilteredOU) { m.b = 0.5; m.a = 0.5; m.sigma = 0.5; }
    else { m.b = 1.0; m.a = 0.5; m.sigma = 0.8; }
    return m;
}

SimConfig quick(std::size_t n, std::uint64_t seed) {
    SimConfig c;
    c.n_paths = n;
    c.seed = seed;
    return c;
}

double lgamma_ratio_limit(double b, double sigma, double kappa, double nu) {
    // t -> inf limit of the fractional moment: (2b/sigma^2)^nu G(k+1-nu)/G(k+1)
    return std::pow(2.0 * b / (sigma * sigma), nu) *
           std::exp(std::lgamma(kappa + 1.0 - nu) - std::lgamma(kappa + 1.0));
}

} // namespace

TEST_CASE("fractional moment quadrature: limits, frozen value, and domain guards") {
    const double b = 1.0, a = 0.5, sig = 0.8, y0 = 1.3;
    const double kappa = 2.0 * a / (sig * sig) + 1.0;

    // exact at t = 0, continuous just past it
    CHECK(moment_32(b, a, sig, y0, 0.7, 0.0) == doctest::Approx(std::pow(y0, 0.7)).epsilon(1e-14));
    CHECK(moment_32(b, a, sig, y0, 0.7, 0.01) == doctest::Approx(std::pow(y0, 0.7)).epsilon(5e-3));

    // ergodic limit: inverse-gamma moment of the stationary law
    CHECK(moment_32(b, a, sig, y0, 0.5, 60.0) ==
          doctest::Approx(lgamma_ratio_limit(b, sig, kappa, 0.5)).epsilon(1e-8));
    // nu > 1 leaves a mild endpoint kink in the transformed integrand, so the
    // quadrature bottoms out near 1e-8 absolute rather than machine precision
    CHECK(moment_32(b, a, sig, y0, 1.5, 60.0) ==
          doctest::Approx(lgamma_ratio_limit(b, sig, kappa, 1.5)).epsilon(1e-6));

    // frozen against an independent noncentral-chi-square evaluation
    CHECK(moment_32(1.0, 0.5, 0.8, 1.0, 0.5, 0.5) ==
          doctest::Approx(1.0538095513).epsilon(1e-8));

    CHECK_THROWS_AS(moment_32(b, a, sig, y0, 0.0, 1.0), ParameterOutOfRange);
    CHECK_THROWS_AS(moment_32(b, a, sig, y0, kappa + 1.1, 1.0), ParameterOutOfRange);
    CHECK_THROWS_AS(moment_32(b, a, sig, -1.0, 0.5, 1.0), ParameterOutOfRange);
}

TEST_CASE("Gaussian closed forms collapse to the eigenfunction at t = 0") {
    const auto spec = default_market();
    const auto m = model(ModelKind::FilteredOU);
    const auto c = derive_constants(spec, m);
    for (double z : {-0.5, 0.4, 1.2}) {
        const double inv_phi = std::exp(c.eta * z * z + c.xi * z);
        CHECK(gaussian_f_oracle(c, z, 1e-14) == doctest::Approx(inv_phi).epsilon(1e-10));
        CHECK(gaussian_fz_oracle(c, z, 1e-14) ==
              doctest::Approx((2.0 * c.eta * z + c.xi) * inv_phi).epsilon(1e-10));
    }
}

TEST_CASE("Gaussian closed form matches a brute-force integral") {
    const auto spec = default_market();
    const auto m = model(ModelKind::FilteredOU);
    const auto c = derive_constants(spec, m);
    const double z = 1.0, t = 1.0;

    const auto dp = drift_pair(m, c, MeasureTag::PTilde);
    const double mt = dp.B / dp.A + (z - dp.B / dp.A) * std::exp(-dp.A * t);
    const double vt = c.theta_norm2 * (1.0 - std::exp(-2.0 * dp.A * t)) / (2.0 * dp.A);
    const double sd = std::sqrt(vt);

    // Simpson over +-12 standard deviations
    const int n = 40000; // even
    const double lo = mt - 12.0 * sd, hi = mt + 12.0 * sd, h = (hi - lo) / n;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double y = lo + i * h;
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        acc += w * std::exp(c.eta * y * y + c.xi * y) *
               std::exp(-(y - mt) * (y - mt) / (2.0 * vt)) / (sd * std::sqrt(2.0 * M_PI));
    }
    acc *= h / 3.0;
    CHECK(gaussian_f_oracle(c, z, t) == doctest::Approx(acc).epsilon(1e-10));
}

TEST_CASE("value function obeys the eigen decomposition (inverse Bessel)") {
    const auto spec = default_market();
    const auto m = model(ModelKind::InverseBessel);
    const auto c = derive_constants(spec, m);
    const auto e = eigenpair(m, c);
    const double z = 1.2, t = 1.0;
    const auto u = estimate_u(m, c, z, t, quick(8000, 101));
    const auto f = estimate_f(m, c, z, t, quick(8000, 707));
    const double rhs = std::exp(-c.lambda * t) * e.phi(z) * f.value;
    const double scale = std::exp(-c.lambda * t) * e.phi(z);
    const double se = std::hypot(u.std_error, scale * f.std_error);
    CHECK(std::abs(u.value - rhs) < 4.0 * se);
}

TEST_CASE("both spatial-derivative representations estimate the same number") {
    const auto spec = default_market();
    for (ModelKind k : {ModelKind::ThreeHalves, ModelKind::InverseBessel}) {
        const auto m = model(k);
        const auto c = derive_constants(spec, m);
        const double z = 1.1, t = 1.0;
        const auto tilted = estimate_f_z(m, c, z, t, quick(12000, 55), FzRepresentation::Tilted);
        const auto doubly =
            estimate_f_z(m, c, z, t, quick(12000, 56), FzRepresentation::DoublyTilted);
        const double se = std::hypot(tilted.std_error, doubly.std_error);
        CHECK(std::abs(tilted.value - doubly.value) < 4.0 * se);
    }
}

TEST_CASE("filtered-OU estimates agree with the Gaussian closed forms") {
    const auto spec = default_market();
    const auto m = model(ModelKind::FilteredOU);
    const auto c = derive_constants(spec, m);
    const double z = 0.8, t = 1.5;
    const auto f = estimate_f(m, c, z, t, quick(10000, 91));
    CHECK(std::abs(f.value - gaussian_f_oracle(c, z, t)) < 4.0 * f.std_error);
    const auto fz = estimate_f_z(m, c, z, t, quick(10000, 92));
    CHECK(std::abs(fz.value - gaussian_fz_oracle(c, z, t)) < 4.0 * fz.std_error);
}

TEST_CASE("tower property of the remainder function") {
    const auto spec = default_market();
    const auto m = model(ModelKind::ThreeHalves);
    const auto c = derive_constants(spec, m);
    SimConfig cfg = quick(3000, 13);
    const auto chk = martingale_f_check(m, c, 1.0, 0.5, 1.5, cfg, 400);
    CHECK(std::abs(chk.lhs - chk.rhs) < 4.0 * chk.se);
}

TEST_CASE("representation plumbing exposes the right measures and functionals") {
    CHECK(resolve_fz_representation(ModelKind::ThreeHalves, FzRepresentation::Auto) ==
          FzRepresentation::DoublyTilted);
    CHECK(resolve_fz_representation(ModelKind::InverseBessel, FzRepresentation::Auto) ==
          FzRepresentation::DoublyTilted);
    CHECK(resolve_fz_representation(ModelKind::FilteredOU, FzRepresentation::Auto) ==
          FzRepresentation::Tilted);
    CHECK(fz_measure(ModelKind::ThreeHalves, FzRepresentation::DoublyTilted) == MeasureTag::PHat);
    CHECK(fz_measure(ModelKind::ThreeHalves, FzRepresentation::Tilted) == MeasureTag::PTilde);
    CHECK(fz_measure(ModelKind::FilteredOU, FzRepresentation::Auto) == MeasureTag::PTilde);
}
