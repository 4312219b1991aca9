#include <cmath>

#include "doctest.h"
#include "fundsep/constants.hpp"
#include "fundsep/portfolio.hpp"

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

} // namespace

TEST_CASE("transposed-solve helper actually solves Sigma' x = v") {
    const auto spec = default_market();
    Vec v(2);
    v << 0.37, -1.2;
    const Vec x = solve_sigma_t(spec, v);
    const Vec back = spec.sigma.transpose() * x;
    CHECK((back - v).norm() < 1e-13);
}

TEST_CASE("fund tables: counts and static membership") {
    // dynamic funds include the intertemporal one; the static portfolio drops it
    auto count = [](ModelKind k) {
        const auto funds = fund_table(model(k));
        int total = static_cast<int>(funds.size());
        int stat = 0;
        for (const auto& f : funds) stat += f.in_static ? 1 : 0;
        return std::pair<int, int>(total, stat);
    };
    CHECK(count(ModelKind::ThreeHalves) == std::pair<int, int>(4, 3));
    CHECK(count(ModelKind::InverseBessel) == std::pair<int, int>(5, 4));
    CHECK(count(ModelKind::FilteredOU) == std::pair<int, int>(5, 4));
}

TEST_CASE("static portfolio assembles myopic plus hedges") {
    const auto spec = default_market();
    for (ModelKind k : {ModelKind::ThreeHalves, ModelKind::InverseBessel, ModelKind::FilteredOU}) {
        const auto m = model(k);
        const auto c = derive_constants(spec, m);
        const double z = 1.4;
        const auto p = portfolio_pieces(spec, m, c, z);
        const Vec stat = static_portfolio(spec, m, c, z);
        CHECK((stat - (p.myopic + p.hedge)).norm() < 1e-15);
        // the hedge is the intertemporal direction times h_scale * dlog_phi
        CHECK((p.hedge - p.inter_dir * (p.h_scale * p.dlog_phi)).norm() < 1e-14);
    }
}

TEST_CASE("myopic component written out by hand") {
    const auto spec = default_market();
    const auto m = model(ModelKind::ThreeHalves);
    const auto c = derive_constants(spec, m);
    const auto p = portfolio_pieces(spec, m, c, 2.0);
    const Vec expect = solve_sigma_t(spec, spec.mu) / (1.0 - spec.p);
    CHECK((p.myopic - expect).norm() < 1e-14);

    // filtered OU myopic scales linearly with the state
    const auto mf = model(ModelKind::FilteredOU);
    const auto cf = derive_constants(spec, mf);
    const auto p1 = portfolio_pieces(spec, mf, cf, 1.0);
    const auto p3 = portfolio_pieces(spec, mf, cf, 3.0);
    CHECK((p3.myopic - 3.0 * p1.myopic).norm() < 1e-14);
}

TEST_CASE("no time left to invest means the myopic portfolio exactly") {
    const auto spec = default_market();
    for (ModelKind k : {ModelKind::ThreeHalves, ModelKind::InverseBessel, ModelKind::FilteredOU}) {
        const auto m = model(k);
        const auto c = derive_constants(spec, m);
        SimConfig cfg;
        cfg.n_paths = 16; // unused at t = T
        const auto dec = dynamic_portfolio(spec, m, c, 1.2, 2.0, 2.0, cfg);
        CHECK(dec.fz_over_f_se == 0.0);
        CHECK((dec.total - dec.myopic).norm() < 1e-13);
        CHECK((dec.total - dec.total_via_uz).norm() < 1e-13);
        CHECK(dec.safe_weight == doctest::Approx(1.0 - dec.myopic.sum()).epsilon(1e-12));
    }
}

TEST_CASE("mid-horizon decomposition is internally consistent") {
    const auto spec = default_market();
    const auto m = model(ModelKind::InverseBessel);
    const auto c = derive_constants(spec, m);
    SimConfig cfg;
    cfg.n_paths = 4000;
    cfg.seed = 77;
    const auto dec = dynamic_portfolio(spec, m, c, 1.0, 0.0, 2.0, cfg);
    CHECK(dec.fz_over_f_se > 0.0);
    CHECK((dec.total - (dec.myopic + dec.hedge_static + dec.intertemporal)).norm() < 1e-14);
    // u_z/u route is the same algebra rearranged
    CHECK((dec.total - dec.total_via_uz).norm() < 1e-12);
    CHECK(dec.safe_weight == doctest::Approx(1.0 - dec.total.sum()).epsilon(1e-12));
}

TEST_CASE("sqrt-z market layer rescaling (3/2 only)") {
    const auto spec = default_market();
    const auto m = model(ModelKind::ThreeHalves);
    const auto c = derive_constants(spec, m);
    const double z = 1.7;
    const Vec plain = static_portfolio(spec, m, c, z, MyopicScaling::Standard);
    const Vec scaled = static_portfolio(spec, m, c, z, MyopicScaling::SqrtZ);
    CHECK((scaled - std::sqrt(z) * plain).norm() < 1e-14);

    const auto mi = model(ModelKind::InverseBessel);
    const auto ci = derive_constants(spec, mi);
    CHECK_THROWS_AS(static_portfolio(spec, mi, ci, z, MyopicScaling::SqrtZ), ConfigError);
}

TEST_CASE("violated assumptions propagate to the portfolio layer") {
    auto spec = default_market();
    spec.mu << 0.9, 0.1;
    spec.rho << -0.9, -0.1;
    auto m = model(ModelKind::ThreeHalves);
    m.a = 0.01;
    m.sigma = 0.1;
    const auto c = derive_constants(spec, m);
    REQUIRE_FALSE(c.assumption_ok);
    CHECK_THROWS_AS(static_portfolio(spec, m, c, 1.0), AssumptionViolated);
    SimConfig cfg;
    CHECK_THROWS_AS(dynamic_portfolio(spec, m, c, 1.0, 0.0, 1.0, cfg), AssumptionViolated);
}

TEST_CASE("bad time arguments are rejected") {
    const auto spec = default_market();
    const auto m = model(ModelKind::ThreeHalves);
    const auto c = derive_constants(spec, m);
    SimConfig cfg;
    CHECK_THROWS_AS(dynamic_portfolio(spec, m, c, 1.0, 2.0, 1.0, cfg), ParameterOutOfRange);
    CHECK_THROWS_AS(dynamic_portfolio(spec, m, c, 1.0, -0.5, 1.0, cfg), ParameterOutOfRange);
}
