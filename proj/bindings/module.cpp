#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fundsep/config.hpp"
#include "fundsep/constants.hpp"
#include "fundsep/feynman_kac.hpp"
#include "fundsep/kalman.hpp"
#include "fundsep/portfolio.hpp"
#include "fundsep/rates.hpp"
#include "fundsep/sensitivity.hpp"
#include "fundsep/simulate.hpp"

namespace py = pybind11;
using namespace fundsep;

namespace {

StateModelSpec make_model(const std::string& kind, double b, double a, double sigma) {
    StateModelSpec m;
    m.kind = model_kind_from_string(kind);
    m.b = b;
    m.a = a;
    m.sigma = sigma;
    return m;
}

py::dict constants_dict(const DerivedConstants& c) {
    py::dict d;
    d["q"] = c.q;
    d["delta"] = c.delta;
    d["theta"] = c.theta;
    d["eta"] = c.eta;
    d["xi"] = c.xi;
    d["zeta"] = c.zeta;
    d["lambda"] = c.lambda;
    d["lambda_hat"] = c.lambda_hat;
    d["p0"] = c.P0;
    d["pot_const"] = c.pot_const;
    d["pot_slope"] = c.pot_slope;
    d["assumption_ok"] = c.assumption_ok;
    d["assumption_msg"] = c.assumption_msg;
    if (c.theta_vec.size() > 0) d["theta_vec"] = Vec(c.theta_vec);
    return d;
}

py::dict estimate_dict(const McEstimate& e) {
    py::dict d;
    d["value"] = e.value;
    d["std_error"] = e.std_error;
    d["n_paths"] = e.n_paths;
    d["rng_checksum"] = e.rng_checksum;
    return d;
}

SimConfig make_cfg(double dt, double horizon, std::size_t n_paths, std::uint64_t seed,
                   bool antithetic) {
    SimConfig cfg;
    cfg.dt = dt;
    cfg.horizon = horizon;
    cfg.n_paths = n_paths;
    cfg.seed = seed;
    cfg.antithetic = antithetic;
    return cfg;
}

} // namespace

PYBIND11_MODULE(_fundsep, m) {
    m.doc() = "long-horizon optimal investment toolkit";

    py::class_<PreferenceMarketSpec>(m, "MarketSpec")
        .def(py::init([](double p, double r, const Vec& mu, const Mat& sigma, const Vec& rho) {
                 PreferenceMarketSpec s;
                 s.p = p;
                 s.r = r;
                 s.mu = mu;
                 s.sigma = sigma;
                 s.rho = rho;
                 validate(s);
                 return s;
             }),
             py::arg("p"), py::arg("r"), py::arg("mu"), py::arg("sigma"), py::arg("rho"))
        .def_readonly("p", &PreferenceMarketSpec::p)
        .def_readonly("r", &PreferenceMarketSpec::r)
        .def_readonly("mu", &PreferenceMarketSpec::mu)
        .def_readonly("sigma", &PreferenceMarketSpec::sigma)
        .def_readonly("rho", &PreferenceMarketSpec::rho);

    py::class_<StateModelSpec>(m, "StateModel")
        .def(py::init(&make_model), py::arg("kind"), py::arg("b"), py::arg("a"), py::arg("sigma"))
        .def_readonly("b", &StateModelSpec::b)
        .def_readonly("a", &StateModelSpec::a)
        .def_readonly("sigma", &StateModelSpec::sigma)
        .def_property_readonly("kind",
                               [](const StateModelSpec& s) { return to_string(s.kind); });

    m.def("default_market", [] { return default_config(ModelKind::ThreeHalves).market; });
    m.def(
        "default_model",
        [](const std::string& kind) { return default_config(model_kind_from_string(kind)).model; },
        py::arg("kind"));

    m.def(
        "derive_constants",
        [](const PreferenceMarketSpec& spec, const StateModelSpec& model) {
            return constants_dict(derive_constants(spec, model));
        },
        py::arg("market"), py::arg("model"));

    m.def(
        "eigen_residual",
        [](const PreferenceMarketSpec& spec, const StateModelSpec& model,
           const std::vector<double>& grid) {
            return eigen_residual(model, derive_constants(spec, model), grid);
        },
        py::arg("market"), py::arg("model"), py::arg("grid"));

    m.def(
        "steady_state_variance",
        [](const PreferenceMarketSpec& spec, const StateModelSpec& model) {
            return steady_state_variance(spec, model);
        },
        py::arg("market"), py::arg("model"));

    const auto with_consts = [](const PreferenceMarketSpec& spec, const StateModelSpec& model) {
        DerivedConstants c = derive_constants(spec, model);
        if (!c.assumption_ok) throw AssumptionViolated(c.assumption_msg);
        return c;
    };

    m.def(
        "estimate_u",
        [with_consts](const PreferenceMarketSpec& spec, const StateModelSpec& model, double z,
                      double t, double dt, std::size_t paths, std::uint64_t seed) {
            return estimate_dict(
                estimate_u(model, with_consts(spec, model), z, t, make_cfg(dt, t, paths, seed, true)));
        },
        py::arg("market"), py::arg("model"), py::arg("z"), py::arg("t"), py::arg("dt") = 1e-3,
        py::arg("paths") = 10000, py::arg("seed") = 1);

    m.def(
        "estimate_f",
        [with_consts](const PreferenceMarketSpec& spec, const StateModelSpec& model, double z,
                      double t, double dt, std::size_t paths, std::uint64_t seed) {
            return estimate_dict(
                estimate_f(model, with_consts(spec, model), z, t, make_cfg(dt, t, paths, seed, true)));
        },
        py::arg("market"), py::arg("model"), py::arg("z"), py::arg("t"), py::arg("dt") = 1e-3,
        py::arg("paths") = 10000, py::arg("seed") = 1);

    m.def(
        "estimate_f_z",
        [with_consts](const PreferenceMarketSpec& spec, const StateModelSpec& model, double z,
                      double t, double dt, std::size_t paths, std::uint64_t seed) {
            return estimate_dict(estimate_f_z(model, with_consts(spec, model), z, t,
                                              make_cfg(dt, t, paths, seed, true)));
        },
        py::arg("market"), py::arg("model"), py::arg("z"), py::arg("t"), py::arg("dt") = 1e-3,
        py::arg("paths") = 10000, py::arg("seed") = 1);

    m.def(
        "gaussian_f_oracle",
        [with_consts](const PreferenceMarketSpec& spec, const StateModelSpec& model, double z,
                      double t) { return gaussian_f_oracle(with_consts(spec, model), z, t); },
        py::arg("market"), py::arg("model"), py::arg("z"), py::arg("t"));

    m.def("moment_32", &moment_32, py::arg("b"), py::arg("a"), py::arg("sigma"), py::arg("y0"),
          py::arg("nu"), py::arg("t"));

    m.def(
        "static_portfolio",
        [with_consts](const PreferenceMarketSpec& spec, const StateModelSpec& model, double z) {
            return Vec(static_portfolio(spec, model, with_consts(spec, model), z));
        },
        py::arg("market"), py::arg("model"), py::arg("z"));

    m.def(
        "dynamic_portfolio",
        [with_consts](const PreferenceMarketSpec& spec, const StateModelSpec& model, double z,
                      double t, double T, double dt, std::size_t paths, std::uint64_t seed) {
            const PortfolioDecomposition dec = dynamic_portfolio(
                spec, model, with_consts(spec, model), z, t, T, make_cfg(dt, T, paths, seed, true));
            py::dict d;
            d["myopic"] = Vec(dec.myopic);
            d["hedge_static"] = Vec(dec.hedge_static);
            d["intertemporal"] = Vec(dec.intertemporal);
            d["total"] = Vec(dec.total);
            d["fz_over_f"] = dec.fz_over_f;
            d["fz_over_f_se"] = dec.fz_over_f_se;
            d["safe_weight"] = dec.safe_weight;
            return d;
        },
        py::arg("market"), py::arg("model"), py::arg("z"), py::arg("t"), py::arg("T"),
        py::arg("dt") = 1e-3, py::arg("paths") = 10000, py::arg("seed") = 1);

    m.def(
        "fit_decay_rate",
        [with_consts](const PreferenceMarketSpec& spec, const StateModelSpec& model, double z,
                      const std::vector<double>& t_grid, double dt, std::size_t paths,
                      std::uint64_t seed, double burn_in) {
            const RateFit fit = fit_decay_rate(model, with_consts(spec, model), z, t_grid,
                                               make_cfg(dt, 1.0, paths, seed, true), burn_in);
            py::dict d;
            d["slope"] = fit.slope;
            d["intercept"] = fit.intercept;
            d["r_squared"] = fit.r_squared;
            d["analytic_rate"] = fit.analytic_rate;
            d["rel_error"] = fit.rel_error;
            d["t_grid"] = fit.t_grid;
            d["log_ratio"] = fit.log_ratio;
            return d;
        },
        py::arg("market"), py::arg("model"), py::arg("z"), py::arg("t_grid"), py::arg("dt") = 1e-3,
        py::arg("paths") = 10000, py::arg("seed") = 1, py::arg("burn_in") = -1.0);

    m.def(
        "static_sensitivity",
        [with_consts](const PreferenceMarketSpec& spec, const StateModelSpec& model, double z,
                      const std::string& par) {
            return Vec(static_sensitivity(spec, model, with_consts(spec, model), z,
                                          parameter_from_string(par)));
        },
        py::arg("market"), py::arg("model"), py::arg("z"), py::arg("parameter"));

    m.def(
        "girsanov_mean",
        [with_consts](const PreferenceMarketSpec& spec, const StateModelSpec& model, double z,
                      double t, double dt, std::size_t paths, std::uint64_t seed) {
            const DerivedConstants c = with_consts(spec, model);
            const PathBatch batch = simulate(model, c, MeasureTag::P, z,
                                             make_cfg(dt, t, paths, seed, true), {Functional::IntV});
            return estimate_dict(
                reduce_mc(batch, girsanov_weights(model, c, MeasureTag::PTilde, batch)));
        },
        py::arg("market"), py::arg("model"), py::arg("z"), py::arg("t"), py::arg("dt") = 1e-3,
        py::arg("paths") = 10000, py::arg("seed") = 1);

    m.def(
        "run_filter",
        [](const PreferenceMarketSpec& spec, const StateModelSpec& model,
           const std::vector<double>& times, const Mat& prices, double y0_hat) {
            PriceSeries series;
            series.times = times;
            series.prices = prices;
            const double P0 = steady_state_variance(spec, model);
            const FilterResult fr = run_filter(spec, model, P0, series, y0_hat);
            py::dict d;
            d["times"] = fr.times;
            d["y_hat"] = fr.y_hat;
            d["gain"] = Vec(fr.gain);
            d["p0"] = fr.P0;
            return d;
        },
        py::arg("market"), py::arg("model"), py::arg("times"), py::arg("prices"),
        py::arg("y0_hat") = std::numeric_limits<double>::quiet_NaN());

    m.def(
        "simulate_filter_experiment",
        [](const PreferenceMarketSpec& spec, const StateModelSpec& model, double horizon,
           double dt, std::uint64_t seed) {
            SimConfig cfg = make_cfg(dt, horizon, 1, seed, false);
            const JointSample joint = simulate_joint(spec, model, cfg);
            const double P0 = steady_state_variance(spec, model);
            const FilterResult fr = run_filter(spec, model, P0, joint.prices);
            py::dict d;
            d["p0"] = P0;
            d["mse"] = filter_mse(joint, fr);
            d["riccati_residual"] = riccati_residual(spec, model, P0);
            return d;
        },
        py::arg("market"), py::arg("model"), py::arg("horizon"), py::arg("dt") = 1e-3,
        py::arg("seed") = 1);

    // translators run newest-first, so the base class goes in first
    py::register_exception<Error>(m, "FundsepError");
    py::register_exception<ParseError>(m, "FundsepParseError");
    py::register_exception<AssumptionViolated>(m, "AssumptionViolated");
}
