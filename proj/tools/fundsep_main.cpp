#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fundsep/config.hpp"
#include "fundsep/constants.hpp"
#include "fundsep/csvio.hpp"
#include "fundsep/density.hpp"
#include "fundsep/feynman_kac.hpp"
#include "fundsep/kalman.hpp"
#include "fundsep/portfolio.hpp"
#include "fundsep/rates.hpp"
#include "fundsep/sensitivity.hpp"
#include "fundsep/simulate.hpp"

namespace {

using namespace fundsep;

struct GlobalOpts {
    std::string config_path;
    std::string model_name;
    std::string out_dir = "out";
    bool check = false;
    bool expensive = false;
    bool have_seed = false;
    std::uint64_t seed = 0;
    bool have_paths = false;
    std::uint64_t paths = 0;
    bool have_dt = false;
    double dt = 0.0;
};

RunConfig resolve_config(const GlobalOpts& g) {
    RunConfig cfg;
    if (!g.config_path.empty()) {
        cfg = load_config(g.config_path);
        if (!g.model_name.empty() && model_kind_from_string(g.model_name) != cfg.model.kind)
            throw ConfigError("--model contradicts the model kind in " + g.config_path);
    } else {
        cfg = default_config(g.model_name.empty() ? ModelKind::ThreeHalves
                                                  : model_kind_from_string(g.model_name));
    }
    if (g.have_seed) cfg.sim.seed = g.seed;
    if (g.have_paths) cfg.sim.n_paths = static_cast<std::size_t>(g.paths);
    if (g.have_dt) cfg.sim.dt = g.dt;
    return cfg;
}

// 50-point evaluation grid for residual checks: strictly positive states for
// the scalar models, a symmetric window for the filtered (Gaussian) one
std::vector<double> residual_grid(ModelKind kind) {
    std::vector<double> g;
    g.reserve(50);
    if (kind == ModelKind::FilteredOU) {
        for (int i = 0; i < 50; ++i) g.push_back(-3.0 + 6.0 * i / 49.0);
    } else {
        for (int i = 0; i < 50; ++i) g.push_back(0.2 * std::pow(25.0, i / 49.0));
    }
    return g;
}

std::string join_args(int argc, char** argv) {
    std::string s;
    for (int i = 0; i < argc; ++i) {
        if (i) s += ' ';
        s += argv[i];
    }
    return s;
}

// write or --check the queued files; returns the process exit code
int emit(const GlobalOpts& g, const RunConfig& cfg, const std::string& command,
         const std::vector<OutputFile>& files) {
    if (g.check) {
        const std::vector<std::string> bad = check_outputs(g.out_dir, files);
        if (!bad.empty()) {
            for (const std::string& name : bad)
                std::cerr << "check failed: " << name << "\n";
            return 3;
        }
        std::cout << "check ok: " << files.size() << " file(s) match\n";
        return 0;
    }
    const RunManifest manifest =
        build_manifest(canonical_config(cfg), cfg.sim.seed, command, files);
    write_outputs(g.out_dir, files, manifest);
    return 0;
}

Csv constants_csv(const StateModelSpec& model, const DerivedConstants& c, double resid) {
    Csv csv({"kind", "q", "delta", "theta", "eta", "xi", "zeta", "lambda", "lambda_hat", "p0",
             "pot_const", "pot_slope", "assumption_ok", "eigen_residual"});
    csv.add_row({to_string(model.kind), format_double(c.q), format_double(c.delta),
                 format_double(c.theta), format_double(c.eta), format_double(c.xi),
                 format_double(c.zeta), format_double(c.lambda), format_double(c.lambda_hat),
                 format_double(c.P0), format_double(c.pot_const), format_double(c.pot_slope),
                 c.assumption_ok ? "1" : "0", format_double(resid)});
    return csv;
}

void print_constants(const StateModelSpec& model, const DerivedConstants& c, double resid) {
    std::printf("model       %s\n", to_string(model.kind).c_str());
    std::printf("q           %s\n", format_double(c.q).c_str());
    std::printf("delta       %s\n", format_double(c.delta).c_str());
    std::printf("theta       %s\n", format_double(c.theta).c_str());
    if (c.theta_vec.size() > 0) {
        std::printf("theta_vec  ");
        for (Eigen::Index i = 0; i < c.theta_vec.size(); ++i)
            std::printf(" %s", format_double(c.theta_vec[i]).c_str());
        std::printf("\n");
        std::printf("P0          %s\n", format_double(c.P0).c_str());
    }
    std::printf("eta         %s\n", format_double(c.eta).c_str());
    std::printf("xi          %s\n", format_double(c.xi).c_str());
    std::printf("lambda      %s\n", format_double(c.lambda).c_str());
    std::printf("lambda_hat  %s\n", format_double(c.lambda_hat).c_str());
    std::printf("eigen_resid %s\n", format_double(resid).c_str());
    std::printf("assumptions %s\n", c.assumption_ok ? "ok" : c.assumption_msg.c_str());
}

int cmd_derive(const GlobalOpts& g, const std::string& command) {
    const RunConfig cfg = resolve_config(g);
    const DerivedConstants c = derive_constants(cfg.market, cfg.model);
    double resid = std::numeric_limits<double>::quiet_NaN();
    if (c.assumption_ok) resid = eigen_residual(cfg.model, c, residual_grid(cfg.model.kind));
    print_constants(cfg.model, c, resid);
    const int rc = emit(g, cfg, command, {{"constants.csv", constants_csv(cfg.model, c, resid).str()}});
    if (rc != 0) return rc;
    if (!c.assumption_ok) {
        std::cerr << "assumption violated: " << c.assumption_msg << "\n";
        return 2;
    }
    return 0;
}

int cmd_portfolio(const GlobalOpts& g, const std::string& command) {
    const RunConfig cfg = resolve_config(g);
    const DerivedConstants c = derive_constants(cfg.market, cfg.model);
    const ExperimentConfig& ex = cfg.experiment;

    Csv funds({"fund", "weight", "in_static"});
    for (const FundInfo& f : fund_table(cfg.model))
        funds.add_row({f.name, f.weight_desc, f.in_static ? "1" : "0"});

    Csv csv({"component", "asset", "value"});
    const auto add_vec = [&](const std::string& name, const Vec& v) {
        for (Eigen::Index i = 0; i < v.size(); ++i)
            csv.add_row({name, std::to_string(i + 1), format_double(v[i])});
    };
    if (ex.static_only) {
        const Vec pi = static_portfolio(cfg.market, cfg.model, c, ex.z);
        const PortfolioPieces pieces = portfolio_pieces(cfg.market, cfg.model, c, ex.z);
        add_vec("myopic", pieces.myopic);
        add_vec("hedge_static", pieces.hedge);
        add_vec("total", pi);
        csv.add_row({"safe", "", format_double(1.0 - pi.sum())});
        std::printf("static portfolio at z=%s: safe %s\n", format_double(ex.z).c_str(),
                    format_double(1.0 - pi.sum()).c_str());
    } else {
        const PortfolioDecomposition dec =
            dynamic_portfolio(cfg.market, cfg.model, c, ex.z, ex.t, ex.horizon, cfg.sim);
        add_vec("myopic", dec.myopic);
        add_vec("hedge_static", dec.hedge_static);
        add_vec("intertemporal", dec.intertemporal);
        add_vec("total", dec.total);
        csv.add_row({"safe", "", format_double(dec.safe_weight)});
        csv.add_row({"fz_over_f", "", format_double(dec.fz_over_f)});
        csv.add_row({"fz_over_f_se", "", format_double(dec.fz_over_f_se)});
        std::printf("dynamic portfolio at z=%s, t=%s, T=%s: fz/f %s (se %s)\n",
                    format_double(ex.z).c_str(), format_double(ex.t).c_str(),
                    format_double(ex.horizon).c_str(), format_double(dec.fz_over_f).c_str(),
                    format_double(dec.fz_over_f_se).c_str());
    }
    return emit(g, cfg, command,
                {{"portfolio.csv", csv.str()}, {"funds.csv", funds.str()}});
}

int cmd_simulate(const GlobalOpts& g, const std::string& command) {
    const RunConfig cfg = resolve_config(g);
    const DerivedConstants c = derive_constants(cfg.market, cfg.model);
    const Functional fint =
        cfg.model.kind == ModelKind::ThreeHalves ? Functional::IntZ : Functional::IntZ2;
    const PathBatch batch =
        simulate(cfg.model, c, MeasureTag::P, cfg.experiment.z, cfg.sim, {fint});
    const McEstimate zt = reduce_mc(batch, batch.terminal_states());
    const McEstimate iz = reduce_mc(batch, batch.functional(fint));

    Csv csv({"n_paths", "n_steps", "mean_terminal", "se_terminal", "mean_int", "se_int",
             "clamp_count", "rng_checksum"});
    csv.add_row({std::to_string(batch.n_paths()), std::to_string(batch.total_steps),
                 format_double(zt.value), format_double(zt.std_error), format_double(iz.value),
                 format_double(iz.std_error), std::to_string(batch.clamp_count),
                 hex64(batch.rng_checksum)});
    std::printf("terminal mean %s (se %s), checksum %s\n", format_double(zt.value).c_str(),
                format_double(zt.std_error).c_str(), hex64(batch.rng_checksum).c_str());
    return emit(g, cfg, command, {{"simulate.csv", csv.str()}});
}

int cmd_verify_hs(const GlobalOpts& g, const std::string& command) {
    const RunConfig cfg = resolve_config(g);
    const DerivedConstants c = derive_constants(cfg.market, cfg.model);
    if (!c.assumption_ok) throw AssumptionViolated(c.assumption_msg);
    const double z = cfg.experiment.z;

    Csv csv({"check", "value", "reference", "tolerance", "pass"});
    bool all_ok = true;
    const auto record = [&](const std::string& name, double value, double reference,
                            double tol) {
        const bool ok = std::abs(value - reference) <= tol;
        all_ok = all_ok && ok;
        csv.add_row({name, format_double(value), format_double(reference), format_double(tol),
                     ok ? "1" : "0"});
        std::printf("%-24s %-14s ref %-14s tol %-12s %s\n", name.c_str(),
                    format_double(value).c_str(), format_double(reference).c_str(),
                    format_double(tol).c_str(), ok ? "pass" : "FAIL");
    };

    // exact eigenfunction: generator residual on the standard grid
    const Eigenpair pair = eigenpair(cfg.model, c);
    record("eigen_residual", eigen_residual(cfg.model, c, residual_grid(cfg.model.kind)), 0.0,
           1e-10);

    // decomposition identity u = e^{-lambda t} phi f at t = 1
    {
        const double t = 1.0;
        SimConfig cu = cfg.sim;
        const McEstimate u = estimate_u(cfg.model, c, z, t, cu);
        SimConfig cf = cfg.sim;
        cf.seed = cfg.sim.seed + 7777;
        const McEstimate f = estimate_f(cfg.model, c, z, t, cf);
        const double scale = std::exp(-c.lambda * t) * pair.phi(z);
        const double se = 3.0 * std::hypot(u.std_error, scale * f.std_error);
        record("hs_identity_t1", u.value, scale * f.value, se);
    }

    // change-of-measure martingale mean at t = 1
    {
        SimConfig cw = cfg.sim;
        cw.horizon = 1.0;
        cw.seed = cfg.sim.seed + 555;
        const PathBatch batch =
            simulate(cfg.model, c, MeasureTag::P, z, cw, {Functional::IntV});
        const McEstimate m = reduce_mc(batch, girsanov_weights(cfg.model, c, MeasureTag::PTilde, batch));
        record("martingale_mean_t1", m.value, 1.0, 3.0 * m.std_error);
    }

    if (cfg.model.kind == ModelKind::ThreeHalves) {
        // transition moment quadrature vs direct Monte Carlo; under the base
        // sampling measure the state is a 3/2 process with reversion theta
        const double nu = 0.5, t = 0.5;
        SimConfig cm = cfg.sim;
        cm.horizon = t;
        cm.seed = cfg.sim.seed + 999;
        const PathBatch batch = simulate(cfg.model, c, MeasureTag::P, z, cm, {});
        std::vector<double> vals(batch.n_paths());
        const std::vector<double>& zt = batch.terminal_states();
        for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = std::pow(zt[i], nu);
        const McEstimate mc = reduce_mc(batch, vals);
        record("moment_quadrature", moment_32(cfg.model.b, c.theta, cfg.model.sigma, z, nu, t),
               mc.value, 3.0 * mc.std_error);

        SimConfig cf = cfg.sim;
        cf.seed = cfg.sim.seed + 1234;
        const McEstimate f = estimate_f(cfg.model, c, z, 1.0, cf);
        record("f_quadrature", f_quadrature_32(c, z, 1.0), f.value, 3.0 * f.std_error);
    }

    if (cfg.model.kind == ModelKind::FilteredOU) {
        SimConfig cf = cfg.sim;
        cf.seed = cfg.sim.seed + 1234;
        const McEstimate f = estimate_f(cfg.model, c, z, 1.0, cf);
        record("gaussian_oracle", gaussian_f_oracle(c, z, 1.0), f.value, 3.0 * f.std_error);
    }

    // tilted invariant density integrates to one
    {
        const InvariantDensity d = invariant_density(cfg.model, c, MeasureTag::PTilde);
        const double mass = density_moment(d, [](double) { return 1.0; });
        record("invariant_mass", mass, 1.0, 1e-7);
    }

    const int rc = emit(g, cfg, command, {{"verify.csv", csv.str()}});
    if (rc != 0) return rc;
    if (!all_ok) {
        std::cerr << "verification failed\n";
        return 3;
    }
    return 0;
}

int cmd_rate(const GlobalOpts& g, const std::string& command) {
    RunConfig cfg = resolve_config(g);
    if (g.expensive) cfg.sim.n_paths *= 10;
    const DerivedConstants c = derive_constants(cfg.market, cfg.model);
    std::vector<double> grid = cfg.experiment.t_grid;
    if (grid.empty()) grid = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
    const RateFit fit =
        fit_decay_rate(cfg.model, c, cfg.experiment.z, grid, cfg.sim, cfg.experiment.burn_in);

    Csv pts({"t", "log_abs_fz_over_f", "se"});
    for (std::size_t i = 0; i < fit.t_grid.size(); ++i)
        pts.add_row({format_double(fit.t_grid[i]), format_double(fit.log_ratio[i]),
                     format_double(fit.ratio_se[i])});
    Csv fitcsv({"slope", "intercept", "r_squared", "fitted_rate", "analytic_rate", "rel_error"});
    fitcsv.add_row({format_double(fit.slope), format_double(fit.intercept),
                    format_double(fit.r_squared), format_double(-fit.slope),
                    format_double(fit.analytic_rate), format_double(fit.rel_error)});
    std::printf("fitted rate %s vs analytic %s (rel error %s, r^2 %s)\n",
                format_double(-fit.slope).c_str(), format_double(fit.analytic_rate).c_str(),
                format_double(fit.rel_error).c_str(), format_double(fit.r_squared).c_str());
    return emit(g, cfg, command,
                {{"rate_points.csv", pts.str()}, {"rate_fit.csv", fitcsv.str()}});
}

int cmd_sens(const GlobalOpts& g, const std::string& command) {
    RunConfig cfg = resolve_config(g);
    if (g.expensive) cfg.sim.n_paths *= 10;
    const DerivedConstants c = derive_constants(cfg.market, cfg.model);
    const Parameter par = parameter_from_string(cfg.experiment.parameter);
    std::vector<double> grid = cfg.experiment.t_grid;
    if (grid.empty())
        grid = {2.0 / c.lambda_hat, 3.0 / c.lambda_hat, 4.0 / c.lambda_hat, 5.0 / c.lambda_hat,
                6.0 / c.lambda_hat};
    const SensitivityReport rep =
        sensitivity_report(cfg.market, cfg.model, c, cfg.experiment.z, grid, par, cfg.sim);

    Csv gap({"T", "gap_norm"});
    for (std::size_t i = 0; i < rep.T_grid.size(); ++i)
        gap.add_row({format_double(rep.T_grid[i]), format_double(rep.gap_norm[i])});
    Csv dyn({"T", "asset", "dynamic", "se", "static"});
    for (std::size_t i = 0; i < rep.T_grid.size(); ++i)
        for (Eigen::Index j = 0; j < rep.dynamic_sens[i].size(); ++j)
            dyn.add_row({format_double(rep.T_grid[i]), std::to_string(j + 1),
                         format_double(rep.dynamic_sens[i][j]), format_double(rep.dynamic_se[i][j]),
                         format_double(rep.static_sens[j])});
    Csv fitcsv({"C", "degree", "rate", "residual", "expected_rate"});
    fitcsv.add_row({format_double(rep.envelope.C), format_double(rep.envelope.degree),
                    format_double(rep.envelope.rate), format_double(rep.envelope.residual),
                    format_double(rep.expected_rate)});
    std::printf("parameter %s: fitted gap rate %s vs expected %s (degree %s)\n",
                to_string(par).c_str(), format_double(rep.envelope.rate).c_str(),
                format_double(rep.expected_rate).c_str(),
                format_double(rep.envelope.degree).c_str());
    return emit(g, cfg, command,
                {{"sens_gap.csv", gap.str()},
                 {"sens_dynamic.csv", dyn.str()},
                 {"sens_fit.csv", fitcsv.str()}});
}

int cmd_filter(const GlobalOpts& g, const std::string& command, const std::string& prices_path) {
    RunConfig cfg = resolve_config(g);
    if (cfg.model.kind != ModelKind::FilteredOU && g.config_path.empty() && g.model_name.empty())
        cfg = default_config(ModelKind::FilteredOU);
    if (cfg.model.kind != ModelKind::FilteredOU)
        throw ConfigError("the filter applies to the filtered OU model");
    const double P0 = steady_state_variance(cfg.market, cfg.model);
    const Vec gain = filter_gain(cfg.market, cfg.model, P0);
    const double resid = riccati_residual(cfg.market, cfg.model, P0);

    std::vector<OutputFile> files;
    std::vector<std::string> header = {"time", "y_hat"};
    double mse = std::numeric_limits<double>::quiet_NaN();
    if (!prices_path.empty()) {
        const PriceSeries prices = ingest_prices(prices_path);
        const FilterResult fr =
            run_filter(cfg.market, cfg.model, P0, prices, cfg.experiment.y0_hat);
        for (std::size_t j = 1; j <= prices.n_assets(); ++j)
            header.push_back("innov_" + std::to_string(j));
        Csv csv(header);
        for (std::size_t k = 0; k < fr.times.size(); ++k) {
            std::vector<std::string> row = {format_double(fr.times[k]),
                                            format_double(fr.y_hat[k])};
            for (std::size_t j = 0; j < prices.n_assets(); ++j)
                row.push_back(k == 0 ? "" : format_double(fr.innovations(j, k - 1)));
            csv.add_row(row);
        }
        files.push_back({"filter.csv", csv.str()});
        std::printf("filtered %zu observations, P0 %s\n", fr.times.size(),
                    format_double(P0).c_str());
    } else {
        const JointSample joint = simulate_joint(cfg.market, cfg.model, cfg.sim,
                                                 cfg.experiment.y0_hat);
        const FilterResult fr =
            run_filter(cfg.market, cfg.model, P0, joint.prices, cfg.experiment.y0_hat);
        mse = filter_mse(joint, fr);
        header.insert(header.begin() + 1, "y_true");
        Csv csv(header);
        const std::size_t stride =
            std::max<std::size_t>(1, (fr.times.size() + 4999) / 5000);
        for (std::size_t k = 0; k < fr.times.size(); k += stride)
            csv.add_row({format_double(fr.times[k]), format_double(joint.y[k]),
                         format_double(fr.y_hat[k])});
        files.push_back({"filter.csv", csv.str()});
        std::printf("synthetic filter MSE %s vs P0 %s (ratio %s)\n", format_double(mse).c_str(),
                    format_double(P0).c_str(), format_double(mse / P0).c_str());
    }

    std::vector<std::string> sum_header = {"p0", "riccati_residual", "mse"};
    for (Eigen::Index j = 0; j < gain.size(); ++j)
        sum_header.push_back("gain_" + std::to_string(j + 1));
    Csv sum(sum_header);
    std::vector<std::string> row = {format_double(P0), format_double(resid), format_double(mse)};
    for (Eigen::Index j = 0; j < gain.size(); ++j) row.push_back(format_double(gain[j]));
    sum.add_row(row);
    files.push_back({"filter_summary.csv", sum.str()});
    return emit(g, cfg, command, files);
}

int cmd_report(const GlobalOpts& g, const std::string& command) {
    const RunConfig cfg = resolve_config(g);
    const DerivedConstants c = derive_constants(cfg.market, cfg.model);
    double resid = std::numeric_limits<double>::quiet_NaN();
    if (c.assumption_ok) resid = eigen_residual(cfg.model, c, residual_grid(cfg.model.kind));
    print_constants(cfg.model, c, resid);

    Csv kv({"key", "value"});
    kv.add_row({"kind", to_string(cfg.model.kind)});
    for (const auto& [k, v] : std::vector<std::pair<std::string, double>>{
             {"q", c.q}, {"delta", c.delta}, {"theta", c.theta}, {"eta", c.eta}, {"xi", c.xi},
             {"lambda", c.lambda}, {"lambda_hat", c.lambda_hat}, {"p0", c.P0},
             {"eigen_residual", resid}})
        kv.add_row({k, format_double(v)});

    std::vector<OutputFile> files = {{"report.csv", kv.str()}};
    if (c.assumption_ok) {
        Csv pi({"component", "asset", "value"});
        const Vec stat = static_portfolio(cfg.market, cfg.model, c, cfg.experiment.z);
        for (Eigen::Index i = 0; i < stat.size(); ++i)
            pi.add_row({"static", std::to_string(i + 1), format_double(stat[i])});
        pi.add_row({"safe", "", format_double(1.0 - stat.sum())});
        files.push_back({"portfolio_static.csv", pi.str()});
    }
    const int rc = emit(g, cfg, command, files);
    if (rc != 0) return rc;
    return c.assumption_ok ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"long-horizon optimal investment toolkit"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--config", g.config_path, "configuration file");
    app.add_option("--model", g.model_name,
                   "model family when no config file is given "
                   "(three_halves|inverse_bessel|filtered_ou)");
    app.add_option("--out-dir", g.out_dir, "output directory");
    app.add_flag("--check", g.check, "compare digests against existing outputs instead of writing");
    app.add_flag("--expensive", g.expensive, "increase path budgets tenfold");
    auto* seed_opt = app.add_option("--seed", g.seed, "override the simulation seed");
    auto* paths_opt = app.add_option("--paths", g.paths, "override the path count");
    auto* dt_opt = app.add_option("--dt", g.dt, "override the time step");

    std::string prices_path;
    CLI::App* sub_derive = app.add_subcommand("derive", "derived constants and eigen residual");
    CLI::App* sub_portfolio = app.add_subcommand("portfolio", "fund decomposition at (z,t,T)");
    CLI::App* sub_simulate = app.add_subcommand("simulate", "simulate the state and report summaries");
    CLI::App* sub_verify = app.add_subcommand("verify-hs", "run the decomposition identity checks");
    CLI::App* sub_rate = app.add_subcommand("rate", "fit the intertemporal decay rate");
    CLI::App* sub_sens = app.add_subcommand("sens", "dynamic vs static sensitivity gap study");
    CLI::App* sub_filter = app.add_subcommand("filter", "steady-state filter on synthetic or CSV prices");
    sub_filter->add_option("--prices", prices_path, "price CSV (time,asset_1,...)");
    CLI::App* sub_report = app.add_subcommand("report", "constants plus static portfolio summary");

    // let global flags appear after the subcommand name
    for (CLI::App* sc : {sub_derive, sub_portfolio, sub_simulate, sub_verify, sub_rate, sub_sens,
                         sub_filter, sub_report})
        sc->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return 1;
    }

    g.have_seed = seed_opt->count() > 0;
    g.have_paths = paths_opt->count() > 0;
    g.have_dt = dt_opt->count() > 0;
    const std::string command = join_args(argc, argv);

    try {
        if (sub_derive->parsed()) return cmd_derive(g, command);
        if (sub_portfolio->parsed()) return cmd_portfolio(g, command);
        if (sub_simulate->parsed()) return cmd_simulate(g, command);
        if (sub_verify->parsed()) return cmd_verify_hs(g, command);
        if (sub_rate->parsed()) return cmd_rate(g, command);
        if (sub_sens->parsed()) return cmd_sens(g, command);
        if (sub_filter->parsed()) return cmd_filter(g, command, prices_path);
        if (sub_report->parsed()) return cmd_report(g, command);
        std::cerr << "no subcommand selected\n";
        return 1;
    } catch (const AssumptionViolated& e) {
        std::cerr << "assumption violated: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
}
