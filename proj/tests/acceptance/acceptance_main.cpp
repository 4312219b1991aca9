// Release gate: every check this binary runs must pass before a build ships.
// Each criterion prints its sub-checks and one final PASS/FAIL line; the exit
// code is 0 on pass, 3 on fail (matching the CLI's check-failed convention).
//
// All tolerances are pinned here on purpose. Monte Carlo gates use fixed
// seeds, so a pass is reproducible bit-for-bit; statistical gates are stated
// as multiples of the estimated standard error.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "fundsep/config.hpp"
#include "fundsep/constants.hpp"
#include "fundsep/density.hpp"
#include "fundsep/feynman_kac.hpp"
#include "fundsep/kalman.hpp"
#include "fundsep/portfolio.hpp"
#include "fundsep/quadrature.hpp"
#include "fundsep/rates.hpp"
#include "fundsep/sensitivity.hpp"
#include "fundsep/simulate.hpp"

namespace {

using namespace fundsep;
namespace fs = std::filesystem;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// collects sub-checks; a criterion passes iff every sub-check does
struct Gate {
    int checks = 0;
    int failures = 0;

    void expect(bool ok, const std::string& what, const std::string& detail) {
        ++checks;
        if (!ok) ++failures;
        std::printf("  %-4s %s  [%s]\n", ok ? "ok" : "FAIL", what.c_str(), detail.c_str());
    }

    bool passed() const { return checks > 0 && failures == 0; }
};

const ModelKind kAllKinds[] = {ModelKind::ThreeHalves, ModelKind::InverseBessel,
                               ModelKind::FilteredOU};

std::vector<double> eval_grid(ModelKind kind, int n) {
    std::vector<double> g;
    g.reserve(n);
    if (kind == ModelKind::FilteredOU) {
        for (int i = 0; i < n; ++i) g.push_back(-3.0 + 6.0 * i / (n - 1.0));
    } else {
        for (int i = 0; i < n; ++i) g.push_back(0.2 * std::pow(25.0, i / (n - 1.0)));
    }
    return g;
}

std::vector<double> z_points(ModelKind kind) {
    if (kind == ModelKind::FilteredOU) return {-1.0, -0.3, 0.3, 1.0, 1.8};
    return {0.5, 0.8, 1.2, 2.0, 3.0};
}

// ---------------------------------------------------------------------------
// 1. closed-form eigenfunction residual on a 50-point grid
// ---------------------------------------------------------------------------
bool crit_eigen_residual(Gate& g) {
    for (ModelKind kind : kAllKinds) {
        const RunConfig cfg = default_config(kind);
        const DerivedConstants c = derive_constants(cfg.market, cfg.model);
        const double resid = eigen_residual(cfg.model, c, eval_grid(kind, 50));
        g.expect(resid < 1e-10, to_string(kind) + " eigen residual < 1e-10",
                 "max " + fmt(resid));
    }
    return g.passed();
}

// ---------------------------------------------------------------------------
// 2. decomposition identity u = e^{-lambda t} phi f within 3 combined SE
// ---------------------------------------------------------------------------
bool crit_decomposition_identity(Gate& g) {
    std::uint64_t seed = 0x2ACC0001ull;
    for (ModelKind kind : kAllKinds) {
        const RunConfig cfg = default_config(kind);
        const DerivedConstants c = derive_constants(cfg.market, cfg.model);
        const Eigenpair e = eigenpair(cfg.model, c);
        // the exp(-int V) estimator inherits the Euler scheme's O(dt) weak
        // error; the reciprocal-square state needs the finest step, the OU
        // state is sampled exactly
        const double dt = kind == ModelKind::InverseBessel ? 5e-5
                          : kind == ModelKind::ThreeHalves ? 2.5e-4
                                                           : 1e-3;
        for (double t : {0.5, 1.0, 2.0}) {
            for (double z : z_points(kind)) {
                SimConfig sc;
                sc.n_paths = 10000;
                sc.dt = dt;
                sc.seed = seed++;
                const McEstimate u = estimate_u(cfg.model, c, z, t, sc);
                sc.seed = seed++;
                const McEstimate f = estimate_f(cfg.model, c, z, t, sc);
                const double scale = std::exp(-c.lambda * t) * e.phi(z);
                const double diff = std::abs(u.value - scale * f.value);
                const double se = std::hypot(u.std_error, scale * f.std_error);
                g.expect(diff <= 3.0 * se,
                         to_string(kind) + " t=" + fmt(t) + " z=" + fmt(z),
                         "|u - e^{-lt}phi f| = " + fmt(diff) + ", 3se = " + fmt(3.0 * se));
            }
        }
    }
    return g.passed();
}

// ---------------------------------------------------------------------------
// 3. filtered-OU Gaussian closed form: MC within 3 SE, quadrature to 1e-10
// ---------------------------------------------------------------------------
bool crit_gaussian_oracle(Gate& g) {
    const RunConfig cfg = default_config(ModelKind::FilteredOU);
    const DerivedConstants c = derive_constants(cfg.market, cfg.model);
    const DriftPair dp = drift_pair(cfg.model, c, MeasureTag::PTilde);
    std::uint64_t seed = 0x3ACC0001ull;

    for (double t : {0.5, 2.0}) {
        for (double z : {-1.0, 0.0, 0.5, 1.0, 2.0}) {
            const double closed = gaussian_f_oracle(c, z, t);

            SimConfig sc;
            sc.n_paths = 20000;
            sc.dt = 1e-3;
            sc.seed = seed++;
            const McEstimate mc = estimate_f(cfg.model, c, z, t, sc);
            g.expect(std::abs(mc.value - closed) <= 3.0 * mc.std_error,
                     "MC f vs closed form, z=" + fmt(z) + " t=" + fmt(t),
                     "diff " + fmt(std::abs(mc.value - closed)) + ", 3se " +
                         fmt(3.0 * mc.std_error));

            // independent evaluation: integrate e^{eta y^2 + xi y} against the
            // Gaussian transition law of the tilted state
            const double mean_z = dp.B / dp.A + (z - dp.B / dp.A) * std::exp(-dp.A * t);
            const double var_z =
                c.theta_norm2 * (1.0 - std::exp(-2.0 * dp.A * t)) / (2.0 * dp.A);
            const double shrink = 1.0 - 2.0 * c.eta * var_z;
            const double mean_eff = (mean_z + c.xi * var_z) / shrink;
            const double sd_eff = std::sqrt(var_z / shrink);
            const double lo = mean_eff - 13.0 * sd_eff, hi = mean_eff + 13.0 * sd_eff;
            const double norm = 1.0 / std::sqrt(2.0 * M_PI * var_z);
            const double quad = integrate(
                [&](double y) {
                    return norm *
                           std::exp(c.eta * y * y + c.xi * y -
                                    (y - mean_z) * (y - mean_z) / (2.0 * var_z));
                },
                lo, hi, 1e-11 * std::max(1.0, closed), 20);
            const double rel = std::abs(quad - closed) / closed;
            g.expect(rel <= 1e-10, "quadrature vs closed form, z=" + fmt(z) + " t=" + fmt(t),
                     "rel diff " + fmt(rel));
        }
    }
    return g.passed();
}

// ---------------------------------------------------------------------------
// 4. decay-rate recovery: OLS slope of log|f_z/f| over t in [1,6]
// ---------------------------------------------------------------------------
bool crit_rate_recovery(Gate& g) {
    std::uint64_t seed = 0x4ACC0001ull;
    for (ModelKind kind : kAllKinds) {
        const RunConfig cfg = default_config(kind);
        const DerivedConstants c = derive_constants(cfg.market, cfg.model);
        // start at the tilted stationary mean and let the default burn-in
        // (one relaxation time) drop grid points the ergodic prefactor has
        // not yet stabilized over
        const double z = invariant_density(cfg.model, c, MeasureTag::PTilde).mean;
        SimConfig sc;
        sc.n_paths = 100000;
        sc.dt = 1e-3;
        sc.seed = seed;
        seed += 1000;
        const std::vector<double> grid{1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0};
        const RateFit fit = fit_decay_rate(cfg.model, c, z, grid, sc);
        g.expect(fit.slope < 0.0 && fit.rel_error <= 0.10,
                 to_string(kind) + " fitted rate within 10%",
                 "slope " + fmt(fit.slope) + ", target " + fmt(-c.lambda_hat) +
                     ", rel err " + fmt(fit.rel_error) + ", pts " +
                     fmt(double(fit.t_grid.size())));
    }
    return g.passed();
}

// ---------------------------------------------------------------------------
// 5. finite-horizon portfolio converges to the long-horizon one
// ---------------------------------------------------------------------------
bool crit_portfolio_convergence(Gate& g) {
    const RunConfig cfg = default_config(ModelKind::ThreeHalves);
    const DerivedConstants c = derive_constants(cfg.market, cfg.model);
    const double z = 1.0;
    const Vec pinf = static_portfolio(cfg.market, cfg.model, c, z);

    // horizons in units of 1/lambda_hat (= 1 for the 3/2 defaults)
    const std::vector<double> Ts{2.0 / c.lambda_hat, 4.0 / c.lambda_hat, 6.0 / c.lambda_hat};
    const std::size_t paths[] = {30000, 60000, 100000};
    std::vector<double> gap, logg;
    for (std::size_t i = 0; i < Ts.size(); ++i) {
        SimConfig sc;
        sc.n_paths = paths[i];
        sc.dt = 5e-4;
        sc.seed = 0x5ACC0001ull + 31 * i;
        const PortfolioDecomposition d =
            dynamic_portfolio(cfg.market, cfg.model, c, z, 0.0, Ts[i], sc);
        gap.push_back((d.total - pinf).norm());
        logg.push_back(std::log(gap.back()));
        std::printf("  ..   T=%s gap %.6e (fz/f se %.2e)\n", fmt(Ts[i]).c_str(), gap.back(),
                    d.fz_over_f_se);
    }
    g.expect(gap[0] > gap[1] && gap[1] > gap[2], "gap decreases over T",
             fmt(gap[0]) + " > " + fmt(gap[1]) + " > " + fmt(gap[2]));
    const OlsFit fit = ols(Ts, logg);
    const double rel = std::abs(fit.slope + c.lambda_hat) / c.lambda_hat;
    g.expect(rel <= 0.15, "log-gap slope within 15% of -lambda_hat",
             "slope " + fmt(fit.slope) + ", target " + fmt(-c.lambda_hat) + ", rel err " +
                 fmt(rel));
    return g.passed();
}

// ---------------------------------------------------------------------------
// 6. pathwise flow derivative vs common-random-number central differences
// ---------------------------------------------------------------------------
bool crit_flow_derivative(Gate& g) {
    std::uint64_t seed = 0x6ACC0001ull;
    for (ModelKind kind : kAllKinds) {
        const RunConfig cfg = default_config(kind);
        const DerivedConstants c = derive_constants(cfg.market, cfg.model);
        const double z = kind == ModelKind::FilteredOU ? 0.5 : 1.0;
        const double h = 1e-3 * std::max(1.0, std::abs(z));

        SimConfig sc;
        sc.n_paths = 1000;
        sc.dt = 1e-4;
        sc.horizon = 1.0;
        sc.seed = seed++;

        std::vector<Functional> need;
        if (kind == ModelKind::ThreeHalves) need = {Functional::IntZ};
        if (kind == ModelKind::InverseBessel) need = {Functional::IntZ2};

        const PathBatch base = simulate(cfg.model, c, MeasureTag::P, z, sc, need);
        const McEstimate pw = reduce_mc(base, flow_derivative(cfg.model, c, base));

        const PathBatch up = simulate(cfg.model, c, MeasureTag::P, z + h, sc);
        const PathBatch dn = simulate(cfg.model, c, MeasureTag::P, z - h, sc);
        if (up.rng_checksum != dn.rng_checksum)
            throw ValidationError("common random numbers broken across the two legs");
        const McEstimate mu = reduce_mc(up, up.terminal_states());
        const McEstimate md = reduce_mc(dn, dn.terminal_states());
        const double fd = (mu.value - md.value) / (2.0 * h);
        const double rel = std::abs(fd - pw.value) / std::max(std::abs(pw.value), 1e-12);
        g.expect(rel <= 1e-3, to_string(kind) + " flow derivative rel diff <= 1e-3",
                 "pathwise " + fmt(pw.value) + ", CRN diff " + fmt(fd) + ", rel " + fmt(rel));
    }
    return g.passed();
}

// ---------------------------------------------------------------------------
// 7. measure-change martingale has unit mean
// ---------------------------------------------------------------------------
bool crit_martingale_mean(Gate& g) {
    std::uint64_t seed = 0x7ACC0101ull;
    for (ModelKind kind : kAllKinds) {
        const RunConfig cfg = default_config(kind);
        const DerivedConstants c = derive_constants(cfg.market, cfg.model);
        const double z = kind == ModelKind::FilteredOU ? 0.5 : 1.0;
        for (double t : {0.5, 1.0, 2.0}) {
            SimConfig sc;
            // the inverse-Bessel weight has the heaviest right tail; give it
            // the full desk budget so the sample mean is close to normal, and
            // a finer step so the O(dt) weight bias stays under the tighter band
            sc.n_paths = kind == ModelKind::InverseBessel ? 100000 : 20000;
            sc.dt = kind == ModelKind::InverseBessel ? 1e-4 : 2.5e-4;
            sc.horizon = t;
            sc.seed = seed++;
            const PathBatch batch =
                simulate(cfg.model, c, MeasureTag::P, z, sc, {Functional::IntV});
            const McEstimate m =
                reduce_mc(batch, girsanov_weights(cfg.model, c, MeasureTag::PTilde, batch));
            g.expect(std::abs(m.value - 1.0) <= 3.0 * m.std_error,
                     to_string(kind) + " E[M_t]=1 at t=" + fmt(t),
                     "mean " + fmt(m.value) + ", 3se " + fmt(3.0 * m.std_error));
        }
    }
    return g.passed();
}

// ---------------------------------------------------------------------------
// 8. 3/2 fractional-moment formula vs Monte Carlo
// ---------------------------------------------------------------------------
bool crit_moment_formula(Gate& g) {
    const RunConfig cfg = default_config(ModelKind::ThreeHalves);
    const DerivedConstants c = derive_constants(cfg.market, cfg.model);
    const double z0 = 1.0;
    // the sampling measure drives the state with reversion slope theta, so the
    // formula is evaluated at that slope; kappa is its Feller index
    const double kappa = 2.0 * c.theta / (c.sigma * c.sigma) + 1.0;
    std::uint64_t seed = 0x8ACC0001ull;

    for (double t : {0.5, 2.0}) {
        SimConfig sc;
        sc.n_paths = 40000;
        sc.dt = 5e-4;
        sc.horizon = t;
        sc.seed = seed++;
        const PathBatch batch = simulate(cfg.model, c, MeasureTag::P, z0, sc);
        const std::vector<double>& zt = batch.terminal_states();
        for (double nu : {0.5, kappa / 2.0}) {
            std::vector<double> vals(zt.size());
            for (std::size_t i = 0; i < zt.size(); ++i) vals[i] = std::pow(zt[i], nu);
            const McEstimate mc = reduce_mc(batch, vals);
            const double quad = moment_32(c.b, c.theta, c.sigma, z0, nu, t);
            g.expect(std::abs(quad - mc.value) <= 3.0 * mc.std_error,
                     "nu=" + fmt(nu) + " t=" + fmt(t),
                     "quad " + fmt(quad) + ", MC " + fmt(mc.value) + ", 3se " +
                         fmt(3.0 * mc.std_error));
        }
    }
    return g.passed();
}

// ---------------------------------------------------------------------------
// 9. long-horizon f approaches the stationary average of 1/phi
// ---------------------------------------------------------------------------
bool crit_ergodic_limit(Gate& g) {
    std::uint64_t seed = 0x9ACC0001ull;
    for (ModelKind kind : kAllKinds) {
        const RunConfig cfg = default_config(kind);
        const DerivedConstants c = derive_constants(cfg.market, cfg.model);
        const Eigenpair e = eigenpair(cfg.model, c);
        const InvariantDensity d = invariant_density(cfg.model, c, MeasureTag::PTilde);
        const double target = density_moment(d, [&](double y) { return 1.0 / e.phi(y); });

        const double t = 8.0 / c.lambda_hat;
        const double z = kind == ModelKind::FilteredOU ? 0.5 : 1.0;
        SimConfig sc;
        sc.n_paths = 20000;
        sc.dt = 1e-3;
        sc.seed = seed++;
        const McEstimate mc = estimate_f(cfg.model, c, z, t, sc);
        g.expect(std::abs(mc.value - target) <= 3.0 * mc.std_error,
                 to_string(kind) + " f(8/lambda_hat) vs stationary mean",
                 "MC " + fmt(mc.value) + ", stationary " + fmt(target) + ", 3se " +
                     fmt(3.0 * mc.std_error));
    }
    return g.passed();
}

// ---------------------------------------------------------------------------
// 10. sensitivity program: analytic vs FD, score vs FD, gap decay envelope
// ---------------------------------------------------------------------------
bool crit_sensitivities(Gate& g) {
    const Parameter all_pars[] = {Parameter::Z, Parameter::B, Parameter::A,
                                  Parameter::SigmaState};

    // (a) closed-form static sensitivities against central differences
    for (ModelKind kind : kAllKinds) {
        const RunConfig cfg = default_config(kind);
        const DerivedConstants c = derive_constants(cfg.market, cfg.model);
        const double z = kind == ModelKind::FilteredOU ? 0.5 : 1.2;
        for (Parameter par : all_pars) {
            const Vec sa = static_sensitivity(cfg.market, cfg.model, c, z, par);
            const Vec sf = static_sensitivity_fd(cfg.market, cfg.model, z, par);
            const double scale = std::max({1.0, sa.norm(), sf.norm()});
            const double rel = (sa - sf).norm() / scale;
            g.expect(rel <= 1e-6,
                     to_string(kind) + " static d/d" + to_string(par) + " analytic vs FD",
                     "rel " + fmt(rel));
        }
    }

    // (b) likelihood-ratio drift sensitivities against CRN finite differences
    std::uint64_t seed = 0xAACC0001ull;
    for (ModelKind kind : kAllKinds) {
        const RunConfig cfg = default_config(kind);
        const DerivedConstants c = derive_constants(cfg.market, cfg.model);
        const double z = kind == ModelKind::FilteredOU ? 0.5 : 1.0;
        for (Parameter par : {Parameter::B, Parameter::A}) {
            SimConfig sc;
            sc.n_paths = 20000;
            sc.dt = 1e-3;
            sc.seed = seed++;
            const McEstimate lr =
                drift_sensitivity_lr(cfg.market, cfg.model, c, z, 1.0, par, sc);
            sc.seed = seed++;
            const McEstimate fd = f_sensitivity_fd(cfg.market, cfg.model, z, 1.0, par, sc);
            const double se = std::hypot(lr.std_error, fd.std_error);
            g.expect(std::abs(lr.value - fd.value) <= 3.0 * se,
                     to_string(kind) + " score vs FD d f/d" + to_string(par),
                     "LR " + fmt(lr.value) + ", FD " + fmt(fd.value) + ", 3se " +
                         fmt(3.0 * se));
        }
    }

    // (c) dynamic-vs-static sensitivity gap decays at the analytic rate
    struct GapCase {
        ModelKind kind;
        Parameter par;
    };
    const GapCase cases[] = {{ModelKind::ThreeHalves, Parameter::Z},
                             {ModelKind::InverseBessel, Parameter::Z},
                             {ModelKind::FilteredOU, Parameter::B},
                             {ModelKind::FilteredOU, Parameter::Z}};
    for (const GapCase& gc : cases) {
        const RunConfig cfg = default_config(gc.kind);
        const DerivedConstants c = derive_constants(cfg.market, cfg.model);
        const double z = gc.kind == ModelKind::FilteredOU ? 0.5 : 1.0;
        // the scalar gaps carry a sub-leading correction that only dies off a
        // few e-foldings out, so sample those later; FOU z-sensitivities decay
        // twice as fast and are clean early
        const bool fast = gc.kind == ModelKind::FilteredOU && gc.par == Parameter::Z;
        std::vector<double> Ts;
        if (gc.kind == ModelKind::FilteredOU) {
            for (double k : {1.0, 2.0, 3.0}) Ts.push_back((fast ? 0.5 : 1.0) * k / c.lambda_hat);
        } else {
            for (double k : {3.0, 4.0, 5.0, 6.0}) Ts.push_back(k / c.lambda_hat);
        }
        SimConfig sc;
        sc.n_paths = 20000;
        sc.dt = 2e-3;
        sc.seed = seed++;
        const SensitivityReport rep =
            sensitivity_report(cfg.market, cfg.model, c, z, Ts, gc.par, sc);
        bool decreasing = true;
        std::string gaps;
        for (std::size_t i = 0; i < rep.gap_norm.size(); ++i) {
            if (i > 0 && !(rep.gap_norm[i] < rep.gap_norm[i - 1])) decreasing = false;
            gaps += (i ? " > " : "") + fmt(rep.gap_norm[i]);
        }
        const double rel =
            std::abs(rep.envelope.rate - rep.expected_rate) / rep.expected_rate;
        g.expect(decreasing && rel <= 0.20,
                 to_string(gc.kind) + " d/d" + to_string(gc.par) + " gap decay",
                 "gaps " + gaps + ", rate " + fmt(rep.envelope.rate) + " vs " +
                     fmt(rep.expected_rate));
    }
    return g.passed();
}

// ---------------------------------------------------------------------------
// 11. steady-state filter: Riccati root and realized mean-square error
// ---------------------------------------------------------------------------
bool crit_filter(Gate& g) {
    const RunConfig cfg = default_config(ModelKind::FilteredOU);
    const DerivedConstants c = derive_constants(cfg.market, cfg.model);
    const double resid = std::abs(riccati_residual(cfg.market, cfg.model, c.P0));
    g.expect(resid <= 1e-12, "Riccati residual at P0", fmt(resid));

    const double horizon = 50.0 / cfg.model.a;
    double mse_sum = 0.0;
    const int reps = 8;
    for (int k = 0; k < reps; ++k) {
        SimConfig sc;
        sc.dt = 5e-3;
        sc.horizon = horizon;
        sc.seed = 0xBACC0001ull + 17 * k;
        const JointSample joint = simulate_joint(cfg.market, cfg.model, sc);
        const FilterResult res = run_filter(cfg.market, cfg.model, c.P0, joint.prices);
        mse_sum += filter_mse(joint, res);
    }
    const double mse = mse_sum / reps;
    const double rel = std::abs(mse - c.P0) / c.P0;
    g.expect(rel <= 0.20, "filter MSE within 20% of P0",
             "MSE " + fmt(mse) + ", P0 " + fmt(c.P0) + ", rel " + fmt(rel));
    return g.passed();
}

// ---------------------------------------------------------------------------
// 12. byte-identical outputs across re-runs and worker counts
// ---------------------------------------------------------------------------
std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool same_dir_bytes(const fs::path& a, const fs::path& b, std::string& why) {
    std::vector<std::string> na, nb;
    for (const auto& e : fs::directory_iterator(a)) na.push_back(e.path().filename().string());
    for (const auto& e : fs::directory_iterator(b)) nb.push_back(e.path().filename().string());
    std::sort(na.begin(), na.end());
    std::sort(nb.begin(), nb.end());
    if (na != nb) {
        why = "file lists differ";
        return false;
    }
    for (const std::string& name : na) {
        if (slurp(a / name) != slurp(b / name)) {
            why = name + " differs";
            return false;
        }
    }
    why = std::to_string(na.size()) + " file(s) identical";
    return true;
}

int run_cli(const std::string& cli, const fs::path& workdir, int threads,
            const std::string& args) {
    std::string cmd = "cd '" + workdir.string() + "' && FUNDSEP_THREADS=" +
                      std::to_string(threads) + " '" + cli + "' " + args +
                      " > cli.log 2>&1";
    return std::system(cmd.c_str());
}

bool crit_reproducibility(Gate& g, const std::string& cli) {
    if (cli.empty()) {
        g.expect(false, "CLI path provided via --cli", "missing");
        return false;
    }
    const fs::path root = fs::temp_directory_path() / "fundsep_gate12";
    fs::remove_all(root);
    const fs::path d1 = root / "run1", d2 = root / "run2", d4 = root / "run4";
    fs::create_directories(d1);
    fs::create_directories(d2);
    fs::create_directories(d4);

    // a Monte Carlo command (threaded reduction path) and a closed-form one
    const std::string mc_args =
        "portfolio --model inverse_bessel --seed 4242 --paths 4000 --dt 0.002 --out-dir out";
    const std::string cf_args = "derive --model filtered_ou --out-dir outd";

    for (const std::string& args : {mc_args, cf_args}) {
        const int r1 = run_cli(cli, d1, 1, args);
        const int r2 = run_cli(cli, d2, 1, args);
        const int r4 = run_cli(cli, d4, 4, args);
        g.expect(r1 == 0 && r2 == 0 && r4 == 0, "CLI runs exit 0 (" + args.substr(0, 9) + ")",
                 "codes " + std::to_string(r1) + "/" + std::to_string(r2) + "/" +
                     std::to_string(r4));
    }
    for (const std::string& sub : {"out", "outd"}) {
        std::string why;
        g.expect(same_dir_bytes(d1 / sub, d2 / sub, why), sub + ": re-run bytes identical", why);
        g.expect(same_dir_bytes(d1 / sub, d4 / sub, why),
                 sub + ": FUNDSEP_THREADS=1 vs 4 identical", why);
    }
    fs::remove_all(root);
    return g.passed();
}

struct Criterion {
    const char* title;
    std::function<bool(Gate&)> run;
};

} // namespace

int main(int argc, char** argv) {
    int criterion = 0;
    std::string cli;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--criterion" && i + 1 < argc) {
            criterion = std::atoi(argv[++i]);
        } else if (a == "--cli" && i + 1 < argc) {
            cli = argv[++i];
        } else {
            std::fprintf(stderr, "usage: acceptance --criterion N [--cli path-to-fundsep]\n");
            return 1;
        }
    }

    const Criterion table[12] = {
        {"closed-form eigenpairs solve the generator equation", crit_eigen_residual},
        {"Monte Carlo u equals e^{-lambda t} phi f", crit_decomposition_identity},
        {"filtered-OU Gaussian closed form (MC and quadrature)", crit_gaussian_oracle},
        {"log|f_z/f| decays at rate lambda_hat", crit_rate_recovery},
        {"finite-horizon portfolio converges to the static one", crit_portfolio_convergence},
        {"pathwise flow derivative matches CRN differences", crit_flow_derivative},
        {"measure-change martingale has unit mean", crit_martingale_mean},
        {"3/2 fractional-moment quadrature matches MC", crit_moment_formula},
        {"long-horizon f reaches the stationary average", crit_ergodic_limit},
        {"sensitivity program: analytic, score, and gap decay", crit_sensitivities},
        {"steady-state filter: Riccati root and realized MSE", crit_filter},
        {"byte-identical outputs across runs and thread counts",
         [&cli](Gate& g) { return crit_reproducibility(g, cli); }},
    };

    if (criterion < 1 || criterion > 12) {
        std::fprintf(stderr, "usage: acceptance --criterion N (1..12) [--cli path]\n");
        return 1;
    }

    const Criterion& c = table[criterion - 1];
    std::printf("criterion %d: %s\n", criterion, c.title);
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    try {
        Gate gate;
        ok = c.run(gate);
    } catch (const std::exception& ex) {
        std::printf("  FAIL unexpected exception  [%s]\n", ex.what());
        ok = false;
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %d: %s (%.1f s)\n", criterion, ok ? "PASS" : "FAIL", secs);
    return ok ? 0 : 3;
}
