#include "fundsep/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "fundsep/constants.hpp"
#include "fundsep/feynman_kac.hpp"
#include "fundsep/portfolio.hpp"
#include "fundsep/simulate.hpp"

namespace fundsep {

std::string to_string(Parameter p) {
    switch (p) {
        case Parameter::Z: return "z";
        case Parameter::B: return "b";
        case Parameter::A: return "a";
        case Parameter::SigmaState: return "sigma";
    }
    throw InvalidSpec("unhandled parameter tag");
}

Parameter parameter_from_string(const std::string& s) {
    if (s == "z") return Parameter::Z;
    if (s == "b") return Parameter::B;
    if (s == "a") return Parameter::A;
    if (s == "sigma") return Parameter::SigmaState;
    throw ParseError("unknown parameter '" + s + "' (expected z, b, a, or sigma)");
}

namespace {

double param_value(const StateModelSpec& model, double z, Parameter par) {
    switch (par) {
        case Parameter::Z: return z;
        case Parameter::B: return model.b;
        case Parameter::A: return model.a;
        case Parameter::SigmaState: return model.sigma;
    }
    throw InvalidSpec("unhandled parameter tag");
}

double fd_step(const StateModelSpec& model, double z, Parameter par, double step_scale) {
    if (par == Parameter::Z) return step_scale * std::max(1.0, std::abs(z));
    return step_scale * std::abs(param_value(model, z, par));
}

// state model with the parameter nudged; z perturbations are handled by the caller
StateModelSpec nudged(const StateModelSpec& model, Parameter par, double h) {
    StateModelSpec m = model;
    switch (par) {
        case Parameter::Z: break;
        case Parameter::B: m.b += h; break;
        case Parameter::A: m.a += h; break;
        case Parameter::SigmaState: m.sigma += h; break;
    }
    return m;
}

// derived constants at the nudged parameter, honoring the conventions: the
// filtered-OU a-derivative freezes the observation loading theta_vec (and P0),
// every other case re-derives everything from scratch
DerivedConstants nudged_constants(const PreferenceMarketSpec& spec, const StateModelSpec& model,
                                  const DerivedConstants& base, Parameter par, double h) {
    const StateModelSpec m = nudged(model, par, h);
    if (par == Parameter::Z) return base;
    if (model.kind == ModelKind::FilteredOU && par == Parameter::A)
        return derive_constants_fixed_theta(spec, m, base.theta_vec, base.P0);
    return derive_constants(spec, m);
}

// total derivatives of (eta, xi) in the scalar models, where theta = a + q sigma rho'mu.
// d/da moves theta at rate 1; d/dsigma moves it at rate q rho'mu.
struct ScalarDerivs {
    double eta_b = 0.0, eta_a = 0.0, eta_sigma = 0.0;
    double xi_b = 0.0, xi_a = 0.0, xi_sigma = 0.0;
};

ScalarDerivs scalar_derivs(const DerivedConstants& c) {
    const double sigma = c.sigma, s2 = sigma * sigma;
    const double K = c.q * c.mu_norm2 / c.delta;
    const double dtheta_da = 1.0;
    const double dtheta_dsigma = c.q * c.rho_mu;
    ScalarDerivs d;
    if (c.kind == ModelKind::ThreeHalves) {
        // eta = -G + sqrt(G^2 + K/sigma^2), G = 1/2 + theta/sigma^2
        const double G = 0.5 + c.theta / s2;
        const double R = std::sqrt(G * G + K / s2);
        const double eta_theta = (G / R - 1.0) / s2; // via dG/dtheta = 1/sigma^2
        const double dG_dsigma = -2.0 * c.theta / (s2 * sigma);
        const double deta_dsigma_theta = -dG_dsigma + (G * dG_dsigma - K / (s2 * sigma)) / R;
        d.eta_a = eta_theta * dtheta_da;
        d.eta_sigma = deta_dsigma_theta + eta_theta * dtheta_dsigma;
        // b enters neither eta nor xi (xi = 0 here)
    } else if (c.kind == ModelKind::InverseBessel) {
        // eta = (-H + sqrt(H^2 + K sigma^2)) / sigma^2, H = sigma^2/2 + theta
        // xi = b eta / D, D = sigma^2 (eta + 1) + theta
        const double H = 0.5 * s2 + c.theta;
        const double R = std::sqrt(H * H + K * s2);
        const double D = s2 * (c.eta + 1.0) + c.theta;
        const double eta_theta = (H / R - 1.0) / s2;
        const double dH_dsigma = sigma;
        const double dR_dsigma = (H * dH_dsigma + K * sigma) / R;
        const double deta_dsigma_theta =
            (dR_dsigma - dH_dsigma) / s2 - 2.0 * (R - H) / (s2 * sigma);
        d.eta_a = eta_theta * dtheta_da;
        d.eta_sigma = deta_dsigma_theta + eta_theta * dtheta_dsigma;
        d.xi_b = c.eta / D;
        // D moves through theta and eta when a moves
        const double dD_da = s2 * d.eta_a + dtheta_da;
        d.xi_a = c.b * (d.eta_a * D - c.eta * dD_da) / (D * D);
        const double dD_dsigma = 2.0 * sigma * (c.eta + 1.0) + s2 * d.eta_sigma + dtheta_dsigma;
        d.xi_sigma = c.b * (d.eta_sigma * D - c.eta * dD_dsigma) / (D * D);
    } else {
        throw InvalidSpec("scalar_derivs is for the 3/2 and inverse Bessel models");
    }
    return d;
}

// filtered OU: eta = (-a_eff + sqrt(a_eff^2 + c2 S)) / (2 S) with S = |theta|^2,
// lambda_hat = sqrt(a_eff^2 + c2 S), xi = 2 b eta / lambda_hat
struct FouDerivs {
    double eta_b = 0.0, xi_b = 0.0;
    double eta_aeff = 0.0, xi_aeff = 0.0;      // theta_vec held fixed
    double eta_sigma = 0.0, xi_sigma = 0.0;    // total in sigma
    Vec dtheta_dsigma;                         // d theta_vec / d sigma
};

FouDerivs fou_derivs(const PreferenceMarketSpec& spec, const DerivedConstants& c) {
    const double S = c.theta_norm2;
    const double a_eff = c.theta;
    const double c2 = 2.0 * c.pot_slope; // (q/delta) |mu|^2
    const double R = c.lambda_hat;       // sqrt(a_eff^2 + c2 S)
    FouDerivs d;
    d.xi_b = 2.0 * c.eta / R;

    double eta_S = 0.0;
    if (S > 1e-14 * std::max(1.0, a_eff * a_eff)) {
        d.eta_aeff = (-1.0 + a_eff / R) / (2.0 * S);
        eta_S = (c2 * S / R - 2.0 * (R - a_eff)) / (4.0 * S * S);
    } else {
        // eta -> c2/(4 a_eff): series limits of the quotient derivatives
        d.eta_aeff = -c2 / (4.0 * a_eff * a_eff);
        eta_S = -c2 * c2 / (16.0 * a_eff * a_eff * a_eff);
    }
    const double dR_daeff = a_eff / R;
    d.xi_aeff = 2.0 * c.b * (d.eta_aeff * R - c.eta * dR_daeff) / (R * R);

    // sigma chain: theta_vec = P0 mu + sigma rho with
    // P0 = (-A_m + sqrt(A_m^2 + sigma^2 (1 - rho'rho) |mu|^2)) / |mu|^2, A_m = a + sigma rho'mu
    const double sigma = c.sigma;
    const double m2 = c.mu_norm2;
    Vec dtheta(spec.mu.size());
    if (m2 > 1e-14) {
        const double A_m = c.a + sigma * c.rho_mu;
        const double R1 = std::sqrt(A_m * A_m + sigma * sigma * (1.0 - c.rho_norm2) * m2);
        const double dP0 =
            (-c.rho_mu + (A_m * c.rho_mu + sigma * (1.0 - c.rho_norm2) * m2) / R1) / m2;
        dtheta = dP0 * spec.mu + spec.rho;
    } else {
        // P0 = sigma^2 (1 - rho'rho) / (2 A_m): dP0 enters theta only through mu = 0
        dtheta = spec.rho;
    }
    d.dtheta_dsigma = dtheta;
    const double dS = 2.0 * c.theta_vec.dot(dtheta);
    const double da_eff = c.q * spec.mu.dot(dtheta);
    const double deta = d.eta_aeff * da_eff + eta_S * dS;
    const double dR = (a_eff * da_eff + 0.5 * c2 * dS) / R;
    d.eta_sigma = deta;
    d.xi_sigma = 2.0 * c.b * (deta * R - c.eta * dR) / (R * R);
    return d;
}

} // namespace

Vec static_sensitivity(const PreferenceMarketSpec& spec, const StateModelSpec& model,
                       const DerivedConstants& c, double z, Parameter par) {
    if (!c.assumption_ok) throw AssumptionViolated(c.assumption_msg);
    const double one_m_p = 1.0 - spec.p;
    const double dcoef = c.delta / one_m_p;
    const Vec zero = Vec::Zero(spec.n_assets());

    if (model.kind == ModelKind::ThreeHalves) {
        const Vec t_rho = solve_sigma_t(spec, spec.rho);
        const ScalarDerivs d = scalar_derivs(c);
        switch (par) {
            case Parameter::Z: return zero;
            case Parameter::B: return zero;
            case Parameter::A: return -dcoef * model.sigma * d.eta_a * t_rho;
            case Parameter::SigmaState:
                return -dcoef * (c.eta + model.sigma * d.eta_sigma) * t_rho;
        }
    } else if (model.kind == ModelKind::InverseBessel) {
        const Vec t_rho = solve_sigma_t(spec, spec.rho);
        const ScalarDerivs d = scalar_derivs(c);
        switch (par) {
            case Parameter::Z:
                return dcoef * model.sigma * (c.xi / (z * z)) * t_rho;
            case Parameter::B:
                return -dcoef * model.sigma * (d.xi_b / z) * t_rho;
            case Parameter::A:
                return -dcoef * model.sigma * (d.eta_a + d.xi_a / z) * t_rho;
            case Parameter::SigmaState:
                return -dcoef * ((c.eta + c.xi / z) +
                                 model.sigma * (d.eta_sigma + d.xi_sigma / z)) *
                       t_rho;
        }
    } else {
        const Vec t_mu = solve_sigma_t(spec, spec.mu);
        const Vec t_th = solve_sigma_t(spec, c.theta_vec);
        const FouDerivs d = fou_derivs(spec, c);
        switch (par) {
            case Parameter::Z:
                return t_mu / one_m_p - 2.0 * dcoef * c.eta * t_th;
            case Parameter::B:
                return -dcoef * d.xi_b * t_th;
            case Parameter::A:
                return -dcoef * (2.0 * z * d.eta_aeff + d.xi_aeff) * t_th;
            case Parameter::SigmaState: {
                const Vec t_dth = solve_sigma_t(spec, d.dtheta_dsigma);
                return -dcoef * ((2.0 * z * d.eta_sigma + d.xi_sigma) * t_th +
                                 (2.0 * c.eta * z + c.xi) * t_dth);
            }
        }
    }
    throw InvalidSpec("unhandled parameter tag");
}

Vec static_sensitivity_fd(const PreferenceMarketSpec& spec, const StateModelSpec& model,
                          double z, Parameter par, double step_scale) {
    const DerivedConstants base = derive_constants(spec, model);
    const double h = fd_step(model, z, par, step_scale);
    if (h <= 0.0) throw ParameterOutOfRange("finite-difference step must be positive");
    if (par == Parameter::Z) {
        const Vec up = static_portfolio(spec, model, base, z + h);
        const Vec dn = static_portfolio(spec, model, base, z - h);
        return (up - dn) / (2.0 * h);
    }
    const DerivedConstants cp = nudged_constants(spec, model, base, par, +h);
    const DerivedConstants cm = nudged_constants(spec, model, base, par, -h);
    const Vec up = static_portfolio(spec, nudged(model, par, +h), cp, z);
    const Vec dn = static_portfolio(spec, nudged(model, par, -h), cm, z);
    return (up - dn) / (2.0 * h);
}

namespace {

struct Leg {
    StateModelSpec model;
    DerivedConstants c;
    double z = 0.0;
};

Leg make_leg(const PreferenceMarketSpec& spec, const StateModelSpec& model,
             const DerivedConstants& base, double z, Parameter par, double h) {
    Leg leg;
    leg.model = nudged(model, par, h);
    leg.c = nudged_constants(spec, model, base, par, h);
    leg.z = (par == Parameter::Z) ? z + h : z;
    if (!leg.c.assumption_ok) throw AssumptionViolated(leg.c.assumption_msg);
    return leg;
}

struct RatioSample {
    double f_mean = 0.0;
    double ratio = 0.0;
    std::vector<double> f_vals;
    std::vector<double> fz_vals;
    std::uint64_t checksum = 0;
};

// per-path f and f_z integrands for one leg, on batches seeded identically
// across legs so the differences are common-random-number differences
RatioSample ratio_sample(const Leg& leg, double horizon, const SimConfig& cfg) {
    SimConfig f_cfg = cfg;
    f_cfg.horizon = horizon;
    const PathBatch fb = simulate(leg.model, leg.c, MeasureTag::PTilde, leg.z, f_cfg, {});

    const FzRepresentation rep = resolve_fz_representation(leg.model.kind, FzRepresentation::Auto);
    SimConfig g_cfg = f_cfg;
    g_cfg.seed = cfg.seed ^ 0x517CC1B727220A95ull;
    const PathBatch gb = simulate(leg.model, leg.c, fz_measure(leg.model.kind, rep), leg.z, g_cfg,
                                  fz_functionals(leg.model.kind, rep));

    RatioSample out;
    out.f_vals = f_values(leg.c, fb);
    out.fz_vals = fz_values(leg.c, gb, rep);
    out.f_mean = reduce_mc(fb, out.f_vals).value;
    if (!(out.f_mean > 0.0)) throw DegenerateFit("nonpositive f estimate in sensitivity leg");
    out.ratio = reduce_mc(gb, out.fz_vals).value / out.f_mean;
    out.checksum = fb.rng_checksum ^ gb.rng_checksum;
    return out;
}

PathBatch shape_batch(const SimConfig& cfg, std::size_t n) {
    PathBatch b;
    b.cfg = cfg;
    b.cfg.n_paths = n;
    b.states.push_back(std::vector<double>(n, 0.0));
    return b;
}

std::vector<double> paired_diff(const std::vector<double>& up, const std::vector<double>& dn) {
    if (up.size() != dn.size())
        throw ValidationError("common-random-number legs produced different path counts");
    std::vector<double> d(up.size());
    for (std::size_t i = 0; i < up.size(); ++i) d[i] = up[i] - dn[i];
    return d;
}

} // namespace

DynamicSensitivity dynamic_sensitivity_fd(const PreferenceMarketSpec& spec,
                                          const StateModelSpec& model, double z, double t,
                                          double T, Parameter par, const SimConfig& cfg,
                                          double step_scale) {
    const DerivedConstants base = derive_constants(spec, model);
    if (!base.assumption_ok) throw AssumptionViolated(base.assumption_msg);
    if (!(t >= 0.0) || !(t <= T)) throw ParameterOutOfRange("need 0 <= t <= T");
    const double h = fd_step(model, z, par, step_scale);
    if (h <= 0.0) throw ParameterOutOfRange("finite-difference step must be positive");

    const Leg up = make_leg(spec, model, base, z, par, +h);
    const Leg dn = make_leg(spec, model, base, z, par, -h);
    const PortfolioPieces pu = portfolio_pieces(spec, up.model, up.c, up.z);
    const PortfolioPieces pd = portfolio_pieces(spec, dn.model, dn.c, dn.z);

    DynamicSensitivity out;
    const double s = T - t;
    if (s <= 0.0) {
        // terminal time: fz/f = -phi'/phi exactly, no sampling noise
        const Vec pi_up = pu.myopic + pu.hedge + pu.inter_dir * (pu.h_scale * -pu.dlog_phi);
        const Vec pi_dn = pd.myopic + pd.hedge + pd.inter_dir * (pd.h_scale * -pd.dlog_phi);
        out.value = (pi_up - pi_dn) / (2.0 * h);
        out.se = Vec::Zero(spec.n_assets());
        return out;
    }

    const RatioSample ru = ratio_sample(up, s, cfg);
    const RatioSample rd = ratio_sample(dn, s, cfg);
    out.checksum_plus = ru.checksum;
    out.checksum_minus = rd.checksum;
    if (ru.checksum != rd.checksum)
        throw ValidationError("common random numbers broken: leg checksums differ");
    if (ru.f_vals.size() != rd.f_vals.size() || ru.fz_vals.size() != rd.fz_vals.size())
        throw ValidationError("common-random-number legs produced different path counts");

    const Vec pi_up = pu.myopic + pu.hedge + pu.inter_dir * (pu.h_scale * ru.ratio);
    const Vec pi_dn = pd.myopic + pd.hedge + pd.inter_dir * (pd.h_scale * rd.ratio);
    out.value = (pi_up - pi_dn) / (2.0 * h);

    // delta method for the sampled ratio difference R+ - R-: correlated paths,
    // so take standard errors of the per-path differences (reduce_mc only needs
    // a structural batch to know the antithetic pairing)
    PathBatch fz_shape = shape_batch(cfg, ru.fz_vals.size());
    PathBatch f_shape = shape_batch(cfg, ru.f_vals.size());
    const McEstimate d_fz = reduce_mc(fz_shape, paired_diff(ru.fz_vals, rd.fz_vals));
    const McEstimate d_f = reduce_mc(f_shape, paired_diff(ru.f_vals, rd.f_vals));
    const double r_bar = 0.5 * (ru.ratio + rd.ratio);
    const double f_bar = 0.5 * (ru.f_mean + rd.f_mean);
    const double se_ratio_diff =
        std::sqrt(d_fz.std_error * d_fz.std_error +
                  r_bar * r_bar * d_f.std_error * d_f.std_error) /
        f_bar;

    Vec w = 0.5 * (pu.inter_dir * pu.h_scale + pd.inter_dir * pd.h_scale);
    out.se = w.cwiseAbs() * (se_ratio_diff / (2.0 * h));
    return out;
}

McEstimate drift_sensitivity_lr(const PreferenceMarketSpec& spec, const StateModelSpec& model,
                                const DerivedConstants& c, double z, double t, Parameter par,
                                const SimConfig& cfg) {
    if (!c.assumption_ok) throw AssumptionViolated(c.assumption_msg);
    if (par != Parameter::B && par != Parameter::A)
        throw ConfigError("likelihood-ratio sensitivities cover the drift parameters b and a");
    if (t < 0.0) throw ParameterOutOfRange("time must be nonnegative");

    const double sigma = model.sigma;
    const double s2 = sigma * sigma;

    // f0(y) = 1/phi(y) and its explicit parameter dependence
    const auto f0 = [&](double y) {
        switch (model.kind) {
            case ModelKind::ThreeHalves: return std::pow(y, c.eta);
            case ModelKind::InverseBessel: return std::pow(y, c.eta) * std::exp(-c.xi / y);
            case ModelKind::FilteredOU: return std::exp(c.eta * y * y + c.xi * y);
        }
        throw InvalidSpec("unhandled model kind");
    };

    // explicit term: d f0 / d par via the constant derivatives
    double eta_d = 0.0, xi_d = 0.0;
    if (model.kind == ModelKind::FilteredOU) {
        const FouDerivs d = fou_derivs(spec, c);
        eta_d = (par == Parameter::B) ? 0.0 : d.eta_aeff;
        xi_d = (par == Parameter::B) ? d.xi_b : d.xi_aeff;
    } else {
        const ScalarDerivs d = scalar_derivs(c);
        eta_d = (par == Parameter::B) ? d.eta_b : d.eta_a;
        xi_d = (par == Parameter::B) ? d.xi_b : d.xi_a;
    }
    const auto explicit_term = [&](double y) {
        switch (model.kind) {
            case ModelKind::ThreeHalves: return f0(y) * eta_d * std::log(y);
            case ModelKind::InverseBessel: return f0(y) * (eta_d * std::log(y) - xi_d / y);
            case ModelKind::FilteredOU: return f0(y) * (eta_d * y * y + xi_d * y);
        }
        throw InvalidSpec("unhandled model kind");
    };

    if (t == 0.0) {
        // empty score integral: the derivative is the explicit term at z
        McEstimate est;
        est.value = explicit_term(z);
        est.std_error = 0.0;
        est.n_paths = 0;
        est.seed = cfg.seed;
        return est;
    }

    // functionals feeding the score integral for each (model, parameter) cell
    std::vector<Functional> funcs;
    switch (model.kind) {
        case ModelKind::ThreeHalves:
            funcs = {par == Parameter::B ? Functional::IntInvSqrtZdB : Functional::IntSqrtZdB};
            break;
        case ModelKind::InverseBessel:
            funcs = par == Parameter::B
                        ? std::vector<Functional>{Functional::BrownianTerminal}
                        : std::vector<Functional>{Functional::BrownianTerminal,
                                                  Functional::IntZdB};
            break;
        case ModelKind::FilteredOU:
            funcs = par == Parameter::B
                        ? std::vector<Functional>{Functional::BrownianTerminal}
                        : std::vector<Functional>{Functional::BrownianTerminal,
                                                  Functional::IntZdB};
            break;
    }

    SimConfig run = cfg;
    run.horizon = t;
    const PathBatch batch = simulate(model, c, MeasureTag::PTilde, z, run, funcs);
    const std::vector<double>& zt = batch.terminal_states();
    const std::size_t m = batch.n_paths();

    std::vector<double> vals(m);
    switch (model.kind) {
        case ModelKind::ThreeHalves: {
            if (par == Parameter::B) {
                const std::vector<double>& sc = batch.functional(Functional::IntInvSqrtZdB);
                for (std::size_t i = 0; i < m; ++i) vals[i] = f0(zt[i]) * sc[i] / sigma;
            } else {
                const std::vector<double>& sc = batch.functional(Functional::IntSqrtZdB);
                const double coef = -(1.0 + s2 * eta_d) / sigma;
                for (std::size_t i = 0; i < m; ++i)
                    vals[i] = f0(zt[i]) * coef * sc[i] + explicit_term(zt[i]);
            }
            break;
        }
        case ModelKind::InverseBessel: {
            const std::vector<double>& bt = batch.functional(Functional::BrownianTerminal);
            if (par == Parameter::B) {
                const double coef = (1.0 - s2 * xi_d) / sigma;
                for (std::size_t i = 0; i < m; ++i)
                    vals[i] = f0(zt[i]) * (coef * bt[i] - xi_d / zt[i]);
            } else {
                const std::vector<double>& izdb = batch.functional(Functional::IntZdB);
                const double coef_b = -sigma * xi_d;
                const double coef_z = -(1.0 + s2 * eta_d) / sigma;
                for (std::size_t i = 0; i < m; ++i)
                    vals[i] = f0(zt[i]) * (coef_b * bt[i] + coef_z * izdb[i]) +
                              explicit_term(zt[i]);
            }
            break;
        }
        case ModelKind::FilteredOU: {
            const std::vector<double>& bt = batch.functional(Functional::BrownianTerminal);
            const double s_norm = std::sqrt(c.theta_norm2);
            if (!(s_norm > 0.0))
                throw DegenerateObservation("zero observation loading: no drift score");
            const double S = c.theta_norm2;
            if (par == Parameter::B) {
                const double coef = (1.0 - S * xi_d) / s_norm;
                for (std::size_t i = 0; i < m; ++i)
                    vals[i] = f0(zt[i]) * coef * bt[i] + explicit_term(zt[i]);
            } else {
                const std::vector<double>& izdb = batch.functional(Functional::IntZdB);
                const double a_eff = c.theta;
                const double coef_b = -S * xi_d / s_norm;
                const double coef_z = -(a_eff / c.lambda_hat) / s_norm;
                for (std::size_t i = 0; i < m; ++i)
                    vals[i] = f0(zt[i]) * (coef_b * bt[i] + coef_z * izdb[i]) +
                              explicit_term(zt[i]);
            }
            break;
        }
    }
    return reduce_mc(batch, vals);
}

McEstimate f_sensitivity_fd(const PreferenceMarketSpec& spec, const StateModelSpec& model,
                            double z, double t, Parameter par, const SimConfig& cfg,
                            double step_scale) {
    const DerivedConstants base = derive_constants(spec, model);
    if (!base.assumption_ok) throw AssumptionViolated(base.assumption_msg);
    if (!(t > 0.0)) throw ParameterOutOfRange("time must be positive");
    const double h = fd_step(model, z, par, step_scale);
    if (h <= 0.0) throw ParameterOutOfRange("finite-difference step must be positive");

    const Leg up = make_leg(spec, model, base, z, par, +h);
    const Leg dn = make_leg(spec, model, base, z, par, -h);

    SimConfig run = cfg;
    run.horizon = t;
    const PathBatch bu = simulate(up.model, up.c, MeasureTag::PTilde, up.z, run, {});
    const PathBatch bd = simulate(dn.model, dn.c, MeasureTag::PTilde, dn.z, run, {});
    if (bu.rng_checksum != bd.rng_checksum)
        throw ValidationError("common random numbers broken: leg checksums differ");

    const std::vector<double> fu = f_values(up.c, bu);
    const std::vector<double> fd = f_values(dn.c, bd);
    std::vector<double> d = paired_diff(fu, fd);
    for (double& x : d) x /= 2.0 * h;
    return reduce_mc(bu, d);
}

EnvelopeFit envelope_fit(const std::vector<double>& T, const std::vector<double>& gap,
                         double rate_hint) {
    if (T.size() != gap.size()) throw ValidationError("grid and gap sizes differ");
    if (T.size() < 3) throw DegenerateFit("need at least 3 points to fit a decay envelope");
    for (double g : gap)
        if (!(g > 0.0)) throw DegenerateFit("decay envelope needs positive gaps");
    (void)rate_hint;

    const double degrees[] = {0.0, 0.5, 1.0};
    EnvelopeFit best;
    double best_rms = std::numeric_limits<double>::infinity();
    const std::size_t n = T.size();
    for (double deg : degrees) {
        // log gap = c + deg-shift - rate*T: fit (c, rate) by least squares
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double shift = (deg == 0.0) ? 0.0 : std::log1p(std::pow(T[i], deg));
            y[i] = std::log(gap[i]) - shift;
            sx += T[i];
            sy += y[i];
            sxx += T[i] * T[i];
            sxy += T[i] * y[i];
        }
        const double det = n * sxx - sx * sx;
        if (std::abs(det) < 1e-14 * n * sxx)
            throw DegenerateFit("degenerate horizon grid in envelope fit");
        const double slope = (n * sxy - sx * sy) / det;
        const double intercept = (sy - slope * sx) / n;
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - (intercept + slope * T[i]);
            ss += r * r;
        }
        const double rms = std::sqrt(ss / n);
        if (rms < best_rms - 1e-12) { // prefer the lowest degree on ties
            best_rms = rms;
            best.C = std::exp(intercept);
            best.degree = deg;
            best.rate = -slope;
            best.residual = rms;
        }
    }
    return best;
}

SensitivityReport sensitivity_report(const PreferenceMarketSpec& spec,
                                     const StateModelSpec& model, const DerivedConstants& c,
                                     double z, const std::vector<double>& T_grid, Parameter par,
                                     const SimConfig& cfg) {
    if (!c.assumption_ok) throw AssumptionViolated(c.assumption_msg);
    if (T_grid.empty()) throw EmptyGrid("horizon grid is empty");
    for (std::size_t i = 1; i < T_grid.size(); ++i)
        if (!(T_grid[i] > T_grid[i - 1]))
            throw ValidationError("horizon grid must be strictly increasing");

    SensitivityReport rep;
    rep.parameter = par;
    rep.T_grid = T_grid;
    rep.static_sens = static_sensitivity(spec, model, c, z, par);
    rep.expected_rate = (model.kind == ModelKind::FilteredOU && par == Parameter::Z)
                            ? 2.0 * c.lambda_hat
                            : c.lambda_hat;

    for (std::size_t i = 0; i < T_grid.size(); ++i) {
        SimConfig run = cfg;
        run.seed = cfg.seed + 7919 * (i + 1);
        const DynamicSensitivity dyn =
            dynamic_sensitivity_fd(spec, model, z, 0.0, T_grid[i], par, run);
        rep.dynamic_sens.push_back(dyn.value);
        rep.dynamic_se.push_back(dyn.se);
        rep.gap_norm.push_back((dyn.value - rep.static_sens).norm());
    }
    if (T_grid.size() >= 3) rep.envelope = envelope_fit(T_grid, rep.gap_norm, rep.expected_rate);
    return rep;
}

} // namespace fundsep
