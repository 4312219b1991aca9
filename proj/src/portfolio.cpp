#include "fundsep/portfolio.hpp"

#include <cmath>

#include "fundsep/constants.hpp"
#include "fundsep/feynman_kac.hpp"

namespace fundsep {

Vec solve_sigma_t(const PreferenceMarketSpec& spec, const Vec& v) {
    return spec.sigma.transpose().partialPivLu().solve(v);
}

namespace {

void check_scaling(const StateModelSpec& model, MyopicScaling scaling) {
    if (scaling == MyopicScaling::SqrtZ && model.kind != ModelKind::ThreeHalves)
        throw ConfigError("sqrt(z) myopic scaling is only defined for the 3/2 market layer");
}

} // namespace

PortfolioPieces portfolio_pieces(const PreferenceMarketSpec& spec, const StateModelSpec& model,
                                 const DerivedConstants& c, double z, MyopicScaling scaling) {
    check_scaling(model, scaling);
    const double one_m_p = 1.0 - spec.p;
    const double dcoef = c.delta / one_m_p;
    PortfolioPieces out;
    switch (model.kind) {
        case ModelKind::ThreeHalves: {
            const Vec t_mu = solve_sigma_t(spec, spec.mu);
            const Vec t_rho = solve_sigma_t(spec, spec.rho);
            out.myopic = t_mu / one_m_p;
            out.hedge = -dcoef * c.eta * model.sigma * t_rho;
            out.inter_dir = dcoef * model.sigma * t_rho;
            out.dlog_phi = -c.eta / z;
            out.h_scale = z;
            if (scaling == MyopicScaling::SqrtZ) {
                const double s = std::sqrt(z);
                out.myopic *= s;
                out.hedge *= s;
                out.inter_dir *= s;
            }
            break;
        }
        case ModelKind::InverseBessel: {
            const Vec t_mu = solve_sigma_t(spec, spec.mu);
            const Vec t_rho = solve_sigma_t(spec, spec.rho);
            out.myopic = t_mu / one_m_p;
            out.hedge = -dcoef * model.sigma * (c.eta + c.xi / z) * t_rho;
            out.inter_dir = dcoef * model.sigma * t_rho;
            out.dlog_phi = -c.eta / z - c.xi / (z * z);
            out.h_scale = z;
            break;
        }
        case ModelKind::FilteredOU: {
            const Vec t_mu = solve_sigma_t(spec, spec.mu);
            const Vec t_th = solve_sigma_t(spec, c.theta_vec);
            out.myopic = z * t_mu / one_m_p;
            out.hedge = -dcoef * (2.0 * c.eta * z + c.xi) * t_th;
            out.inter_dir = dcoef * t_th;
            out.dlog_phi = -(2.0 * c.eta * z + c.xi);
            out.h_scale = 1.0;
            break;
        }
        default:
            throw InvalidSpec("unhandled model kind");
    }
    return out;
}

std::vector<FundInfo> fund_table(const StateModelSpec& model) {
    std::vector<FundInfo> funds;
    funds.push_back({"safe", "1 - sum(risky weights)", true});
    switch (model.kind) {
        case ModelKind::ThreeHalves:
            funds.push_back({"myopic", "(1/(1-p)) (Sigma')^-1 mu", true});
            funds.push_back({"state_hedge", "-(delta eta sigma/(1-p)) (Sigma')^-1 rho", true});
            funds.push_back(
                {"intertemporal", "(delta sigma/(1-p)) (Sigma')^-1 rho * z f_z/f(T-t,z)", false});
            break;
        case ModelKind::InverseBessel:
            funds.push_back({"myopic", "(1/(1-p)) (Sigma')^-1 mu", true});
            funds.push_back({"state_hedge", "-(delta eta sigma/(1-p)) (Sigma')^-1 rho", true});
            funds.push_back(
                {"state_hedge_over_z", "-(delta xi sigma/((1-p) z)) (Sigma')^-1 rho", true});
            funds.push_back(
                {"intertemporal", "(delta sigma/(1-p)) (Sigma')^-1 rho * z f_z/f(T-t,z)", false});
            break;
        case ModelKind::FilteredOU:
            funds.push_back({"myopic", "(z/(1-p)) (Sigma')^-1 mu", true});
            funds.push_back({"state_hedge_level", "-(2 delta eta z/(1-p)) (Sigma')^-1 theta", true});
            funds.push_back({"state_hedge", "-(delta xi/(1-p)) (Sigma')^-1 theta", true});
            funds.push_back(
                {"intertemporal", "(delta/(1-p)) (Sigma')^-1 theta * f_z/f(T-t,z)", false});
            break;
    }
    return funds;
}

Vec static_portfolio(const PreferenceMarketSpec& spec, const StateModelSpec& model,
                     const DerivedConstants& c, double z, MyopicScaling scaling) {
    if (!c.assumption_ok) throw AssumptionViolated(c.assumption_msg);
    const PortfolioPieces p = portfolio_pieces(spec, model, c, z, scaling);
    return p.myopic + p.hedge;
}

PortfolioDecomposition dynamic_portfolio(const PreferenceMarketSpec& spec,
                                         const StateModelSpec& model, const DerivedConstants& c,
                                         double z, double t, double T, const SimConfig& cfg,
                                         MyopicScaling scaling) {
    if (!c.assumption_ok) throw AssumptionViolated(c.assumption_msg);
    if (!(t >= 0.0) || !(t <= T)) throw ParameterOutOfRange("need 0 <= t <= T");
    const PortfolioPieces p = portfolio_pieces(spec, model, c, z, scaling);

    PortfolioDecomposition out;
    out.myopic = p.myopic;
    out.hedge_static = p.hedge;

    const double s = T - t;
    if (s <= 0.0) {
        // no time left to hedge: f(0,.) = 1/phi, so f_z/f = -phi'/phi and the
        // intertemporal term cancels the static hedge exactly
        out.fz_over_f = -p.dlog_phi;
        out.fz_over_f_se = 0.0;
    } else {
        SimConfig cfg_f = cfg;
        SimConfig cfg_fz = cfg;
        cfg_fz.seed = cfg.seed ^ 0x517CC1B727220A95ull; // independent stream family
        const McEstimate f = estimate_f(model, c, z, s, cfg_f);
        const McEstimate fz = estimate_f_z(model, c, z, s, cfg_fz);
        if (!(f.value > 0.0)) throw DegenerateFit("f estimate is not positive");
        out.fz_over_f = fz.value / f.value;
        const double rel2 = (fz.std_error * fz.std_error) / (fz.value * fz.value) +
                            (f.std_error * f.std_error) / (f.value * f.value);
        out.fz_over_f_se = std::abs(out.fz_over_f) * std::sqrt(rel2);
    }

    out.intertemporal = p.inter_dir * (p.h_scale * out.fz_over_f);
    out.total = out.myopic + out.hedge_static + out.intertemporal;
    // same weights assembled through u_z/u = phi'/phi + f_z/f
    out.total_via_uz = out.myopic + p.inter_dir * (p.h_scale * (p.dlog_phi + out.fz_over_f));
    out.safe_weight = 1.0 - out.total.sum();
    return out;
}

} // namespace fundsep
