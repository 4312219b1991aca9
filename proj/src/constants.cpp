#include "fundsep/constants.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/SVD>

namespace fundsep {

std::string to_string(ModelKind k) {
    switch (k) {
        case ModelKind::ThreeHalves: return "three_halves";
        case ModelKind::InverseBessel: return "inverse_bessel";
        case ModelKind::FilteredOU: return "filtered_ou";
    }
    return "?";
}

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "three_halves" || s == "3/2") return ModelKind::ThreeHalves;
    if (s == "inverse_bessel" || s == "invb") return ModelKind::InverseBessel;
    if (s == "filtered_ou" || s == "fou") return ModelKind::FilteredOU;
    throw InvalidSpec("unknown model kind '" + s + "'");
}

std::string to_string(MeasureTag m) {
    switch (m) {
        case MeasureTag::P: return "P";
        case MeasureTag::PTilde: return "P_tilde";
        case MeasureTag::PHat: return "P_hat";
        case MeasureTag::PBar: return "P_bar";
    }
    return "?";
}

void validate(const PreferenceMarketSpec& spec) {
    const int n = spec.n_assets();
    if (n < 1) throw InvalidSpec("market needs at least one risky asset");
    if (spec.sigma.rows() != n || spec.sigma.cols() != n)
        throw InvalidSpec("sigma must be n x n with n = len(mu)");
    if (spec.rho.size() != n) throw InvalidSpec("rho must have the same length as mu");
    if (!(spec.p < 0.0)) throw InvalidSpec("preference exponent p must be negative");
    if (!std::isfinite(spec.r)) throw InvalidSpec("safe rate r must be finite");
    const double rr = spec.rho.squaredNorm();
    if (rr > 1.0 + 1e-12) throw InvalidSpec("|rho| must be <= 1");
    Eigen::JacobiSVD<Mat> svd(spec.sigma);
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();
    if (smin <= 0.0 || smax / smin > 1e12)
        throw InvalidSpec("sigma is singular or too ill-conditioned (cond > 1e12)");
}

void validate(const StateModelSpec& model) {
    if (!(model.sigma > 0.0)) throw InvalidSpec("state sigma must be positive");
    if (!(model.a > 0.0)) throw InvalidSpec("reversion slope a must be positive");
    if (model.kind != ModelKind::FilteredOU && !(model.b > 0.0))
        throw InvalidSpec("level parameter b must be positive for this model");
    if (!std::isfinite(model.b)) throw InvalidSpec("b must be finite");
}

double steady_state_variance(const PreferenceMarketSpec& spec, const StateModelSpec& model) {
    // positive root of |mu|^2 P^2 + 2 (a + sigma rho'mu) P - sigma^2 (1 - rho'rho) = 0
    const double m2 = spec.mu.squaredNorm();
    const double am = model.a + model.sigma * spec.rho.dot(spec.mu);
    const double c = model.sigma * model.sigma * (1.0 - spec.rho.squaredNorm());
    if (m2 < 1e-14) {
        if (am <= 0.0)
            throw DegenerateObservation("filter variance has no positive steady state");
        return c / (2.0 * am);
    }
    return (-am + std::sqrt(am * am + m2 * c)) / m2;
}

namespace {

void fill_market_scalars(DerivedConstants& c, const PreferenceMarketSpec& spec,
                         const StateModelSpec& model) {
    c.kind = model.kind;
    c.p = spec.p;
    c.r = spec.r;
    c.q = spec.p / (spec.p - 1.0);
    c.mu_norm2 = spec.mu.squaredNorm();
    c.rho_mu = spec.rho.dot(spec.mu);
    c.rho_norm2 = spec.rho.squaredNorm();
    c.b = model.b;
    c.a = model.a;
    c.sigma = model.sigma;
    if (model.kind == ModelKind::FilteredOU) {
        // the filtered market is complete in the observable filtration
        c.delta = 1.0 - spec.p; // = 1/(1-q)
    } else {
        c.delta = 1.0 / (1.0 - c.q * c.rho_norm2);
    }
    c.pot_const = -spec.p * spec.r / c.delta;
    c.pot_slope = c.q * c.mu_norm2 / (2.0 * c.delta);
}

void derive_scalar_model(DerivedConstants& c, const StateModelSpec& model) {
    const double s2 = model.sigma * model.sigma;
    c.theta = model.a + c.q * model.sigma * c.rho_mu;
    if (!(c.theta > -0.5 * s2)) {
        c.assumption_ok = false;
        std::ostringstream os;
        os << "risk-adjusted reversion theta = " << c.theta
           << " must exceed -sigma^2/2 = " << -0.5 * s2;
        c.assumption_msg = os.str();
        return;
    }
    const double K = c.q * c.mu_norm2 / c.delta;
    if (model.kind == ModelKind::ThreeHalves) {
        const double G = 0.5 + c.theta / s2;
        c.eta = -G + std::sqrt(G * G + K / s2);
        c.lambda = model.b * c.eta + c.pot_const;
        c.lambda_hat = model.b;
        c.xi = 0.0;
        c.zeta = 0.0;
    } else {
        const double H = 0.5 * s2 + c.theta;
        c.eta = (-H + std::sqrt(H * H + K * s2)) / s2;
        c.xi = model.b * c.eta / (s2 * (c.eta + 1.0) + c.theta);
        c.lambda = -0.5 * s2 * c.xi * c.xi + model.b * c.xi + c.pot_const;
        c.zeta = (model.b - s2 * c.xi) / (c.theta + s2 * (c.eta + 2.0));
        c.lambda_hat = -0.5 * s2 * c.zeta * c.zeta + (model.b - s2 * c.xi) * c.zeta;
    }
}

// eta solves 2 S eta^2 + 2 a_eff eta = v2 (S = |theta|^2); series-expand when
// the quadratic degenerates (S ~ 0)
void derive_fou_tail(DerivedConstants& c, const StateModelSpec& model, double a_eff) {
    c.theta = a_eff;
    c.theta_norm2 = c.theta_vec.squaredNorm();
    if (!(a_eff > 0.0)) {
        c.assumption_ok = false;
        std::ostringstream os;
        os << "risk-adjusted reversion a_eff = " << a_eff << " must be positive";
        c.assumption_msg = os.str();
        return;
    }
    const double S = c.theta_norm2;
    const double v2 = 2.0 * c.pot_slope; // = (q/delta)|mu|^2
    if (S < 1e-14 * std::max(1.0, a_eff * a_eff)) {
        // sqrt(a^2 + v2 S) ~ a + v2 S / (2a), so eta -> v2 / (4a)
        c.eta = v2 / (4.0 * a_eff);
    } else {
        c.eta = (-a_eff + std::sqrt(a_eff * a_eff + v2 * S)) / (2.0 * S);
    }
    c.lambda_hat = a_eff + 2.0 * S * c.eta;
    c.xi = 2.0 * model.b * c.eta / c.lambda_hat;
    c.lambda = (c.eta - 0.5 * c.xi * c.xi) * S + model.b * c.xi + c.pot_const;
    c.zeta = 0.0;
}

} // namespace

DerivedConstants derive_constants(const PreferenceMarketSpec& spec, const StateModelSpec& model) {
    validate(spec);
    validate(model);
    DerivedConstants c;
    fill_market_scalars(c, spec, model);
    if (model.kind == ModelKind::FilteredOU) {
        c.P0 = steady_state_variance(spec, model);
        c.theta_vec = c.P0 * spec.mu + model.sigma * spec.rho;
        derive_fou_tail(c, model, model.a + c.q * c.theta_vec.dot(spec.mu));
    } else {
        derive_scalar_model(c, model);
    }
    return c;
}

DerivedConstants derive_constants_fixed_theta(const PreferenceMarketSpec& spec,
                                              const StateModelSpec& model, const Vec& theta_vec,
                                              double P0) {
    if (model.kind != ModelKind::FilteredOU)
        throw InvalidSpec("fixed-theta derivation only applies to the filtered OU model");
    validate(spec);
    validate(model);
    DerivedConstants c;
    fill_market_scalars(c, spec, model);
    c.P0 = P0;
    c.theta_vec = theta_vec;
    derive_fou_tail(c, model, model.a + c.q * theta_vec.dot(spec.mu));
    return c;
}

Eigenpair eigenpair(const StateModelSpec& model, const DerivedConstants& c) {
    if (!c.assumption_ok) throw AssumptionViolated(c.assumption_msg);
    Eigenpair e;
    e.lambda = c.lambda;
    const double eta = c.eta, xi = c.xi;
    switch (model.kind) {
        case ModelKind::ThreeHalves:
            e.phi = [eta](double z) { return std::pow(z, -eta); };
            e.dlog_phi = [eta](double z) { return -eta / z; };
            e.d2_phi = [eta](double z) { return eta * (eta + 1.0) * std::pow(z, -eta - 2.0); };
            break;
        case ModelKind::InverseBessel:
            e.phi = [eta, xi](double z) { return std::pow(z, -eta) * std::exp(xi / z); };
            e.dlog_phi = [eta, xi](double z) { return -eta / z - xi / (z * z); };
            e.d2_phi = [eta, xi](double z) {
                const double g = -eta / z - xi / (z * z);
                const double dg = eta / (z * z) + 2.0 * xi / (z * z * z);
                return (g * g + dg) * std::pow(z, -eta) * std::exp(xi / z);
            };
            break;
        case ModelKind::FilteredOU:
            e.phi = [eta, xi](double z) { return std::exp(-eta * z * z - xi * z); };
            e.dlog_phi = [eta, xi](double z) { return -(2.0 * eta * z + xi); };
            e.d2_phi = [eta, xi](double z) {
                const double g = 2.0 * eta * z + xi;
                return (g * g - 2.0 * eta) * std::exp(-eta * z * z - xi * z);
            };
            break;
    }
    return e;
}

double fk_diffusion(const StateModelSpec& model, const DerivedConstants& c, double z) {
    switch (model.kind) {
        case ModelKind::ThreeHalves: return model.sigma * z * std::sqrt(z);
        case ModelKind::InverseBessel: return model.sigma * z * z;
        case ModelKind::FilteredOU: return std::sqrt(c.theta_norm2);
    }
    return 0.0;
}

double fk_drift(const StateModelSpec& model, const DerivedConstants& c, double z) {
    const DriftPair d = drift_pair(model, c, MeasureTag::P);
    switch (model.kind) {
        case ModelKind::ThreeHalves: return (d.B - d.A * z) * z;
        case ModelKind::InverseBessel: return (d.B - d.A * z) * z * z;
        case ModelKind::FilteredOU: return d.B - d.A * z;
    }
    return 0.0;
}

double potential(const DerivedConstants& c, double z) {
    const double g = (c.kind == ModelKind::ThreeHalves) ? z : z * z;
    return c.pot_const + c.pot_slope * g;
}

DriftPair drift_pair(const StateModelSpec& model, const DerivedConstants& c, MeasureTag measure) {
    const double s2 = model.sigma * model.sigma;
    switch (model.kind) {
        case ModelKind::ThreeHalves:
            switch (measure) {
                case MeasureTag::P: return {model.b, c.theta};
                case MeasureTag::PTilde: return {model.b, c.theta + s2 * c.eta};
                case MeasureTag::PHat: return {model.b, c.theta + s2 * (c.eta + 0.5)};
                case MeasureTag::PBar: return {model.b, c.theta + s2 * (c.eta + 1.0)};
            }
            break;
        case ModelKind::InverseBessel:
            switch (measure) {
                case MeasureTag::P: return {model.b, c.theta};
                case MeasureTag::PTilde: return {model.b - s2 * c.xi, c.theta + s2 * c.eta};
                case MeasureTag::PHat:
                    return {model.b - s2 * (c.xi + c.zeta), c.theta + s2 * (c.eta + 1.0)};
                case MeasureTag::PBar: {
                    const double bh = model.b - s2 * (c.xi + c.zeta);
                    const double vs = bh / (c.theta + s2 * (c.eta + 3.0));
                    return {bh - s2 * vs, c.theta + s2 * (c.eta + 2.0)};
                }
            }
            break;
        case ModelKind::FilteredOU:
            switch (measure) {
                case MeasureTag::P: return {model.b, c.theta}; // theta holds a_eff here
                case MeasureTag::PTilde:
                    return {model.b - c.theta_norm2 * c.xi, c.lambda_hat};
                default:
                    throw UnsupportedMeasurePair(
                        "measure " + to_string(measure) + " is not defined for the filtered OU model");
            }
            break;
    }
    throw UnsupportedMeasurePair("unhandled measure tag");
}

double eigen_residual(const StateModelSpec& model, const DerivedConstants& c,
                      const std::vector<double>& grid) {
    if (grid.empty()) throw EmptyGrid("eigen_residual needs a non-empty grid");
    const Eigenpair e = eigenpair(model, c);
    double worst = 0.0;
    for (double z : grid) {
        const double phi = e.phi(z);
        const double dphi = e.dlog_phi(z) * phi;
        const double d2phi = e.d2_phi(z);
        const double sig = fk_diffusion(model, c, z);
        const double lhs = 0.5 * sig * sig * d2phi + fk_drift(model, c, z) * dphi -
                           potential(c, z) * phi + e.lambda * phi;
        const double res = std::abs(lhs) / std::max(1.0, std::abs(phi));
        worst = std::max(worst, res);
    }
    return worst;
}

} // namespace fundsep
