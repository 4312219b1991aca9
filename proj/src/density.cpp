#include "fundsep/density.hpp"

#include <cmath>
#include <limits>

#include "fundsep/constants.hpp"
#include "fundsep/quadrature.hpp"

namespace fundsep {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// inverse-gamma(alpha, beta): pdf = beta^alpha / Gamma(alpha) z^{-alpha-1} e^{-beta/z}
InvariantDensity inverse_gamma(double alpha, double beta) {
    if (!(alpha > 0.0) || !(beta > 0.0))
        throw ParameterOutOfRange("inverse-gamma needs positive shape and scale");
    InvariantDensity d;
    d.lower = 0.0;
    d.upper = kInf;
    d.shape = alpha;
    d.scale = beta;
    d.mean = alpha > 1.0 ? beta / (alpha - 1.0) : std::numeric_limits<double>::quiet_NaN();
    const double logc = alpha * std::log(beta) - std::lgamma(alpha);
    d.pdf = [logc, alpha, beta](double z) {
        if (z <= 0.0) return 0.0;
        return std::exp(logc - (alpha + 1.0) * std::log(z) - beta / z);
    };
    return d;
}

} // namespace

InvariantDensity invariant_density(const StateModelSpec& model, const DerivedConstants& c,
                                   MeasureTag measure) {
    const DriftPair dp = drift_pair(model, c, measure);
    const double s2 = model.sigma * model.sigma;
    InvariantDensity d;
    switch (model.kind) {
        case ModelKind::ThreeHalves:
            // speed density of (B - A z) z with vol sigma z^{3/2}
            d = inverse_gamma(2.0 * dp.A / s2 + 2.0, 2.0 * dp.B / s2);
            break;
        case ModelKind::InverseBessel:
            d = inverse_gamma(2.0 * dp.A / s2 + 3.0, 2.0 * dp.B / s2);
            break;
        case ModelKind::FilteredOU: {
            if (!(dp.A > 0.0))
                throw ParameterOutOfRange("OU reversion must be positive for stationarity");
            const double m = dp.B / dp.A;
            const double sd = std::sqrt(c.theta_norm2 / (2.0 * dp.A));
            d.lower = -kInf;
            d.upper = kInf;
            d.shape = m;
            d.scale = sd;
            d.mean = m;
            d.pdf = [m, sd](double z) {
                const double u = (z - m) / sd;
                return std::exp(-0.5 * u * u) / (sd * 2.5066282746310005);
            };
            break;
        }
    }
    // sanity: closed-form normalization really integrates to 1
    const double mass = integrate(d.pdf, d.lower, d.upper, 1e-8);
    if (std::abs(mass - 1.0) > 1e-7)
        throw QuadratureFailure("invariant density normalization check failed");
    return d;
}

double density_moment(const InvariantDensity& d, const std::function<double(double)>& g) {
    const double inf = std::numeric_limits<double>::infinity();
    if (d.lower == 0.0 && d.upper == inf) {
        // the inverse-gamma families have algebraic tails, which the rational
        // change of variables behind the infinite-range rule resolves too
        // slowly; in log coordinates both tails decay (doubly) exponentially
        return integrate(
            [&](double v) {
                const double z = std::exp(v);
                if (z == 0.0 || !std::isfinite(z)) return 0.0;
                const double w = d.pdf(z) * z;
                // skip g where the density has underflowed: far in the tail a
                // polynomially growing g would otherwise produce inf * 0
                if (w == 0.0) return 0.0;
                return g(z) * w;
            },
            -inf, inf, 1e-9);
    }
    return integrate(
        [&](double z) {
            const double w = d.pdf(z);
            if (w == 0.0) return 0.0;
            return g(z) * w;
        },
        d.lower, d.upper, 1e-9);
}

namespace {

// integral of f over [a,b] at three refinement levels; the refinement walks
// the moving endpoint toward the singular/infinite boundary
struct LevelScan {
    double vals[3];
    bool divergent(double threshold) const {
        for (double v : vals)
            if (!std::isfinite(v)) return true;
        if (vals[2] > threshold) return true;
        // sustained growth without stabilizing
        return vals[0] > 0.0 && vals[1] > 5.0 * vals[0] && vals[2] > 5.0 * vals[1];
    }
};

LevelScan scan_to_boundary(const std::function<double(double)>& f, double fixed, double boundary,
                           bool boundary_is_lower) {
    LevelScan s{};
    for (int level = 0; level < 3; ++level) {
        double a, b;
        if (std::isinf(boundary)) {
            const double r = std::pow(10.0, 2 + 2 * level) * std::max(1.0, std::abs(fixed));
            a = boundary_is_lower ? -r : fixed;
            b = boundary_is_lower ? fixed : r;
        } else {
            const double eps =
                std::pow(10.0, -(3 + 2 * level)) * std::max(1.0, std::abs(fixed - boundary));
            a = boundary_is_lower ? boundary + eps : fixed;
            b = boundary_is_lower ? fixed : boundary - eps;
        }
        s.vals[level] = integrate_allow_blowup(f, a, b);
    }
    return s;
}

} // namespace

RecurrenceReport positive_recurrence_check(const std::function<double(double)>& drift,
                                           const std::function<double(double)>& diffusion,
                                           double lo, double hi, double center, double threshold) {
    // scale density s(x) = exp(-int_c^x 2 drift/diff^2); computed with a nested
    // quadrature, capped to avoid overflow turning into NaN arithmetic
    auto log_scale = [&](double x) {
        const double v = integrate_allow_blowup(
            [&](double y) {
                const double d = diffusion(y);
                return 2.0 * drift(y) / (d * d);
            },
            std::min(center, x), std::max(center, x));
        return x >= center ? -v : v;
    };
    auto scale = [&](double x) {
        const double ls = log_scale(x);
        return ls > 700.0 ? kInf : std::exp(ls);
    };
    auto speed = [&](double x) {
        const double d = diffusion(x);
        const double ls = log_scale(x);
        if (ls < -700.0) return 0.0;
        return std::exp(-ls) / (d * d);
    };

    RecurrenceReport rep;
    rep.scale_diverges_lower = scan_to_boundary(scale, center, lo, true).divergent(threshold);
    rep.scale_diverges_upper = scan_to_boundary(scale, center, hi, false).divergent(threshold);

    const LevelScan sp_lo = scan_to_boundary(speed, center, lo, true);
    const LevelScan sp_hi = scan_to_boundary(speed, center, hi, false);
    rep.speed_finite = !sp_lo.divergent(threshold) && !sp_hi.divergent(threshold);
    rep.speed_mass = sp_lo.vals[2] + sp_hi.vals[2];
    rep.positive_recurrent =
        rep.scale_diverges_lower && rep.scale_diverges_upper && rep.speed_finite;
    return rep;
}

RecurrenceReport positive_recurrence_check(const StateModelSpec& model, const DerivedConstants& c,
                                           MeasureTag measure, double threshold) {
    const DriftPair dp = drift_pair(model, c, measure);
    const double sig = model.sigma;
    switch (model.kind) {
        case ModelKind::ThreeHalves:
            return positive_recurrence_check(
                [dp](double z) { return (dp.B - dp.A * z) * z; },
                [sig](double z) { return sig * z * std::sqrt(z); }, 0.0, kInf, dp.B / std::max(dp.A, 1e-8),
                threshold);
        case ModelKind::InverseBessel:
            return positive_recurrence_check(
                [dp](double z) { return (dp.B - dp.A * z) * z * z; },
                [sig](double z) { return sig * z * z; }, 0.0, kInf, dp.B / std::max(dp.A, 1e-8),
                threshold);
        case ModelKind::FilteredOU: {
            const double s = std::sqrt(c.theta_norm2);
            return positive_recurrence_check([dp](double z) { return dp.B - dp.A * z; },
                                             [s](double) { return s; }, -kInf, kInf,
                                             dp.B / std::max(dp.A, 1e-8), threshold);
        }
    }
    throw InvalidSpec("unhandled model kind");
}

} // namespace fundsep
