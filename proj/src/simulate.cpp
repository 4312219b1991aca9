#include "fundsep/simulate.hpp"

#include <atomic>
#include <cmath>
#include <cstring>

#include "fundsep/constants.hpp"
#include "fundsep/parallel.hpp"
#include "fundsep/rng.hpp"

namespace fundsep {

const std::vector<double>& PathBatch::terminal_states() const {
    if (states.empty()) throw EmptyGrid("batch holds no states");
    return states.back();
}

const std::vector<double>& PathBatch::functional(Functional f) const {
    const auto it = integrals.find(f);
    if (it == integrals.end())
        throw MissingFunctional("requested functional was not accumulated in this batch");
    return it->second;
}

namespace {

struct FuncFlags {
    bool int_z = false, int_z2 = false, int_v = false;
    bool bt = false, int_zdb = false, int_sqrtzdb = false, int_invsqrtzdb = false;
};

FuncFlags make_flags(const std::vector<Functional>& fs) {
    FuncFlags f;
    for (Functional fn : fs) {
        switch (fn) {
            case Functional::IntZ: f.int_z = true; break;
            case Functional::IntZ2: f.int_z2 = true; break;
            case Functional::IntV: f.int_v = true; break;
            case Functional::BrownianTerminal: f.bt = true; break;
            case Functional::IntZdB: f.int_zdb = true; break;
            case Functional::IntSqrtZdB: f.int_sqrtzdb = true; break;
            case Functional::IntInvSqrtZdB: f.int_invsqrtzdb = true; break;
        }
    }
    return f;
}

struct Accum {
    double int_z = 0, int_z2 = 0, int_v = 0, bt = 0, int_zdb = 0, int_sqrtzdb = 0,
           int_invsqrtzdb = 0;
};

Scheme resolve_scheme(const StateModelSpec& model, Scheme s) {
    const Scheme native = model.kind == ModelKind::ThreeHalves ? Scheme::ReciprocalCir
                          : model.kind == ModelKind::InverseBessel ? Scheme::EulerFullTruncation
                                                                   : Scheme::ExactOU;
    if (s == Scheme::Auto || s == native) return native;
    throw ConfigError("scheme is not compatible with model " + to_string(model.kind));
}

} // namespace

PathBatch simulate(const StateModelSpec& model, const DerivedConstants& c, MeasureTag measure,
                   double z0, const SimConfig& cfg, const std::vector<Functional>& funcs,
                   StoragePolicy storage) {
    if (!c.assumption_ok) throw AssumptionViolated(c.assumption_msg);
    if (!(cfg.dt > 0.0) || !(cfg.horizon >= cfg.dt))
        throw ConfigError("need 0 < dt <= horizon");
    if (cfg.n_paths == 0) throw ConfigError("n_paths must be positive");
    if (model.kind != ModelKind::FilteredOU && !(z0 > 0.0))
        throw NonPositiveState("state must start positive for this model");

    resolve_scheme(model, cfg.scheme);

    PathBatch batch;
    batch.kind = model.kind;
    batch.measure = measure;
    batch.z0 = z0;
    batch.cfg = cfg;
    if (batch.cfg.antithetic && batch.cfg.n_paths % 2 != 0) batch.cfg.n_paths += 1;
    const std::size_t n_paths = batch.cfg.n_paths;

    const std::size_t n_steps =
        static_cast<std::size_t>(std::llround(std::ceil(cfg.horizon / cfg.dt - 1e-12)));
    const double dt = cfg.horizon / static_cast<double>(n_steps);
    const double sqdt = std::sqrt(dt);

    const std::size_t n_stored = storage == StoragePolicy::FullGrid ? n_steps + 1 : 2;
    batch.times.resize(n_stored);
    if (storage == StoragePolicy::FullGrid) {
        for (std::size_t k = 0; k <= n_steps; ++k) batch.times[k] = k * dt;
    } else {
        batch.times = {0.0, cfg.horizon};
    }
    batch.states.assign(n_stored, std::vector<double>(n_paths, z0));

    const FuncFlags ff = make_flags(funcs);
    for (Functional fn : funcs) batch.integrals[fn].assign(n_paths, 0.0);

    const DriftPair dp = drift_pair(model, c, measure);
    const double sig = model.sigma;
    const double s2 = sig * sig;

    // per-model stepping constants
    const double cir_drift0 = dp.A + s2;              // 3/2 reciprocal: dX = (A+s2-BX)dt - s sqrt(X) dB
    const double x_floor = 0.5 * cir_drift0 * dt;     // cap on 1/Z after a zero-crossing
    const double q_drift0 = 2.0 * dp.A + 3.0 * s2;    // invB reciprocal-square
    const double q_floor = 0.5 * q_drift0 * dt;
    double ou_e = 0.0, ou_m = 0.0, ou_c1 = 0.0, ou_c2 = 0.0, ou_s = 0.0;
    if (model.kind == ModelKind::FilteredOU) {
        if (!(dp.A > 0.0)) throw ParameterOutOfRange("OU reversion must be positive");
        ou_s = std::sqrt(c.theta_norm2);
        ou_e = std::exp(-dp.A * dt);
        ou_m = dp.B / dp.A;
        const double var = c.theta_norm2 * (1.0 - ou_e * ou_e) / (2.0 * dp.A);
        const double cov = ou_s * (1.0 - ou_e) / dp.A; // with the step's Brownian increment
        ou_c1 = cov / sqdt;
        ou_c2 = std::sqrt(std::max(0.0, var - ou_c1 * ou_c1));
    }

    std::atomic<std::uint64_t> clamps{0};
    std::atomic<std::uint64_t> checksum{0};
    const bool anti = batch.cfg.antithetic;
    const std::size_t n_units = anti ? n_paths / 2 : n_paths;

    auto worker = [&](std::size_t lo, std::size_t hi) {
        std::uint64_t local_clamps = 0;
        std::uint64_t local_cs = 0;
        std::vector<double> normals;
        const int draws_per_step = model.kind == ModelKind::FilteredOU ? 2 : 1;
        normals.resize(n_steps * draws_per_step);

        for (std::size_t unit = lo; unit < hi; ++unit) {
            PathRng rng(cfg.seed, unit);
            for (double& nv : normals) nv = rng.normal();
            local_cs ^= rng.checksum();

            const int legs = anti ? 2 : 1;
            for (int leg = 0; leg < legs; ++leg) {
                const double flip = leg == 0 ? 1.0 : -1.0;
                const std::size_t path = anti ? 2 * unit + leg : unit;

                double z = z0;
                // transformed state for the positive models
                double x = model.kind == ModelKind::ThreeHalves ? 1.0 / z0
                           : model.kind == ModelKind::InverseBessel ? 1.0 / (z0 * z0)
                                                                    : z0;
                Accum ac;
                for (std::size_t k = 0; k < n_steps; ++k) {
                    const double zc = z; // left-point state
                    double dW, z_next;
                    if (model.kind == ModelKind::FilteredOU) {
                        const double n1 = flip * normals[2 * k];
                        const double n2 = flip * normals[2 * k + 1];
                        dW = sqdt * n1;
                        z_next = ou_m + (x - ou_m) * ou_e + ou_c1 * n1 + ou_c2 * n2;
                        x = z_next;
                    } else if (model.kind == ModelKind::ThreeHalves) {
                        const double n1 = flip * normals[k];
                        dW = sqdt * n1;
                        const double xp = x > 0.0 ? x : 0.0;
                        if (x <= 0.0) ++local_clamps;
                        x += (cir_drift0 - dp.B * xp) * dt - sig * std::sqrt(xp) * dW;
                        z_next = 1.0 / std::max(x, x_floor);
                    } else {
                        const double n1 = flip * normals[k];
                        dW = sqdt * n1;
                        const double qp = x > 0.0 ? x : 0.0;
                        if (x <= 0.0) ++local_clamps;
                        x += (q_drift0 - 2.0 * dp.B * std::sqrt(qp)) * dt -
                             2.0 * sig * std::sqrt(qp) * dW;
                        z_next = 1.0 / std::sqrt(std::max(x, q_floor));
                    }

                    if (ff.int_z) ac.int_z += 0.5 * (zc + z_next) * dt;
                    if (ff.int_z2) ac.int_z2 += 0.5 * (zc * zc + z_next * z_next) * dt;
                    if (ff.int_v) {
                        const double gl = c.kind == ModelKind::ThreeHalves ? zc : zc * zc;
                        const double gr =
                            c.kind == ModelKind::ThreeHalves ? z_next : z_next * z_next;
                        ac.int_v += (c.pot_const + c.pot_slope * 0.5 * (gl + gr)) * dt;
                    }
                    if (ff.bt) ac.bt += dW;
                    if (ff.int_zdb) ac.int_zdb += zc * dW;
                    if (ff.int_sqrtzdb) ac.int_sqrtzdb += std::sqrt(zc) * dW;
                    if (ff.int_invsqrtzdb) ac.int_invsqrtzdb += dW / std::sqrt(zc);

                    z = z_next;
                    if (storage == StoragePolicy::FullGrid) batch.states[k + 1][path] = z;
                }
                if (storage != StoragePolicy::FullGrid) batch.states.back()[path] = z;

                if (ff.int_z) batch.integrals[Functional::IntZ][path] = ac.int_z;
                if (ff.int_z2) batch.integrals[Functional::IntZ2][path] = ac.int_z2;
                if (ff.int_v) batch.integrals[Functional::IntV][path] = ac.int_v;
                if (ff.bt) batch.integrals[Functional::BrownianTerminal][path] = ac.bt;
                if (ff.int_zdb) batch.integrals[Functional::IntZdB][path] = ac.int_zdb;
                if (ff.int_sqrtzdb) batch.integrals[Functional::IntSqrtZdB][path] = ac.int_sqrtzdb;
                if (ff.int_invsqrtzdb)
                    batch.integrals[Functional::IntInvSqrtZdB][path] = ac.int_invsqrtzdb;
            }
        }
        clamps += local_clamps;
        // xor-fold so the combined value is independent of worker layout
        std::uint64_t seen = checksum.load();
        while (!checksum.compare_exchange_weak(seen, seen ^ local_cs)) {}
    };

    parallel_for(n_units, worker);

    batch.clamp_count = clamps.load();
    batch.total_steps = n_steps * n_paths;
    batch.rng_checksum = checksum.load();

    if (batch.clamp_count > batch.total_steps / 100)
        throw NonPositiveState("more than 1% of steps hit the positivity clamp; reduce dt");
    return batch;
}

std::vector<double> flow_derivative(const StateModelSpec& model, const DerivedConstants& c,
                                    const PathBatch& batch) {
    const DriftPair dp = drift_pair(model, c, batch.measure);
    const double T = batch.cfg.horizon;
    const double s2 = model.sigma * model.sigma;
    const std::size_t n = batch.n_paths();
    std::vector<double> out(n);
    switch (model.kind) {
        case ModelKind::ThreeHalves: {
            const auto& iz = batch.functional(Functional::IntZ);
            const auto& zt = batch.terminal_states();
            const double w = 0.5 * dp.A + 3.0 * s2 / 8.0;
            for (std::size_t i = 0; i < n; ++i) {
                out[i] = std::pow(zt[i] / batch.z0, 1.5) *
                         std::exp(-0.5 * dp.B * T - w * iz[i]);
            }
            break;
        }
        case ModelKind::InverseBessel: {
            const auto& iz2 = batch.functional(Functional::IntZ2);
            const auto& zt = batch.terminal_states();
            for (std::size_t i = 0; i < n; ++i) {
                const double ratio = zt[i] / batch.z0;
                out[i] = ratio * ratio * std::exp(-(dp.A + s2) * iz2[i]);
            }
            break;
        }
        case ModelKind::FilteredOU: {
            const double v = std::exp(-dp.A * T);
            out.assign(n, v);
            break;
        }
    }
    return out;
}

std::vector<double> girsanov_weights(const StateModelSpec& model, const DerivedConstants& c,
                                     MeasureTag target, const PathBatch& batch) {
    const Eigenpair e = eigenpair(model, c);
    const double T = batch.cfg.horizon;
    const std::size_t n = batch.n_paths();
    const auto& zt = batch.terminal_states();
    std::vector<double> out(n);

    if (batch.measure == MeasureTag::P && target == MeasureTag::PTilde) {
        const auto& iv = batch.functional(Functional::IntV);
        const double lphi0 = std::log(e.phi(batch.z0));
        for (std::size_t i = 0; i < n; ++i)
            out[i] = std::exp(c.lambda * T - iv[i] + std::log(e.phi(zt[i])) - lphi0);
        return out;
    }
    if (batch.measure == MeasureTag::PTilde && target == MeasureTag::P) {
        const auto& iv = batch.functional(Functional::IntV);
        const double lphi0 = std::log(e.phi(batch.z0));
        for (std::size_t i = 0; i < n; ++i)
            out[i] = std::exp(-c.lambda * T + iv[i] + lphi0 - std::log(e.phi(zt[i])));
        return out;
    }
    if (batch.measure == MeasureTag::PTilde && target == MeasureTag::PHat) {
        const double s2 = model.sigma * model.sigma;
        const DriftPair tl = drift_pair(model, c, MeasureTag::PTilde);
        if (model.kind == ModelKind::ThreeHalves) {
            // secondary pair (b/2, z^{-1/2}) inside the tilted dynamics
            const auto& iz = batch.functional(Functional::IntZ);
            const double w1 = 0.5 * tl.A + 3.0 * s2 / 8.0;
            for (std::size_t i = 0; i < n; ++i)
                out[i] = std::exp(0.5 * model.b * T - w1 * iz[i]) *
                         std::sqrt(batch.z0 / zt[i]);
            return out;
        }
        if (model.kind == ModelKind::InverseBessel) {
            // secondary pair (lambda_hat, z^{-1} e^{zeta/z})
            const auto& iz2 = batch.functional(Functional::IntZ2);
            const double w2 = tl.A + s2;
            for (std::size_t i = 0; i < n; ++i)
                out[i] = std::exp(c.lambda_hat * T - w2 * iz2[i] + c.zeta / zt[i] -
                                  c.zeta / batch.z0) *
                         batch.z0 / zt[i];
            return out;
        }
    }
    throw UnsupportedMeasurePair("no change-of-measure weight for " + to_string(batch.measure) +
                                 " -> " + to_string(target) + " on " + to_string(model.kind));
}

McEstimate reduce_mc(const PathBatch& batch, const std::vector<double>& per_path) {
    if (per_path.size() != batch.n_paths())
        throw ValidationError("per-path vector does not match the batch");
    McEstimate est;
    est.seed = batch.cfg.seed;
    est.n_paths = per_path.size();
    est.rng_checksum = batch.rng_checksum;

    const bool anti = batch.cfg.antithetic;
    const std::size_t m = anti ? per_path.size() / 2 : per_path.size();
    if (m == 0) throw EmptyGrid("no paths to reduce");

    double mean = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double v = anti ? 0.5 * (per_path[2 * i] + per_path[2 * i + 1]) : per_path[i];
        mean += v;
    }
    mean /= static_cast<double>(m);
    double ss = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double v = anti ? 0.5 * (per_path[2 * i] + per_path[2 * i + 1]) : per_path[i];
        ss += (v - mean) * (v - mean);
    }
    est.value = mean;
    est.std_error = m > 1 ? std::sqrt(ss / (double(m) * double(m - 1))) : 0.0;
    if (!std::isfinite(est.value) || !std::isfinite(est.std_error))
        throw NonFinite("Monte Carlo reduction produced a non-finite value");
    return est;
}

} // namespace fundsep
