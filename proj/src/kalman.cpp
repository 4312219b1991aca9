#include "fundsep/kalman.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "fundsep/constants.hpp"
#include "fundsep/portfolio.hpp"
#include "fundsep/rng.hpp"

namespace fundsep {

void validate(const PriceSeries& series) {
    if (series.times.size() < 2) throw ValidationError("price series needs at least two times");
    if (static_cast<std::size_t>(series.prices.cols()) != series.times.size())
        throw ValidationError("price matrix column count does not match the time grid");
    if (series.prices.rows() < 1) throw ValidationError("price series has no assets");
    for (std::size_t k = 1; k < series.times.size(); ++k)
        if (!(series.times[k] > series.times[k - 1]))
            throw ValidationError("times not strictly increasing at index " + std::to_string(k));
    for (Eigen::Index i = 0; i < series.prices.rows(); ++i)
        for (Eigen::Index k = 0; k < series.prices.cols(); ++k)
            if (!(series.prices(i, k) > 0.0) || !std::isfinite(series.prices(i, k)))
                throw ValidationError("non-positive price for asset " + std::to_string(i + 1) +
                                      " at time index " + std::to_string(k));
}

double riccati_residual(const PreferenceMarketSpec& spec, const StateModelSpec& model, double P) {
    const double rho_mu = spec.rho.dot(spec.mu);
    const double mu2 = spec.mu.squaredNorm();
    const double rho2 = spec.rho.squaredNorm();
    return -2.0 * (model.a + model.sigma * rho_mu) * P +
           model.sigma * model.sigma * (1.0 - rho2) - mu2 * P * P;
}

Vec filter_gain(const PreferenceMarketSpec& spec, const StateModelSpec& model, double P0) {
    // gain' = (P0 mu' + sigma rho') Sigma^{-1}
    const Vec theta = P0 * spec.mu + model.sigma * spec.rho;
    return solve_sigma_t(spec, theta);
}

JointSample simulate_joint(const PreferenceMarketSpec& spec, const StateModelSpec& model,
                           const SimConfig& cfg, double y0) {
    validate(spec);
    if (model.kind != ModelKind::FilteredOU)
        throw ConfigError("joint price/state simulation applies to the filtered OU model");
    if (!(model.a > 0.0)) throw ParameterOutOfRange("mean reversion a must be positive");
    if (!(cfg.dt > 0.0) || !(cfg.horizon > 0.0))
        throw ConfigError("need positive dt and horizon");

    const std::size_t n = spec.n_assets();
    const std::size_t m =
        static_cast<std::size_t>(std::ceil(cfg.horizon / cfg.dt - 1e-12));
    if (m == 0) throw ConfigError("horizon shorter than one step");
    const double dt = cfg.horizon / static_cast<double>(m);
    const double sdt = std::sqrt(dt);

    const double rho2 = spec.rho.squaredNorm();
    const double resid = std::sqrt(std::max(0.0, 1.0 - rho2));

    // exact OU step conditional on the realized B increment:
    // Y' = Y e + (b/a)(1-e) + sigma * I, I ~ conditional on dB with
    // cov(I, dB) = cv, var(I) = v_b
    const double e = std::exp(-model.a * dt);
    const double cv = -std::expm1(-model.a * dt) / model.a;
    const double v_b = -std::expm1(-2.0 * model.a * dt) / (2.0 * model.a);
    const double c1 = cv / dt;                                  // coefficient on dB
    const double c_res = std::sqrt(std::max(0.0, v_b - cv * cv / dt));
    const double mean_pull = model.b / model.a;

    const Vec sig_mu = spec.sigma * spec.mu;
    Vec ito_half(n);
    for (std::size_t i = 0; i < n; ++i) ito_half[i] = 0.5 * spec.sigma.row(i).squaredNorm();

    JointSample out;
    out.times.resize(m + 1);
    out.y.resize(m + 1);
    out.d_b.resize(m);
    out.d_w = Mat(n, m);
    out.prices.times.resize(m + 1);
    out.prices.prices = Mat(n, m + 1);

    PathRng rng(cfg.seed, 0);
    double y = std::isfinite(y0) ? y0 : mean_pull;
    Vec log_p = Vec::Zero(n);
    out.times[0] = 0.0;
    out.prices.times[0] = 0.0;
    out.y[0] = y;
    out.prices.prices.col(0) = Vec::Ones(n);

    for (std::size_t k = 0; k < m; ++k) {
        Vec dw(n);
        for (std::size_t i = 0; i < n; ++i) dw[i] = sdt * rng.normal();
        const double db = spec.rho.dot(dw) + resid * sdt * rng.normal();
        const double n_y = rng.normal();

        // log-Euler prices from the left-point hidden state
        log_p += (Vec::Constant(n, spec.r) + sig_mu * y - ito_half) * dt + spec.sigma * dw;
        // exact OU transition consistent with the same dB
        y = y * e + mean_pull * (1.0 - e) + model.sigma * (c1 * db + c_res * n_y);

        out.d_w.col(k) = dw;
        out.d_b[k] = db;
        out.times[k + 1] = dt * static_cast<double>(k + 1);
        out.prices.times[k + 1] = out.times[k + 1];
        out.y[k + 1] = y;
        out.prices.prices.col(k + 1) = log_p.array().exp().matrix();
    }
    validate(out.prices);
    return out;
}

FilterResult run_filter(const PreferenceMarketSpec& spec, const StateModelSpec& model, double P0,
                        const PriceSeries& prices, double y0_hat) {
    validate(spec);
    validate(prices);
    if (!(P0 >= 0.0) || !std::isfinite(P0))
        throw ParameterOutOfRange("conditional variance P0 must be finite and nonnegative");
    const std::size_t n = spec.n_assets();
    if (prices.n_assets() != n)
        throw ValidationError("price series asset count does not match the market spec");

    const std::size_t m = prices.times.size() - 1;
    const Vec gain = filter_gain(spec, model, P0);
    const Vec sig_mu = spec.sigma * spec.mu;
    Vec ito_half(n);
    for (std::size_t i = 0; i < n; ++i) ito_half[i] = 0.5 * spec.sigma.row(i).squaredNorm();

    FilterResult out;
    out.times = prices.times;
    out.y_hat.resize(m + 1);
    out.innovations = Mat(n, m);
    out.gain = gain;
    out.P0 = P0;

    double y = std::isfinite(y0_hat)
                   ? y0_hat
                   : (model.a > 0.0 ? model.b / model.a : 0.0);
    out.y_hat[0] = y;
    for (std::size_t k = 0; k < m; ++k) {
        const double dt = prices.times[k + 1] - prices.times[k];
        const Vec dlog = (prices.prices.col(k + 1).array().log() -
                          prices.prices.col(k).array().log())
                             .matrix();
        const Vec dnu =
            dlog + (ito_half - Vec::Constant(n, spec.r) - sig_mu * y) * dt;
        y += (model.b - model.a * y) * dt + gain.dot(dnu);
        if (!std::isfinite(y) || std::abs(y) > 1e12)
            throw NonFinite("filtered state diverged (time step too large?)");
        out.innovations.col(k) = dnu;
        out.y_hat[k + 1] = y;
    }
    return out;
}

double filter_mse(const JointSample& joint, const FilterResult& filtered,
                  double discard_fraction) {
    if (joint.times.size() != filtered.times.size())
        throw ValidationError("joint sample and filter output live on different grids");
    if (!(discard_fraction >= 0.0) || !(discard_fraction < 1.0))
        throw ParameterOutOfRange("discard fraction must lie in [0,1)");
    const std::size_t total = joint.times.size();
    const std::size_t start = static_cast<std::size_t>(discard_fraction * total);
    if (start >= total) throw EmptyGrid("no samples left after the discard window");
    double acc = 0.0;
    for (std::size_t k = start; k < total; ++k) {
        const double d = joint.y[k] - filtered.y_hat[k];
        acc += d * d;
    }
    return acc / static_cast<double>(total - start);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_cell(const std::string& text, std::size_t row, std::size_t col) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw ParseError("row " + std::to_string(row) + ", column " + std::to_string(col) +
                         ": cannot parse '" + text + "' as a number");
    }
    while (used < text.size() && (text[used] == ' ' || text[used] == '\t')) ++used;
    if (used != text.size())
        throw ParseError("row " + std::to_string(row) + ", column " + std::to_string(col) +
                         ": trailing characters in '" + text + "'");
    return v;
}

} // namespace

PriceSeries ingest_prices(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open price file '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw ParseError("price file '" + path + "' is empty");
    const std::vector<std::string> header = split_csv_line(line);
    if (header.size() < 2 || header[0] != "time")
        throw ParseError("row 1: header must be 'time,<asset>,...'");
    const std::size_t n = header.size() - 1;

    std::vector<double> times;
    std::vector<std::vector<double>> cols(n);
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw ParseError("row " + std::to_string(row) + ": expected " +
                             std::to_string(header.size()) + " fields, got " +
                             std::to_string(fields.size()));
        const double t = parse_cell(fields[0], row, 1);
        if (!times.empty() && !(t > times.back()))
            throw ValidationError("row " + std::to_string(row) +
                                  ": times not strictly increasing");
        times.push_back(t);
        for (std::size_t j = 0; j < n; ++j) {
            const double p = parse_cell(fields[j + 1], row, j + 2);
            if (!(p > 0.0))
                throw ValidationError("row " + std::to_string(row) + ", column " +
                                      std::to_string(j + 2) + " (" + header[j + 1] +
                                      "): price must be positive, got " + fields[j + 1]);
            cols[j].push_back(p);
        }
    }
    if (times.size() < 2) throw ValidationError("price file needs at least two data rows");

    PriceSeries out;
    out.times = times;
    out.prices = Mat(n, times.size());
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < times.size(); ++k) out.prices(j, k) = cols[j][k];
    validate(out);
    return out;
}

} // namespace fundsep
