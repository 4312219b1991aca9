#include "fundsep/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace fundsep {

RunConfig default_config(ModelKind kind) {
    RunConfig cfg;
    cfg.market.p = -1.0;
    cfg.market.r = 0.02;
    cfg.market.mu = Vec(2);
    cfg.market.mu << 0.8, 0.6;
    cfg.market.sigma = Mat(2, 2);
    cfg.market.sigma << 0.2, 0.0, 0.05, 0.25;
    cfg.market.rho = Vec(2);
    cfg.market.rho << -0.3, -0.1;

    cfg.model.kind = kind;
    if (kind == ModelKind::FilteredOU) {
        cfg.model.b = 0.5;
        cfg.model.a = 0.5;
        cfg.model.sigma = 0.5;
    } else if (kind == ModelKind::InverseBessel) {
        // b is sized so the convergence rate sits near 1 (lambda_hat scales
        // with b^2 here), keeping relaxation times comparable across models
        cfg.model.b = 2.4;
        cfg.model.a = 0.5;
        cfg.model.sigma = 0.8;
    } else {
        cfg.model.b = 1.0;
        cfg.model.a = 0.5;
        cfg.model.sigma = 0.8;
    }

    cfg.sim.dt = 1e-3;
    cfg.sim.n_paths = 10000;
    cfg.sim.seed = 1;
    cfg.sim.antithetic = true;
    cfg.sim.scheme = Scheme::Auto;

    cfg.experiment = ExperimentConfig{};
    return cfg;
}

namespace {

struct RawEntry {
    std::string value;
    std::size_t line = 0;
};

using Section = std::map<std::string, RawEntry>;

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

[[noreturn]] void fail(const std::string& origin, std::size_t line, const std::string& msg) {
    throw ParseError(origin + ":" + std::to_string(line) + ": " + msg);
}

double parse_number(const std::string& origin, std::size_t line, const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        fail(origin, line, "cannot parse '" + text + "' as a number");
    }
    if (used != text.size()) fail(origin, line, "trailing characters in number '" + text + "'");
    return v;
}

std::vector<double> parse_vector(const std::string& origin, std::size_t line,
                                 const std::string& text) {
    std::vector<double> out;
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) out.push_back(parse_number(origin, line, tok));
    if (out.empty()) fail(origin, line, "expected at least one number");
    return out;
}

bool parse_bool(const std::string& origin, std::size_t line, const std::string& text) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    fail(origin, line, "cannot parse '" + text + "' as a boolean");
}

Scheme parse_scheme(const std::string& origin, std::size_t line, const std::string& text) {
    if (text == "auto") return Scheme::Auto;
    if (text == "euler_full_truncation") return Scheme::EulerFullTruncation;
    if (text == "reciprocal_cir") return Scheme::ReciprocalCir;
    if (text == "exact_ou") return Scheme::ExactOU;
    fail(origin, line, "unknown scheme '" + text + "'");
}

void format_into(std::string& out, const char* key, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += key;
    out += " = ";
    out += buf;
    out += "\n";
}

} // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    std::map<std::string, Section> sections;
    std::map<std::string, std::size_t> section_lines;
    {
        std::istringstream in(text);
        std::string line;
        std::size_t lineno = 0;
        std::string current;
        while (std::getline(in, line)) {
            ++lineno;
            const std::size_t hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const std::string body = trim(line);
            if (body.empty()) continue;
            if (body.front() == '[') {
                if (body.back() != ']') fail(origin, lineno, "unterminated section header");
                current = trim(body.substr(1, body.size() - 2));
                if (current != "market" && current != "model" && current != "simulation" &&
                    current != "experiment")
                    fail(origin, lineno, "unknown section [" + current + "]");
                sections[current];
                section_lines[current] = lineno;
                continue;
            }
            const std::size_t eq = body.find('=');
            if (eq == std::string::npos) fail(origin, lineno, "expected 'key = value'");
            if (current.empty()) fail(origin, lineno, "key outside of any section");
            const std::string key = trim(body.substr(0, eq));
            const std::string value = trim(body.substr(eq + 1));
            if (key.empty()) fail(origin, lineno, "empty key");
            if (value.empty()) fail(origin, lineno, "empty value for key '" + key + "'");
            auto& sec = sections[current];
            if (sec.count(key)) fail(origin, lineno, "duplicate key '" + key + "'");
            sec[key] = {value, lineno};
        }
    }

    // the model section decides which default parameter block applies, so
    // resolve the kind first (order-independent semantics)
    ModelKind kind = ModelKind::ThreeHalves;
    if (sections.count("model") && sections["model"].count("kind")) {
        const RawEntry& ent = sections["model"]["kind"];
        try {
            kind = model_kind_from_string(ent.value);
        } catch (const Error& err) {
            fail(origin, ent.line, std::string("bad model kind: ") + err.what());
        }
    }
    RunConfig cfg = default_config(kind);

    const auto take = [&](const char* section, const char* key, const RawEntry*& out) {
        auto sit = sections.find(section);
        if (sit == sections.end()) return false;
        auto kit = sit->second.find(key);
        if (kit == sit->second.end()) return false;
        out = &kit->second;
        return true;
    };

    std::map<std::string, std::set<std::string>> known = {
        {"market", {"p", "r", "mu", "sigma", "rho"}},
        {"model", {"kind", "b", "a", "sigma"}},
        {"simulation", {"dt", "paths", "seed", "antithetic", "scheme", "horizon"}},
        {"experiment",
         {"z", "t", "horizon", "t_grid", "parameter", "y0_hat", "burn_in", "static",
          "representation"}},
    };
    for (const auto& [name, sec] : sections)
        for (const auto& [key, ent] : sec)
            if (!known[name].count(key))
                fail(origin, ent.line, "unknown key '" + key + "' in section [" + name + "]");

    const RawEntry* ent = nullptr;
    if (take("market", "p", ent)) cfg.market.p = parse_number(origin, ent->line, ent->value);
    if (take("market", "r", ent)) cfg.market.r = parse_number(origin, ent->line, ent->value);
    if (take("market", "mu", ent)) {
        const std::vector<double> v = parse_vector(origin, ent->line, ent->value);
        cfg.market.mu = Eigen::Map<const Vec>(v.data(), v.size());
    }
    if (take("market", "rho", ent)) {
        const std::vector<double> v = parse_vector(origin, ent->line, ent->value);
        cfg.market.rho = Eigen::Map<const Vec>(v.data(), v.size());
    }
    if (take("market", "sigma", ent)) {
        // rows separated by ';', entries by spaces
        std::vector<std::vector<double>> rows;
        std::string rest = ent->value;
        std::size_t pos = 0;
        while (pos <= rest.size()) {
            const std::size_t semi = rest.find(';', pos);
            const std::string part =
                trim(rest.substr(pos, semi == std::string::npos ? semi : semi - pos));
            if (!part.empty()) rows.push_back(parse_vector(origin, ent->line, part));
            if (semi == std::string::npos) break;
            pos = semi + 1;
        }
        if (rows.empty()) fail(origin, ent->line, "empty 'sigma' matrix");
        const std::size_t ncol = rows.front().size();
        for (const auto& r : rows)
            if (r.size() != ncol) fail(origin, ent->line, "ragged rows in 'sigma' matrix");
        Mat m(rows.size(), ncol);
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t j = 0; j < ncol; ++j) m(i, j) = rows[i][j];
        cfg.market.sigma = m;
    }

    if (take("model", "b", ent)) cfg.model.b = parse_number(origin, ent->line, ent->value);
    if (take("model", "a", ent)) cfg.model.a = parse_number(origin, ent->line, ent->value);
    if (take("model", "sigma", ent)) cfg.model.sigma = parse_number(origin, ent->line, ent->value);

    if (take("simulation", "dt", ent)) cfg.sim.dt = parse_number(origin, ent->line, ent->value);
    if (take("simulation", "horizon", ent))
        cfg.sim.horizon = parse_number(origin, ent->line, ent->value);
    if (take("simulation", "paths", ent)) {
        const double v = parse_number(origin, ent->line, ent->value);
        if (!(v >= 1.0) || v != std::floor(v)) fail(origin, ent->line, "paths must be a positive integer");
        cfg.sim.n_paths = static_cast<std::size_t>(v);
    }
    if (take("simulation", "seed", ent)) {
        const double v = parse_number(origin, ent->line, ent->value);
        if (!(v >= 0.0) || v != std::floor(v)) fail(origin, ent->line, "seed must be a nonnegative integer");
        cfg.sim.seed = static_cast<std::uint64_t>(v);
    }
    if (take("simulation", "antithetic", ent))
        cfg.sim.antithetic = parse_bool(origin, ent->line, ent->value);
    if (take("simulation", "scheme", ent))
        cfg.sim.scheme = parse_scheme(origin, ent->line, ent->value);

    if (take("experiment", "z", ent)) cfg.experiment.z = parse_number(origin, ent->line, ent->value);
    if (take("experiment", "t", ent)) cfg.experiment.t = parse_number(origin, ent->line, ent->value);
    if (take("experiment", "horizon", ent))
        cfg.experiment.horizon = parse_number(origin, ent->line, ent->value);
    if (take("experiment", "t_grid", ent))
        cfg.experiment.t_grid = parse_vector(origin, ent->line, ent->value);
    if (take("experiment", "parameter", ent)) cfg.experiment.parameter = ent->value;
    if (take("experiment", "y0_hat", ent))
        cfg.experiment.y0_hat = parse_number(origin, ent->line, ent->value);
    if (take("experiment", "burn_in", ent))
        cfg.experiment.burn_in = parse_number(origin, ent->line, ent->value);
    if (take("experiment", "static", ent))
        cfg.experiment.static_only = parse_bool(origin, ent->line, ent->value);
    if (take("experiment", "representation", ent)) {
        if (ent->value != "auto" && ent->value != "tilted" && ent->value != "doubly_tilted")
            fail(origin, ent->line, "representation must be auto, tilted, or doubly_tilted");
        cfg.experiment.representation = ent->value;
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

std::string canonical_config(const RunConfig& cfg) {
    std::string out;
    out += "[market]\n";
    format_into(out, "p", cfg.market.p);
    format_into(out, "r", cfg.market.r);
    out += "mu =";
    for (Eigen::Index i = 0; i < cfg.market.mu.size(); ++i) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), " %.17g", cfg.market.mu[i]);
        out += buf;
    }
    out += "\nsigma =";
    for (Eigen::Index i = 0; i < cfg.market.sigma.rows(); ++i) {
        for (Eigen::Index j = 0; j < cfg.market.sigma.cols(); ++j) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), " %.17g", cfg.market.sigma(i, j));
            out += buf;
        }
        if (i + 1 < cfg.market.sigma.rows()) out += " ;";
    }
    out += "\nrho =";
    for (Eigen::Index i = 0; i < cfg.market.rho.size(); ++i) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), " %.17g", cfg.market.rho[i]);
        out += buf;
    }
    out += "\n[model]\n";
    out += "kind = ";
    out += to_string(cfg.model.kind);
    out += "\n";
    format_into(out, "b", cfg.model.b);
    format_into(out, "a", cfg.model.a);
    format_into(out, "sigma", cfg.model.sigma);
    out += "[simulation]\n";
    format_into(out, "dt", cfg.sim.dt);
    format_into(out, "horizon", cfg.sim.horizon);
    out += "paths = " + std::to_string(cfg.sim.n_paths) + "\n";
    out += "seed = " + std::to_string(cfg.sim.seed) + "\n";
    out += std::string("antithetic = ") + (cfg.sim.antithetic ? "true" : "false") + "\n";
    out += "scheme = ";
    switch (cfg.sim.scheme) {
        case Scheme::Auto: out += "auto"; break;
        case Scheme::EulerFullTruncation: out += "euler_full_truncation"; break;
        case Scheme::ReciprocalCir: out += "reciprocal_cir"; break;
        case Scheme::ExactOU: out += "exact_ou"; break;
    }
    out += "\n[experiment]\n";
    format_into(out, "z", cfg.experiment.z);
    format_into(out, "t", cfg.experiment.t);
    format_into(out, "horizon", cfg.experiment.horizon);
    out += "t_grid =";
    for (double v : cfg.experiment.t_grid) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), " %.17g", v);
        out += buf;
    }
    out += "\nparameter = " + cfg.experiment.parameter + "\n";
    format_into(out, "y0_hat", cfg.experiment.y0_hat);
    format_into(out, "burn_in", cfg.experiment.burn_in);
    out += std::string("static = ") + (cfg.experiment.static_only ? "true" : "false") + "\n";
    out += "representation = " + cfg.experiment.representation + "\n";
    return out;
}

} // namespace fundsep
