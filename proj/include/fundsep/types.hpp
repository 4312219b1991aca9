#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fundsep {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// ---------------------------------------------------------------------------
// error taxonomy; everything user-facing derives from Error so the CLI can
// map exception type -> exit code in one place
// ---------------------------------------------------------------------------
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// bad static inputs (dimensions, signs, ill-conditioned market matrix)
struct InvalidSpec : Error { using Error::Error; };
// model assumption fails at these parameters (theta <= -sigma^2/2, a_eff <= 0, ...)
struct AssumptionViolated : Error { using Error::Error; };
// config / CSV text problems, with line & column in the message
struct ParseError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
// numerics
struct QuadratureFailure : Error { using Error::Error; };
struct ParameterOutOfRange : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct NonFinite : Error { using Error::Error; };
struct DegenerateFit : Error { using Error::Error; };
struct DegenerateObservation : Error { using Error::Error; };
// simulation / estimation plumbing
struct NonPositiveState : Error { using Error::Error; };
struct MissingFunctional : Error { using Error::Error; };
struct UnsupportedMeasurePair : Error { using Error::Error; };
struct EmptyGrid : Error { using Error::Error; };
struct ValidationError : Error { using Error::Error; };

// ---------------------------------------------------------------------------
// model & market inputs
// ---------------------------------------------------------------------------
enum class ModelKind { ThreeHalves, InverseBessel, FilteredOU };

std::string to_string(ModelKind k);
ModelKind model_kind_from_string(const std::string& s);

// investor preferences and the market layer: n risky assets with volatility
// matrix Sigma, market price of risk mu * g(z) (g model-specific), and
// state-noise correlation rho
struct PreferenceMarketSpec {
    double p = -1.0;   // relative risk aversion 1-p, p < 0
    double r = 0.02;   // safe rate
    Vec mu;            // excess-return direction, length n
    Mat sigma;         // n x n volatility matrix, invertible
    Vec rho;           // correlation loadings, |rho| <= 1, length n

    int n_assets() const { return static_cast<int>(mu.size()); }
};

struct StateModelSpec {
    ModelKind kind = ModelKind::ThreeHalves;
    double b = 1.0;      // level parameter of the linear reversion b - a z
    double a = 0.5;      // reversion slope
    double sigma = 0.8;  // state noise scale
};

// ---------------------------------------------------------------------------
// derived quantities shared by every downstream module
// ---------------------------------------------------------------------------
struct DerivedConstants {
    ModelKind kind = ModelKind::ThreeHalves;

    double q = 0.0;          // p / (p - 1), in (0,1)
    double delta = 1.0;      // 1/(1 - q rho'rho); filtered OU: 1/(1 - q) = 1 - p
    double lambda = 0.0;     // principal eigenvalue
    double lambda_hat = 0.0; // decay rate of the long-horizon remainder
    double eta = 0.0;        // eigenfunction exponent
    double xi = 0.0;         // secondary eigenfunction coefficient (invB / FOU)

    // risk-adjusted reversion. three-halves & inverse Bessel use the scalar
    // theta = a + q sigma rho'mu; the filtered OU model uses the vector
    // theta_vec = P0 mu + sigma rho (theta then holds a_eff = a + q theta'mu).
    double theta = 0.0;
    Vec theta_vec;
    double P0 = 0.0;         // steady state filter variance (FOU only)

    bool assumption_ok = true;
    std::string assumption_msg;

    // cached market scalars
    double p = 0.0, r = 0.0;
    double mu_norm2 = 0.0;   // |mu|^2
    double rho_mu = 0.0;     // rho'mu
    double rho_norm2 = 0.0;  // rho'rho
    double theta_norm2 = 0.0; // |theta_vec|^2 (FOU)

    double zeta = 0.0;       // doubly-tilted eigenfunction coefficient (invB)

    // potential V(z) = pot_const + pot_slope * g(z) where g(z) = z (3/2)
    // or z^2 (invB, FOU); pot_const = -p r / delta, pot_slope = q |mu|^2 / (2 delta)
    double pot_const = 0.0;
    double pot_slope = 0.0;

    // model parameters echoed for convenience
    double b = 0.0, a = 0.0, sigma = 0.0;
};

struct Eigenpair {
    double lambda = 0.0;
    std::function<double(double)> phi;       // positive eigenfunction
    std::function<double(double)> dlog_phi;  // phi'/phi
    std::function<double(double)> d2_phi;    // phi''
};

// ---------------------------------------------------------------------------
// simulation
// ---------------------------------------------------------------------------
enum class MeasureTag { P, PTilde, PHat, PBar };

std::string to_string(MeasureTag m);

enum class Scheme { Auto, EulerFullTruncation, ReciprocalCir, ExactOU };

struct SimConfig {
    double dt = 1e-3;
    double horizon = 1.0;
    std::size_t n_paths = 10000;
    std::uint64_t seed = 1;
    Scheme scheme = Scheme::Auto;
    bool antithetic = true;
};

// path functionals accumulated during simulation (all over [0, horizon]):
//   IntZ           \int Z_s ds              IntZ2         \int Z_s^2 ds
//   IntV           \int V(Z_s) ds           BrownianTerminal  B_horizon
//   IntZdB         \int Z_s dB_s            IntSqrtZdB    \int sqrt(Z_s) dB_s
//   IntInvSqrtZdB  \int Z_s^{-1/2} dB_s     LogTerminal   log Z_horizon
enum class Functional {
    IntZ, IntZ2, IntV, BrownianTerminal, IntZdB, IntSqrtZdB, IntInvSqrtZdB
};

enum class StoragePolicy { TerminalOnly, FullGrid };

struct PathBatch {
    ModelKind kind = ModelKind::ThreeHalves;
    MeasureTag measure = MeasureTag::P;
    double z0 = 1.0;
    SimConfig cfg;

    // stored grid: {0, horizon} for TerminalOnly, the full step grid otherwise
    std::vector<double> times;
    // states[k][i]: state of path i at times[k]
    std::vector<std::vector<double>> states;
    // functional values at the horizon, one entry per path
    std::map<Functional, std::vector<double>> integrals;

    std::uint64_t rng_checksum = 0; // folded over every uniform block consumed
    std::uint64_t clamp_count = 0;  // transformed-state truncations at zero
    std::uint64_t total_steps = 0;

    std::size_t n_paths() const { return states.empty() ? 0 : states.back().size(); }
    const std::vector<double>& terminal_states() const;
    const std::vector<double>& functional(Functional f) const;
};

struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
    std::uint64_t rng_checksum = 0;
};

} // namespace fundsep
