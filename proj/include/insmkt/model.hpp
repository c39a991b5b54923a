#pragma once

// Pointwise closed-form relations of the robust insurance-market equilibrium.
// Everything here is a pure function of (state, parameters); nothing requires
// the market-to-book ODE to have been solved.

#include <string>
#include <utility>
#include <vector>

namespace insmkt {

/// Exogenous constants of the insurance and financial markets.
struct MarketParams {
    double lambda = 0.04;   // shareholder discount rate
    double l = 1.0;         // expected loss intensity
    double eta = 0.28;      // loss volatility
    double r = 0.01528;     // risk-free rate
    double mu = 0.03528;    // expected risky return
    double sigma = 0.18;    // risky-asset volatility
    double gamma = 0.2;     // external financing cost per unit raised
    double alpha = 2.0;     // insuree risk aversion
    double theta = 2.8;     // robustness degree (1/theta = ambiguity aversion)
    double rho = -0.2;      // insurance/financial shock correlation

    /// Benchmark calibration.
    static MarketParams benchmark() { return {}; }

    /// Benchmark with the financial market switched off (rho = r = q = 0).
    static MarketParams no_investment();

    /// Sharpe ratio q = (mu - r) / sigma.
    double sharpe() const { return (mu - r) / sigma; }

    /// |rho| <= alpha*eta/q. Always true when q == 0.
    bool correlation_bound_holds() const;

    /// Throws InvalidParameters naming the first violated precondition.
    void validate() const;

    bool operator==(const MarketParams&) const = default;
};

/// Names accepted by parameter sweeps and configuration overrides.
const std::vector<std::string>& market_param_names();
double get_param(const MarketParams& p, const std::string& name);
void set_param(MarketParams& p, const std::string& name, double value);

/// Derivatives below this magnitude are treated as exactly zero, which keeps
/// g2 and the generator identities free of sign noise at the barriers.
inline constexpr double kZeroSlopeGuard = 1e-14;

/// Capacity together with the market-to-book ratio and its slope.
struct LocalState {
    double M = 0.0;
    double u = 1.0;
    double du = 0.0;

    /// Market risk aversion R = -u'/u.
    double risk_aversion() const;
};

struct GCoefficients {
    double g1 = 1.0;
    double g2 = 0.0;

    double det() const { return g1 * g1 - g2 * g2; }
};

double premium_rate(double p, const MarketParams& params);
double demand(double p, const MarketParams& params);

/// Throws DegenerateSystem when |g1^2 - g2^2| falls below kDegenerateTol.
GCoefficients g_coefficients(const LocalState& s, const MarketParams& params);
inline constexpr double kDegenerateTol = 1e-12;

double equilibrium_price(const LocalState& s, const MarketParams& params);
double equilibrium_demand(const LocalState& s, const MarketParams& params);
double aggregate_investment(const LocalState& s, double p_star, const MarketParams& params);

/// theta -> infinity limit of aggregate investment: (q - rho p)/((1-rho^2) R sigma).
double aggregate_investment_large_theta(const LocalState& s, double p_star,
                                        const MarketParams& params);

struct Generators {
    double hI = 0.0;
    double hS = 0.0;
    /// eta (p* + hI) >= 0: worst-case underwriting profit is non-negative.
    bool underwriting_profit_ok = true;
    /// sigma (q + hS) >= 0.
    bool investment_profit_ok = true;
};

Generators worst_case_generators(const LocalState& s, double p_star, double D_star,
                                 double Y_star, const MarketParams& params);

struct Policy {
    double underwriting = 0.0;  // x
    double investment = 0.0;    // y
};

/// Proportional policies of an insurer holding reserves m out of M.
Policy individual_policies(double m, const LocalState& s, double D_star, double Y_star);

/// Interior-regime certificate f(M); positive means the non-negativity
/// constraint on underwriting does not bind.
double f_condition(const LocalState& s, double p_star, double D_star, double Y_star,
                   const MarketParams& params);

/// Equivalent scalar whose sign matches f(M) at equilibrium prices:
/// (1 + rho q/(alpha eta))(1 - M R) + (1 - rho q/(alpha eta))(1 - rho^2) M (theta/u) R.
double f_condition_equivalent(const LocalState& s, const MarketParams& params);

/// Every pointwise equilibrium quantity at one state.
struct PointEquilibrium {
    double R = 0.0;
    GCoefficients g;
    double p = 0.0;
    double D = 0.0;
    double Y = 0.0;
    Generators h;
    double sigma2 = 0.0;   // (D eta)^2 + 2 rho D eta Y sigma + (Y sigma)^2
    double penalty = 0.0;  // hI^2 + 2 rho hI hS + hS^2
};

PointEquilibrium evaluate_point(const LocalState& s, const MarketParams& params);

}  // namespace insmkt
