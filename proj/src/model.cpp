#include "insmkt/model.hpp"

#include <cmath>
#include <sstream>

#include "insmkt/errors.hpp"

namespace insmkt {

MarketParams MarketParams::no_investment() {
    MarketParams p;
    p.rho = 0.0;
    p.r = 0.0;
    p.mu = 0.0;
    return p;
}

bool MarketParams::correlation_bound_holds() const {
    const double q = sharpe();
    if (q == 0.0) return true;
    return std::abs(rho) <= alpha * eta / q;
}

void MarketParams::validate() const {
    auto fail = [](const std::string& msg) { throw InvalidParameters(msg); };
    auto finite = [](double v) { return std::isfinite(v); };
    for (const auto& name : market_param_names())
        if (!finite(get_param(*this, name))) fail(name + " must be finite");
    if (!(eta > 0.0)) fail("eta > 0 required (loss volatility)");
    if (!(sigma > 0.0)) fail("sigma > 0 required (risky-asset volatility)");
    if (!(gamma > 0.0)) fail("gamma > 0 required (external financing cost)");
    if (!(alpha > 0.0)) fail("alpha > 0 required (insuree risk aversion)");
    if (!(theta > 0.0)) fail("theta > 0 required (robustness degree)");
    if (!(lambda > 0.0)) fail("lambda > 0 required (discount rate)");
    if (!(r >= 0.0)) fail("r >= 0 required (risk-free rate)");
    if (!(lambda >= r)) fail("lambda >= r required");
    if (!(mu >= r)) fail("mu >= r required (non-negative Sharpe ratio)");
    if (!(std::abs(rho) < 1.0)) fail("|rho| < 1 required (correlation)");
    if (!correlation_bound_holds()) {
        std::ostringstream os;
        os << "|rho| <= alpha*eta/q required; got |rho| = " << std::abs(rho)
           << ", bound = " << alpha * eta / sharpe();
        fail(os.str());
    }
}

const std::vector<std::string>& market_param_names() {
    static const std::vector<std::string> names = {"lambda", "l",     "eta",   "r",     "mu",
                                                   "sigma",  "gamma", "alpha", "theta", "rho"};
    return names;
}

namespace {

double* param_slot(MarketParams& p, const std::string& name) {
    if (name == "lambda") return &p.lambda;
    if (name == "l") return &p.l;
    if (name == "eta") return &p.eta;
    if (name == "r") return &p.r;
    if (name == "mu") return &p.mu;
    if (name == "sigma") return &p.sigma;
    if (name == "gamma") return &p.gamma;
    if (name == "alpha") return &p.alpha;
    if (name == "theta") return &p.theta;
    if (name == "rho") return &p.rho;
    throw InvalidParameters("unknown market parameter '" + name + "'");
}

}  // namespace

double get_param(const MarketParams& p, const std::string& name) {
    auto copy = p;
    return *param_slot(copy, name);
}

void set_param(MarketParams& p, const std::string& name, double value) {
    *param_slot(p, name) = value;
}

double LocalState::risk_aversion() const {
    if (std::abs(du) < kZeroSlopeGuard) return 0.0;
    return -du / u;
}

double premium_rate(double p, const MarketParams& params) { return params.l + params.eta * p; }

double demand(double p, const MarketParams& params) {
    return 1.0 - p / (params.alpha * params.eta);
}

GCoefficients g_coefficients(const LocalState& s, const MarketParams& params) {
    const double R = s.risk_aversion();
    if (R == 0.0) return {1.0, 0.0};
    const double a = s.M * params.theta / s.u;
    const double rho = params.rho;
    GCoefficients g{1.0 + (1.0 + rho * rho) * a * R - s.M * R, 2.0 * rho * a * R};
    if (!(std::abs(g.det()) >= kDegenerateTol)) {
        std::ostringstream os;
        os << "g1^2 - g2^2 = " << g.det() << " at M = " << s.M;
        throw DegenerateSystem(os.str());
    }
    return g;
}

namespace {

// Common factor M (theta/u) / (g1^2 - g2^2).
double clearing_scale(const LocalState& s, const GCoefficients& g, const MarketParams& params) {
    return s.M * params.theta / s.u / g.det();
}

double price_from(const LocalState& s, const GCoefficients& g, const MarketParams& params) {
    const double c = clearing_scale(s, g, params);
    const double q = params.sharpe();
    const double rho = params.rho;
    return (params.eta - c * (rho * g.g1 - g.g2) * q) /
           (1.0 / params.alpha + c * (g.g1 - rho * g.g2));
}

double demand_from(const LocalState& s, const GCoefficients& g, const MarketParams& params) {
    const double c = clearing_scale(s, g, params);
    const double q = params.sharpe();
    const double rho = params.rho;
    const double num =
        c * (g.g1 - rho * g.g2 + (rho * g.g1 - g.g2) * q / (params.alpha * params.eta));
    return num / (1.0 / params.alpha + c * (g.g1 - rho * g.g2));
}

double investment_from(const LocalState& s, const GCoefficients& g, double p,
                       const MarketParams& params) {
    const double c = clearing_scale(s, g, params);
    const double q = params.sharpe();
    const double rho = params.rho;
    return c / params.sigma * (g.g1 * (q + rho * p) - g.g2 * (p + rho * q));
}

}  // namespace

double equilibrium_price(const LocalState& s, const MarketParams& params) {
    return price_from(s, g_coefficients(s, params), params);
}

double equilibrium_demand(const LocalState& s, const MarketParams& params) {
    return demand_from(s, g_coefficients(s, params), params);
}

double aggregate_investment(const LocalState& s, double p_star, const MarketParams& params) {
    return investment_from(s, g_coefficients(s, params), p_star, params);
}

double aggregate_investment_large_theta(const LocalState& s, double p_star,
                                        const MarketParams& params) {
    const double R = s.risk_aversion();
    const double rho = params.rho;
    return (params.sharpe() - rho * p_star) / ((1.0 - rho * rho) * R * params.sigma);
}

Generators worst_case_generators(const LocalState& s, double p_star, double D_star,
                                 double Y_star, const MarketParams& params) {
    const double R = s.risk_aversion();
    const double rho = params.rho;
    const double a = D_star * params.eta;
    const double b = Y_star * params.sigma;
    Generators h;
    if (R == 0.0) {
        h.hI = -p_star;
        h.hS = -params.sharpe();
    } else {
        h.hI = R * (a + rho * b) - p_star;
        h.hS = R * (b + rho * a) - params.sharpe();
    }
    h.underwriting_profit_ok = params.eta * (p_star + h.hI) >= 0.0;
    h.investment_profit_ok = params.sigma * (params.sharpe() + h.hS) >= 0.0;
    return h;
}

Policy individual_policies(double m, const LocalState& s, double D_star, double Y_star) {
    if (m < 0.0) throw NegativeReserves("insurer reserves must be non-negative");
    if (!(s.M > 0.0)) throw InvalidParameters("aggregate capacity M must be positive");
    if (m == 0.0) return {};
    const double share = m / s.M;
    return {share * D_star, share * Y_star};
}

double f_condition(const LocalState& s, double p_star, double D_star, double Y_star,
                   const MarketParams& params) {
    const double R = s.risk_aversion();
    const double rho = params.rho;
    const double q = params.sharpe();
    const double bracket = p_star + rho * q - R * (1.0 + rho * rho) * D_star * params.eta -
                           2.0 * R * rho * Y_star * params.sigma;
    return params.theta / (s.u * params.eta) * bracket + R * D_star;
}

double f_condition_equivalent(const LocalState& s, const MarketParams& params) {
    const double R = s.risk_aversion();
    const double rho = params.rho;
    const double k = rho * params.sharpe() / (params.alpha * params.eta);
    return (1.0 + k) * (1.0 - s.M * R) +
           (1.0 - k) * (1.0 - rho * rho) * s.M * params.theta / s.u * R;
}

PointEquilibrium evaluate_point(const LocalState& s, const MarketParams& params) {
    PointEquilibrium e;
    e.R = s.risk_aversion();
    e.g = g_coefficients(s, params);
    e.p = price_from(s, e.g, params);
    e.D = demand(e.p, params);
    e.Y = investment_from(s, e.g, e.p, params);
    e.h = worst_case_generators(s, e.p, e.D, e.Y, params);
    const double rho = params.rho;
    const double a = e.D * params.eta;
    const double b = e.Y * params.sigma;
    e.sigma2 = a * a + 2.0 * rho * a * b + b * b;
    e.penalty = e.h.hI * e.h.hI + 2.0 * rho * e.h.hI * e.h.hS + e.h.hS * e.h.hS;
    return e;
}

}  // namespace insmkt
