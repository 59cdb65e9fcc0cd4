#pragma once

// Expected Shortfall ES = E(-P&L | -P&L > VaR) for mixtures of elliptic laws.
//
// For a component with standardized marginal Z, the tail contribution is
// T(q) = E[Z 1{Z > q}], available in closed form (Student, normal) or as the
// radial integral  c_n int_{q^2}^inf (u - q^2)^{(n-1)/2} g(u) du  with
// c_n = pi^{(n-1)/2} / (2 Gamma((n+1)/2)).
//
// EsConvention::PaperLiteral reproduces the published formulas, whose
// constant lacks the factor 1/2 (so every tail mean is doubled) and whose
// general-moment location term is -sum_i beta_i delta.mu_i.  The default
// EsConvention::OracleValidated agrees with Monte-Carlo tail means.

#include <cmath>
#include <optional>
#include <string>
#include <variant>

#include "mixrisk/errors.hpp"
#include "mixrisk/generator.hpp"
#include "mixrisk/model.hpp"
#include "mixrisk/var.hpp"

namespace mixrisk {

enum class EsConvention { OracleValidated, PaperLiteral };

inline std::string to_string(EsConvention c) {
    return c == EsConvention::OracleValidated ? "oracle-validated" : "paper-literal";
}

inline std::string to_string(EsRoute r) { return r == EsRoute::ClosedForm ? "closed-form" : "quadrature"; }

template <typename Scalar>
struct EsCoefficient {
    Scalar value;  // ES = -delta.mu + value * sqrt(delta Sigma delta^t)
    EsRoute route;
};

/// Constant in front of the tail means: 1 for the validated convention, 2 for
/// the literal closed form.
inline double es_constant_factor(EsConvention c) { return c == EsConvention::OracleValidated ? 1.0 : 2.0; }

/// (1/alpha) sum_i beta_i T_i(q).
template <typename Scalar>
EsCoefficient<Scalar> es_coefficient(const MixtureSpec<Scalar>& mix, Scalar q, Scalar alpha, int n,
                                     EsRoute route = EsRoute::ClosedForm,
                                     EsConvention convention = EsConvention::OracleValidated) {
    detail::check_alpha(alpha);
    detail::check_weights(mix);
    Scalar acc = Scalar(0);
    for (const auto& w : mix) acc += w.weight * tail_mean(w.generator, q, n, route);
    return {Scalar(es_constant_factor(convention)) * acc / alpha, route};
}

namespace detail {

template <typename Scalar>
Scalar require_matching_var(const RiskReport<Scalar>& var_report, Scalar alpha, const char* op) {
    if (var_report.alpha != alpha)
        throw ValidationError(std::string(op) + ": VaR report was computed at alpha=" +
                              std::to_string(double(var_report.alpha)) + ", not " + std::to_string(double(alpha)));
    if (!var_report.q_alpha)
        throw ValidationError(std::string(op) + ": VaR report carries no standardized quantile");
    return *var_report.q_alpha;
}

template <typename Scalar>
RiskReport<Scalar> common_moment_es(const Portfolio<Scalar>& p, const ValidatedModel<Scalar>& model, Scalar alpha,
                                    const RiskReport<Scalar>& var_report, EsRoute route, EsConvention convention,
                                    bool with_theta, const char* op) {
    detail::require_common(model, op);
    check_portfolio(p, model);
    const Scalar q = require_matching_var(var_report, alpha, op);
    const auto coef = es_coefficient(mixture_spec(model), q, alpha, model.dimension(), route, convention);
    const Scalar mean = portfolio_mean(p, model.component(0));
    const Scalar stdev = portfolio_stdev(p, model.factor(0));
    RiskReport<Scalar> r = var_report;
    r.theta_carry = with_theta ? p.theta_carry() : Scalar(0);
    r.es = -mean + r.theta_carry + coef.value * stdev;
    r.es_multiplier = coef.value;
    r.method = std::string(op) + "/" + to_string(route) + "/" + to_string(convention);
    return r;
}

}  // namespace detail

/// Closed-form ES for a common-moment Student mixture:
///   ES = -delta.mu + [ (1/alpha) sum_i beta_i T_i(q_alpha) ] sqrt(delta Sigma delta^t).
template <typename Scalar>
RiskReport<Scalar> es_student_mixture(const Portfolio<Scalar>& p, const ValidatedModel<Scalar>& model, Scalar alpha,
                                      const RiskReport<Scalar>& var_report,
                                      EsConvention convention = EsConvention::OracleValidated) {
    for (const auto& c : model.model().components)
        if (!std::holds_alternative<StudentT<Scalar>>(c.generator))
            throw ValidationError("es_student_mixture: every component must be Student-t");
    return detail::common_moment_es(p, model, alpha, var_report, EsRoute::ClosedForm, convention, false,
                                    "es_student_mixture");
}

/// ES for a common-moment mixture with arbitrary generators via radial quadrature.
template <typename Scalar>
RiskReport<Scalar> es_generic(const Portfolio<Scalar>& p, const ValidatedModel<Scalar>& model, Scalar alpha,
                              const RiskReport<Scalar>& var_report,
                              EsConvention convention = EsConvention::OracleValidated,
                              EsRoute route = EsRoute::Quadrature) {
    return detail::common_moment_es(p, model, alpha, var_report, route, convention, false, "es_generic");
}

/// Delta-Theta ES: es_generic plus theta*t.
template <typename Scalar>
RiskReport<Scalar> es_delta_theta(const Portfolio<Scalar>& p, const ValidatedModel<Scalar>& model, Scalar alpha,
                                  const RiskReport<Scalar>& var_report,
                                  EsConvention convention = EsConvention::OracleValidated,
                                  EsRoute route = EsRoute::Quadrature) {
    return detail::common_moment_es(p, model, alpha, var_report, route, convention, true, "es_delta_theta");
}

/// ES for distinct component moments, given the VaR from var_general.
///
/// With q_i = (delta.mu_i + VaR) / sigma_i:
///   validated: ES = (1/alpha) sum_i beta_i [ sigma_i T_i(q_i) - (delta.mu_i) G_i(q_i) ]
///   literal:   ES = -sum_i beta_i delta.mu_i + (2/alpha) sum_i beta_i sigma_i T_i(q_i)
template <typename Scalar>
RiskReport<Scalar> es_general_moments(const Portfolio<Scalar>& p, const ValidatedModel<Scalar>& model, Scalar alpha,
                                      const RiskReport<Scalar>& var_report,
                                      EsConvention convention = EsConvention::OracleValidated,
                                      EsRoute route = EsRoute::Quadrature) {
    detail::check_alpha(alpha);
    if (var_report.alpha != alpha)
        throw ValidationError("es_general_moments: VaR report was computed at a different alpha");
    const auto moments = component_moments(p, model);
    const int n = model.dimension();
    Scalar location = Scalar(0);
    Scalar tail = Scalar(0);
    for (const auto& m : moments) {
        const Scalar qi = (m.mean + var_report.var) / m.stdev;
        tail += m.weight * m.stdev * tail_mean(*m.generator, qi, n, route);
        if (convention == EsConvention::OracleValidated)
            location -= m.weight * m.mean * generator_tail(*m.generator, qi, n) / alpha;
        else
            location -= m.weight * m.mean;
    }
    RiskReport<Scalar> r = var_report;
    r.es = location + Scalar(es_constant_factor(convention)) * tail / alpha;
    r.method = "general-moments/" + to_string(route) + "/" + to_string(convention);
    return r;
}

/// sqrt(E1^2 + E2^2 + 2 K^2 delta_1^t Sigma_12 delta_2), K the shared ES multiplier.
template <typename Scalar>
Scalar aggregate_es(Scalar es1, Scalar es2, Scalar k, Scalar cross) {
    return detail::aggregate_root(es1, es2, k * k * cross, "aggregate_es");
}

/// sqrt(E1^2 + E2^2 + 2 phi_ES E1 E2).
template <typename Scalar>
Scalar aggregate_es_phi(Scalar es1, Scalar es2, Scalar phi_es) {
    return detail::aggregate_root(es1, es2, phi_es * es1 * es2, "aggregate_es");
}

}  // namespace mixrisk
