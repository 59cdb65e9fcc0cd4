#pragma once

// Value-at-Risk for linear portfolios under mixtures of elliptic laws.
//
// Conventions: P&L is signed (losses negative); VaR and ES are reported as
// positive currency amounts.  alpha is the tail probability, confidence 1-alpha.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mixrisk/errors.hpp"
#include "mixrisk/generator.hpp"
#include "mixrisk/model.hpp"
#include "mixrisk/roots.hpp"

namespace mixrisk {

inline constexpr const char* kSignConvention = "VaR/ES reported as positive currency losses";
inline constexpr double kQuantileResidualTol = 1e-10;
inline constexpr double kBracketLimit = 1e12;

template <typename Scalar>
struct WeightedGenerator {
    Scalar weight;
    GeneratorKind<Scalar> generator;
};

template <typename Scalar>
using MixtureSpec = std::vector<WeightedGenerator<Scalar>>;

template <typename Scalar>
MixtureSpec<Scalar> mixture_spec(const ValidatedModel<Scalar>& model) {
    MixtureSpec<Scalar> mix;
    for (const auto& c : model.model().components) mix.push_back({c.weight, c.generator});
    return mix;
}

template <typename Scalar>
struct QuantileSolution {
    Scalar q_alpha;
    Scalar residual;  // mixture_tail(q_alpha) - alpha
    int iterations;
    Scalar lo, hi;    // final bracket
};

template <typename Scalar>
struct RiskReport {
    Scalar var = Scalar(0);
    std::optional<Scalar> es;
    Scalar alpha = Scalar(0);
    // Standardized multipliers; set whenever the model has common moments.
    std::optional<Scalar> q_alpha;
    std::optional<Scalar> es_multiplier;
    std::optional<Vector<Scalar>> incremental_var;
    Scalar theta_carry = Scalar(0);  // theta * horizon added to the loss measure
    int iterations = 0;
    std::string method;
    std::string convention = kSignConvention;
};

namespace detail {

template <typename Scalar>
void check_alpha(Scalar alpha) {
    if (!(alpha > Scalar(0) && alpha < Scalar(0.5)))
        throw DomainError("alpha: must lie in (0, 0.5), got " + std::to_string(double(alpha)));
}

template <typename Scalar>
void check_weights(const MixtureSpec<Scalar>& mix) {
    using std::abs;
    if (mix.empty()) throw ValidationError("mixture: at least one component is required");
    Scalar sum = Scalar(0);
    for (const auto& w : mix) {
        if (!(w.weight > Scalar(0))) throw ValidationError("mixture: weights must be > 0");
        sum += w.weight;
    }
    if (abs(sum - Scalar(1)) > Scalar(kWeightSumTol))
        throw ValidationError("mixture: weights sum to " + std::to_string(double(sum)) + ", expected 1");
}

// Sum_j beta_j G_j(q) for any real q.
template <typename Scalar>
Scalar mixture_tail_any(Scalar q, const MixtureSpec<Scalar>& mix, int n, TailRoute route) {
    Scalar acc = Scalar(0);
    for (const auto& w : mix) acc += w.weight * generator_tail(w.generator, q, n, route);
    return acc;
}

template <typename Scalar>
void check_non_negative(Scalar var, const char* what) {
    if (var < Scalar(0))
        throw InfeasibleError(std::string(what) + ": loss at this confidence is negative (" +
                              std::to_string(double(var)) + "); the portfolio mean gain exceeds the tail quantile");
}

template <typename Scalar>
void require_common(const ValidatedModel<Scalar>& model, const char* op) {
    if (!model.common_moments())
        throw ValidationError(std::string(op) +
                              ": model components have distinct means or scale matrices; use var_general / es_general_moments");
}

}  // namespace detail

/// Sum_j beta_j G_j(q), q > 0.
template <typename Scalar>
Scalar mixture_tail(Scalar q, const MixtureSpec<Scalar>& mix, int n = 1,
                    TailRoute route = TailRoute::IncompleteBeta) {
    if (!(q > Scalar(0))) throw DomainError("mixture_tail: q must be > 0, got " + std::to_string(double(q)));
    detail::check_weights(mix);
    return detail::mixture_tail_any(q, mix, n, route);
}

/// The unique positive q with mixture_tail(q) = alpha.
///
/// The upper bracket grows x4 from 1; Brent then solves to |f| <= 1e-12.
template <typename Scalar>
QuantileSolution<Scalar> solve_quantile(const MixtureSpec<Scalar>& mix, Scalar alpha, int n = 1,
                                        TailRoute route = TailRoute::IncompleteBeta) {
    using std::abs;
    detail::check_alpha(alpha);
    detail::check_weights(mix);
    const auto f = [&](Scalar q) { return detail::mixture_tail_any(q, mix, n, route) - alpha; };
    Scalar lo = Scalar(0);
    Scalar hi = Scalar(1);
    while (f(hi) > Scalar(0)) {
        lo = hi;
        hi *= Scalar(4);
        if (hi > Scalar(kBracketLimit))
            throw InfeasibleError("solve_quantile: mixture tail still above alpha=" + std::to_string(double(alpha)) +
                                  " at q=1e12; alpha is too small for this generator family");
    }
    const auto root = brent<Scalar>(f, lo, hi);
    if (abs(root.f) > Scalar(kQuantileResidualTol))
        throw ConvergenceError("solve_quantile: residual " + std::to_string(double(root.f)) + " exceeds 1e-10");
    return {root.x, root.f, root.iterations, root.lo, root.hi};
}

/// VaR = -delta.mu + q_alpha sqrt(delta Sigma delta^t) for a model whose
/// components share mean and scale matrix.
template <typename Scalar>
RiskReport<Scalar> var_common_moments(const Portfolio<Scalar>& p, const ValidatedModel<Scalar>& model, Scalar alpha) {
    detail::check_alpha(alpha);
    detail::require_common(model, "var_common_moments");
    check_portfolio(p, model);
    const auto sol = solve_quantile(mixture_spec(model), alpha, model.dimension());
    const Scalar mean = portfolio_mean(p, model.component(0));
    const Scalar stdev = portfolio_stdev(p, model.factor(0));
    RiskReport<Scalar> r;
    r.var = -mean + sol.q_alpha * stdev;
    detail::check_non_negative(r.var, "var_common_moments");
    r.alpha = alpha;
    r.q_alpha = sol.q_alpha;
    r.iterations = sol.iterations;
    r.method = "common-moments";
    return r;
}

/// Solves alpha = sum_j beta_j G_j((delta.mu_j + VaR) / sqrt(delta Sigma_j delta^t))
/// for VaR >= 0.  Handles distinct means and scale matrices.
template <typename Scalar>
RiskReport<Scalar> var_general(const Portfolio<Scalar>& p, const ValidatedModel<Scalar>& model, Scalar alpha) {
    using std::abs;
    using std::max;
    detail::check_alpha(alpha);
    const auto moments = component_moments(p, model);
    const int n = model.dimension();
    const auto f = [&](Scalar v) {
        Scalar acc = Scalar(0);
        for (const auto& m : moments) acc += m.weight * generator_tail(*m.generator, (m.mean + v) / m.stdev, n);
        return acc - alpha;
    };
    const Scalar f0 = f(Scalar(0));
    if (f0 <= Scalar(0))
        throw InfeasibleError("var_general: tail probability at VaR = 0 is " + std::to_string(double(f0 + alpha)) +
                              " <= alpha; no non-negative VaR exists at this confidence");
    Scalar scale = Scalar(0);
    Scalar shift = Scalar(0);
    for (const auto& m : moments) {
        scale = max(scale, m.stdev);
        shift = max(shift, abs(m.mean));
    }
    Scalar lo = Scalar(0);
    Scalar hi = scale;
    while (f(hi) > Scalar(0)) {
        lo = hi;
        hi *= Scalar(4);
        if (hi > Scalar(kBracketLimit) * scale + shift)
            throw InfeasibleError("var_general: no VaR bracket found below 1e12 portfolio scales");
    }
    const auto root = brent<Scalar>(f, lo, hi);
    RiskReport<Scalar> r;
    r.var = root.x;
    r.alpha = alpha;
    r.iterations = root.iterations;
    r.method = "general";
    if (model.common_moments()) r.q_alpha = (moments.front().mean + root.x) / moments.front().stdev;
    return r;
}

/// Delta-Theta VaR: -delta.mu + theta*t + q_alpha sqrt(delta Sigma delta^t).
/// The theta*t term enters with the sign it has in the P&L approximation.
template <typename Scalar>
RiskReport<Scalar> var_delta_theta(const Portfolio<Scalar>& p, const ValidatedModel<Scalar>& model, Scalar alpha) {
    detail::check_alpha(alpha);
    detail::require_common(model, "var_delta_theta");
    check_portfolio(p, model);
    const auto sol = solve_quantile(mixture_spec(model), alpha, model.dimension());
    const Scalar mean = portfolio_mean(p, model.component(0));
    const Scalar stdev = portfolio_stdev(p, model.factor(0));
    RiskReport<Scalar> r;
    r.theta_carry = p.theta_carry();
    r.var = -mean + r.theta_carry + sol.q_alpha * stdev;
    detail::check_non_negative(r.var, "var_delta_theta");
    r.alpha = alpha;
    r.q_alpha = sol.q_alpha;
    r.iterations = sol.iterations;
    r.method = "delta-theta";
    return r;
}

/// Euler contributions IVaR_i = delta_i dVaR/d delta_i = delta_i q (Sigma delta)_i / sqrt(delta Sigma delta^t).
///
/// Requires common moments with mu = 0 and no theta carry.  Reported VaR is
/// positive, so the contributions sum to +VaR (the gradient's sign is flipped
/// relative to a negative-VaR convention).
template <typename Scalar>
Vector<Scalar> incremental_var(const Portfolio<Scalar>& p, const ValidatedModel<Scalar>& model, Scalar alpha) {
    detail::check_alpha(alpha);
    detail::require_common(model, "incremental_var");
    check_portfolio(p, model);
    const auto& c = model.component(0);
    if (c.mean.cwiseAbs().maxCoeff() > Scalar(kCommonMomentTol))
        throw ValidationError("incremental_var: only defined for mu = 0");
    if (p.theta_carry() != Scalar(0))
        throw ValidationError("incremental_var: theta*horizon must be zero; the theta carry is not allocated");
    const auto sol = solve_quantile(mixture_spec(model), alpha, model.dimension());
    const Vector<Scalar> sigma_delta = c.scale * p.delta;
    const Scalar stdev = portfolio_stdev(p, model.factor(0));
    const Vector<Scalar> gamma = sol.q_alpha * sigma_delta / stdev;
    return p.delta.cwiseProduct(gamma);
}

namespace detail {
template <typename Scalar>
Scalar aggregate_root(Scalar r1, Scalar r2, Scalar coupling, const char* op) {
    using std::abs;
    using std::sqrt;
    if (!(r1 >= Scalar(0)) || !(r2 >= Scalar(0)))
        throw DomainError(std::string(op) + ": sub-portfolio risks must be >= 0");
    if (r1 > Scalar(0) && r2 > Scalar(0)) {
        const Scalar phi = coupling / (r1 * r2);
        if (abs(phi) > Scalar(1) + Scalar(1e-12))
            throw DomainError(std::string(op) + ": implied correlation " + std::to_string(double(phi)) +
                              " lies outside [-1, 1]");
    }
    const Scalar radicand = r1 * r1 + r2 * r2 + Scalar(2) * coupling;
    if (radicand < Scalar(0)) {
        if (radicand > Scalar(-1e-12) * (r1 * r1 + r2 * r2)) return Scalar(0);
        throw DomainError(std::string(op) + ": negative radicand; cross term inconsistent with sub-portfolio risks");
    }
    return sqrt(radicand);
}
}  // namespace detail

/// sqrt(V1^2 + V2^2 + 2 q^2 delta_1^t Sigma_12 delta_2), valid for mu ~ 0 and a
/// shared generator / alpha across both markets.
template <typename Scalar>
Scalar aggregate_var(Scalar var1, Scalar var2, Scalar q, Scalar cross) {
    return detail::aggregate_root(var1, var2, q * q * cross, "aggregate_var");
}

/// sqrt(V1^2 + V2^2 + 2 phi V1 V2).
template <typename Scalar>
Scalar aggregate_var_phi(Scalar var1, Scalar var2, Scalar phi) {
    return detail::aggregate_root(var1, var2, phi * var1 * var2, "aggregate_var");
}

/// phi = delta_1^t Sigma_12 delta_2 / sqrt((delta_1^t Sigma_1 delta_1)(delta_2^t Sigma_2 delta_2)).
template <typename Scalar>
Scalar implied_correlation(const Vector<Scalar>& delta1, const Vector<Scalar>& delta2, const Matrix<Scalar>& sigma1,
                           const Matrix<Scalar>& sigma2, const Matrix<Scalar>& sigma12) {
    using std::sqrt;
    const Scalar v1 = delta1.dot(sigma1 * delta1);
    const Scalar v2 = delta2.dot(sigma2 * delta2);
    if (!(v1 > Scalar(0) && v2 > Scalar(0))) throw DomainError("implied_correlation: degenerate sub-portfolio");
    return delta1.dot(sigma12 * delta2) / sqrt(v1 * v2);
}

}  // namespace mixrisk
