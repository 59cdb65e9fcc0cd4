#pragma once

// Two-market aggregation on a block-partitioned common-moment model.
// Positions [0, split) form market 1, [split, n) market 2.

#include <optional>

#include "mixrisk/es.hpp"
#include "mixrisk/var.hpp"

namespace mixrisk {

template <typename Scalar>
struct AggregationReport {
    Scalar var1, var2;
    Scalar es1, es2;
    Scalar q_alpha, es_multiplier;
    Scalar cross;  // delta_1^t Sigma_12 delta_2
    Scalar phi;    // implied correlation
    Scalar var_aggregated, var_direct;
    Scalar es_aggregated, es_direct;
};

template <typename Scalar>
AggregationReport<Scalar> aggregate_blocks(const Portfolio<Scalar>& p, const ValidatedModel<Scalar>& model,
                                           Scalar alpha, int split,
                                           EsConvention convention = EsConvention::OracleValidated) {
    using std::sqrt;
    const int n = model.dimension();
    if (split <= 0 || split >= n)
        throw ValidationError("split: must lie in [1, " + std::to_string(n - 1) + "], got " + std::to_string(split));
    detail::require_common(model, "aggregate");
    check_portfolio(p, model);
    const auto& c = model.component(0);
    if (c.mean.cwiseAbs().maxCoeff() > Scalar(kCommonMomentTol))
        throw ValidationError("aggregate: mean must be zero for block aggregation");

    const int n2 = n - split;
    const Vector<Scalar> d1 = p.delta.head(split);
    const Vector<Scalar> d2 = p.delta.tail(n2);
    const Matrix<Scalar> s1 = c.scale.topLeftCorner(split, split);
    const Matrix<Scalar> s2 = c.scale.bottomRightCorner(n2, n2);
    const Matrix<Scalar> s12 = c.scale.topRightCorner(split, n2);

    const auto direct = var_common_moments(p, model, alpha);
    const auto direct_es = es_generic(p, model, alpha, direct, convention, EsRoute::ClosedForm);
    const Scalar q = *direct.q_alpha;
    const Scalar k = *direct_es.es_multiplier;

    AggregationReport<Scalar> r;
    r.q_alpha = q;
    r.es_multiplier = k;
    const Scalar sd1 = sqrt(d1.dot(s1 * d1));
    const Scalar sd2 = sqrt(d2.dot(s2 * d2));
    r.var1 = q * sd1;
    r.var2 = q * sd2;
    r.es1 = k * sd1;
    r.es2 = k * sd2;
    r.cross = d1.dot(s12 * d2);
    r.phi = implied_correlation<Scalar>(d1, d2, s1, s2, s12);
    r.var_aggregated = aggregate_var(r.var1, r.var2, q, r.cross);
    r.es_aggregated = aggregate_es(r.es1, r.es2, k, r.cross);
    r.var_direct = direct.var;
    r.es_direct = *direct_es.es;
    return r;
}

}  // namespace mixrisk
