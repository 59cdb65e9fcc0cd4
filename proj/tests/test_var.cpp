#include <doctest.h>

#include <cmath>
#include <random>

#include "mixrisk/aggregation.hpp"
#include "mixrisk/var.hpp"
#include "oracles.hpp"

using namespace mixrisk;
using doctest::Approx;

namespace {

MixtureSpec<double> two_t(double beta, double nu1, double nu2) {
    return {{beta, StudentT<double>{nu1}}, {1 - beta, StudentT<double>{nu2}}};
}

ValidatedModel<double> common(int n, const MixtureSpec<double>& mix, Eigen::MatrixXd sigma,
                              Eigen::VectorXd mu = {}) {
    if (mu.size() == 0) mu = Eigen::VectorXd::Zero(n);
    MixtureModel<double> m;
    m.dimension = n;
    for (const auto& w : mix) m.components.push_back({w.weight, mu, sigma, w.generator});
    return validate(m);
}

}  // namespace

TEST_CASE("mixture_tail: examples") {
    CHECK(mixture_tail(4.7586, two_t(0.10, 2, 3)) == Approx(0.01).epsilon(5e-3));
    CHECK(std::abs(mixture_tail(4.7586, two_t(0.10, 2, 3)) - 0.01) <= 5e-5);
    CHECK(mixture_tail(1e-9, two_t(0.3, 3, 9)) == Approx(0.5).epsilon(1e-8));
    CHECK(mixture_tail(2.3263, MixtureSpec<double>{{1.0, Normal{}}}) == Approx(0.01).epsilon(1e-4));
    CHECK_THROWS_AS(mixture_tail(0.0, two_t(0.5, 3, 4)), DomainError);
}

TEST_CASE("solve_quantile: examples") {
    CHECK(std::abs(solve_quantile(two_t(0.5, 10, 20), 0.01).q_alpha - 2.64574) <= 1e-3);
    CHECK(std::abs(solve_quantile(MixtureSpec<double>{{1.0, StudentT<double>{3}}}, 0.01).q_alpha - 4.540703) <= 1e-4);
    CHECK(std::abs(solve_quantile(two_t(0.25, 3, 4), 0.001).q_alpha - 8.01412) <= 1e-3);
}

TEST_CASE("solve_quantile: diagnostics") {
    const auto s = solve_quantile(two_t(0.3, 3, 7), 0.01);
    CHECK(std::abs(s.residual) <= 1e-10);
    CHECK(std::abs(mixture_tail(s.q_alpha, two_t(0.3, 3, 7)) - 0.01) <= 1e-10);
    CHECK(s.lo <= s.q_alpha);
    CHECK(s.q_alpha <= s.hi);
    CHECK(s.iterations > 0);
}

TEST_CASE("solve_quantile: alpha outside (0, 0.5)") {
    CHECK_THROWS_AS(solve_quantile(two_t(0.5, 3, 4), 0.5), DomainError);
    CHECK_THROWS_AS(solve_quantile(two_t(0.5, 3, 4), 0.0), DomainError);
    CHECK_THROWS_AS(solve_quantile(two_t(0.5, 3, 4), -0.1), DomainError);
}

TEST_CASE("solve_quantile: bracket failure for heavy tails at tiny alpha") {
    // nu = 0.5 has G(s) ~ s^{-1/2}; the tail is still above 1e-7 at s = 1e12.
    CHECK_THROWS_AS(solve_quantile(MixtureSpec<double>{{1.0, StudentT<double>{0.5}}}, 1e-7), InfeasibleError);
}

TEST_CASE("solve_quantile: single component matches the integrated-density oracle") {
    for (double nu : {2.5, 3.0, 5.0, 10.0, 100.0})
        for (double a : {0.05, 0.01, 0.001})
            CHECK(std::abs(solve_quantile(MixtureSpec<double>{{1.0, StudentT<double>{nu}}}, a).q_alpha -
                           oracle::student_quantile(a, nu)) <= 1e-6);
}

TEST_CASE("solve_quantile: monotone in alpha, degenerate splits, normal limit") {
    const auto mix = two_t(0.4, 3, 12);
    double prev = std::numeric_limits<double>::infinity();
    for (double a : {0.0005, 0.001, 0.01, 0.05, 0.1, 0.3}) {
        const double q = solve_quantile(mix, a).q_alpha;
        CHECK(q < prev);
        prev = q;
    }
    const double single = solve_quantile(MixtureSpec<double>{{1.0, StudentT<double>{6}}}, 0.01).q_alpha;
    for (double eps : {1e-6, 0.1, 0.5, 0.9})
        CHECK(solve_quantile(two_t(eps, 6, 6), 0.01).q_alpha == Approx(single).epsilon(1e-10));
    CHECK(std::abs(solve_quantile(MixtureSpec<double>{{1.0, StudentT<double>{1e6}}}, 0.01).q_alpha -
                   oracle::normal_quantile(0.01)) <= 1e-3);
}

TEST_CASE("var_common_moments: examples") {
    const auto normal = common(2, {{1.0, Normal{}}}, Eigen::MatrixXd::Identity(2, 2));
    const auto r = var_common_moments(oracle::portfolio(Eigen::Vector2d(1, 0)), normal, 0.01);
    CHECK(r.var == Approx(oracle::normal_quantile(0.01)).epsilon(1e-10));
    CHECK(r.convention == std::string(kSignConvention));

    const auto shifted = common(2, {{1.0, Normal{}}}, Eigen::MatrixXd::Identity(2, 2), Eigen::Vector2d(0.5, 0));
    const auto rs = var_common_moments(oracle::portfolio(Eigen::Vector2d(1, 0)), shifted, 0.01);
    CHECK(rs.var == Approx(r.var - 0.5).epsilon(1e-13));

    const auto t = common(2, two_t(0.5, 10, 20), Eigen::MatrixXd::Identity(2, 2));
    const auto rt = var_common_moments(oracle::portfolio(Eigen::Vector2d(1, 1)), t, 0.01);
    CHECK(std::abs(rt.var - std::sqrt(2.0) * 2.64574) <= std::sqrt(2.0) * 1e-3);
}

TEST_CASE("var_common_moments: rejects distinct moments and negative VaR") {
    std::mt19937_64 rng(5);
    const auto general = validate(oracle::random_general_model(rng, 2, 2));
    CHECK_THROWS_AS(var_common_moments(oracle::portfolio(Eigen::Vector2d(1, 1)), general, 0.01), ValidationError);
    const auto rich = common(1, {{1.0, Normal{}}}, Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Constant(1, 10.0));
    CHECK_THROWS_AS(var_common_moments(oracle::portfolio(Eigen::VectorXd::Ones(1)), rich, 0.01), InfeasibleError);
}

TEST_CASE("var_general: agrees with var_common_moments on common models") {
    std::mt19937_64 rng(6);
    for (int i = 0; i < 50; ++i) {
        const auto m = validate(oracle::random_common_model(rng, 3, 2, i % 2 == 0));
        const auto p = oracle::portfolio(oracle::random_vector(rng, 3));
        for (double a : {0.05, 0.01, 0.001}) {
            double c = 0;
            try {
                c = var_common_moments(p, m, a).var;
            } catch (const InfeasibleError&) {
                CHECK_THROWS_AS(var_general(p, m, a), InfeasibleError);
                continue;
            }
            const auto g = var_general(p, m, a);
            CHECK(std::abs(g.var - c) <= 1e-9 * std::max(1.0, c));
            REQUIRE(g.q_alpha.has_value());
        }
    }
}

TEST_CASE("var_general: same-nu scale mixture against a scalar root find") {
    const double nu = 5.0, beta = 0.3, alpha = 0.01;
    Eigen::MatrixXd s1(2, 2);
    s1 << 1.0, 0.3, 0.3, 2.0;
    MixtureModel<double> m{2,
                           {{beta, Eigen::VectorXd::Zero(2), s1, StudentT<double>{nu}},
                            {1 - beta, Eigen::VectorXd::Zero(2), 4.0 * s1, StudentT<double>{nu}}}};
    const auto vm = validate(m);
    const auto p = oracle::portfolio(Eigen::Vector2d(1.0, -0.5));
    const double sd = std::sqrt(p.delta.dot(s1 * p.delta));
    const double expected = oracle::bisect_decreasing(
        [&](double v) { return beta * oracle::student_tail(v / sd, nu) + (1 - beta) * oracle::student_tail(v / (2 * sd), nu); },
        alpha, 0.0, 1.0);
    CHECK(var_general(p, vm, alpha).var == Approx(expected).epsilon(1e-8));
}

TEST_CASE("var_general: translation invariance along delta") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> shift(-1.0, 0.2);
    for (int i = 0; i < 40; ++i) {
        auto model = oracle::random_general_model(rng, 3, 2);
        const auto p = oracle::portfolio(oracle::random_vector(rng, 3));
        const double base = var_general(p, validate(model), 0.01).var;
        const double t = shift(rng) * base;
        for (auto& c : model.components) c.mean += t * p.delta / p.delta.squaredNorm();
        CHECK(var_general(p, validate(model), 0.01).var == Approx(base - t).epsilon(1e-8));
    }
}

TEST_CASE("var_general: infeasible confidence") {
    MixtureModel<double> m{1, {{1.0, Eigen::VectorXd::Constant(1, 5.0), Eigen::MatrixXd::Identity(1, 1), Normal{}}}};
    CHECK_THROWS_AS(var_general(oracle::portfolio(Eigen::VectorXd::Ones(1)), validate(m), 0.01), InfeasibleError);
}

TEST_CASE("var_delta_theta: examples") {
    const auto m = common(2, two_t(0.4, 4, 9), Eigen::MatrixXd::Identity(2, 2));
    const Eigen::Vector2d d(1, 2);
    const double base = var_common_moments(oracle::portfolio(d), m, 0.01).var;
    CHECK(var_delta_theta(oracle::portfolio(d, 0.0, 1.0), m, 0.01).var == base);
    CHECK(var_delta_theta(oracle::portfolio(d, 0.7, 1.0), m, 0.01).var == Approx(0.7 + base).epsilon(1e-14));
    const double one = var_delta_theta(oracle::portfolio(d, 0.3, 0.5), m, 0.01).var;
    const double two = var_delta_theta(oracle::portfolio(d, 0.6, 0.5), m, 0.01).var;
    CHECK(two - one == Approx(0.15).epsilon(1e-12));
}

TEST_CASE("incremental_var: examples and errors") {
    const auto m = common(2, two_t(0.5, 4, 8), Eigen::MatrixXd::Identity(2, 2));
    const auto p = oracle::portfolio(Eigen::Vector2d(1, 0));
    const auto iv = incremental_var(p, m, 0.01);
    CHECK(iv[0] == Approx(var_common_moments(p, m, 0.01).var).epsilon(1e-14));
    CHECK(iv[1] == 0.0);
    const auto shifted = common(2, two_t(0.5, 4, 8), Eigen::MatrixXd::Identity(2, 2), Eigen::Vector2d(0.1, 0));
    CHECK_THROWS_AS(incremental_var(p, shifted, 0.01), ValidationError);
    CHECK_THROWS_AS(incremental_var(oracle::portfolio(Eigen::Vector2d(1, 0), 1.0, 1.0), m, 0.01), ValidationError);
}

TEST_CASE("incremental_var: Euler sum and central differences") {
    std::mt19937_64 rng(9);
    for (int i = 0; i < 50; ++i) {
        const auto m = validate(oracle::random_common_model(rng, 5, 2, true));
        const auto p = oracle::portfolio(oracle::random_vector(rng, 5));
        const double var = var_common_moments(p, m, 0.01).var;
        const auto iv = incremental_var(p, m, 0.01);
        CHECK(std::abs(iv.sum() - var) <= 1e-9 * var);
        const double h = 1e-5;
        for (int k = 0; k < 5; ++k) {
            auto up = p, dn = p;
            up.delta[k] += h;
            dn.delta[k] -= h;
            const double fd =
                p.delta[k] * (var_common_moments(up, m, 0.01).var - var_common_moments(dn, m, 0.01).var) / (2 * h);
            CHECK(std::abs(iv[k] - fd) <= 1e-5 * std::max(std::abs(iv[k]), 1e-3 * var));
        }
    }
}

TEST_CASE("aggregate_var: closed-form examples and errors") {
    CHECK(aggregate_var(3.0, 4.0, 2.0, 0.0) == Approx(5.0).epsilon(1e-15));
    CHECK(aggregate_var_phi(3.0, 4.0, 1.0) == Approx(7.0).epsilon(1e-15));
    CHECK(aggregate_var_phi(3.0, 4.0, -1.0) == Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(aggregate_var_phi(3.0, 4.0, 1.5), DomainError);
    CHECK_THROWS_AS(aggregate_var(3.0, 4.0, 2.0, 10.0), DomainError);
}

TEST_CASE("aggregate_var: implied correlation form equals the cross-term form") {
    std::mt19937_64 rng(10);
    for (int i = 0; i < 50; ++i) {
        const auto sigma = oracle::random_spd(rng, 4);
        const Eigen::VectorXd d1 = oracle::random_vector(rng, 2), d2 = oracle::random_vector(rng, 2);
        const double q = 2.7;
        const double v1 = q * std::sqrt(d1.dot(sigma.topLeftCorner(2, 2) * d1));
        const double v2 = q * std::sqrt(d2.dot(sigma.bottomRightCorner(2, 2) * d2));
        const double cross = d1.dot(sigma.topRightCorner(2, 2) * d2);
        const double phi = implied_correlation<double>(d1, d2, sigma.topLeftCorner(2, 2), sigma.bottomRightCorner(2, 2),
                                                       sigma.topRightCorner(2, 2));
        const double a = aggregate_var(v1, v2, q, cross);
        CHECK(a == Approx(aggregate_var_phi(v1, v2, phi)).epsilon(1e-12));
        CHECK(a <= v1 + v2 + 1e-12);
    }
}

TEST_CASE("aggregate_blocks: matches the stacked portfolio") {
    std::mt19937_64 rng(12);
    for (int i = 0; i < 30; ++i) {
        const auto m = validate(oracle::random_common_model(rng, 5, 2, true));
        const auto p = oracle::portfolio(oracle::random_vector(rng, 5));
        const auto r = aggregate_blocks(p, m, 0.01, 2);
        CHECK(std::abs(r.var_aggregated - r.var_direct) <= 1e-9 * r.var_direct);
        CHECK(std::abs(r.es_aggregated - r.es_direct) <= 1e-9 * r.es_direct);
        CHECK(r.var_aggregated <= r.var1 + r.var2 + 1e-12);
    }
    const auto m = validate(oracle::random_common_model(rng, 3, 1, true));
    CHECK_THROWS_AS(aggregate_blocks(oracle::portfolio(Eigen::Vector3d(1, 1, 1)), m, 0.01, 0), ValidationError);
    CHECK_THROWS_AS(aggregate_blocks(oracle::portfolio(Eigen::Vector3d(1, 1, 1)), m, 0.01, 3), ValidationError);
}
