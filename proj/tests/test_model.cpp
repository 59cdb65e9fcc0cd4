#include <doctest.h>

#include <cmath>
#include <random>

#include "mixrisk/model.hpp"
#include "oracles.hpp"

using namespace mixrisk;
using doctest::Approx;

namespace {

EllipticComponent<double> comp(double w, Eigen::VectorXd mu, Eigen::MatrixXd sigma, GeneratorKind<double> g) {
    return {w, std::move(mu), std::move(sigma), std::move(g)};
}

bool mentions(const ValidationError& e, const std::string& needle) {
    for (const auto& s : e.issues())
        if (s.find(needle) != std::string::npos) return true;
    return false;
}

}  // namespace

TEST_CASE("validate: single normal component is valid") {
    MixtureModel<double> m{2, {comp(1.0, Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2), Normal{})}};
    const auto v = validate(m);
    CHECK(v.dimension() == 2);
    CHECK(v.common_moments());
    CHECK((v.factor(0).reconstruct() - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-15);
}

TEST_CASE("validate: weight sum violation") {
    MixtureModel<double> m{1,
                           {comp(0.6, Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1), Normal{}),
                            comp(0.5, Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1), Normal{})}};
    try {
        validate(m);
        FAIL("expected a ValidationError");
    } catch (const ValidationError& e) {
        CHECK(mentions(e, "weights: sum"));
    }
}

TEST_CASE("validate: indefinite scale matrix") {
    Eigen::MatrixXd s(2, 2);
    s << 1, 2, 2, 1;
    MixtureModel<double> m{2, {comp(1.0, Eigen::VectorXd::Zero(2), s, Normal{})}};
    try {
        validate(m);
        FAIL("expected a ValidationError");
    } catch (const ValidationError& e) {
        CHECK(mentions(e, "components[0].scale: not positive definite"));
    }
}

TEST_CASE("validate: reports every violation at once") {
    Eigen::MatrixXd asym(2, 2);
    asym << 1, 0.5, 0.2, 1;
    MixtureModel<double> m{2,
                           {comp(0.7, Eigen::VectorXd::Zero(3), asym, StudentT<double>{2.0}),
                            comp(0.7, Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(3, 3), Normal{})}};
    try {
        validate(m);
        FAIL("expected a ValidationError");
    } catch (const ValidationError& e) {
        CHECK(mentions(e, "components[0].mean: length 3"));
        CHECK(mentions(e, "components[0].scale: not symmetric"));
        CHECK(mentions(e, "components[0].generator.nu: must be > 2"));
        CHECK(mentions(e, "components[1].scale: shape 3x3"));
        CHECK(mentions(e, "weights: sum"));
        CHECK(e.issues().size() == 5);
    }
}

TEST_CASE("validate: custom generator mass is checked") {
    const auto half = Custom<double>{[](double u) { return 0.5 * std::exp(-0.5 * u) / std::sqrt(2 * M_PI); }, "half"};
    MixtureModel<double> m{1, {comp(1.0, Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1), half)}};
    try {
        validate(m);
        FAIL("expected a ValidationError");
    } catch (const ValidationError& e) {
        CHECK(mentions(e, "density integrates to"));
    }
    const auto neg = Custom<double>{[](double u) { return u > 5 ? -1.0 : 0.1; }, "neg"};
    m.components[0].generator = neg;
    CHECK_THROWS_AS(validate(m), ValidationError);
}

TEST_CASE("validate: common-moment flag") {
    std::mt19937_64 rng(1);
    auto common = oracle::random_common_model(rng, 3, 2, false);
    CHECK(validate(common).common_moments());
    common.components[1].mean[0] += 1e-9;
    CHECK_FALSE(validate(common).common_moments());
    auto general = oracle::random_general_model(rng, 3, 2);
    CHECK_FALSE(validate(general).common_moments());
}

TEST_CASE("validate: idempotent") {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 20; ++i) {
        const auto once = validate(oracle::random_general_model(rng, 4, 3));
        const auto twice = validate(once.model());
        for (std::size_t j = 0; j < once.size(); ++j) {
            CHECK(once.component(j).scale == twice.component(j).scale);
            CHECK(once.factor(j).lower == twice.factor(j).lower);
        }
        CHECK(once.common_moments() == twice.common_moments());
    }
}

TEST_CASE("portfolio_mean: examples") {
    EllipticComponent<double> c;
    c.mean = Eigen::Vector2d(0, 0);
    CHECK(portfolio_mean(oracle::portfolio(Eigen::Vector2d(1, 1)), c) == 0.0);
    c.mean = Eigen::Vector2d(3, 4);
    CHECK(portfolio_mean(oracle::portfolio(Eigen::Vector2d(2, -1)), c) == 2.0);
    c.mean = Eigen::VectorXd::Constant(5, 0.1);
    CHECK(portfolio_mean(oracle::portfolio(Eigen::VectorXd::Ones(5)), c) == Approx(0.5).epsilon(1e-15));
    CHECK_THROWS_AS(portfolio_mean(oracle::portfolio(Eigen::VectorXd::Ones(3)), c), ValidationError);
}

TEST_CASE("portfolio_stdev: examples") {
    EllipticComponent<double> c;
    c.scale = Eigen::Matrix2d::Identity();
    CHECK(portfolio_stdev(oracle::portfolio(Eigen::Vector2d(1, 0)), c) == 1.0);
    CHECK(portfolio_stdev(oracle::portfolio(Eigen::Vector2d(3, 4)), c) == Approx(5.0).epsilon(1e-15));
    c.scale << 1, 0.5, 0.5, 1;
    CHECK(portfolio_stdev(oracle::portfolio(Eigen::Vector2d(1, 1)), c) == Approx(std::sqrt(3.0)).epsilon(1e-15));
    c.scale << 1, 1, 1, 1;
    CHECK_THROWS_AS(portfolio_stdev(oracle::portfolio(Eigen::Vector2d(1, -1)), c), ValidationError);
    CHECK_THROWS_AS(portfolio_stdev(oracle::portfolio(Eigen::Vector3d(1, 0, 0)), c), ValidationError);
}

TEST_CASE("portfolio_stdev: Cholesky route, homogeneity") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> lam(0.01, 100.0);
    for (int i = 0; i < 200; ++i) {
        const auto m = validate(oracle::random_general_model(rng, 5, 1));
        const auto p = oracle::portfolio(oracle::random_vector(rng, 5));
        const double direct = portfolio_stdev(p, m.component(0));
        CHECK(portfolio_stdev(p, m.factor(0)) == Approx(direct).epsilon(1e-10));
        const double l = lam(rng);
        CHECK(portfolio_stdev(oracle::portfolio(l * p.delta), m.component(0)) == Approx(l * direct).epsilon(1e-13));
    }
}

TEST_CASE("portfolio checks") {
    const auto m = validate(MixtureModel<double>{
        2, {comp(1.0, Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2), Normal{})}});
    CHECK_THROWS_AS(check_portfolio(oracle::portfolio(Eigen::Vector2d(0, 0)), m), ValidationError);
    CHECK_THROWS_AS(check_portfolio(oracle::portfolio(Eigen::Vector2d(1, 0), 1.0, -1.0), m), ValidationError);
    CHECK_NOTHROW(check_portfolio(oracle::portfolio(Eigen::Vector2d(1, 0), 1.0, 1.0), m));
}
