#pragma once

// Mixture-of-elliptic risk-factor models and linear portfolios.
//
// Sigma_j is the scale (dispersion) matrix of the density exactly as it
// appears in |Sigma_j|^{-1/2} g_j((x - mu_j) Sigma_j^{-1} (x - mu_j)^t).
// For Student components it is NOT the covariance; no nu/(nu-2) rescaling
// happens anywhere in the engine.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "mixrisk/errors.hpp"
#include "mixrisk/generator.hpp"

namespace mixrisk {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

inline constexpr double kWeightSumTol = 1e-12;
inline constexpr double kSymmetryTol = 1e-12;
inline constexpr double kCommonMomentTol = 1e-12;
inline constexpr double kGeneratorMassTol = 1e-6;

template <typename Scalar>
struct EllipticComponent {
    Scalar weight = Scalar(1);
    Vector<Scalar> mean;
    Matrix<Scalar> scale;
    GeneratorKind<Scalar> generator = Normal{};
};

template <typename Scalar>
struct MixtureModel {
    int dimension = 0;
    std::vector<EllipticComponent<Scalar>> components;
};

/// P&L = delta . X + theta * horizon.
template <typename Scalar>
struct Portfolio {
    Vector<Scalar> delta;
    Scalar theta = Scalar(0);
    Scalar horizon = Scalar(0);

    Scalar theta_carry() const { return theta * horizon; }
};

/// Lower-triangular A with A A^t = Sigma, so that
/// delta Sigma delta^t = |A^t delta|^2.
template <typename Scalar>
struct CholeskyFactor {
    Matrix<Scalar> lower;

    Matrix<Scalar> reconstruct() const { return lower * lower.transpose(); }
};

namespace detail {

template <typename Scalar>
Scalar relative_diff(const Matrix<Scalar>& a, const Matrix<Scalar>& b) {
    using std::max;
    const Scalar scale = max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
    const Scalar diff = (a - b).cwiseAbs().maxCoeff();
    return scale > Scalar(0) ? diff / scale : diff;
}

template <typename Scalar>
bool is_symmetric(const Matrix<Scalar>& m) {
    return m.rows() == m.cols() && relative_diff<Scalar>(m, m.transpose()) <= Scalar(kSymmetryTol);
}

}  // namespace detail

/// Every violated invariant of the model, in component order.  Empty when valid.
template <typename Scalar>
std::vector<std::string> model_issues(const MixtureModel<Scalar>& model) {
    using std::abs;
    std::vector<std::string> issues;
    const int n = model.dimension;
    if (n < 1) issues.push_back("dimension: must be >= 1, got " + std::to_string(n));
    if (model.components.empty()) issues.push_back("components: at least one component is required");

    Scalar weight_sum = Scalar(0);
    for (std::size_t j = 0; j < model.components.size(); ++j) {
        const auto& c = model.components[j];
        const std::string where = "components[" + std::to_string(j) + "]";
        weight_sum += c.weight;
        if (!(c.weight > Scalar(0)) || c.weight > Scalar(1))
            issues.push_back(where + ".weight: must lie in (0, 1], got " + std::to_string(double(c.weight)));
        if (c.mean.size() != n)
            issues.push_back(where + ".mean: length " + std::to_string(c.mean.size()) + " != dimension " +
                             std::to_string(n));
        if (c.scale.rows() != n || c.scale.cols() != n) {
            issues.push_back(where + ".scale: shape " + std::to_string(c.scale.rows()) + "x" +
                             std::to_string(c.scale.cols()) + " != dimension " + std::to_string(n));
        } else if (!c.scale.allFinite()) {
            issues.push_back(where + ".scale: contains non-finite entries");
        } else if (!detail::is_symmetric<Scalar>(c.scale)) {
            issues.push_back(where + ".scale: not symmetric");
        } else if (Eigen::LLT<Matrix<Scalar>> llt(c.scale); llt.info() != Eigen::Success) {
            issues.push_back(where + ".scale: not positive definite");
        }
        if (c.mean.size() > 0 && !c.mean.allFinite()) issues.push_back(where + ".mean: contains non-finite entries");

        std::visit(
            [&](const auto& k) {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, StudentT<Scalar>>) {
                    if (!(k.nu > Scalar(2)))
                        issues.push_back(where + ".generator.nu: must be > 2, got " + std::to_string(double(k.nu)));
                } else if constexpr (std::is_same_v<K, Custom<Scalar>>) {
                    if (!k.g) {
                        issues.push_back(where + ".generator: custom generator has no function");
                        return;
                    }
                    for (double s : {0.0, 0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0, 100.0, 1000.0}) {
                        if (!(k.g(Scalar(s)) >= Scalar(0))) {
                            issues.push_back(where + ".generator: g(" + std::to_string(s) + ") is negative or NaN");
                            return;
                        }
                    }
                    if (n >= 1) {
                        try {
                            const Scalar mass = generator_mass<Scalar>(k, n);
                            if (abs(mass - Scalar(1)) > Scalar(kGeneratorMassTol))
                                issues.push_back(where + ".generator: density integrates to " +
                                                 std::to_string(double(mass)) + " in dimension " + std::to_string(n));
                        } catch (const std::exception& e) {
                            issues.push_back(where + ".generator: normalization check failed: " + e.what());
                        }
                    }
                }
            },
            c.generator);
    }
    if (!model.components.empty() && abs(weight_sum - Scalar(1)) > Scalar(kWeightSumTol))
        issues.push_back("weights: sum to " + std::to_string(double(weight_sum)) + ", expected 1");
    return issues;
}

/// An immutable, validated model with cached Cholesky factors.
template <typename Scalar>
class ValidatedModel {
public:
    const MixtureModel<Scalar>& model() const noexcept { return model_; }
    int dimension() const noexcept { return model_.dimension; }
    std::size_t size() const noexcept { return model_.components.size(); }
    const EllipticComponent<Scalar>& component(std::size_t j) const { return model_.components[j]; }
    const CholeskyFactor<Scalar>& factor(std::size_t j) const { return factors_[j]; }

    /// All mu_j equal within 1e-12 and all Sigma_j equal within 1e-12 relative.
    bool common_moments() const noexcept { return common_; }

    template <typename S>
    friend ValidatedModel<S> validate(MixtureModel<S> model);

private:
    MixtureModel<Scalar> model_;
    std::vector<CholeskyFactor<Scalar>> factors_;
    bool common_ = false;
};

/// Validates the model and caches its factorizations, or throws a
/// ValidationError listing every violated invariant.
template <typename Scalar>
ValidatedModel<Scalar> validate(MixtureModel<Scalar> model) {
    auto issues = model_issues(model);
    if (!issues.empty()) throw ValidationError(std::move(issues));

    ValidatedModel<Scalar> out;
    out.factors_.reserve(model.components.size());
    for (auto& c : model.components) {
        // Symmetric within tolerance; store the exactly symmetric part.
        c.scale = (Scalar(0.5) * (c.scale + c.scale.transpose())).eval();
        Eigen::LLT<Matrix<Scalar>> llt(c.scale);
        out.factors_.push_back(CholeskyFactor<Scalar>{llt.matrixL()});
    }
    bool common = true;
    const auto& first = model.components.front();
    for (const auto& c : model.components) {
        const Scalar mean_diff = (c.mean - first.mean).cwiseAbs().maxCoeff();
        if (mean_diff > Scalar(kCommonMomentTol) ||
            detail::relative_diff<Scalar>(c.scale, first.scale) > Scalar(kCommonMomentTol)) {
            common = false;
            break;
        }
    }
    out.common_ = common;
    out.model_ = std::move(model);
    return out;
}

/// Portfolio invariants against a model of dimension n; empty when valid.
template <typename Scalar>
std::vector<std::string> portfolio_issues(const Portfolio<Scalar>& p, int n) {
    std::vector<std::string> issues;
    if (p.delta.size() != n)
        issues.push_back("portfolio.delta: length " + std::to_string(p.delta.size()) + " != dimension " +
                         std::to_string(n));
    else if (!p.delta.allFinite())
        issues.push_back("portfolio.delta: contains non-finite entries");
    else if (p.delta.cwiseAbs().maxCoeff() == Scalar(0))
        issues.push_back("portfolio.delta: must not be identically zero");
    if (!(p.horizon >= Scalar(0))) issues.push_back("portfolio.horizon: must be >= 0");
    if (!std::isfinite(double(p.theta))) issues.push_back("portfolio.theta: must be finite");
    return issues;
}

template <typename Scalar>
void check_portfolio(const Portfolio<Scalar>& p, const ValidatedModel<Scalar>& model) {
    auto issues = portfolio_issues(p, model.dimension());
    if (!issues.empty()) throw ValidationError(std::move(issues));
}

/// delta . mu_j
template <typename Scalar>
Scalar portfolio_mean(const Portfolio<Scalar>& p, const EllipticComponent<Scalar>& c) {
    if (p.delta.size() != c.mean.size())
        throw ValidationError("portfolio_mean: delta length " + std::to_string(p.delta.size()) +
                              " != mean length " + std::to_string(c.mean.size()));
    return p.delta.dot(c.mean);
}

/// sqrt(delta Sigma_j delta^t).  A zero result (delta in the null space) is
/// rejected, since no standardized quantile can be formed from it.
template <typename Scalar>
Scalar portfolio_stdev(const Portfolio<Scalar>& p, const EllipticComponent<Scalar>& c) {
    using std::sqrt;
    if (p.delta.size() != c.scale.rows() || c.scale.rows() != c.scale.cols())
        throw ValidationError("portfolio_stdev: delta length " + std::to_string(p.delta.size()) +
                              " does not match scale " + std::to_string(c.scale.rows()) + "x" +
                              std::to_string(c.scale.cols()));
    const Scalar var = p.delta.dot(c.scale * p.delta);
    if (!(var > Scalar(0))) throw ValidationError("portfolio_stdev: delta Sigma delta^t is not positive");
    return sqrt(var);
}

/// |A^t delta| using the cached factor; equals portfolio_stdev.
template <typename Scalar>
Scalar portfolio_stdev(const Portfolio<Scalar>& p, const CholeskyFactor<Scalar>& a) {
    if (p.delta.size() != a.lower.rows())
        throw ValidationError("portfolio_stdev: delta length does not match factor");
    const Scalar s = (a.lower.transpose() * p.delta).norm();
    if (!(s > Scalar(0))) throw ValidationError("portfolio_stdev: |A^t delta| is zero");
    return s;
}

/// Per-component portfolio location and scale.
template <typename Scalar>
struct ComponentMoments {
    Scalar weight;
    Scalar mean;   // delta . mu_j
    Scalar stdev;  // sqrt(delta Sigma_j delta^t)
    const GeneratorKind<Scalar>* generator;
};

template <typename Scalar>
std::vector<ComponentMoments<Scalar>> component_moments(const Portfolio<Scalar>& p, const ValidatedModel<Scalar>& m) {
    check_portfolio(p, m);
    std::vector<ComponentMoments<Scalar>> out;
    out.reserve(m.size());
    for (std::size_t j = 0; j < m.size(); ++j) {
        const auto& c = m.component(j);
        out.push_back({c.weight, portfolio_mean(p, c), portfolio_stdev(p, m.factor(j)), &c.generator});
    }
    return out;
}

}  // namespace mixrisk
