#pragma once

// Radial density generators g of elliptic laws
//   f(x) = |Sigma|^{-1/2} g((x - mu) Sigma^{-1} (x - mu)^t)
// and the one-dimensional quantities the risk engines need from them:
// the standardized marginal tail G(s) and the tail mean E[Z 1{Z > q}].

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <type_traits>
#include <variant>

#include "mixrisk/errors.hpp"
#include "mixrisk/quadrature.hpp"
#include "mixrisk/specfun.hpp"

namespace mixrisk {

template <typename Scalar>
struct StudentT {
    Scalar nu;
};

struct Normal {};

/// User supplied generator g(s), s >= 0.  Tails and tail means are obtained
/// by quadrature and depend on the dimension the generator is used in.
template <typename Scalar>
struct Custom {
    std::function<Scalar(Scalar)> g;
    std::string label = "custom";
};

template <typename Scalar>
using GeneratorKind = std::variant<StudentT<Scalar>, Normal, Custom<Scalar>>;

template <typename Scalar>
std::string generator_name(const GeneratorKind<Scalar>& kind) {
    return std::visit(
        [](const auto& k) -> std::string {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, StudentT<Scalar>>) return "student-t(" + std::to_string(double(k.nu)) + ")";
            else if constexpr (std::is_same_v<K, Normal>) return "normal";
            else return k.label;
        },
        kind);
}

/// How standardized ES tail means are evaluated.
enum class EsRoute { ClosedForm, Quadrature };

/// ln g(u) in dimension n.
template <typename Scalar>
Scalar log_radial_density(const GeneratorKind<Scalar>& kind, Scalar u, int n) {
    using std::log;
    using std::log1p;
    const Scalar half_n = Scalar(n) / Scalar(2);
    return std::visit(
        [&](const auto& k) -> Scalar {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, StudentT<Scalar>>) {
                const Scalar nu = k.nu;
                const Scalar log_c = log_gamma((nu + Scalar(n)) / Scalar(2)) - log_gamma(nu / Scalar(2)) -
                                     half_n * log(nu * std::numbers::pi_v<Scalar>);
                return log_c - (Scalar(n) + nu) / Scalar(2) * log1p(u / nu);
            } else if constexpr (std::is_same_v<K, Normal>) {
                return -half_n * log(Scalar(2) * std::numbers::pi_v<Scalar>) - u / Scalar(2);
            } else {
                const Scalar v = k.g(u);
                if (v < Scalar(0)) throw DomainError(k.label + ": generator returned a negative value");
                return log(v);
            }
        },
        kind);
}

/// pi^{n/2}/Gamma(n/2) * integral_0^inf u^{n/2-1} g(u) du, which is 1 for a
/// properly normalized generator in dimension n.
template <typename Scalar>
Scalar generator_mass(const GeneratorKind<Scalar>& kind, int n, const QuadratureOptions& opt = {}) {
    using std::exp;
    using std::log;
    const Scalar half_n = Scalar(n) / Scalar(2);
    const Scalar log_const = half_n * log(std::numbers::pi_v<Scalar>) - log_gamma(half_n);
    const auto log_f = [&](Scalar u) {
        return log_const + (half_n - Scalar(1)) * log(u) + log_radial_density(kind, u, n);
    };
    return integrate_semi_infinite_log<Scalar>(log_f, Scalar(0), opt).value;
}

namespace detail {

// P(Z <= -s), s > 0, for the standardized marginal of a custom generator in
// dimension n.  Integrating out the n-1 orthogonal coordinates leaves
//   G(s) = pi^{n/2}/(2 Gamma(n/2)) int_{s^2}^inf u^{n/2-1} g(u) Q(u) du
// with Q(u) = I_{(u-s^2)/u}((n-1)/2, 1/2) (and Q = 1 when n = 1).
template <typename Scalar>
Scalar custom_tail(const GeneratorKind<Scalar>& kind, Scalar s, int n) {
    using std::log;
    const Scalar s2 = s * s;
    const Scalar half_n = Scalar(n) / Scalar(2);
    const Scalar log_const = half_n * log(std::numbers::pi_v<Scalar>) - log_gamma(half_n) - log(Scalar(2));
    const auto log_f = [&](Scalar u) {
        Scalar lq = Scalar(0);
        if (n > 1) {
            const Scalar y = (u - s2) / u;
            lq = log(ibeta(y, s2 / u, (Scalar(n) - Scalar(1)) / Scalar(2), Scalar(0.5)));
        }
        return log_const + (half_n - Scalar(1)) * log(u) + log_radial_density(kind, u, n) + lq;
    };
    return integrate_semi_infinite_log<Scalar>(log_f, s2).value;
}

}  // namespace detail

/// Standardized marginal tail G(s) = P(Z <= -s) for any real s; G(0) = 1/2
/// and G(-s) = 1 - G(s).  `n` only matters for custom generators.
template <typename Scalar>
Scalar generator_tail(const GeneratorKind<Scalar>& kind, Scalar s, int n = 1,
                      TailRoute route = TailRoute::IncompleteBeta) {
    if (std::isnan(double(s))) throw DomainError("generator_tail: NaN argument");
    if (s == Scalar(0)) return Scalar(0.5);
    if (s < Scalar(0)) return Scalar(1) - generator_tail(kind, -s, n, route);
    return std::visit(
        [&](const auto& k) -> Scalar {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, StudentT<Scalar>>) return student_tail(s, k.nu, route);
            else if constexpr (std::is_same_v<K, Normal>) return normal_tail(s);
            else return detail::custom_tail(kind, s, n);
        },
        kind);
}

/// E[Z 1{Z > q}] for the standardized marginal Z, by radial quadrature:
///   pi^{(n-1)/2} / (2 Gamma((n+1)/2)) * int_{q^2}^inf (u - q^2)^{(n-1)/2} g(u) du.
/// The integrand is evaluated in log space.  Even in q.
template <typename Scalar>
Scalar tail_mean_quadrature(const GeneratorKind<Scalar>& kind, Scalar q, int n, const QuadratureOptions& opt = {}) {
    using std::log;
    if (n < 1) throw DomainError("tail_mean_quadrature: dimension must be >= 1");
    const Scalar q2 = q * q;
    const Scalar h = (Scalar(n) - Scalar(1)) / Scalar(2);
    const Scalar log_const =
        h * log(std::numbers::pi_v<Scalar>) - log(Scalar(2)) - log_gamma((Scalar(n) + Scalar(1)) / Scalar(2));
    const auto log_f = [&](Scalar u) {
        const Scalar gap = u - q2;
        const Scalar lgap = h == Scalar(0) ? Scalar(0) : h * log(gap);
        return log_const + lgap + log_radial_density(kind, u, n);
    };
    return integrate_semi_infinite_log<Scalar>(log_f, q2, opt).value;
}

/// E[Z 1{Z > q}] in closed form where one exists:
///   Student: Gamma((nu-1)/2) / (2 sqrt(pi) Gamma(nu/2)) nu^{nu/2} (q^2 + nu)^{(1-nu)/2}
///   Normal:  phi(q)
/// Custom generators fall back to quadrature.
template <typename Scalar>
Scalar tail_mean(const GeneratorKind<Scalar>& kind, Scalar q, int n = 1, EsRoute route = EsRoute::ClosedForm) {
    using std::exp;
    using std::log;
    if (route == EsRoute::Quadrature) return tail_mean_quadrature(kind, q, n);
    return std::visit(
        [&](const auto& k) -> Scalar {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, StudentT<Scalar>>) {
                const Scalar nu = k.nu;
                if (!(nu > Scalar(1))) throw DomainError("tail_mean: Student tail mean needs nu > 1");
                const Scalar log_t = log_gamma((nu - Scalar(1)) / Scalar(2)) - log_gamma(nu / Scalar(2)) -
                                     log(Scalar(2)) - Scalar(0.5) * log(std::numbers::pi_v<Scalar>) +
                                     nu / Scalar(2) * log(nu) + (Scalar(1) - nu) / Scalar(2) * log(q * q + nu);
                return exp(log_t);
            } else if constexpr (std::is_same_v<K, Normal>) {
                return normal_density(q);
            } else {
                return tail_mean_quadrature(kind, q, n);
            }
        },
        kind);
}

}  // namespace mixrisk
