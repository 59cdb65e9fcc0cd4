#pragma once

// Special-function kernel: log-Gamma, Beta, regularized incomplete beta,
// Gauss 2F1 on the left half-line, Student-t and normal tail probabilities,
// and unit-sphere surface constants.
//
// Everything here is a pure function of its arguments.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "mixrisk/errors.hpp"

namespace mixrisk {

inline constexpr int kSeriesBudget = 10000;
inline constexpr int kContinuedFractionBudget = 500;

/// ln Gamma(x) for x > 0 (Lanczos, g = 7, nine terms).
template <typename Scalar>
Scalar log_gamma(Scalar x) {
    if (!(x > Scalar(0))) throw DomainError("log_gamma: x must be > 0, got " + std::to_string(double(x)));
    using std::log;
    using std::sin;
    constexpr Scalar pi = std::numbers::pi_v<Scalar>;
    if (x < Scalar(0.5)) {
        // Reflection keeps the Lanczos sum in its accurate range.
        return log(pi / sin(pi * x)) - log_gamma(Scalar(1) - x);
    }
    static constexpr std::array<double, 9> coef = {
        0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
        771.32342877765313,      -176.61502916214059,   12.507343278686905,
        -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};
    const Scalar xm1 = x - Scalar(1);
    Scalar sum = Scalar(coef[0]);
    for (int i = 1; i < 9; ++i) sum += Scalar(coef[i]) / (xm1 + Scalar(i));
    const Scalar t = xm1 + Scalar(7.5);
    return Scalar(0.5) * log(Scalar(2) * pi) + (xm1 + Scalar(0.5)) * log(t) - t + log(sum);
}

/// ln|Gamma(x)| for any real x that is not a pole; sign receives sign(Gamma(x)).
/// At poles (x a non-positive integer) returns +inf with sign = 0.
template <typename Scalar>
Scalar log_abs_gamma(Scalar x, int& sign) {
    using std::floor;
    using std::log;
    using std::abs;
    using std::sin;
    if (x > Scalar(0)) {
        sign = 1;
        return log_gamma(x);
    }
    if (x == floor(x)) {
        sign = 0;
        return std::numeric_limits<Scalar>::infinity();
    }
    constexpr Scalar pi = std::numbers::pi_v<Scalar>;
    const Scalar s = sin(pi * x);
    sign = s > Scalar(0) ? 1 : -1;
    return log(pi / abs(s)) - log_gamma(Scalar(1) - x);
}

template <typename Scalar>
Scalar log_beta(Scalar a, Scalar b) {
    return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

/// Surface area |S_{n-2}| of the unit sphere in R^{n-1}: 2 pi^{(n-1)/2} / Gamma((n-1)/2).
// Digamma function; reflection handles negative non-integer arguments.
template <typename Scalar>
Scalar digamma(Scalar x) {
    using std::log;
    using std::tan;
    const Scalar pi = Scalar(3.141592653589793238462643383279502884L);
    if (x <= Scalar(0)) {
        return digamma(Scalar(1) - x) - pi / tan(pi * x);
    }
    Scalar acc = Scalar(0);
    while (x < Scalar(10)) {
        acc -= Scalar(1) / x;
        x += Scalar(1);
    }
    const Scalar r = Scalar(1) / (x * x);
    const Scalar series =
        r * (Scalar(1) / 12 - r * (Scalar(1) / 120 - r * (Scalar(1) / 252 - r * (Scalar(1) / 240 - r / 132))));
    return acc + log(x) - Scalar(0.5) / x - series;
}

template <typename Scalar = double>
Scalar sphere_surface(int n) {
    if (n < 2) throw DomainError("sphere_surface: n must be >= 2, got " + std::to_string(n));
    using std::exp;
    using std::log;
    const Scalar h = Scalar(n - 1) / Scalar(2);
    return Scalar(2) * exp(h * log(std::numbers::pi_v<Scalar>) - log_gamma(h));
}

namespace detail {

// A value represented as mantissa * exp(log_scale), so that huge prefactors
// and tiny hypergeometric values can be combined without overflow.
template <typename Scalar>
struct Scaled {
    Scalar mantissa;
    Scalar log_scale;

    Scalar value() const {
        using std::exp;
        return mantissa * exp(log_scale);
    }
};

// Plain power series of 2F1(a,b;c;z); requires |z| < 1.
template <typename Scalar>
Scalar hyp2f1_series(Scalar a, Scalar b, Scalar c, Scalar z) {
    using std::abs;
    constexpr Scalar eps = std::numeric_limits<Scalar>::epsilon();
    Scalar term = Scalar(1);
    Scalar sum = Scalar(1);
    int small_terms = 0;
    for (int k = 0; k < kSeriesBudget; ++k) {
        const Scalar kk = Scalar(k);
        term *= (a + kk) * (b + kk) / ((c + kk) * (kk + Scalar(1))) * z;
        sum += term;
        if (term == Scalar(0)) return sum;
        // Terms may grow before they decay; only stop once the ratio is
        // contracting and two consecutive terms are negligible.
        const Scalar ratio = abs((a + kk + 1) * (b + kk + 1) / ((c + kk + 1) * (kk + 2)) * z);
        if (abs(term) <= eps * abs(sum) && ratio < Scalar(1)) {
            if (++small_terms >= 2) return sum;
        } else {
            small_terms = 0;
        }
    }
    throw ConvergenceError("gauss_2f1: power series did not converge within " +
                           std::to_string(kSeriesBudget) + " terms (z=" + std::to_string(double(z)) + ")");
}

// 2F1(a,b;c;1-v) for small v when c - a - b = m is an integer; the
// connection coefficients then degenerate into the logarithmic series.
template <typename Scalar>
Scaled<Scalar> hyp2f1_integer_gap(Scalar a, Scalar b, Scalar c, Scalar v) {
    using std::abs;
    using std::exp;
    using std::log;
    using std::lround;
    constexpr Scalar eps = std::numeric_limits<Scalar>::epsilon();
    const long m = lround(c - a - b);
    if (m < 0) {
        // Euler: 2F1(a,b;c;w) = (1-w)^{c-a-b} 2F1(c-a,c-b;c;w).
        auto inner = hyp2f1_integer_gap(c - a, c - b, c, v);
        return {inner.mantissa, inner.log_scale + Scalar(m) * log(v)};
    }
    const Scalar mm = Scalar(m);
    const auto rgamma = [](Scalar x) {
        int sign;
        const Scalar lg = log_abs_gamma(x, sign);
        return sign == 0 ? Scalar(0) : Scalar(sign) * exp(-lg);
    };
    int s_c;
    const Scalar log_scale = log_abs_gamma(c, s_c);

    Scalar finite = Scalar(0);
    if (m > 0) {
        Scalar term = Scalar(1);
        for (long n = 0; n < m; ++n) {
            finite += term;
            const Scalar nn = Scalar(n);
            term *= (a + nn) * (b + nn) / ((nn + Scalar(1)) * (Scalar(1) - mm + nn)) * v;
        }
        finite *= exp(log_gamma(mm)) * rgamma(a + mm) * rgamma(b + mm);
    }

    Scalar tail = Scalar(0);
    const Scalar front = rgamma(a) * rgamma(b);
    if (front != Scalar(0)) {
        const Scalar lv = log(v);
        Scalar coef = exp(-log_gamma(mm + Scalar(1)));  // (a+m)_n (b+m)_n v^n / (n! (n+m)!)
        int small_terms = 0;
        for (int n = 0;; ++n) {
            if (n >= kSeriesBudget) {
                throw ConvergenceError("gauss_2f1: logarithmic series did not converge within " +
                                       std::to_string(kSeriesBudget) + " terms");
            }
            const Scalar nn = Scalar(n);
            const Scalar bracket = lv - digamma(nn + Scalar(1)) - digamma(nn + mm + Scalar(1)) +
                                   digamma(a + nn + mm) + digamma(b + nn + mm);
            const Scalar term = coef * bracket;
            tail += term;
            if (abs(term) <= eps * abs(tail)) {
                if (++small_terms >= 2) break;
            } else {
                small_terms = 0;
            }
            coef *= (a + mm + nn) * (b + mm + nn) / ((nn + Scalar(1)) * (nn + mm + Scalar(1))) * v;
            if (coef == Scalar(0)) break;
        }
        const Scalar sign_m = (m % 2 == 0) ? Scalar(1) : Scalar(-1);
        tail *= front * sign_m * std::pow(v, mm);
    }
    return {Scalar(s_c) * (finite - tail), log_scale};
}

// 2F1(a,b;c;w) for w in [0,1), with v = 1 - w supplied exactly by the caller.  Close to 1 the linear transformation
// w -> 1-w is used when c-a-b is not an integer.
template <typename Scalar>
Scaled<Scalar> hyp2f1_unit_interval(Scalar a, Scalar b, Scalar c, Scalar w, Scalar v) {
    using std::abs;
    using std::exp;
    using std::log;
    using std::max;
    using std::round;
    const Scalar d = c - a - b;
    if (w <= Scalar(0.9)) return {hyp2f1_series(a, b, c, w), Scalar(0)};
    if (abs(d - round(d)) < Scalar(1e-9)) return hyp2f1_integer_gap(a, b, c, v);
    int s_c, s_d, s_ca, s_cb, s_md, s_a, s_b;
    const Scalar lg_c = log_abs_gamma(c, s_c);
    const Scalar lg_d = log_abs_gamma(d, s_d);
    const Scalar lg_ca = log_abs_gamma(c - a, s_ca);
    const Scalar lg_cb = log_abs_gamma(c - b, s_cb);
    const Scalar lg_md = log_abs_gamma(-d, s_md);
    const Scalar lg_a = log_abs_gamma(a, s_a);
    const Scalar lg_b = log_abs_gamma(b, s_b);

    const Scalar f1 = hyp2f1_series(a, b, Scalar(1) - d, v);
    const Scalar f2 = hyp2f1_series(c - a, c - b, Scalar(1) + d, v);

    // 1/Gamma vanishes at poles: a zero sign marks a dropped term.
    const int sign1 = (s_ca == 0 || s_cb == 0) ? 0 : s_c * s_d * s_ca * s_cb;
    const int sign2 = (s_a == 0 || s_b == 0) ? 0 : s_c * s_md * s_a * s_b;
    const Scalar log1 = lg_c + lg_d - lg_ca - lg_cb;
    const Scalar log2 = lg_c + lg_md - lg_a - lg_b + d * log(v);

    Scalar ref = Scalar(0);
    if (sign1 != 0 && sign2 != 0) ref = max(log1, log2);
    else if (sign1 != 0) ref = log1;
    else if (sign2 != 0) ref = log2;
    Scalar mant = Scalar(0);
    if (sign1 != 0) mant += Scalar(sign1) * exp(log1 - ref) * f1;
    if (sign2 != 0) mant += Scalar(sign2) * exp(log2 - ref) * f2;
    return {mant, ref};
}

// 2F1(a,b;c;z) for z <= 0, returned in scaled form.
template <typename Scalar>
Scaled<Scalar> hyp2f1_left(Scalar a, Scalar b, Scalar c, Scalar z) {
    using std::abs;
    using std::log;
    if (!(c > Scalar(0))) throw DomainError("gauss_2f1: c must be > 0");
    if (!(z <= Scalar(0))) throw DomainError("gauss_2f1: only z <= 0 is supported");
    if (z == Scalar(0)) return {Scalar(1), Scalar(0)};
    if (z >= Scalar(-0.5)) return {hyp2f1_series(a, b, c, z), Scalar(0)};

    // Pfaff: 2F1(a,b;c;z) = (1-z)^{-b} 2F1(c-a,b;c;w) = (1-z)^{-a} 2F1(a,c-b;c;w),
    // w = z/(z-1) in (1/3, 1).  Pick the variant with the smaller numerator
    // parameters; it needs fewer series terms.
    const Scalar w = z / (z - Scalar(1));
    const Scalar v = Scalar(1) / (Scalar(1) - z);
    const Scalar log1mz = log(Scalar(1) - z);
    if (abs((c - a) * b) <= abs(a * (c - b))) {
        auto inner = hyp2f1_unit_interval(c - a, b, c, w, v);
        return {inner.mantissa, inner.log_scale - b * log1mz};
    }
    auto inner = hyp2f1_unit_interval(a, c - b, c, w, v);
    return {inner.mantissa, inner.log_scale - a * log1mz};
}

// Continued fraction for I_x(a,b) (modified Lentz).
template <typename Scalar>
Scalar ibeta_cf(Scalar a, Scalar b, Scalar x) {
    using std::abs;
    constexpr Scalar tiny = std::numeric_limits<Scalar>::min() * Scalar(16);
    constexpr Scalar eps = std::numeric_limits<Scalar>::epsilon();
    const Scalar qab = a + b;
    const Scalar qap = a + Scalar(1);
    const Scalar qam = a - Scalar(1);
    Scalar c = Scalar(1);
    Scalar d = Scalar(1) - qab * x / qap;
    if (abs(d) < tiny) d = tiny;
    d = Scalar(1) / d;
    Scalar h = d;
    for (int m = 1; m <= kContinuedFractionBudget; ++m) {
        const Scalar mm = Scalar(m);
        const Scalar m2 = Scalar(2 * m);
        Scalar aa = mm * (b - mm) * x / ((qam + m2) * (a + m2));
        d = Scalar(1) + aa * d;
        if (abs(d) < tiny) d = tiny;
        c = Scalar(1) + aa / c;
        if (abs(c) < tiny) c = tiny;
        d = Scalar(1) / d;
        h *= d * c;
        aa = -(a + mm) * (qab + mm) * x / ((a + m2) * (qap + m2));
        d = Scalar(1) + aa * d;
        if (abs(d) < tiny) d = tiny;
        c = Scalar(1) + aa / c;
        if (abs(c) < tiny) c = tiny;
        d = Scalar(1) / d;
        const Scalar del = d * c;
        h *= del;
        if (abs(del - Scalar(1)) <= Scalar(2) * eps) return h;
    }
    throw ConvergenceError("reg_incomplete_beta: continued fraction did not converge within " +
                           std::to_string(kContinuedFractionBudget) + " iterations");
}

// I_x(a,b) given both x and y = 1 - x, so callers that know the complement
// exactly do not lose it to cancellation.
template <typename Scalar>
Scalar ibeta(Scalar x, Scalar y, Scalar a, Scalar b) {
    using std::exp;
    using std::log;
    if (x <= Scalar(0)) return Scalar(0);
    if (y <= Scalar(0)) return Scalar(1);
    const Scalar log_front = a * log(x) + b * log(y) - log_beta(a, b);
    if (x < (a + Scalar(1)) / (a + b + Scalar(2))) {
        return exp(log_front) * ibeta_cf(a, b, x) / a;
    }
    return Scalar(1) - exp(log_front) * ibeta_cf(b, a, y) / b;
}

}  // namespace detail

/// Gauss hypergeometric 2F1(a,b;c;z) on z <= 0.
template <typename Scalar>
Scalar gauss_2f1(Scalar a, Scalar b, Scalar c, Scalar z) {
    return detail::hyp2f1_left(a, b, c, z).value();
}

/// Regularized incomplete beta I_x(a,b).
template <typename Scalar>
Scalar reg_incomplete_beta(Scalar x, Scalar a, Scalar b) {
    if (!(x >= Scalar(0) && x <= Scalar(1)))
        throw DomainError("reg_incomplete_beta: x must lie in [0,1], got " + std::to_string(double(x)));
    if (!(a > Scalar(0)) || !(b > Scalar(0)))
        throw DomainError("reg_incomplete_beta: a and b must be > 0");
    return detail::ibeta(x, Scalar(1) - x, a, b);
}

enum class TailRoute { IncompleteBeta, Hypergeometric };

namespace detail {
template <typename Scalar>
void check_student_args(Scalar s, Scalar nu) {
    if (!(s > Scalar(0))) throw DomainError("student_tail: s must be > 0, got " + std::to_string(double(s)));
    if (!(nu > Scalar(0))) throw DomainError("student_tail: nu must be > 0, got " + std::to_string(double(nu)));
}
}  // namespace detail

/// P(T <= -s) for a standard Student-t with nu degrees of freedom, written as
///   (1/(nu sqrt(pi))) (nu/s^2)^{nu/2} Gamma((nu+1)/2)/Gamma(nu/2)
///     * 2F1((1+nu)/2, nu/2; 1+nu/2; -nu/s^2).
/// The prefactor and the hypergeometric value are combined in log space.
template <typename Scalar>
Scalar student_tail_hypergeometric(Scalar s, Scalar nu) {
    detail::check_student_args(s, nu);
    using std::exp;
    using std::log;
    const Scalar half = Scalar(0.5);
    const auto f = detail::hyp2f1_left(half * (Scalar(1) + nu), half * nu, Scalar(1) + half * nu, -nu / (s * s));
    const Scalar log_pref = log_gamma(half * (nu + Scalar(1))) - log_gamma(half * nu) -
                            log(nu) - half * log(std::numbers::pi_v<Scalar>) +
                            half * nu * (log(nu) - Scalar(2) * log(s));
    return f.mantissa * exp(f.log_scale + log_pref);
}

/// P(T <= -s) = I_{nu/(nu+s^2)}(nu/2, 1/2) / 2.  Reference route.
template <typename Scalar>
Scalar student_tail_beta(Scalar s, Scalar nu) {
    detail::check_student_args(s, nu);
    const Scalar s2 = s * s;
    const Scalar x = nu / (nu + s2);
    const Scalar y = s2 / (nu + s2);
    return Scalar(0.5) * detail::ibeta(x, y, Scalar(0.5) * nu, Scalar(0.5));
}

/// Lower tail probability G(s) = P(T <= -s) of a standard Student-t.
template <typename Scalar>
Scalar student_tail(Scalar s, Scalar nu, TailRoute route = TailRoute::IncompleteBeta) {
    return route == TailRoute::IncompleteBeta ? student_tail_beta(s, nu)
                                              : student_tail_hypergeometric(s, nu);
}

/// Phi(-s) via erfc.
template <typename Scalar>
Scalar normal_tail(Scalar s) {
    using std::erfc;
    return Scalar(0.5) * erfc(s / std::numbers::sqrt2_v<Scalar>);
}

template <typename Scalar>
Scalar normal_density(Scalar s) {
    using std::exp;
    using std::sqrt;
    return exp(Scalar(-0.5) * s * s) / sqrt(Scalar(2) * std::numbers::pi_v<Scalar>);
}

}  // namespace mixrisk
