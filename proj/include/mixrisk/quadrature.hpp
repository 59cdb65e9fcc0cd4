#pragma once

// Adaptive Gauss-Kronrod (7/15) quadrature, plus a semi-infinite variant
// for integrands supplied in log form.

#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "mixrisk/errors.hpp"

namespace mixrisk {

struct QuadratureOptions {
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    int max_segments = 4000;
};

template <typename Scalar>
struct QuadratureResult {
    Scalar value = Scalar(0);
    Scalar error = Scalar(0);
    int evaluations = 0;
};

namespace detail {

inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename Scalar>
struct Segment {
    Scalar lo, hi, value, error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

template <typename Scalar, typename F>
Segment<Scalar> gk15(const F& f, Scalar lo, Scalar hi) {
    using std::abs;
    const Scalar center = Scalar(0.5) * (lo + hi);
    const Scalar half = Scalar(0.5) * (hi - lo);
    const Scalar fc = f(center);
    Scalar kronrod = fc * Scalar(kKronrodWeights[7]);
    Scalar gauss = fc * Scalar(kGaussWeights[3]);
    for (int i = 0; i < 7; ++i) {
        const Scalar dx = half * Scalar(kKronrodNodes[i]);
        const Scalar pair = f(center - dx) + f(center + dx);
        kronrod += Scalar(kKronrodWeights[i]) * pair;
        if (i % 2 == 1) gauss += Scalar(kGaussWeights[i / 2]) * pair;
    }
    const Scalar value = kronrod * half;
    if (!std::isfinite(double(value)))
        throw ConvergenceError("quadrature: non-finite integrand on [" + std::to_string(double(lo)) + ", " +
                               std::to_string(double(hi)) + "]");
    return {lo, hi, value, abs((kronrod - gauss) * half)};
}

// Global adaptive refinement over an initial set of segments.
template <typename Scalar, typename F>
QuadratureResult<Scalar> refine(const F& f, std::vector<Segment<Scalar>> initial, const QuadratureOptions& opt) {
    using std::abs;
    using std::max;
    std::priority_queue<Segment<Scalar>> heap;
    Scalar total = Scalar(0);
    Scalar err = Scalar(0);
    int evals = 15 * static_cast<int>(initial.size());
    for (auto& s : initial) {
        total += s.value;
        err += s.error;
        heap.push(s);
    }
    while (err > max(Scalar(opt.abs_tol), Scalar(opt.rel_tol) * abs(total))) {
        if (static_cast<int>(heap.size()) >= opt.max_segments)
            throw ConvergenceError("quadrature: tolerance not reached within " + std::to_string(opt.max_segments) +
                                   " segments (error estimate " + std::to_string(double(err)) + ")");
        const auto worst = heap.top();
        heap.pop();
        const Scalar mid = Scalar(0.5) * (worst.lo + worst.hi);
        const auto left = gk15(f, worst.lo, mid);
        const auto right = gk15(f, mid, worst.hi);
        evals += 30;
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum to shed accumulated rounding from the running updates.
    total = Scalar(0);
    err = Scalar(0);
    while (!heap.empty()) {
        total += heap.top().value;
        err += heap.top().error;
        heap.pop();
    }
    return {total, err, evals};
}

}  // namespace detail

/// Adaptive Gauss-Kronrod on a finite interval [lo, hi].
template <typename Scalar, typename F>
QuadratureResult<Scalar> integrate(const F& f, Scalar lo, Scalar hi, const QuadratureOptions& opt = {}) {
    return detail::refine<Scalar>(f, {detail::gk15(f, lo, hi)}, opt);
}

/// Integral of exp(log_f(u)) over [a, inf).
///
/// The substitution u = a + e^y turns algebraic tails into exponential ones
/// and removes integrable endpoint behaviour at u = a.  The y-line is covered
/// by unit-width panels grown in both directions until they stop contributing.
template <typename Scalar, typename LogF>
QuadratureResult<Scalar> integrate_semi_infinite_log(const LogF& log_f, Scalar a, const QuadratureOptions& opt = {}) {
    using std::abs;
    using std::exp;
    using std::log;
    const auto g = [&](Scalar y) {
        const Scalar ey = exp(y);
        const Scalar lf = log_f(a + ey);
        if (std::isnan(double(lf))) throw ConvergenceError("quadrature: NaN log-integrand");
        return exp(lf + y);
    };

    constexpr Scalar width = Scalar(2);
    constexpr int max_panels = 400;
    constexpr double negligible = 1e-18;
    const Scalar y0 = log(Scalar(1) + abs(a));

    std::vector<detail::Segment<Scalar>> panels;
    Scalar total = Scalar(0);
    const auto grow = [&](int direction) {
        Scalar prev = std::numeric_limits<Scalar>::infinity();
        int quiet = 0;
        for (int k = 0; k < max_panels; ++k) {
            const Scalar lo = direction > 0 ? y0 + width * Scalar(k) : y0 - width * Scalar(k + 1);
            auto seg = detail::gk15(g, lo, lo + width);
            const Scalar mag = abs(seg.value);
            total += seg.value;
            panels.push_back(seg);
            if (mag <= Scalar(negligible) * abs(total) && mag <= prev) {
                if (++quiet >= 3) return;
            } else {
                quiet = 0;
            }
            prev = mag;
        }
        throw ConvergenceError("quadrature: semi-infinite integrand does not decay within " +
                               std::to_string(max_panels) + " panels");
    };
    grow(+1);
    grow(-1);
    return detail::refine<Scalar>(g, std::move(panels), opt);
}

}  // namespace mixrisk
