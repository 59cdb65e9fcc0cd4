#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "mixrisk/errors.hpp"

namespace mixrisk {

struct RootOptions {
    double f_tol = 1e-12;  // absolute tolerance on |f(x)|
    int max_iterations = 200;
};

template <typename Scalar>
struct RootResult {
    Scalar x;
    Scalar f;
    int iterations;
    Scalar lo, hi;  // final bracket
};

/// Brent's method on a sign-changing bracket [lo, hi].
///
/// Stops when |f| <= f_tol or the bracket has shrunk to a few ulps.
template <typename Scalar, typename F>
RootResult<Scalar> brent(const F& f, Scalar lo, Scalar hi, const RootOptions& opt = {}) {
    using std::abs;
    using std::swap;
    constexpr Scalar eps = std::numeric_limits<Scalar>::epsilon();

    Scalar a = lo, b = hi;
    Scalar fa = f(a), fb = f(b);
    if (fa == Scalar(0)) return {a, fa, 0, a, a};
    if (fb == Scalar(0)) return {b, fb, 0, b, b};
    if ((fa > 0) == (fb > 0))
        throw DomainError("brent: root is not bracketed on [" + std::to_string(double(lo)) + ", " +
                          std::to_string(double(hi)) + "]");

    Scalar c = a, fc = fa;
    Scalar d = b - a, e = d;
    for (int it = 1; it <= opt.max_iterations; ++it) {
        if ((fb > 0) == (fc > 0)) {
            c = a;
            fc = fa;
            d = e = b - a;
        }
        if (abs(fc) < abs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const Scalar tol = Scalar(2) * eps * abs(b);
        const Scalar m = Scalar(0.5) * (c - b);
        if (abs(fb) <= Scalar(opt.f_tol) || abs(m) <= tol) {
            const Scalar other = c;
            return {b, fb, it, b < other ? b : other, b < other ? other : b};
        }
        if (abs(e) >= tol && abs(fa) > abs(fb)) {
            // Inverse quadratic interpolation, or secant when only two points differ.
            Scalar p, q, r;
            const Scalar s = fb / fa;
            if (a == c) {
                p = Scalar(2) * m * s;
                q = Scalar(1) - s;
            } else {
                q = fa / fc;
                r = fb / fc;
                p = s * (Scalar(2) * m * q * (q - r) - (b - a) * (r - Scalar(1)));
                q = (q - Scalar(1)) * (r - Scalar(1)) * (s - Scalar(1));
            }
            if (p > 0) q = -q; else p = -p;
            if (Scalar(2) * p < std::min(Scalar(3) * m * q - abs(tol * q), abs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += abs(d) > tol ? d : (m > 0 ? tol : -tol);
        fb = f(b);
    }
    throw ConvergenceError("brent: no convergence within " + std::to_string(opt.max_iterations) + " iterations");
}

}  // namespace mixrisk
