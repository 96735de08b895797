#pragma once

#include <cmath>
#include <functional>
#include <vector>

namespace unionlap::detail {

/// Adaptive Simpson on [a,b] to absolute tolerance tol.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol, int depth = 60) {
    struct Impl {
        const std::function<double(double)>& f;
        double run(double a, double b, double fa, double fm, double fb, double whole, double tol,
                   int depth) const {
            double m = 0.5 * (a + b);
            double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
            double flm = f(lm), frm = f(rm);
            double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
                return left + right + (left + right - whole) / 15.0;
            return run(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
                   run(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
        }
    };
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return Impl{f}.run(a, b, fa, fm, fb, whole, tol, depth);
}

/// Gauss-Legendre nodes/weights on [-1,1] (Newton on Legendre polynomials).
inline void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    const double pi = 3.14159265358979323846;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[n - 1 - i] = weights[i];
    }
}

/// Gauss-Legendre integral of f over [a,b] with n nodes.
inline double gauss_legendre_integrate(const std::function<double(double)>& f, double a, double b,
                                       int n) {
    std::vector<double> x, w;
    gauss_legendre(n, x, w);
    double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += w[i] * f(mid + half * x[i]);
    return s * half;
}

}  // namespace unionlap::detail
