/*
 * quadrature.hpp — Gauss–Legendre quadrature on [0,1] and templated node
 * generation.
 *
 * The Fourier coefficients of the model catalog are oscillatory integrals
 * ∫₀¹ μ(x) φ_j(x) φ_k(x) w(x) dx; Gauss–Legendre with a doubled-node
 * self-check is the ground-truth oracle for all closed-form displays.
 *
 * Node/weight generation is templated on the scalar type because the
 * a-posteriori verification of biorthogonal families runs in extended
 * precision: the quadrature nodes must be computed at working precision,
 * not rounded from double.
 */

#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace bistab {

// Gauss–Legendre nodes and weights on [-1, 1], scalar type S.
// Newton iteration on the Legendre recurrence; `tol` is the convergence
// threshold for the Newton step (pass ~10 ulp of the working precision).
template <typename S>
std::pair<std::vector<S>, std::vector<S>> gauss_legendre_nodes(int n, S tol) {
    using std::abs;
    using std::cos;
    if (n < 1) throw std::invalid_argument("gauss_legendre_nodes: n must be >= 1");
    std::vector<S> x(n), w(n);
    const int m = (n + 1) / 2;
    const double pi = 3.14159265358979323846;
    for (int i = 1; i <= m; ++i) {
        // Chebyshev-like initial guess, refined by Newton on P_n(z) = 0.
        S z = S(std::cos(pi * (i - 0.25) / (n + 0.5)));
        S pp = S(0);
        for (int it = 0; it < 200; ++it) {
            S p1 = S(1), p2 = S(0);
            for (int j = 1; j <= n; ++j) {
                S p3 = p2;
                p2 = p1;
                p1 = ((S(2 * j - 1) * z * p2) - S(j - 1) * p3) / S(j);
            }
            pp = S(n) * (z * p1 - p2) / (z * z - S(1));
            S dz = p1 / pp;
            z -= dz;
            if (abs(dz) <= tol) break;
        }
        // One clean derivative evaluation at the converged node.
        S p1 = S(1), p2 = S(0);
        for (int j = 1; j <= n; ++j) {
            S p3 = p2;
            p2 = p1;
            p1 = ((S(2 * j - 1) * z * p2) - S(j - 1) * p3) / S(j);
        }
        pp = S(n) * (z * p1 - p2) / (z * z - S(1));
        x[i - 1] = -z;
        x[n - i] = z;
        w[i - 1] = S(2) / ((S(1) - z * z) * pp * pp);
        w[n - i] = w[i - 1];
    }
    return {x, w};
}

// A fixed quadrature rule on [0, 1].  Weights are positive and sum to the
// interval length 1; polynomials of degree <= 2*n-1 are integrated exactly.
struct QuadratureRule {
    Eigen::VectorXd nodes;    // in (0, 1)
    Eigen::VectorXd weights;  // positive, sum to 1
    int order = 0;            // polynomial exactness degree (2n-1)
};

// n-point Gauss–Legendre rule mapped to [0, 1].
QuadratureRule gauss_legendre_rule(int n);

// ∫_a^b f via a rule defined on [0,1].
double integrate(const QuadratureRule& rule, const std::function<double(double)>& f,
                 double a = 0.0, double b = 1.0);

}  // namespace bistab
