#include "bistab/quadrature.hpp"

namespace bistab {

QuadratureRule gauss_legendre_rule(int n) {
    auto [x, w] = gauss_legendre_nodes<double>(n, 1e-15);
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        rule.nodes[i] = 0.5 * (x[i] + 1.0);   // map [-1,1] -> [0,1]
        rule.weights[i] = 0.5 * w[i];
    }
    rule.order = 2 * n - 1;
    return rule;
}

double integrate(const QuadratureRule& rule, const std::function<double(double)>& f,
                 double a, double b) {
    if (!(b > a)) throw std::invalid_argument("integrate: empty interval");
    const double h = b - a;
    double sum = 0.0;
    for (int i = 0; i < rule.nodes.size(); ++i)
        sum += rule.weights[i] * f(a + h * rule.nodes[i]);
    return h * sum;
}

}  // namespace bistab
