#pragma once

#include <vector>

namespace trustshape {

/// Fixed-node quadrature rule: integrates f against a weight law as
/// sum_i weights[i] * f(nodes[i]).
struct Quadrature {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
};

/// Gauss-Legendre rule with n nodes on (-1, 1); exact for polynomials of
/// degree 2n-1. Nodes are symmetric about 0 and strictly interior.
Quadrature gauss_legendre(int n);

/// Gauss-Legendre rule mapped to (0, 1) with weights summing to 1.
Quadrature gauss_legendre_unit(int n);

}
