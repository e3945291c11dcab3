#pragma once

// Generators shared by the unit and acceptance suites.

#include "supraflow/graph.hpp"
#include "supraflow/objectives.hpp"
#include "supraflow/random.hpp"

#include <vector>

namespace supraflow::testing {

/// Random multiplex with N in [1, max_nodes], M in [1, max_layers]. Each
/// intralink is present with probability `density`; each interlayer pair is
/// coupled with probability `coupling`.
inline MultiplexNetwork random_network(UniformSampler& draw, int max_nodes, int max_layers,
                                       double density = 0.5, double coupling = 0.7) {
    const int n = draw.integer(1, max_nodes);
    const int m = draw.integer(1, max_layers);
    std::vector<LayerGraph> layers;
    std::vector<double> intra;
    for (int a = 0; a < m; ++a) {
        Matrix w = Matrix::Zero(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                if (draw(0.0, 1.0) < density) {
                    w(i, j) = draw(0.1, 3.0);
                    w(j, i) = w(i, j);
                }
            }
        }
        layers.emplace_back(std::move(w));
        intra.push_back(draw(0.1, 2.0));
    }
    Matrix inter = Matrix::Zero(m, m);
    for (int a = 0; a < m; ++a) {
        for (int b = a + 1; b < m; ++b) {
            if (draw(0.0, 1.0) < coupling) {
                inter(a, b) = draw(0.05, 2.0);
                inter(b, a) = inter(a, b);
            }
        }
    }
    return MultiplexNetwork(std::move(layers), std::move(intra), std::move(inter));
}

/// Random network forced to be connected: every layer carries a path and
/// consecutive layers are coupled.
inline MultiplexNetwork random_connected_network(UniformSampler& draw, int max_nodes, int max_layers) {
    const int n = draw.integer(1, max_nodes);
    const int m = draw.integer(1, max_layers);
    std::vector<LayerGraph> layers;
    std::vector<double> intra;
    for (int a = 0; a < m; ++a) {
        Matrix w = Matrix::Zero(n, n);
        for (int i = 0; i + 1 < n; ++i) {
            w(i, i + 1) = w(i + 1, i) = draw(0.2, 2.0);
        }
        for (int i = 0; i < n; ++i) {
            for (int j = i + 2; j < n; ++j) {
                if (draw(0.0, 1.0) < 0.3) w(i, j) = w(j, i) = draw(0.2, 2.0);
            }
        }
        layers.emplace_back(std::move(w));
        intra.push_back(draw(0.2, 2.0));
    }
    Matrix inter = Matrix::Zero(m, m);
    for (int a = 0; a + 1 < m; ++a) inter(a, a + 1) = inter(a + 1, a) = draw(0.1, 2.0);
    return MultiplexNetwork(std::move(layers), std::move(intra), std::move(inter));
}

inline ObjectiveSet random_quadratics(UniformSampler& draw, int n, int m) {
    std::vector<ReplicaCost> costs;
    for (int k = 0; k < n * m; ++k) costs.emplace_back(Quadratic{draw(0.5, 2.0), draw(-5.0, 5.0)});
    return ObjectiveSet(n, m, std::move(costs));
}

inline Vector random_vector(UniformSampler& draw, Eigen::Index n, double range = 5.0) {
    Vector v(n);
    for (Eigen::Index k = 0; k < n; ++k) v(k) = draw(-range, range);
    return v;
}

/// Two-layer, three-node objectives of the small worked example:
/// layer 1 costs y^2/2 + i y, layer 2 costs y^2/2 + (i + 3) y.
inline ObjectiveSet layered_linear_3x2() {
    std::vector<ReplicaCost> costs;
    for (int b = 1; b <= 6; ++b) costs.emplace_back(Quadratic{1.0, static_cast<double>(b)});
    return ObjectiveSet(3, 2, std::move(costs));
}

}  // namespace supraflow::testing
