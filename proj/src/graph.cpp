#include "supraflow/graph.hpp"

#include "supraflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>
#include <string>

namespace supraflow {

namespace {

void check_square_symmetric(const Matrix& m, const char* what) {
    if (m.rows() != m.cols()) {
        throw InvalidModel(std::string(what) + " must be square");
    }
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (!std::isfinite(m(i, j))) {
                throw InvalidModel(std::string(what) + " has a non-finite entry");
            }
            if (m(i, j) != m(j, i)) {
                std::ostringstream os;
                os << what << " is not symmetric at (" << i + 1 << ", " << j + 1 << ")";
                throw InvalidModel(os.str());
            }
            if (m(i, j) < 0.0) {
                std::ostringstream os;
                os << what << " has a negative entry at (" << i + 1 << ", " << j + 1 << ")";
                throw InvalidModel(os.str());
            }
        }
        if (m(i, i) != 0.0) {
            std::ostringstream os;
            os << what << " has a nonzero diagonal entry at " << i + 1;
            throw InvalidModel(os.str());
        }
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// LayerGraph

LayerGraph::LayerGraph(Matrix weights) : weights_(std::move(weights)) {
    if (weights_.rows() < 1) {
        throw InvalidModel("layer must have at least one node");
    }
    check_square_symmetric(weights_, "layer weights");
}

LayerGraph LayerGraph::empty(int n_nodes) {
    if (n_nodes < 1) throw InvalidModel("layer must have at least one node");
    return LayerGraph(Matrix::Zero(n_nodes, n_nodes));
}

LayerGraph LayerGraph::ring(int n_nodes, double weight) {
    if (n_nodes < 1) throw InvalidModel("layer must have at least one node");
    Matrix w = Matrix::Zero(n_nodes, n_nodes);
    // n = 2 degenerates to a single edge, n = 1 to an isolated node.
    for (int i = 0; i < n_nodes; ++i) {
        int j = (i + 1) % n_nodes;
        if (i != j) {
            w(i, j) = weight;
            w(j, i) = weight;
        }
    }
    return LayerGraph(std::move(w));
}

LayerGraph LayerGraph::complete(int n_nodes, double weight) {
    if (n_nodes < 1) throw InvalidModel("layer must have at least one node");
    Matrix w = Matrix::Constant(n_nodes, n_nodes, weight);
    w.diagonal().setZero();
    return LayerGraph(std::move(w));
}

LayerGraph LayerGraph::path(int n_nodes, double weight) {
    if (n_nodes < 1) throw InvalidModel("layer must have at least one node");
    Matrix w = Matrix::Zero(n_nodes, n_nodes);
    for (int i = 0; i + 1 < n_nodes; ++i) {
        w(i, i + 1) = weight;
        w(i + 1, i) = weight;
    }
    return LayerGraph(std::move(w));
}

LayerGraph LayerGraph::from_edges(int n_nodes, const std::vector<Edge>& edges) {
    if (n_nodes < 1) throw InvalidModel("layer must have at least one node");
    Matrix w = Matrix::Zero(n_nodes, n_nodes);
    for (const auto& e : edges) {
        if (e.from < 0 || e.from >= n_nodes || e.to < 0 || e.to >= n_nodes) {
            throw InvalidModel("edge endpoint out of range");
        }
        if (e.from == e.to) {
            throw InvalidModel("self-loops are not allowed");
        }
        w(e.from, e.to) = e.weight;
        w(e.to, e.from) = e.weight;
    }
    return LayerGraph(std::move(w));
}

// ---------------------------------------------------------------------------
// MultiplexNetwork

MultiplexNetwork::MultiplexNetwork(std::vector<LayerGraph> layers,
                                   std::vector<double> intra_diffusion, Matrix inter_diffusion)
    : n_nodes_(0),
      layers_(std::move(layers)),
      intra_(std::move(intra_diffusion)),
      inter_(std::move(inter_diffusion)) {
    if (layers_.empty()) {
        throw InvalidModel("multiplex needs at least one layer");
    }
    n_nodes_ = layers_.front().n_nodes();
    for (const auto& g : layers_) {
        if (g.n_nodes() != n_nodes_) {
            throw InvalidModel("all layers must have the same number of nodes");
        }
    }
    const auto m = static_cast<Eigen::Index>(layers_.size());
    if (static_cast<Eigen::Index>(intra_.size()) != m) {
        throw InvalidModel("one intralayer diffusion constant per layer is required");
    }
    for (double d : intra_) {
        if (!(d > 0.0) || !std::isfinite(d)) {
            throw InvalidModel("intralayer diffusion constants must be positive");
        }
    }
    if (inter_.rows() != m || inter_.cols() != m) {
        throw InvalidModel("interlayer diffusion must be an MxM array");
    }
    check_square_symmetric(inter_, "interlayer diffusion");
}

MultiplexNetwork MultiplexNetwork::uniform(std::vector<LayerGraph> layers,
                                           std::vector<double> intra_diffusion,
                                           double inter_diffusion) {
    const auto m = static_cast<Eigen::Index>(layers.size());
    Matrix inter = Matrix::Constant(m, m, inter_diffusion);
    inter.diagonal().setZero();
    return MultiplexNetwork(std::move(layers), std::move(intra_diffusion), std::move(inter));
}

MultiplexNetwork MultiplexNetwork::with_inter_diffusion(int alpha, int beta, double value) const {
    if (alpha == beta) throw InvalidModel("interlayer constant needs two distinct layers");
    Matrix inter = inter_;
    inter(alpha, beta) = value;
    inter(beta, alpha) = value;
    return MultiplexNetwork(layers_, intra_, std::move(inter));
}

MultiplexNetwork MultiplexNetwork::without_interlayer() const {
    return MultiplexNetwork(layers_, intra_, Matrix::Zero(inter_.rows(), inter_.cols()));
}

MultiplexNetwork MultiplexNetwork::scaled(double factor) const {
    if (!(factor > 0.0)) throw InvalidModel("scale factor must be positive");
    std::vector<double> intra = intra_;
    for (double& d : intra) d *= factor;
    return MultiplexNetwork(layers_, std::move(intra), inter_ * factor);
}

// ---------------------------------------------------------------------------
// Operators

SupraLaplacian::SupraLaplacian(int n_nodes, int n_layers, Matrix entries)
    : n_nodes_(n_nodes), n_layers_(n_layers), entries_(std::move(entries)) {
    if (entries_.rows() != static_cast<Eigen::Index>(n_nodes_) * n_layers_ ||
        entries_.cols() != entries_.rows()) {
        throw InvalidModel("supra-Laplacian dimension must be N*M");
    }
}

Matrix layer_laplacian(const LayerGraph& g) {
    Matrix lap = -g.weights();
    for (int i = 0; i < g.n_nodes(); ++i) lap(i, i) = g.strength(i);
    return lap;
}

Matrix supra_adjacency(const MultiplexNetwork& net) {
    const int n = net.n_nodes();
    const int m = net.n_layers();
    Matrix a = Matrix::Zero(net.dim(), net.dim());
    for (int alpha = 0; alpha < m; ++alpha) {
        a.block(alpha * n, alpha * n, n, n) = net.layer(alpha).weights();
        for (int beta = 0; beta < m; ++beta) {
            if (beta != alpha) a.block(alpha * n, beta * n, n, n).setIdentity();
        }
    }
    return a;
}

SupraLaplacian supra_laplacian(const MultiplexNetwork& net) {
    const int n = net.n_nodes();
    const int m = net.n_layers();
    Matrix l = Matrix::Zero(net.dim(), net.dim());
    for (int alpha = 0; alpha < m; ++alpha) {
        // Lambda: D^{[alpha]} L^{[alpha]} on the diagonal block
        l.block(alpha * n, alpha * n, n, n) = net.intra_diffusion(alpha) * layer_laplacian(net.layer(alpha));
        // Delta: sum_{beta != alpha} D^{[alpha,beta]} I on the diagonal, -D^{[alpha,beta]} I off it
        for (int beta = 0; beta < m; ++beta) {
            if (beta == alpha) continue;
            const double d = net.inter_diffusion(alpha, beta);
            for (int i = 0; i < n; ++i) {
                l(alpha * n + i, alpha * n + i) += d;
                l(alpha * n + i, beta * n + i) = -d;
            }
        }
    }
    return SupraLaplacian(n, m, std::move(l));
}

bool is_connected(const MultiplexNetwork& net) {
    const int n = net.n_nodes();
    const int m = net.n_layers();
    const int dim = net.dim();
    std::vector<char> seen(static_cast<std::size_t>(dim), 0);
    std::queue<int> frontier;
    frontier.push(0);
    seen[0] = 1;
    int reached = 1;
    while (!frontier.empty()) {
        const int k = frontier.front();
        frontier.pop();
        const int alpha = k / n;
        const int i = k % n;
        auto visit = [&](int next) {
            if (!seen[static_cast<std::size_t>(next)]) {
                seen[static_cast<std::size_t>(next)] = 1;
                ++reached;
                frontier.push(next);
            }
        };
        for (int j = 0; j < n; ++j) {
            if (net.layer(alpha).weight(i, j) > 0.0) visit(net.index(j, alpha));
        }
        for (int beta = 0; beta < m; ++beta) {
            if (beta != alpha && net.inter_diffusion(alpha, beta) > 0.0) visit(net.index(i, beta));
        }
    }
    return reached == dim;
}

// ---------------------------------------------------------------------------
// Spectrum

EigenDecomposition symmetric_eigen(const Matrix& input, const JacobiOptions& options) {
    if (input.rows() != input.cols()) {
        throw InvalidModel("eigensolver needs a square matrix");
    }
    const Eigen::Index n = input.rows();
    Matrix a = input;
    Matrix v = Matrix::Identity(n, n);

    auto off_norm = [&a, n]() {
        double s = 0.0;
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) s += 2.0 * a(p, q) * a(p, q);
        }
        return std::sqrt(s);
    };

    const double scale = input.norm();
    const double target = options.tolerance * scale;
    int sweep = 0;
    while (off_norm() > target) {
        if (sweep >= options.max_sweeps) {
            std::ostringstream os;
            os << "Jacobi eigensolver did not converge after " << sweep << " sweeps";
            throw EigenNonconvergence(sweep, os.str());
        }
        ++sweep;
        for (Eigen::Index p = 0; p < n - 1; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                // Rotation angle that annihilates a(p, q); small-root choice of t.
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&a](Eigen::Index x, Eigen::Index y) { return a(x, x) < a(y, y); });

    EigenDecomposition out;
    out.values.reserve(static_cast<std::size_t>(n));
    out.vectors.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const auto src = order[static_cast<std::size_t>(k)];
        out.values.push_back(a(src, src));
        out.vectors.col(k) = v.col(src);
    }
    return out;
}

std::vector<double> spectrum(const SupraLaplacian& sl, const JacobiOptions& options) {
    return symmetric_eigen(sl.entries(), options).values;
}

double algebraic_connectivity(const SupraLaplacian& sl) {
    if (sl.dim() < 2) return 0.0;
    return spectrum(sl)[1];
}

}  // namespace supraflow
