#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace supraflow {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Undirected weighted graph on one layer. Weights are stored densely,
/// symmetric with zero diagonal and nonnegative entries.
class LayerGraph {
public:
    struct Edge {
        int from;  // 0-based
        int to;
        double weight = 1.0;
    };

    explicit LayerGraph(Matrix weights);

    static LayerGraph empty(int n_nodes);
    static LayerGraph ring(int n_nodes, double weight = 1.0);
    static LayerGraph complete(int n_nodes, double weight = 1.0);
    static LayerGraph path(int n_nodes, double weight = 1.0);
    static LayerGraph from_edges(int n_nodes, const std::vector<Edge>& edges);

    int n_nodes() const { return static_cast<int>(weights_.rows()); }
    const Matrix& weights() const { return weights_; }
    double weight(int i, int j) const { return weights_(i, j); }

    /// s_i = sum_j w_ij
    double strength(int i) const { return weights_.row(i).sum(); }

    bool operator==(const LayerGraph& other) const { return weights_ == other.weights_; }

private:
    Matrix weights_;
};

/// N nodes replicated over M layers. Replica (i, alpha) sits at global index
/// alpha * N + i (layer-major, 0-based) in every stacked vector and operator.
class MultiplexNetwork {
public:
    MultiplexNetwork(std::vector<LayerGraph> layers, std::vector<double> intra_diffusion,
                     Matrix inter_diffusion);

    /// Every pair of layers coupled by the same interlayer constant.
    static MultiplexNetwork uniform(std::vector<LayerGraph> layers,
                                    std::vector<double> intra_diffusion,
                                    double inter_diffusion);

    int n_nodes() const { return n_nodes_; }
    int n_layers() const { return static_cast<int>(layers_.size()); }
    int dim() const { return n_nodes_ * n_layers(); }
    int index(int node, int layer) const { return layer * n_nodes_ + node; }

    const std::vector<LayerGraph>& layers() const { return layers_; }
    const LayerGraph& layer(int alpha) const { return layers_.at(alpha); }
    const std::vector<double>& intra_diffusion() const { return intra_; }
    double intra_diffusion(int alpha) const { return intra_.at(alpha); }
    const Matrix& inter_diffusion() const { return inter_; }
    double inter_diffusion(int alpha, int beta) const { return inter_(alpha, beta); }

    /// Copy with D^{[alpha,beta]} = D^{[beta,alpha]} = value.
    MultiplexNetwork with_inter_diffusion(int alpha, int beta, double value) const;

    /// Copy with every interlayer constant set to zero (layers decoupled).
    MultiplexNetwork without_interlayer() const;

    /// Copy with every diffusion constant, intra and inter, multiplied by
    /// factor. Link weights are untouched, so the operator scales linearly.
    MultiplexNetwork scaled(double factor) const;

private:
    int n_nodes_;
    std::vector<LayerGraph> layers_;
    std::vector<double> intra_;
    Matrix inter_;
};

/// Symmetric (N*M)x(N*M) operator Lambda + Delta.
class SupraLaplacian {
public:
    SupraLaplacian(int n_nodes, int n_layers, Matrix entries);

    int n_nodes() const { return n_nodes_; }
    int n_layers() const { return n_layers_; }
    int dim() const { return static_cast<int>(entries_.rows()); }
    const Matrix& entries() const { return entries_; }

    Vector apply(const Vector& x) const { return entries_ * x; }
    void apply(const Vector& x, Vector& out) const { out.noalias() = entries_ * x; }

private:
    int n_nodes_;
    int n_layers_;
    Matrix entries_;
};

/// L_ij = s_i delta_ij - w_ij
Matrix layer_laplacian(const LayerGraph& g);

/// Intralinks on diagonal blocks, unit replica interlinks on every
/// off-diagonal block. Interlayer strength lives only in the Laplacian.
Matrix supra_adjacency(const MultiplexNetwork& net);

SupraLaplacian supra_laplacian(const MultiplexNetwork& net);

/// Breadth-first reachability over replica nodes using intralinks with
/// w > 0 and interlinks with D^{[alpha,beta]} > 0.
bool is_connected(const MultiplexNetwork& net);

struct EigenDecomposition {
    std::vector<double> values;  // ascending
    Matrix vectors;              // column k pairs with values[k]
};

struct JacobiOptions {
    double tolerance = 1e-12;  // relative off-diagonal Frobenius norm
    int max_sweeps = 100;
};

/// Cyclic Jacobi rotations on a dense symmetric matrix.
/// Throws EigenNonconvergence when max_sweeps is exhausted.
EigenDecomposition symmetric_eigen(const Matrix& a, const JacobiOptions& options = {});

std::vector<double> spectrum(const SupraLaplacian& sl, const JacobiOptions& options = {});

/// Second-smallest eigenvalue.
double algebraic_connectivity(const SupraLaplacian& sl);

}  // namespace supraflow
