#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <string>
#include <vector>

#include "unionlap/kernels.hpp"
#include "unionlap/manifolds.hpp"

namespace unionlap {

/// Which graph Laplacian a spectral computation refers to.
/// UnnormalizedScaled multiplies the unnormalized operator by eps^(-d2).
struct LaplacianKind {
    enum class Type { NormalizedSym, Unnormalized, UnnormalizedScaled };

    Type type = Type::NormalizedSym;
    int d2 = 0;

    static LaplacianKind normalized_sym() { return {Type::NormalizedSym, 0}; }
    static LaplacianKind unnormalized() { return {Type::Unnormalized, 0}; }
    static LaplacianKind unnormalized_scaled(int d2);

    static LaplacianKind from_key(const std::string& key, int d2 = 0);
    std::string key() const;

    bool operator==(const LaplacianKind& o) const { return type == o.type && d2 == o.d2; }
};

/// Epsilon-neighborhood graph with weights eta(|x-y|/eps) for |x-y| <= eps
/// (closed ball, diagonal eta(0) included) and degrees
/// deg(x) = (1/n) * sum_y eta(|x-y|/eps).
/// The weight matrix is stored fully symmetric, rows sorted by column index,
/// so all accumulations run in a fixed order.
struct Graph {
    long long n = 0;
    double epsilon = 0.0;
    Eigen::SparseMatrix<double, Eigen::RowMajor> weights;
    Eigen::VectorXd deg;

    // provenance of the vertices
    std::vector<int> labels;
    std::uint64_t cloud_seed = 0;

    long long nnz() const { return weights.nonZeros(); }
};

/// Build the graph with exact neighbor lists from a uniform grid of cell
/// size eps over the bounding box. Throws ValidationError on an empty cloud
/// or eps <= 0.
Graph build_graph(const SampleCloud& cloud, double epsilon, const KernelProfile& profile);

/// All-pairs reference construction (O(n^2)); used as the oracle for the
/// grid-hash adjacency.
Graph build_graph_allpairs(const SampleCloud& cloud, double epsilon,
                           const KernelProfile& profile);

/// E_{n,eps}(u) = 1/(n^2 eps^2) sum_{x,y} w_xy (u(x)/sqrt(deg x) - u(y)/sqrt(deg y))^2
double dirichlet_normalized(const Graph& graph, const Eigen::VectorXd& u);

/// F_{n,eps}(u) = 1/(n^2 eps^2) sum_{x,y} w_xy (u(x) - u(y))^2
double dirichlet_unnormalized(const Graph& graph, const Eigen::VectorXd& u);

/// Apply the chosen Laplacian. Both satisfy
/// <u, L u>_{L2(mu_n)} = corresponding Dirichlet energy, where
/// <u,v>_{L2(mu_n)} = (1/n) sum u(x) v(x).
Eigen::VectorXd apply_laplacian(const Graph& graph, const LaplacianKind& kind,
                                const Eigen::VectorXd& u);

/// Upper bound for the spectrum of the chosen Laplacian (Gershgorin).
double laplacian_norm_bound(const Graph& graph, const LaplacianKind& kind);

/// Connectivity of the weight pattern (BFS).
bool graph_connected(const Graph& graph);

/// Per-component degrees deg_i(x) = (1/n) sum_{y with label i} w_xy.
Eigen::MatrixXd component_degrees(const Graph& graph, int component_count);

/// Write `i j weight` edge list (upper triangle incl. diagonal) plus a
/// degrees column file.
void write_edge_list(const Graph& graph, const std::string& edges_path,
                     const std::string& degrees_path);

/// Sup over samples of component i of |eps^-d_i deg_i(x) - alpha_i beta_i rho_i(x)|,
/// restricted to samples at distance > margin from the other components and,
/// for patches with boundary, > margin from the patch boundary (the KDE limit
/// statement has no boundary layer; see tests). margin defaults to eps.
std::vector<double> kde_sup_error(const Graph& graph, const SampleCloud& cloud,
                                  const MixtureModel& model, const KernelProfile& profile,
                                  double margin = -1.0);

struct DegreeScalingReport {
    // range of eps^(-d_low) deg over samples of the higher-dimensional
    // component within eps/2 of the lower-dimensional one
    double near_min = 0.0, near_max = 0.0;
    long long near_count = 0;
    // range of eps^(-d_high) deg over samples farther than eps from the other
    // component
    double far_min = 0.0, far_max = 0.0;
    long long far_count = 0;
};

/// Degree scaling diagnostic for a two-component model with d1 < d2.
DegreeScalingReport degree_scaling_report(const Graph& graph, const SampleCloud& cloud,
                                          const MixtureModel& model);

}  // namespace unionlap
