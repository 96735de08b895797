#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "unionlap/continuum.hpp"
#include "unionlap/graph.hpp"

namespace unionlap {

/// k smallest eigenpairs of a graph Laplacian. Eigenvectors are normalized in
/// L2(mu_n), i.e. (1/n) sum u(x)^2 = 1, pairwise orthogonal in the same inner
/// product, and sign-fixed so the coordinate of largest magnitude is positive.
struct SpectralResult {
    Eigen::VectorXd eigenvalues;  // ascending, length k
    Eigen::MatrixXd vectors;      // n x k
    Eigen::VectorXd residuals;    // per pair ||L u - lambda u|| / ||u||
    LaplacianKind kind;
    double tolerance = 0.0;  // absolute residual threshold the solver enforced
    bool connected = true;
    int iterations = 0;

    long long n() const { return vectors.rows(); }
    int k() const { return static_cast<int>(eigenvalues.size()); }
};

/// Iterative solve (Lanczos with full reorthogonalization, deflating the
/// analytically known kernel vector: sqrt(deg) for NormalizedSym, constants
/// otherwise); dense direct solve when n <= 512. tol is relative to the
/// operator norm bound. Throws SolverError on non-convergence.
SpectralResult smallest_eigenpairs(const Graph& graph, const LaplacianKind& kind, int k,
                                   double tol = 1e-8);

/// Order-preserving comparison of a computed spectrum against a reference.
struct AlignmentReport {
    struct Pair {
        double computed = 0.0;
        double reference = 0.0;
        double rel_error = 0.0;  // |c - r| / max(r, lambda3_ref)
        std::string source;
    };

    struct Cluster {
        int first = 0;  // index range [first, first+size) into pairs
        int size = 1;
        double reference = 0.0;
        double computed_spread = 0.0;
        /// principal angles vs an evaluated reference basis, when available
        std::vector<double> subspace_angles;
    };

    std::vector<Pair> pairs;
    std::vector<Cluster> clusters;  // reference eigenvalues closer than 1e-9
    /// |mean(u on M1) - mean(u on M2)| / pooled std for each eigenvector
    /// (two-component models; empty otherwise), capped at 1e6.
    std::vector<double> separation_scores;
};

AlignmentReport align_spectra(const SpectralResult& result, const ReferenceSpectrum& reference,
                              const SampleCloud& cloud);

/// Separation score of one vector between labels 0 and 1; capped at 1e6.
double separation_score(const Eigen::VectorXd& u, const std::vector<int>& labels);

/// var(u restricted to component) / var(u).
double component_variance_fraction(const Eigen::VectorXd& u, const std::vector<int>& labels,
                                   int component);

}  // namespace unionlap
