#pragma once

#include <Eigen/Dense>
#include <vector>

#include "unionlap/continuum.hpp"
#include "unionlap/graph.hpp"
#include "unionlap/manifolds.hpp"

namespace unionlap {

/// TL2 distance between two empirical (measure, function) pairs with equal
/// atom counts and uniform weights.
struct TL2Result {
    double distance = 0.0;
    std::vector<int> assignment;  // atom i of A matched to assignment[i] of B
    double spatial_cost = 0.0;    // mean |x_i - y_sigma(i)|^2 at the optimum
    double value_cost = 0.0;      // mean |uA_i - uB_sigma(i)|^2 at the optimum

    bool identity_proxy = false;  // set by tl2_proxy
};

/// Exact assignment solve of
///   min_sigma (1/m) sum_i |x_i - y_sigma(i)|^2 + |uA_i - uB_sigma(i)|^2,
/// distance = sqrt of the minimum. m <= 4096. Throws ValidationError on
/// unequal counts (general plans are out of scope).
TL2Result tl2_exact(const Eigen::MatrixXd& points_a, const Eigen::VectorXd& u_a,
                    const Eigen::MatrixXd& points_b, const Eigen::VectorXd& u_b);

/// Identity-coupling surrogate sqrt((1/n) sum |u_n(x_i) - u(x_i)|^2): valid
/// as a TL2 convergence proxy because the samples come from mu and the
/// stagnating maps satisfy ||id - T_n||_inf -> 0.
double tl2_proxy(const SampleCloud& cloud, const Eigen::VectorXd& u_n, const MixtureModel& model,
                 const SmoothFunctionSpec& u);

/// Evaluate a SmoothFunctionSpec at the sample points.
Eigen::VectorXd evaluate_at_samples(const MixtureModel& model, const SampleCloud& cloud,
                                    const SmoothFunctionSpec& u);

/// Degree-corrected reference values at the samples:
///   u(x) * sqrt(eps^-d_i deg(x) / (alpha_i beta_i rho_i(x)))
/// which is how continuum eigenfunctions are compared against discrete ones.
Eigen::VectorXd degree_corrected_samples(const MixtureModel& model, const SampleCloud& cloud,
                                         const Graph& graph, const KernelProfile& profile,
                                         const SmoothFunctionSpec& u);

/// Flip the sign of u to maximize <u, ref>_{L2(mu_n)}.
Eigen::VectorXd align_sign(const Eigen::VectorXd& u, const Eigen::VectorXd& ref);

/// Rotate the columns of a multiplicity cluster to best match a reference
/// basis (orthogonal Procrustes).
Eigen::MatrixXd procrustes_align(const Eigen::MatrixXd& cluster, const Eigen::MatrixXd& reference);

/// Normalized inner product |<a, b>| / (||a|| ||b||) in L2(mu_n).
double l2_mu_n_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace unionlap
