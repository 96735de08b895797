#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "unionlap/kernels.hpp"
#include "unionlap/manifolds.hpp"

namespace unionlap {

/// Continuum eigenvalues with multiplicities, tagged by the component that
/// produced them ("coupled" for the metric-graph reference).
struct ReferenceSpectrum {
    enum class Kind { NormalizedLimit, UnnormalizedLimit };

    struct Entry {
        double lambda = 0.0;
        int multiplicity = 1;
        std::string source;
    };

    Kind kind = Kind::NormalizedLimit;
    std::vector<Entry> entries;  // ascending

    /// Eigenvalues expanded by multiplicity, ascending; at most k values.
    std::vector<double> expanded(int k = -1) const;
    int total_multiplicity() const;
};

/// Closed-form function on the union: one evaluator (value and local-coords
/// gradient) per component, plus the rule used when a value is requested at
/// the intersection itself.
struct SmoothFunctionSpec {
    struct ComponentFn {
        std::function<double(const Eigen::VectorXd&)> value;
        std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
    };

    enum class IntersectionRule { FirstComponent, Average };

    std::vector<ComponentFn> components;
    IntersectionRule rule = IntersectionRule::FirstComponent;

    static SmoothFunctionSpec constant(int component_count, double c);
    /// u = c_i on component i.
    static SmoothFunctionSpec piecewise_constant(const std::vector<double>& values);
};

/// L2_rho-normalized Neumann eigenfunction of a uniform flat piece for the
/// given mode numbers (one per local axis), as a ComponentFn.
SmoothFunctionSpec::ComponentFn flat_neumann_eigenfunction(const Patch& patch,
                                                           const std::vector<int>& modes);

/// First k eigenvalues of the weighted Neumann problem on a single patch with
/// Uniform density: (sigma_d/beta_d) * pi^2 * sum_j (m_j/L_j)^2 on a flat
/// piece, (sigma_1/beta_1) * (m/r)^2 with multiplicity 2 (m >= 1) on a circle.
ReferenceSpectrum reference_spectrum_component(const Patch& patch, const DensitySpec& density,
                                               const KernelProfile& profile, int k,
                                               const std::string& source_tag = "");

/// Limiting spectrum of the union.
///  - NormalizedLimit (requires d2 - d12 >= 2): sorted merge of the
///    per-component weighted Neumann spectra.
///  - UnnormalizedLimit with d1 < d2: {0 with multiplicity 2} followed by the
///    nonzero spectrum of sigma_2 * (alpha_2 rho_2)-weighted Neumann problem
///    on the larger component (EVP2 semantics; note sigma, not sigma/beta).
ReferenceSpectrum merged_union_spectrum(const MixtureModel& model, const KernelProfile& profile,
                                        ReferenceSpectrum::Kind kind, int k);

/// Finite-difference reference for the codimension-one case where all
/// components are 1D segments meeting at shared points: assembles the
/// second-order discretization of -(sigma/beta) rho^-2 (rho^2 v')' on every
/// edge with Neumann ends and continuity + zero total weighted flux at the
/// junctions, and returns its first k eigenvalues. rho is the global density
/// alpha_i rho_i. Throws ValidationError when h exceeds a tenth of the
/// shortest edge.
ReferenceSpectrum metric_graph_spectrum_fd(const MixtureModel& model,
                                           const KernelProfile& profile, double h, int k);

struct NonlocalResult {
    double value = 0.0;
    double estimated_error = 0.0;  // |value - coarse-grid value|
    bool budget_warning = false;
};

/// Evaluator fed to the nonlocal quadrature: receives the component, local
/// and ambient coordinates of a node and the convolution eta_eps * mu at the
/// node (computed on the same grid), and returns u at the node.
using NodeEvaluator =
    std::function<double(int component, const Eigen::VectorXd& local,
                         const Eigen::VectorXd& ambient, double conv)>;

/// Nonlocal normalized Dirichlet energy
///   E_eps(u) = eps^-2 iint eta_eps(|x-y|) |u(x)/sqrt(conv x) - u(y)/sqrt(conv y)|^2 dmu dmu
/// by tensorized midpoint quadrature per patch; the convolution shares the
/// quadrature grid. budget caps the total node count (Monte Carlo fallback
/// when the patch dimensions sum past 4).
NonlocalResult nonlocal_energy(const MixtureModel& model, const NodeEvaluator& u, double epsilon,
                               const KernelProfile& profile = KernelProfile::indicator(),
                               long long budget = 2'000'000);
NonlocalResult nonlocal_energy(const MixtureModel& model, const SmoothFunctionSpec& u,
                               double epsilon,
                               const KernelProfile& profile = KernelProfile::indicator(),
                               long long budget = 2'000'000);

/// Local limit energy
///   E(u) = sum_i (sigma_i/beta_i) int |grad(u/sqrt(alpha_i rho_i)) alpha_i rho_i|^2 dVol_i
/// by per-patch quadrature to relative 1e-8. Returns +infinity when the
/// codimension-one trace condition fails (traces of u/sqrt(alpha rho)
/// mismatch at the intersection).
double limit_energy(const MixtureModel& model, const SmoothFunctionSpec& u,
                    const KernelProfile& profile);

/// L2_rho norm^2 of u over the union: sum_i alpha_i int u_i^2 rho_i dVol_i.
double l2_mu_norm_sq(const MixtureModel& model, const SmoothFunctionSpec& u);

/// Logarithmic-layer recovery function for a lower-dimensional piece piercing
/// a higher-dimensional one. On the higher-dimensional component the value is
///   near (d < C eps):            u1(pi(x)), degree-corrected
///   mid  (C eps <= d < C sqrt(eps)): logarithmic interpolation with weight
///        w = (log sqrt(eps) - log d)/(log sqrt(eps) - log eps), clamped to [0,1]
///   far:                         u2(x), degree-corrected
/// where d is the distance to the intersection, pi the projection onto it,
/// and C = 2/sin(theta) with theta the principal angle.
struct RecoveryFunction {
    enum class Region { Near, Mid, Far };

    const MixtureModel* model = nullptr;
    SmoothFunctionSpec u1, u2;
    double epsilon = 0.0;
    double region_constant = 0.0;  // C
    int low = 0, high = 1;         // component indices, d_low < d_high
    Eigen::VectorXd intersection_point;
    Eigen::MatrixXd intersection_basis;  // N x d12
    double beta_low = 0.0, beta_high = 0.0;  // kernel masses used in the corrections

    double intersection_distance(const Eigen::VectorXd& ambient) const;
    Eigen::VectorXd project_to_intersection(const Eigen::VectorXd& ambient) const;
    Region classify(double dist) const;
    /// Raw interpolation weight at distance d (1 at d=eps, 0 at d=sqrt(eps)).
    double interp_weight(double dist) const;

    /// u(x)/sqrt(conv x): the degree-correction square roots cancel against
    /// the normalization of the nonlocal energy, so the ratio is exact.
    double ratio_value(int component, const Eigen::VectorXd& local,
                       const Eigen::VectorXd& ambient) const;

    /// Evaluator for nonlocal_energy (multiplies the ratio by sqrt(conv)).
    NodeEvaluator evaluator() const;
};

/// Build the recovery function. Requires d_low - d12 <= 2 <= d_high - d12 and
/// eps small enough that the near region stays clear of the patch boundary;
/// throws ValidationError otherwise.
RecoveryFunction build_recovery(const MixtureModel& model, const SmoothFunctionSpec& u1,
                                const SmoothFunctionSpec& u2, double epsilon,
                                const KernelProfile& profile);

struct LogLayerResult {
    double closed_form = 0.0;  // 4*pi/|log eps|
    double quadrature = 0.0;   // 2D annulus integral of |grad w|^2
};

/// Dirichlet integral of the logarithmic interpolation layer over the annulus
/// eps <= |x| <= sqrt(eps) in R^2; equals 4*pi/|log eps|.
LogLayerResult log_layer_energy(double epsilon);

}  // namespace unionlap
