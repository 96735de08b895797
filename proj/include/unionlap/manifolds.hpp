#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace unionlap {

/// An embedded patch: either a flat k-dimensional box or a circle.
/// FlatPiece local coordinates live in the box [-L_j/2, L_j/2]; the circle is
/// parametrized by arclength s in [0, 2*pi*r).
struct Patch {
    enum class Kind { FlatPiece, Circle };

    Kind kind = Kind::FlatPiece;
    int dim = 1;                // intrinsic dimension (1 for Circle)
    Eigen::VectorXd origin;     // flat: box center; circle: center
    Eigen::MatrixXd frame;      // N x dim orthonormal (circle: N x 2)
    Eigen::VectorXd lengths;    // flat: side lengths L_1..L_k
    double radius = 0.0;        // circle only
    bool has_boundary = true;

    static Patch flat_piece(const Eigen::VectorXd& origin, const Eigen::MatrixXd& frame,
                            const Eigen::VectorXd& lengths);
    static Patch circle(const Eigen::VectorXd& center, const Eigen::MatrixXd& frame2,
                        double radius);

    int ambient_dim() const { return static_cast<int>(origin.size()); }

    /// Total Riemannian volume (product of lengths, or 2*pi*r).
    double measure() const;

    Eigen::VectorXd embed(const Eigen::VectorXd& local) const;

    /// Exact local coordinates of an on-patch ambient point; also usable as a
    /// projection for nearby points. Returns (local, residual distance).
    std::pair<Eigen::VectorXd, double> to_local(const Eigen::VectorXd& ambient) const;

    /// Euclidean distance from an ambient point to the patch.
    double distance_to(const Eigen::VectorXd& ambient) const;

    bool contains_local(const Eigen::VectorXd& local, double tol = 1e-12) const;
};

/// Probability density on a patch. CosineBump is
///   rho(xi) ~ 1 + a * prod_j cos(2*pi*f_j*xi_j/L_j)   (flat)
///   rho(s)  ~ 1 + a * cos(f * s / r)                  (circle)
/// normalized to integrate to 1 over the patch; frequencies are positive
/// integers and the amplitude satisfies 0 <= a < 1.
struct DensitySpec {
    enum class Kind { Uniform, CosineBump };

    Kind kind = Kind::Uniform;
    double amplitude = 0.0;
    Eigen::VectorXd frequency;    // per local axis (flat) or single entry (circle)
    double normalization = 1.0;   // Z with rho = unnormalized/Z; set by attach()
    double density_bound = 1.0;   // C_rho with 1/C_rho <= rho <= C_rho

    static DensitySpec uniform() { return {}; }
    static DensitySpec cosine_bump(double amplitude, const Eigen::VectorXd& frequency);

    /// Compute normalization and bounds for the given patch. Must be called
    /// (done by MixtureModel::validated) before value() is used.
    void attach(const Patch& patch);

    double unnormalized(const Patch& patch, const Eigen::VectorXd& local) const;
    double value(const Patch& patch, const Eigen::VectorXd& local) const;
    /// Gradient of rho with respect to local coordinates.
    Eigen::VectorXd gradient(const Patch& patch, const Eigen::VectorXd& local) const;
};

struct MixtureComponent {
    Patch patch;
    DensitySpec density;
    double alpha = 1.0;
};

/// Mixture measure mu = sum_i alpha_i rho_i dVol_i on a union of patches.
struct MixtureModel {
    std::vector<MixtureComponent> components;
    int ambient_dim = 0;

    /// Validates invariants (orthonormal frames, sum alpha = 1, densities
    /// normalized) and computes density normalizations. Throws ValidationError.
    static MixtureModel validated(std::vector<MixtureComponent> components);

    int component_count() const { return static_cast<int>(components.size()); }
    const MixtureComponent& component(int i) const { return components.at(static_cast<size_t>(i)); }

    /// rho^{(i)} at local coordinates (without the alpha factor).
    double density_at(int component, const Eigen::VectorXd& local) const;
};

/// Labeled sample of the mixture.
struct SampleCloud {
    Eigen::MatrixXd points;          // n x N, row per sample
    std::vector<int> labels;         // component index per point
    std::vector<long long> counts;   // per-component counts, sum = n
    std::uint64_t seed = 0;

    long long size() const { return points.rows(); }
    int ambient_dim() const { return static_cast<int>(points.cols()); }
};

/// Draw n samples: component counts are Binomial (one categorical draw per
/// point from the master stream), then each component is filled from its own
/// sub-stream derive_seed(seed, i). Uniform densities use inverse transform;
/// CosineBump uses rejection (error after 1000*n failed proposals).
SampleCloud sample_mixture(const MixtureModel& model, long long n, std::uint64_t seed);

/// Same per-component generation but with the counts pinned (used by the
/// paper presets, which fix the counts instead of drawing them).
SampleCloud sample_mixture_counts(const MixtureModel& model,
                                  const std::vector<long long>& counts, std::uint64_t seed);

/// Smallest principal angle between the tangent spaces of two flat pieces,
/// modulo their common subspace; in (0, pi/2]. Throws ValidationError when
/// the tangent spaces coincide (degenerate intersection).
double principal_angle(const Patch& piece_a, const Patch& piece_b);

/// Lower bandwidth scale from the sampling theory:
/// sqrt(log log n / n) for d = 1 and (log n / n)^(1/d) for d >= 2.
double ell_n(long long n, int d);

struct BandwidthReport {
    bool ok = false;
    double ell = 0.0;
    double ratio = 0.0;  // epsilon / ell
};

/// true iff ell_n(n, d_max) < epsilon < 1.
BandwidthReport bandwidth_ok(long long n, int d_max, double epsilon);

/// Affine intersection of the spans of two flat pieces.
struct FlatIntersection {
    bool intersects = false;
    int dim = 0;                 // d12
    Eigen::VectorXd point;       // a point on the intersection
    Eigen::MatrixXd basis;       // N x dim orthonormal basis of its directions
};

FlatIntersection flat_intersection(const Patch& piece_a, const Patch& piece_b);

/// Named model presets ("paper-rect-segment", "circle-uniform", ...).
MixtureModel model_preset(const std::string& name);
std::vector<std::string> model_preset_names();

}  // namespace unionlap
