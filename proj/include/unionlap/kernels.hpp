#pragma once

#include <string>

namespace unionlap {

/// Radial weight profile eta. All profiles are rescaled so that the support
/// is exactly [0,1], eta is non-increasing, eta(0) = 1 and eta is continuous
/// at 0. The truncated Gaussian is exp(-(r_t*t)^2/2) on [0,1], i.e. the unit
/// Gaussian cut at its truncation radius r_t and compressed to unit support.
struct KernelProfile {
    enum class Kind { Indicator, Triangular, TruncatedGaussian };

    Kind kind = Kind::Indicator;
    double truncation_radius = 3.0;  // only used by TruncatedGaussian

    static KernelProfile indicator() { return {Kind::Indicator, 0.0}; }
    static KernelProfile triangular() { return {Kind::Triangular, 0.0}; }
    static KernelProfile truncated_gaussian(double r_t);

    /// Parse a config key: "indicator" | "triangular" | "gauss:<r_t>".
    static KernelProfile from_key(const std::string& key);
    std::string key() const;
};

/// Dimension-indexed moments of a profile:
///   sigma = integral over R^d of eta(|x|) |x_1|^2 dx
///   beta  = integral over R^d of eta(|x|) dx
struct Moments {
    int dimension = 0;
    double sigma = 0.0;
    double beta = 0.0;
};

/// Evaluate eta(t). t must be >= 0; returns 0 for t > 1.
double eta_eval(const KernelProfile& profile, double t);

/// Moments in dimension d >= 1. Closed form for the indicator; adaptive
/// radial quadrature (absolute tolerance 1e-10) otherwise, via
///   beta  = S_{d-1} * int_0^1 eta(r) r^(d-1) dr
///   sigma = S_{d-1} * (1/d) * int_0^1 eta(r) r^(d+1) dr
/// with S_{d-1} the surface area of the unit sphere in R^d.
Moments kernel_moments(const KernelProfile& profile, int d);

/// Surface area of the unit sphere S^{d-1} in R^d.
double unit_sphere_area(int d);

/// Volume of the unit ball in R^d.
double unit_ball_volume(int d);

}  // namespace unionlap
