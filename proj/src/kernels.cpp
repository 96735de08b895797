#include "unionlap/kernels.hpp"

#include <cmath>

#include "quadrature.hpp"
#include "unionlap/errors.hpp"

namespace unionlap {

KernelProfile KernelProfile::truncated_gaussian(double r_t) {
    if (!(r_t > 0.0)) throw ValidationError("truncated gaussian needs truncation radius > 0");
    return {Kind::TruncatedGaussian, r_t};
}

KernelProfile KernelProfile::from_key(const std::string& key) {
    if (key == "indicator") return indicator();
    if (key == "triangular") return triangular();
    if (key.rfind("gauss:", 0) == 0) {
        try {
            return truncated_gaussian(std::stod(key.substr(6)));
        } catch (const ValidationError&) {
            throw;
        } catch (...) {
            throw ValidationError("bad kernel key: " + key);
        }
    }
    throw ValidationError("unknown kernel key: " + key +
                          " (expected indicator | triangular | gauss:<r_t>)");
}

std::string KernelProfile::key() const {
    switch (kind) {
        case Kind::Indicator: return "indicator";
        case Kind::Triangular: return "triangular";
        case Kind::TruncatedGaussian: {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "gauss:%g", truncation_radius);
            return buf;
        }
    }
    return "indicator";
}

double eta_eval(const KernelProfile& profile, double t) {
    if (t < 0.0) throw ValidationError("eta_eval: t must be nonnegative");
    if (t > 1.0) return 0.0;
    switch (profile.kind) {
        case KernelProfile::Kind::Indicator: return 1.0;
        case KernelProfile::Kind::Triangular: return 1.0 - t;
        case KernelProfile::Kind::TruncatedGaussian: {
            double s = profile.truncation_radius * t;
            return std::exp(-0.5 * s * s);
        }
    }
    return 0.0;
}

double unit_sphere_area(int d) {
    // 2 pi^{d/2} / Gamma(d/2)
    return 2.0 * std::pow(3.14159265358979323846, 0.5 * d) / std::tgamma(0.5 * d);
}

double unit_ball_volume(int d) {
    return std::pow(3.14159265358979323846, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

Moments kernel_moments(const KernelProfile& profile, int d) {
    if (d < 1) throw ValidationError("kernel_moments: dimension must be >= 1");
    Moments m;
    m.dimension = d;
    if (profile.kind == KernelProfile::Kind::Indicator) {
        m.beta = unit_ball_volume(d);
        m.sigma = m.beta / (d + 2);
        return m;
    }
    const double area = unit_sphere_area(d);
    auto radial = [&](int power) {
        return detail::adaptive_simpson(
            [&](double r) { return eta_eval(profile, r) * std::pow(r, power); }, 0.0, 1.0, 1e-12);
    };
    m.beta = area * radial(d - 1);
    m.sigma = area / d * radial(d + 1);
    return m;
}

}  // namespace unionlap
