#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "unionlap/errors.hpp"
#include "unionlap/kernels.hpp"
#include "unionlap/random.hpp"

using namespace unionlap;

namespace {
constexpr double kPi = 3.14159265358979323846;

// Monte Carlo oracle: moments over the cube [-1,1]^d restricted to |x| <= 1.
Moments mc_moments(const KernelProfile& profile, int d, long long samples, std::uint64_t seed) {
    Rng rng(seed);
    double beta_acc = 0.0, sigma_acc = 0.0;
    std::vector<double> x(static_cast<size_t>(d));
    for (long long s = 0; s < samples; ++s) {
        double norm2 = 0.0;
        for (int j = 0; j < d; ++j) {
            x[static_cast<size_t>(j)] = rng.uniform(-1.0, 1.0);
            norm2 += x[static_cast<size_t>(j)] * x[static_cast<size_t>(j)];
        }
        if (norm2 > 1.0) continue;
        double eta = eta_eval(profile, std::sqrt(norm2));
        beta_acc += eta;
        sigma_acc += eta * x[0] * x[0];
    }
    double volume = std::pow(2.0, d);
    Moments m;
    m.dimension = d;
    m.beta = volume * beta_acc / static_cast<double>(samples);
    m.sigma = volume * sigma_acc / static_cast<double>(samples);
    return m;
}

}  // namespace

TEST_CASE("eta evaluation") {
    auto ind = KernelProfile::indicator();
    CHECK(eta_eval(ind, 0.5) == 1.0);
    CHECK(eta_eval(ind, 1.5) == 0.0);
    CHECK(eta_eval(ind, 1.0) == 1.0);  // closed support: the boundary is in

    auto tri = KernelProfile::triangular();
    CHECK(eta_eval(tri, 0.0) == 1.0);
    CHECK(eta_eval(tri, 0.25) == doctest::Approx(0.75).epsilon(1e-15));

    auto gauss = KernelProfile::truncated_gaussian(3.0);
    CHECK(eta_eval(gauss, 0.0) == 1.0);
    CHECK(eta_eval(gauss, 2.0) == 0.0);

    CHECK_THROWS_AS(eta_eval(ind, -0.1), ValidationError);
}

TEST_CASE("eta is non-increasing") {
    for (auto profile : {KernelProfile::indicator(), KernelProfile::triangular(),
                         KernelProfile::truncated_gaussian(4.0)}) {
        double prev = eta_eval(profile, 0.0);
        for (int i = 1; i <= 240; ++i) {
            double t = 1.2 * i / 240.0;
            double v = eta_eval(profile, t);
            CHECK(v <= prev + 1e-14);
            prev = v;
        }
    }
}

TEST_CASE("indicator moments: closed forms") {
    auto ind = KernelProfile::indicator();
    Moments m1 = kernel_moments(ind, 1);
    CHECK(m1.sigma == doctest::Approx(2.0 / 3.0).epsilon(1e-13));
    CHECK(m1.beta == doctest::Approx(2.0).epsilon(1e-13));

    Moments m2 = kernel_moments(ind, 2);
    CHECK(m2.sigma == doctest::Approx(kPi / 4.0).epsilon(1e-13));
    CHECK(m2.beta == doctest::Approx(kPi).epsilon(1e-13));

    Moments m3 = kernel_moments(ind, 3);
    CHECK(m3.sigma == doctest::Approx(4.0 * kPi / 15.0).epsilon(1e-13));
    CHECK(m3.beta == doctest::Approx(4.0 * kPi / 3.0).epsilon(1e-13));

    for (int d = 1; d <= 6; ++d) {
        Moments m = kernel_moments(ind, d);
        CHECK(std::abs(m.sigma - m.beta / (d + 2)) < 1e-10);
    }
}

TEST_CASE("indicator moments vs Monte Carlo oracle") {
    auto ind = KernelProfile::indicator();
    for (int d : {1, 2, 3}) {
        Moments exact = kernel_moments(ind, d);
        Moments mc = mc_moments(ind, d, 20'000'000, 42);
        CHECK(std::abs(mc.beta - exact.beta) / exact.beta < 1e-3);
        CHECK(std::abs(mc.sigma - exact.sigma) / exact.sigma < 3e-3);
    }
}

TEST_CASE("triangular moments: radial quadrature vs closed form") {
    auto tri = KernelProfile::triangular();
    for (int d = 1; d <= 4; ++d) {
        double area = unit_sphere_area(d);
        double beta = area * (1.0 / d - 1.0 / (d + 1));
        double sigma = area / d * (1.0 / (d + 2) - 1.0 / (d + 3));
        Moments m = kernel_moments(tri, d);
        CHECK(m.beta == doctest::Approx(beta).epsilon(1e-10));
        CHECK(m.sigma == doctest::Approx(sigma).epsilon(1e-10));
    }
}

TEST_CASE("truncated gaussian: sigma/beta approaches the unit variance") {
    // in the unscaled variable the ratio is r_t^2 * sigma/beta of the
    // rescaled profile; it converges to 1 as the truncation radius grows
    for (int d : {1, 2, 3}) {
        double prev_gap = 10.0;
        for (double rt : {2.0, 4.0, 6.0}) {
            Moments m = kernel_moments(KernelProfile::truncated_gaussian(rt), d);
            double gap = std::abs(rt * rt * m.sigma / m.beta - 1.0);
            CHECK(gap < prev_gap + 1e-12);
            prev_gap = gap;
            if (rt == 6.0) CHECK(gap < 1e-3);
        }
    }
}

TEST_CASE("kernel keys") {
    CHECK(KernelProfile::from_key("indicator").kind == KernelProfile::Kind::Indicator);
    CHECK(KernelProfile::from_key("triangular").kind == KernelProfile::Kind::Triangular);
    auto g = KernelProfile::from_key("gauss:3.5");
    CHECK(g.kind == KernelProfile::Kind::TruncatedGaussian);
    CHECK(g.truncation_radius == doctest::Approx(3.5));
    CHECK(KernelProfile::from_key(g.key()).truncation_radius == doctest::Approx(3.5));
    CHECK_THROWS_AS(KernelProfile::from_key("epanechnikov"), ValidationError);
    CHECK_THROWS_AS(KernelProfile::from_key("gauss:oops"), ValidationError);
    CHECK_THROWS_AS(kernel_moments(KernelProfile::indicator(), 0), ValidationError);
}
