#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "unionlap/errors.hpp"
#include "unionlap/manifolds.hpp"
#include "unionlap/random.hpp"

using namespace unionlap;

namespace {
constexpr double kPi = 3.14159265358979323846;

Eigen::VectorXd basis(int n, int i) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    v(i) = 1.0;
    return v;
}

MixtureModel rect_segment_model(double alpha1, double alpha2) {
    Eigen::MatrixXd seg_frame(3, 1);
    seg_frame.col(0) = basis(3, 2);
    Eigen::MatrixXd rect_frame(3, 2);
    rect_frame.col(0) = basis(3, 0);
    rect_frame.col(1) = basis(3, 1);
    Eigen::VectorXd seg_len(1), rect_len(2);
    seg_len << 1.3;
    rect_len << 1.4, 1.0;
    return MixtureModel::validated(
        {{Patch::flat_piece(Eigen::VectorXd::Zero(3), seg_frame, seg_len), DensitySpec::uniform(),
          alpha1},
         {Patch::flat_piece(Eigen::VectorXd::Zero(3), rect_frame, rect_len),
          DensitySpec::uniform(), alpha2}});
}

}  // namespace

TEST_CASE("patch embedding round trips") {
    MixtureModel m = model_preset("paper-rect-segment");
    const Patch& rect = m.component(1).patch;
    Eigen::VectorXd local(2);
    local << 0.3, -0.2;
    auto [back, resid] = rect.to_local(rect.embed(local));
    CHECK((back - local).norm() < 1e-14);
    CHECK(resid < 1e-14);

    MixtureModel c = model_preset("circle-uniform");
    const Patch& circle = c.component(0).patch;
    Eigen::VectorXd s(1);
    s << 2.2;
    auto [sc, rc] = circle.to_local(circle.embed(s));
    CHECK(std::abs(sc(0) - 2.2) < 1e-12);
    CHECK(rc < 1e-12);
    CHECK(circle.measure() == doctest::Approx(2 * kPi));
}

TEST_CASE("distance to patches") {
    MixtureModel m = model_preset("paper-rect-segment");
    const Patch& seg = m.component(0).patch;   // {0}x{0}x[-0.65,0.65]
    const Patch& rect = m.component(1).patch;  // [-0.7,0.7]x[-0.5,0.5]x{0}
    Eigen::VectorXd p(3);
    p << 0.1, 0.0, 0.2;
    CHECK(seg.distance_to(p) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(rect.distance_to(p) == doctest::Approx(0.2).epsilon(1e-12));
    p << 0.0, 0.0, 0.9;  // beyond the segment end
    CHECK(seg.distance_to(p) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("density values") {
    MixtureModel m = model_preset("paper-rect-segment");
    Eigen::VectorXd seg_pt(1), rect_pt(2);
    seg_pt << 0.1;
    rect_pt << 0.0, 0.3;
    CHECK(m.density_at(0, seg_pt) == doctest::Approx(1.0 / 1.3).epsilon(1e-14));
    CHECK(m.density_at(1, rect_pt) == doctest::Approx(1.0 / 1.4).epsilon(1e-14));
    Eigen::VectorXd outside(2);
    outside << 0.9, 0.0;
    CHECK_THROWS_AS(m.density_at(1, outside), ValidationError);
}

TEST_CASE("cosine bump density matches a numeric normalization oracle") {
    Eigen::MatrixXd frame(2, 2);
    frame.setIdentity();
    Eigen::VectorXd freq(1);
    freq << 1.0;
    MixtureComponent comp{Patch::circle(Eigen::VectorXd::Zero(2), frame, 1.0),
                          DensitySpec::cosine_bump(0.3, freq), 1.0};
    MixtureModel m = MixtureModel::validated({comp});

    // oracle: trapezoid quadrature of the unnormalized density over the circle
    const int grid = 200000;
    double z = 0.0;
    for (int i = 0; i < grid; ++i) {
        double s = (i + 0.5) * 2.0 * kPi / grid;
        z += (1.0 + 0.3 * std::cos(s)) * (2.0 * kPi / grid);
    }
    Eigen::VectorXd theta0(1);
    theta0 << 0.0;
    CHECK(m.density_at(0, theta0) == doctest::Approx(1.3 / z).epsilon(1e-8));
    // positive integer frequencies integrate the bump away exactly
    CHECK(z == doctest::Approx(2.0 * kPi).epsilon(1e-10));
}

TEST_CASE("binomial counts concentrate") {
    MixtureModel m = rect_segment_model(0.48, 0.52);
    const long long n = 5400;
    double bound = 3.0 * std::sqrt(n * 0.48 * 0.52);
    for (std::uint64_t seed : {7ULL, 8ULL, 9ULL, 10ULL, 11ULL, 12ULL, 13ULL, 14ULL}) {
        SampleCloud cloud = sample_mixture(m, n, seed);
        CHECK(std::abs(static_cast<double>(cloud.counts[0]) - 2592.0) < bound);
        CHECK(std::abs(static_cast<double>(cloud.counts[1]) - 2808.0) < bound);
        CHECK(cloud.counts[0] + cloud.counts[1] == n);
    }
}

TEST_CASE("single component takes all samples") {
    MixtureModel m = model_preset("circle-uniform");
    SampleCloud cloud = sample_mixture(m, 10, 99);
    CHECK(cloud.counts[0] == 10);
}

TEST_CASE("uniform rectangle sample mean sits at the center") {
    MixtureModel m = model_preset("paper-rect-segment");
    SampleCloud cloud = sample_mixture(m, 5400, 1);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(3);
    long long count = 0;
    for (long long i = 0; i < cloud.size(); ++i)
        if (cloud.labels[static_cast<size_t>(i)] == 1) {
            mean += cloud.points.row(i).transpose();
            ++count;
        }
    mean /= static_cast<double>(count);
    for (int d = 0; d < 3; ++d) CHECK(std::abs(mean(d)) < 0.05);
}

TEST_CASE("samples lie on their labeled patch") {
    MixtureModel m = model_preset("paper-rect-segment");
    SampleCloud cloud = sample_mixture(m, 500, 3);
    for (long long i = 0; i < cloud.size(); ++i) {
        const Patch& p = m.component(cloud.labels[static_cast<size_t>(i)]).patch;
        auto [local, resid] = p.to_local(cloud.points.row(i).transpose());
        CHECK(resid < 1e-12);
        CHECK(p.contains_local(local));
    }
}

TEST_CASE("empirical fractions obey the law of large numbers") {
    MixtureModel m = rect_segment_model(0.48, 0.52);
    const long long n = 2000;
    double mean_frac = 0.0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed)
        mean_frac += static_cast<double>(sample_mixture(m, n, seed).counts[0]) / n;
    mean_frac /= 50.0;
    CHECK(std::abs(mean_frac - 0.48) < 2.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("sampling is deterministic and reproducible") {
    MixtureModel m = model_preset("paper-rect-segment");
    SampleCloud a = sample_mixture(m, 777, 5);
    SampleCloud b = sample_mixture(m, 777, 5);
    CHECK(a.points == b.points);
    CHECK(a.labels == b.labels);
    SampleCloud c = sample_mixture(m, 777, 6);
    CHECK(a.points != c.points);
}

TEST_CASE("cosine bump sampling matches its first moment") {
    Eigen::MatrixXd frame(2, 2);
    frame.setIdentity();
    Eigen::VectorXd freq(1);
    freq << 1.0;
    MixtureModel m = MixtureModel::validated(
        {{Patch::circle(Eigen::VectorXd::Zero(2), frame, 1.0), DensitySpec::cosine_bump(0.4, freq),
          1.0}});
    SampleCloud cloud = sample_mixture(m, 20000, 11);
    // density (1 + a cos s) / (2 pi) has E[cos s] = a/2
    double mean_cos = 0.0;
    for (long long i = 0; i < cloud.size(); ++i) mean_cos += cloud.points(i, 0);
    mean_cos /= static_cast<double>(cloud.size());
    CHECK(std::abs(mean_cos - 0.2) < 0.02);
}

TEST_CASE("principal angles") {
    MixtureModel m = model_preset("paper-rect-segment");
    CHECK(principal_angle(m.component(0).patch, m.component(1).patch) ==
          doctest::Approx(kPi / 2).epsilon(1e-12));

    // two lines at 45 degrees in the plane
    Eigen::MatrixXd f1(2, 1), f2(2, 1);
    f1.col(0) = basis(2, 0);
    f2(0, 0) = std::sqrt(0.5);
    f2(1, 0) = std::sqrt(0.5);
    Eigen::VectorXd len(1);
    len << 1.0;
    Patch l1 = Patch::flat_piece(Eigen::VectorXd::Zero(2), f1, len);
    Patch l2 = Patch::flat_piece(Eigen::VectorXd::Zero(2), f2, len);
    CHECK(principal_angle(l1, l2) == doctest::Approx(kPi / 4).epsilon(1e-12));
    CHECK(principal_angle(l2, l1) == doctest::Approx(kPi / 4).epsilon(1e-12));
}

TEST_CASE("principal angle modulo the shared subspace") {
    // two 2-planes in R^4 sharing e1, remaining directions at 30 degrees
    Eigen::MatrixXd fa(4, 2), fb(4, 2);
    fa.setZero();
    fb.setZero();
    fa.col(0) = basis(4, 0);
    fa.col(1) = basis(4, 1);
    fb.col(0) = basis(4, 0);
    fb(1, 1) = std::cos(kPi / 6);
    fb(2, 1) = std::sin(kPi / 6);
    Eigen::VectorXd len2(2);
    len2 << 1.0, 1.0;
    Patch pa = Patch::flat_piece(Eigen::VectorXd::Zero(4), fa, len2);
    Patch pb = Patch::flat_piece(Eigen::VectorXd::Zero(4), fb, len2);
    double angle = principal_angle(pa, pb);
    CHECK(angle == doctest::Approx(kPi / 6).epsilon(1e-12));

    // brute-force oracle: minimize over discretized unit vectors orthogonal
    // to the shared direction e1
    double best = kPi;
    const int steps = 720;
    for (int i = 0; i < steps; ++i) {
        double a = 2 * kPi * i / steps;  // direction in the (e2) line of A: "+-e2" only
        Eigen::VectorXd u = std::cos(a) * basis(4, 1);
        if (u.norm() < 1e-9) continue;
        u.normalize();
        for (int j = 0; j < steps; ++j) {
            double b = 2 * kPi * j / steps;
            Eigen::VectorXd v = std::cos(b) * fb.col(1);
            if (v.norm() < 1e-9) continue;
            v.normalize();
            best = std::min(best, std::acos(std::min(1.0, std::abs(u.dot(v)))));
        }
    }
    CHECK(std::abs(best - angle) < 2e-2);
}

TEST_CASE("principal angle is rotation invariant") {
    Eigen::MatrixXd fa(4, 2), fb(4, 2);
    fa.setZero();
    fb.setZero();
    fa.col(0) = basis(4, 0);
    fa.col(1) = basis(4, 1);
    fb.col(0) = basis(4, 0);
    fb(1, 1) = std::cos(0.4);
    fb(2, 1) = std::sin(0.4);
    Eigen::VectorXd len2(2);
    len2 << 1.0, 1.0;
    Patch pa = Patch::flat_piece(Eigen::VectorXd::Zero(4), fa, len2);
    Patch pb = Patch::flat_piece(Eigen::VectorXd::Zero(4), fb, len2);
    double before = principal_angle(pa, pb);

    Rng rng(4);
    Eigen::MatrixXd g(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) g(i, j) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd rot = qr.householderQ();
    Patch ra = Patch::flat_piece(Eigen::VectorXd::Zero(4), rot * fa, len2);
    Patch rb = Patch::flat_piece(Eigen::VectorXd::Zero(4), rot * fb, len2);
    CHECK(principal_angle(ra, rb) == doctest::Approx(before).epsilon(1e-10));
}

TEST_CASE("identical tangent spaces are rejected") {
    Eigen::MatrixXd f(3, 1);
    f.col(0) = basis(3, 0);
    Eigen::VectorXd len(1);
    len << 2.0;
    Patch a = Patch::flat_piece(Eigen::VectorXd::Zero(3), f, len);
    Patch b = Patch::flat_piece(basis(3, 1), f, len);
    CHECK_THROWS_AS(principal_angle(a, b), ValidationError);
}

TEST_CASE("bandwidth scale ell_n") {
    CHECK(ell_n(10000, 2) ==
          doctest::Approx(std::sqrt(std::log(10000.0) / 10000.0)).epsilon(1e-15));
    CHECK(ell_n(10000, 2) == doctest::Approx(0.0303485).epsilon(1e-5));
    CHECK(ell_n(10000, 1) ==
          doctest::Approx(std::sqrt(std::log(std::log(10000.0)) / 10000.0)).epsilon(1e-15));
    double prev = ell_n(3, 2);
    for (long long n : {10LL, 100LL, 1000LL, 10000LL, 100000LL}) {
        double cur = ell_n(n, 2);
        CHECK(cur < prev);
        prev = cur;
    }
    CHECK_THROWS_AS(ell_n(2, 1), ValidationError);
}

TEST_CASE("bandwidth admissibility") {
    BandwidthReport r = bandwidth_ok(5400, 2, 0.13);
    CHECK(r.ok);
    CHECK(r.ell == doctest::Approx(std::sqrt(std::log(5400.0) / 5400.0)).epsilon(1e-15));
    CHECK(r.ratio == doctest::Approx(0.13 / r.ell).epsilon(1e-15));
    CHECK(r.ratio > 3.2);
    CHECK(r.ratio < 3.3);

    CHECK_FALSE(bandwidth_ok(100, 2, 0.01).ok);
    CHECK_FALSE(bandwidth_ok(5400, 2, 1.5).ok);
    CHECK_THROWS_AS(bandwidth_ok(5400, 2, 0.0), ValidationError);
}

TEST_CASE("flat intersections") {
    MixtureModel m = model_preset("paper-rect-segment");
    FlatIntersection fi = flat_intersection(m.component(0).patch, m.component(1).patch);
    CHECK(fi.intersects);
    CHECK(fi.dim == 0);
    CHECK(fi.point.norm() < 1e-12);

    MixtureModel x = model_preset("cross-segments");
    FlatIntersection fx = flat_intersection(x.component(0).patch, x.component(1).patch);
    CHECK(fx.intersects);
    CHECK(fx.dim == 0);

    // parallel disjoint segments never meet
    Eigen::MatrixXd f(2, 1);
    f.col(0) = basis(2, 0);
    Eigen::VectorXd len(1);
    len << 1.0;
    Patch a = Patch::flat_piece(Eigen::VectorXd::Zero(2), f, len);
    Patch b = Patch::flat_piece(basis(2, 1), f, len);
    CHECK_FALSE(flat_intersection(a, b).intersects);
}

TEST_CASE("model validation") {
    CHECK_THROWS_AS(model_preset("nope"), ValidationError);
    Eigen::MatrixXd f(2, 1);
    f.col(0) = basis(2, 0);
    Eigen::VectorXd len(1);
    len << 1.0;
    Patch p = Patch::flat_piece(Eigen::VectorXd::Zero(2), f, len);
    CHECK_THROWS_AS(MixtureModel::validated({{p, DensitySpec::uniform(), 0.7}}),
                    ValidationError);  // weights must sum to 1
    Eigen::MatrixXd skew(2, 1);
    skew(0, 0) = 1.0;
    skew(1, 0) = 0.5;
    CHECK_THROWS_AS(Patch::flat_piece(Eigen::VectorXd::Zero(2), skew, len), ValidationError);
}

TEST_CASE("fixed-count sampling") {
    MixtureModel m = model_preset("paper-rect-segment");
    SampleCloud cloud = sample_mixture_counts(m, {2600, 2800}, 1);
    CHECK(cloud.counts[0] == 2600);
    CHECK(cloud.counts[1] == 2800);
    CHECK(cloud.size() == 5400);
    CHECK_THROWS_AS(sample_mixture_counts(m, {100}, 1), ValidationError);
}
