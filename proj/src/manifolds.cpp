#include "unionlap/manifolds.hpp"

#include <cmath>

#include "quadrature.hpp"
#include "unionlap/errors.hpp"
#include "unionlap/random.hpp"

namespace unionlap {

namespace {
constexpr double kPi = 3.14159265358979323846;

void check_frame_orthonormal(const Eigen::MatrixXd& frame) {
    Eigen::MatrixXd gram = frame.transpose() * frame;
    Eigen::MatrixXd err = gram - Eigen::MatrixXd::Identity(frame.cols(), frame.cols());
    if (err.cwiseAbs().maxCoeff() > 1e-12)
        throw ValidationError("patch frame is not orthonormal to 1e-12");
}
}  // namespace

Patch Patch::flat_piece(const Eigen::VectorXd& origin, const Eigen::MatrixXd& frame,
                        const Eigen::VectorXd& lengths) {
    if (frame.rows() != origin.size() || frame.cols() != lengths.size() || frame.cols() < 1)
        throw ValidationError("flat piece: inconsistent origin/frame/lengths");
    if (lengths.minCoeff() <= 0.0) throw ValidationError("flat piece: side lengths must be > 0");
    check_frame_orthonormal(frame);
    Patch p;
    p.kind = Kind::FlatPiece;
    p.dim = static_cast<int>(frame.cols());
    p.origin = origin;
    p.frame = frame;
    p.lengths = lengths;
    p.has_boundary = true;
    return p;
}

Patch Patch::circle(const Eigen::VectorXd& center, const Eigen::MatrixXd& frame2, double radius) {
    if (frame2.rows() != center.size() || frame2.cols() != 2)
        throw ValidationError("circle: frame must be N x 2");
    if (radius <= 0.0) throw ValidationError("circle: radius must be > 0");
    check_frame_orthonormal(frame2);
    Patch p;
    p.kind = Kind::Circle;
    p.dim = 1;
    p.origin = center;
    p.frame = frame2;
    p.radius = radius;
    p.has_boundary = false;
    return p;
}

double Patch::measure() const {
    if (kind == Kind::Circle) return 2.0 * kPi * radius;
    return lengths.prod();
}

Eigen::VectorXd Patch::embed(const Eigen::VectorXd& local) const {
    if (kind == Kind::Circle) {
        double theta = local(0) / radius;
        return origin + radius * (std::cos(theta) * frame.col(0) + std::sin(theta) * frame.col(1));
    }
    return origin + frame * local;
}

std::pair<Eigen::VectorXd, double> Patch::to_local(const Eigen::VectorXd& ambient) const {
    if (kind == Kind::Circle) {
        Eigen::VectorXd rel = ambient - origin;
        double x = frame.col(0).dot(rel), y = frame.col(1).dot(rel);
        double theta = std::atan2(y, x);
        if (theta < 0.0) theta += 2.0 * kPi;
        Eigen::VectorXd local(1);
        local(0) = theta * radius;
        return {local, (ambient - embed(local)).norm()};
    }
    Eigen::VectorXd local = frame.transpose() * (ambient - origin);
    return {local, (ambient - embed(local)).norm()};
}

double Patch::distance_to(const Eigen::VectorXd& ambient) const {
    if (kind == Kind::Circle) {
        Eigen::VectorXd rel = ambient - origin;
        double x = frame.col(0).dot(rel), y = frame.col(1).dot(rel);
        double in_plane = std::hypot(x, y);
        double orth2 = rel.squaredNorm() - x * x - y * y;
        if (in_plane < 1e-300) return std::sqrt(radius * radius + std::max(orth2, 0.0));
        double dr = in_plane - radius;
        return std::sqrt(dr * dr + std::max(orth2, 0.0));
    }
    Eigen::VectorXd local = frame.transpose() * (ambient - origin);
    for (int j = 0; j < dim; ++j) {
        double half = 0.5 * lengths(j);
        local(j) = std::clamp(local(j), -half, half);
    }
    return (ambient - embed(local)).norm();
}

bool Patch::contains_local(const Eigen::VectorXd& local, double tol) const {
    if (kind == Kind::Circle) return local(0) >= -tol && local(0) <= 2.0 * kPi * radius + tol;
    if (local.size() != dim) return false;
    for (int j = 0; j < dim; ++j)
        if (std::abs(local(j)) > 0.5 * lengths(j) + tol) return false;
    return true;
}

DensitySpec DensitySpec::cosine_bump(double amplitude, const Eigen::VectorXd& frequency) {
    if (amplitude < 0.0 || amplitude >= 1.0)
        throw ValidationError("cosine bump amplitude must lie in [0,1)");
    for (int j = 0; j < frequency.size(); ++j) {
        if (frequency(j) < 1.0 || std::abs(frequency(j) - std::round(frequency(j))) > 1e-9)
            throw ValidationError("cosine bump frequencies must be positive integers");
    }
    DensitySpec d;
    d.kind = Kind::CosineBump;
    d.amplitude = amplitude;
    d.frequency = frequency;
    return d;
}

double DensitySpec::unnormalized(const Patch& patch, const Eigen::VectorXd& local) const {
    if (kind == Kind::Uniform) return 1.0;
    if (patch.kind == Patch::Kind::Circle)
        return 1.0 + amplitude * std::cos(frequency(0) * local(0) / patch.radius);
    double prod = 1.0;
    for (int j = 0; j < patch.dim; ++j)
        prod *= std::cos(2.0 * kPi * frequency(j) * local(j) / patch.lengths(j));
    return 1.0 + amplitude * prod;
}

void DensitySpec::attach(const Patch& patch) {
    if (kind == Kind::Uniform) {
        normalization = patch.measure();
        density_bound = std::max(1.0 / normalization, normalization);
        return;
    }
    if (patch.kind == Patch::Kind::FlatPiece && frequency.size() != patch.dim)
        throw ValidationError("cosine bump needs one frequency per patch axis");
    if (patch.kind == Patch::Kind::Circle && frequency.size() != 1)
        throw ValidationError("cosine bump on a circle needs a single frequency");
    if (patch.kind == Patch::Kind::Circle) {
        normalization = detail::adaptive_simpson(
            [&](double s) {
                Eigen::VectorXd l(1);
                l(0) = s;
                return unnormalized(patch, l);
            },
            0.0, 2.0 * kPi * patch.radius, 1e-13 * patch.measure());
    } else {
        // product structure: integral = V + a * prod_j int cos(2 pi f_j xi/L_j)
        double prod = 1.0;
        for (int j = 0; j < patch.dim; ++j) {
            double L = patch.lengths(j), f = frequency(j);
            prod *= detail::adaptive_simpson(
                [&](double xi) { return std::cos(2.0 * kPi * f * xi / L); }, -0.5 * L, 0.5 * L,
                1e-14 * L);
        }
        normalization = patch.measure() + amplitude * prod;
    }
    double sup = (1.0 + amplitude) / normalization;
    double inf = (1.0 - amplitude) / normalization;
    density_bound = std::max(sup, 1.0 / inf);
}

double DensitySpec::value(const Patch& patch, const Eigen::VectorXd& local) const {
    return unnormalized(patch, local) / normalization;
}

Eigen::VectorXd DensitySpec::gradient(const Patch& patch, const Eigen::VectorXd& local) const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(local.size());
    if (kind == Kind::Uniform) return g;
    if (patch.kind == Patch::Kind::Circle) {
        double w = frequency(0) / patch.radius;
        g(0) = -amplitude * w * std::sin(w * local(0)) / normalization;
        return g;
    }
    for (int kk = 0; kk < patch.dim; ++kk) {
        double term = -amplitude * (2.0 * kPi * frequency(kk) / patch.lengths(kk)) *
                      std::sin(2.0 * kPi * frequency(kk) * local(kk) / patch.lengths(kk));
        for (int j = 0; j < patch.dim; ++j)
            if (j != kk)
                term *= std::cos(2.0 * kPi * frequency(j) * local(j) / patch.lengths(j));
        g(kk) = term / normalization;
    }
    return g;
}

MixtureModel MixtureModel::validated(std::vector<MixtureComponent> components) {
    if (components.empty()) throw ValidationError("mixture model needs at least one component");
    MixtureModel m;
    m.ambient_dim = components.front().patch.ambient_dim();
    double alpha_sum = 0.0;
    for (auto& c : components) {
        if (c.patch.ambient_dim() != m.ambient_dim)
            throw ValidationError("mixture components disagree on the ambient dimension");
        if (c.alpha <= 0.0 || c.alpha > 1.0)
            throw ValidationError("component weights must lie in (0,1]");
        alpha_sum += c.alpha;
        c.density.attach(c.patch);
    }
    if (std::abs(alpha_sum - 1.0) > 1e-12)
        throw ValidationError("component weights must sum to 1");
    m.components = std::move(components);
    return m;
}

double MixtureModel::density_at(int component, const Eigen::VectorXd& local) const {
    const auto& c = this->component(component);
    if (!c.patch.contains_local(local, 1e-9))
        throw ValidationError("density_at: coordinates outside the patch parameter box");
    return c.density.value(c.patch, local);
}

namespace {

Eigen::VectorXd draw_local(const MixtureComponent& c, Rng& rng, long long& proposals_left) {
    const Patch& p = c.patch;
    auto propose = [&]() {
        Eigen::VectorXd local(p.dim);
        if (p.kind == Patch::Kind::Circle) {
            local(0) = rng.uniform01() * 2.0 * kPi * p.radius;
        } else {
            for (int j = 0; j < p.dim; ++j) local(j) = p.lengths(j) * (rng.uniform01() - 0.5);
        }
        return local;
    };
    if (c.density.kind == DensitySpec::Kind::Uniform) return propose();
    const double bound = 1.0 + c.density.amplitude;  // sup of the unnormalized density
    while (proposals_left-- > 0) {
        Eigen::VectorXd local = propose();
        if (rng.uniform01() * bound <= c.density.unnormalized(p, local)) return local;
    }
    throw ValidationError("rejection sampling failed: density bound looks malformed");
}

SampleCloud fill_components(const MixtureModel& model, const std::vector<long long>& counts,
                            std::uint64_t seed) {
    long long n = 0;
    for (long long c : counts) n += c;
    SampleCloud cloud;
    cloud.seed = seed;
    cloud.counts = counts;
    cloud.points.resize(n, model.ambient_dim);
    cloud.labels.resize(static_cast<size_t>(n));
    long long row = 0;
    for (int i = 0; i < model.component_count(); ++i) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i) + 1));
        long long proposals_left = std::max<long long>(1000 * counts[static_cast<size_t>(i)], 1000);
        const auto& comp = model.component(i);
        for (long long j = 0; j < counts[static_cast<size_t>(i)]; ++j, ++row) {
            Eigen::VectorXd local = draw_local(comp, rng, proposals_left);
            cloud.points.row(row) = comp.patch.embed(local).transpose();
            cloud.labels[static_cast<size_t>(row)] = i;
        }
    }
    return cloud;
}

}  // namespace

SampleCloud sample_mixture(const MixtureModel& model, long long n, std::uint64_t seed) {
    if (n < 2) throw ValidationError("sample_mixture: n must be >= 2");
    // one categorical draw per point; the per-component counts are Binomial
    Rng master(derive_seed(seed, 0));
    std::vector<long long> counts(static_cast<size_t>(model.component_count()), 0);
    for (long long j = 0; j < n; ++j) {
        double u = master.uniform01();
        double acc = 0.0;
        int pick = model.component_count() - 1;
        for (int i = 0; i < model.component_count(); ++i) {
            acc += model.component(i).alpha;
            if (u < acc) {
                pick = i;
                break;
            }
        }
        ++counts[static_cast<size_t>(pick)];
    }
    return fill_components(model, counts, seed);
}

SampleCloud sample_mixture_counts(const MixtureModel& model, const std::vector<long long>& counts,
                                  std::uint64_t seed) {
    if (static_cast<int>(counts.size()) != model.component_count())
        throw ValidationError("sample_mixture_counts: one count per component required");
    long long n = 0;
    for (long long c : counts) {
        if (c < 0) throw ValidationError("sample_mixture_counts: counts must be nonnegative");
        n += c;
    }
    if (n < 2) throw ValidationError("sample_mixture_counts: total count must be >= 2");
    return fill_components(model, counts, seed);
}

namespace {

/// Orthonormal basis of the columns of m with singular values above tol.
Eigen::MatrixXd orthonormal_range(const Eigen::MatrixXd& m, double tol = 1e-9) {
    if (m.cols() == 0) return Eigen::MatrixXd(m.rows(), 0);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU);
    int rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > tol) ++rank;
    return svd.matrixU().leftCols(rank);
}

}  // namespace

double principal_angle(const Patch& piece_a, const Patch& piece_b) {
    if (piece_a.kind != Patch::Kind::FlatPiece || piece_b.kind != Patch::Kind::FlatPiece)
        throw ValidationError("principal_angle: both patches must be flat pieces");
    const Eigen::MatrixXd& A = piece_a.frame;
    const Eigen::MatrixXd& B = piece_b.frame;

    // shared tangent directions = singular vectors of the cross-Gram at 1
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A.transpose() * B,
                                          Eigen::ComputeThinU | Eigen::ComputeThinV);
    int shared = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > 1.0 - 1e-9) ++shared;

    Eigen::MatrixXd a_rem = A, b_rem = B;
    if (shared > 0) {
        Eigen::MatrixXd common = orthonormal_range(A * svd.matrixU().leftCols(shared));
        a_rem = orthonormal_range(A - common * (common.transpose() * A));
        b_rem = orthonormal_range(B - common * (common.transpose() * B));
    }
    if (a_rem.cols() == 0 || b_rem.cols() == 0)
        throw ValidationError(
            "principal_angle: degenerate intersection (one tangent space contains the other)");

    Eigen::JacobiSVD<Eigen::MatrixXd> rem(a_rem.transpose() * b_rem);
    double cos_theta = std::clamp(rem.singularValues()(0), 0.0, 1.0);
    if (cos_theta > 1.0 - 1e-12)
        throw ValidationError("principal_angle: degenerate intersection (identical directions)");
    return std::acos(cos_theta);
}

double ell_n(long long n, int d) {
    if (n < 3) throw ValidationError("ell_n: n must be >= 3");
    if (d < 1) throw ValidationError("ell_n: d must be >= 1");
    double nn = static_cast<double>(n);
    if (d == 1) return std::sqrt(std::log(std::log(nn)) / nn);
    return std::pow(std::log(nn) / nn, 1.0 / d);
}

BandwidthReport bandwidth_ok(long long n, int d_max, double epsilon) {
    if (epsilon <= 0.0) throw ValidationError("bandwidth_ok: epsilon must be > 0");
    BandwidthReport r;
    r.ell = ell_n(n, d_max);
    r.ratio = epsilon / r.ell;
    r.ok = r.ell < epsilon && epsilon < 1.0;
    return r;
}

FlatIntersection flat_intersection(const Patch& piece_a, const Patch& piece_b) {
    if (piece_a.kind != Patch::Kind::FlatPiece || piece_b.kind != Patch::Kind::FlatPiece)
        throw ValidationError("flat_intersection: both patches must be flat pieces");
    FlatIntersection out;
    const int N = piece_a.ambient_dim();

    Eigen::MatrixXd C(N, piece_a.dim + piece_b.dim);
    C.leftCols(piece_a.dim) = piece_a.frame;
    C.rightCols(piece_b.dim) = -piece_b.frame;
    Eigen::VectorXd rhs = piece_b.origin - piece_a.origin;
    Eigen::VectorXd x = C.colPivHouseholderQr().solve(rhs);
    if ((C * x - rhs).norm() > 1e-9) return out;  // affine spans do not meet

    Eigen::VectorXd point = piece_a.origin + piece_a.frame * x.head(piece_a.dim);
    auto [la, ra] = piece_a.to_local(point);
    auto [lb, rb] = piece_b.to_local(point);
    if (!piece_a.contains_local(la, 1e-9) || !piece_b.contains_local(lb, 1e-9)) return out;

    // direction space of the intersection = shared tangent directions
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(piece_a.frame.transpose() * piece_b.frame,
                                          Eigen::ComputeThinU);
    int shared = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > 1.0 - 1e-9) ++shared;

    out.intersects = true;
    out.dim = shared;
    out.point = point;
    out.basis = shared > 0 ? orthonormal_range(piece_a.frame * svd.matrixU().leftCols(shared))
                           : Eigen::MatrixXd(N, 0);
    return out;
}

MixtureModel model_preset(const std::string& name) {
    auto e = [](int n, int i) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
        v(i) = 1.0;
        return v;
    };
    if (name == "paper-rect-segment") {
        Eigen::MatrixXd seg_frame(3, 1);
        seg_frame.col(0) = e(3, 2);
        Eigen::MatrixXd rect_frame(3, 2);
        rect_frame.col(0) = e(3, 0);
        rect_frame.col(1) = e(3, 1);
        Eigen::VectorXd seg_len(1), rect_len(2);
        seg_len << 1.3;
        rect_len << 1.4, 1.0;
        MixtureComponent segment{
            Patch::flat_piece(Eigen::VectorXd::Zero(3), seg_frame, seg_len),
            DensitySpec::uniform(), 2600.0 / 5400.0};
        MixtureComponent rectangle{
            Patch::flat_piece(Eigen::VectorXd::Zero(3), rect_frame, rect_len),
            DensitySpec::uniform(), 2800.0 / 5400.0};
        return MixtureModel::validated({segment, rectangle});
    }
    if (name == "circle-uniform") {
        Eigen::MatrixXd frame(2, 2);
        frame.setIdentity();
        MixtureComponent c{Patch::circle(Eigen::VectorXd::Zero(2), frame, 1.0),
                           DensitySpec::uniform(), 1.0};
        return MixtureModel::validated({c});
    }
    if (name == "cross-segments") {
        Eigen::MatrixXd f1(2, 1), f2(2, 1);
        f1.col(0) = e(2, 0);
        f2.col(0) = e(2, 1);
        Eigen::VectorXd len(1);
        len << 1.0;
        MixtureComponent s1{Patch::flat_piece(Eigen::VectorXd::Zero(2), f1, len),
                            DensitySpec::uniform(), 0.5};
        MixtureComponent s2{Patch::flat_piece(Eigen::VectorXd::Zero(2), f2, len),
                            DensitySpec::uniform(), 0.5};
        return MixtureModel::validated({s1, s2});
    }
    throw ValidationError("unknown model preset: " + name);
}

std::vector<std::string> model_preset_names() {
    return {"paper-rect-segment", "circle-uniform", "cross-segments"};
}

}  // namespace unionlap
