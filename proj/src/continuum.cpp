#include "unionlap/continuum.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <map>

#include "lanczos.hpp"
#include "neighbor_grid.hpp"
#include "quadrature.hpp"
#include "unionlap/errors.hpp"
#include "unionlap/random.hpp"

namespace unionlap {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

std::vector<double> ReferenceSpectrum::expanded(int k) const {
    std::vector<double> out;
    for (const auto& e : entries)
        for (int m = 0; m < e.multiplicity; ++m) {
            out.push_back(e.lambda);
            if (k >= 0 && static_cast<int>(out.size()) == k) return out;
        }
    return out;
}

int ReferenceSpectrum::total_multiplicity() const {
    int t = 0;
    for (const auto& e : entries) t += e.multiplicity;
    return t;
}

SmoothFunctionSpec SmoothFunctionSpec::constant(int component_count, double c) {
    SmoothFunctionSpec s;
    for (int i = 0; i < component_count; ++i) {
        ComponentFn fn;
        fn.value = [c](const Eigen::VectorXd&) { return c; };
        fn.gradient = [](const Eigen::VectorXd& l) { return Eigen::VectorXd::Zero(l.size()).eval(); };
        s.components.push_back(fn);
    }
    return s;
}

SmoothFunctionSpec SmoothFunctionSpec::piecewise_constant(const std::vector<double>& values) {
    SmoothFunctionSpec s;
    for (double c : values) {
        ComponentFn fn;
        fn.value = [c](const Eigen::VectorXd&) { return c; };
        fn.gradient = [](const Eigen::VectorXd& l) { return Eigen::VectorXd::Zero(l.size()).eval(); };
        s.components.push_back(fn);
    }
    return s;
}

SmoothFunctionSpec::ComponentFn flat_neumann_eigenfunction(const Patch& patch,
                                                           const std::vector<int>& modes) {
    if (patch.kind != Patch::Kind::FlatPiece)
        throw ValidationError("flat_neumann_eigenfunction: flat pieces only");
    if (static_cast<int>(modes.size()) != patch.dim)
        throw ValidationError("flat_neumann_eigenfunction: one mode per axis");
    Eigen::VectorXd lengths = patch.lengths;
    std::vector<int> m = modes;
    SmoothFunctionSpec::ComponentFn fn;
    fn.value = [lengths, m](const Eigen::VectorXd& xi) {
        double v = 1.0;
        for (int j = 0; j < lengths.size(); ++j) {
            if (m[static_cast<size_t>(j)] == 0) continue;
            double L = lengths(j);
            v *= std::sqrt(2.0) * std::cos(m[static_cast<size_t>(j)] * kPi * (xi(j) + 0.5 * L) / L);
        }
        return v;
    };
    fn.gradient = [lengths, m](const Eigen::VectorXd& xi) {
        Eigen::VectorXd g(lengths.size());
        for (int a = 0; a < lengths.size(); ++a) {
            double v = 1.0;
            for (int j = 0; j < lengths.size(); ++j) {
                double L = lengths(j);
                int mj = m[static_cast<size_t>(j)];
                if (j == a) {
                    if (mj == 0) {
                        v = 0.0;
                        break;
                    }
                    double w = mj * kPi / L;
                    v *= -std::sqrt(2.0) * w * std::sin(w * (xi(j) + 0.5 * L));
                } else if (mj != 0) {
                    v *= std::sqrt(2.0) * std::cos(mj * kPi * (xi(j) + 0.5 * L) / L);
                }
            }
            g(a) = v;
        }
        return g;
    };
    return fn;
}

namespace {

struct WeightedMode {
    double lambda;
    int multiplicity;
};

/// First >=k eigenvalues of factor * pi^2 * sum (m_j/L_j)^2 over m_j >= 0.
std::vector<WeightedMode> flat_modes(const Eigen::VectorXd& lengths, double factor, int k) {
    const int d = static_cast<int>(lengths.size());
    const int cap = k + 2;
    std::vector<double> lambdas;
    std::vector<int> idx(static_cast<size_t>(d), 0);
    while (true) {
        double s = 0.0;
        for (int j = 0; j < d; ++j) {
            double q = idx[static_cast<size_t>(j)] / lengths(j);
            s += q * q;
        }
        lambdas.push_back(factor * kPi * kPi * s);
        int j = 0;
        for (; j < d; ++j) {
            if (++idx[static_cast<size_t>(j)] <= cap) break;
            idx[static_cast<size_t>(j)] = 0;
        }
        if (j == d) break;
    }
    std::sort(lambdas.begin(), lambdas.end());
    std::vector<WeightedMode> out;
    size_t i = 0;
    int total = 0;
    while (i < lambdas.size() && total < k) {
        size_t j = i + 1;
        while (j < lambdas.size() && lambdas[j] - lambdas[i] < 1e-12 * (1.0 + lambdas[i])) ++j;
        out.push_back({lambdas[i], static_cast<int>(j - i)});
        total += static_cast<int>(j - i);
        i = j;
    }
    if (!out.empty() && total > k) out.back().multiplicity -= total - k;
    return out;
}

std::vector<WeightedMode> circle_modes(double radius, double factor, int k) {
    std::vector<WeightedMode> out;
    out.push_back({0.0, 1});
    int total = 1;
    for (int m = 1; total < k; ++m) {
        double lam = factor * (m / radius) * (m / radius);
        int mult = std::min(2, k - total);
        out.push_back({lam, mult});
        total += mult;
    }
    return out;
}

ReferenceSpectrum spectrum_from_modes(const std::vector<WeightedMode>& modes,
                                      ReferenceSpectrum::Kind kind, const std::string& tag) {
    ReferenceSpectrum r;
    r.kind = kind;
    for (const auto& m : modes) r.entries.push_back({m.lambda, m.multiplicity, tag});
    return r;
}

/// Component spectrum with an arbitrary weight factor in front of the plain
/// Neumann eigenvalues of -Laplace (pi^2 sum (m_j/L_j)^2, or (m/r)^2).
ReferenceSpectrum weighted_component_spectrum(const Patch& patch, double factor, int k,
                                              ReferenceSpectrum::Kind kind,
                                              const std::string& tag) {
    if (patch.kind == Patch::Kind::Circle)
        return spectrum_from_modes(circle_modes(patch.radius, factor, k), kind, tag);
    return spectrum_from_modes(flat_modes(patch.lengths, factor, k), kind, tag);
}

}  // namespace

ReferenceSpectrum reference_spectrum_component(const Patch& patch, const DensitySpec& density,
                                               const KernelProfile& profile, int k,
                                               const std::string& source_tag) {
    if (k < 1) throw ValidationError("reference_spectrum_component: k must be >= 1");
    if (density.kind != DensitySpec::Kind::Uniform)
        throw ValidationError(
            "reference_spectrum_component: only uniform densities have an analytic spectrum "
            "(use metric_graph_spectrum_fd for 1d models)");
    Moments mom = kernel_moments(profile, patch.dim);
    double factor = mom.sigma / mom.beta;
    std::string tag = source_tag.empty() ? "component" : source_tag;
    if (patch.kind == Patch::Kind::Circle)
        return spectrum_from_modes(circle_modes(patch.radius, factor, k),
                                   ReferenceSpectrum::Kind::NormalizedLimit, tag);
    return spectrum_from_modes(flat_modes(patch.lengths, factor, k),
                               ReferenceSpectrum::Kind::NormalizedLimit, tag);
}

namespace {

ReferenceSpectrum merge_spectra(const std::vector<ReferenceSpectrum>& parts,
                                ReferenceSpectrum::Kind kind, int k) {
    struct Item {
        double lambda;
        std::string source;
    };
    std::vector<Item> items;
    for (const auto& p : parts)
        for (const auto& e : p.entries)
            for (int m = 0; m < e.multiplicity; ++m) items.push_back({e.lambda, e.source});
    std::stable_sort(items.begin(), items.end(),
                     [](const Item& a, const Item& b) { return a.lambda < b.lambda; });
    ReferenceSpectrum out;
    out.kind = kind;
    int total = 0;
    for (size_t i = 0; i < items.size() && total < k;) {
        size_t j = i;
        int mult = 0;
        while (j < items.size() && total < k && items[j].source == items[i].source &&
               items[j].lambda - items[i].lambda < 1e-12 * (1.0 + items[i].lambda)) {
            ++mult;
            ++total;
            ++j;
        }
        out.entries.push_back({items[i].lambda, mult, items[i].source});
        i = j;
    }
    return out;
}

int intersection_dim(const MixtureModel& model, int a, int b) {
    FlatIntersection fi = flat_intersection(model.component(a).patch, model.component(b).patch);
    if (!fi.intersects)
        throw ValidationError("merged_union_spectrum: components do not intersect");
    return fi.dim;
}

}  // namespace

ReferenceSpectrum merged_union_spectrum(const MixtureModel& model, const KernelProfile& profile,
                                        ReferenceSpectrum::Kind kind, int k) {
    if (k < 1) throw ValidationError("merged_union_spectrum: k must be >= 1");
    const int nc = model.component_count();

    auto component_tag = [&](int i) { return "M" + std::to_string(i + 1); };

    if (kind == ReferenceSpectrum::Kind::NormalizedLimit) {
        if (nc > 1) {
            for (int a = 0; a < nc; ++a)
                for (int b = a + 1; b < nc; ++b) {
                    int d12 = intersection_dim(model, a, b);
                    int dmax = std::max(model.component(a).patch.dim, model.component(b).patch.dim);
                    if (dmax - d12 < 2)
                        throw ValidationError(
                            "merged_union_spectrum: codimension-one intersection; use "
                            "metric_graph_spectrum_fd");
                }
        }
        std::vector<ReferenceSpectrum> parts;
        for (int i = 0; i < nc; ++i)
            parts.push_back(reference_spectrum_component(model.component(i).patch,
                                                         model.component(i).density, profile, k,
                                                         component_tag(i)));
        return merge_spectra(parts, kind, k);
    }

    // UnnormalizedLimit: EVP2 semantics with sigma (not sigma/beta) and the
    // (alpha rho)^2 weight; on a uniform patch the factor is sigma*alpha*rho.
    auto unnormalized_part = [&](int i) {
        const auto& c = model.component(i);
        if (c.density.kind != DensitySpec::Kind::Uniform)
            throw ValidationError("merged_union_spectrum: analytic path needs uniform densities");
        Moments mom = kernel_moments(profile, c.patch.dim);
        double rho = 1.0 / c.patch.measure();
        return weighted_component_spectrum(c.patch, mom.sigma * c.alpha * rho, k,
                                           ReferenceSpectrum::Kind::UnnormalizedLimit,
                                           component_tag(i));
    };

    if (nc == 1) return unnormalized_part(0);
    if (nc != 2)
        throw ValidationError("merged_union_spectrum: unnormalized limit handles <= 2 components");

    int low = model.component(0).patch.dim <= model.component(1).patch.dim ? 0 : 1;
    int high = 1 - low;
    int d1 = model.component(low).patch.dim, d2 = model.component(high).patch.dim;
    int d12 = intersection_dim(model, low, high);
    if (d1 == d2) {
        if (d12 == d1 - 1)
            throw ValidationError(
                "merged_union_spectrum: equal-dimension codimension-one case; use "
                "metric_graph_spectrum_fd");
        return merge_spectra({unnormalized_part(0), unnormalized_part(1)}, kind, k);
    }

    // d1 < d2: {0 with multiplicity 2} followed by the M2 spectrum shifted by
    // one index (its own zero merges into the double zero).
    ReferenceSpectrum m2 = unnormalized_part(high);
    ReferenceSpectrum out;
    out.kind = kind;
    out.entries.push_back({0.0, 2, "coupled"});
    int total = 2;
    for (size_t i = 1; i < m2.entries.size() && total < k; ++i) {
        auto e = m2.entries[i];
        e.multiplicity = std::min(e.multiplicity, k - total);
        total += e.multiplicity;
        out.entries.push_back(e);
    }
    return out;
}

// ---------------------------------------------------------------------------
// metric-graph finite-difference reference
// ---------------------------------------------------------------------------

namespace {

struct MeshNode {
    Eigen::VectorXd ambient;
    int component;
    double param;  // local coordinate on the parent segment
};

}  // namespace

ReferenceSpectrum metric_graph_spectrum_fd(const MixtureModel& model,
                                           const KernelProfile& profile, double h, int k) {
    if (k < 1) throw ValidationError("metric_graph_spectrum_fd: k must be >= 1");
    if (h <= 0.0) throw ValidationError("metric_graph_spectrum_fd: h must be > 0");
    const int nc = model.component_count();
    for (int i = 0; i < nc; ++i) {
        const Patch& p = model.component(i).patch;
        if (p.kind != Patch::Kind::FlatPiece || p.dim != 1)
            throw ValidationError("metric_graph_spectrum_fd: all components must be 1d segments");
    }

    Moments mom = kernel_moments(profile, 1);
    const double factor = mom.sigma / mom.beta;

    // shared vertices: endpoints plus any point of another segment they meet
    std::vector<Eigen::VectorXd> vertices;
    auto vertex_id = [&](const Eigen::VectorXd& x) {
        for (size_t i = 0; i < vertices.size(); ++i)
            if ((vertices[i] - x).norm() < 1e-10) return static_cast<int>(i);
        vertices.push_back(x);
        return static_cast<int>(vertices.size()) - 1;
    };

    // cut parameters per segment: both endpoints and every shared vertex
    std::vector<std::vector<double>> cuts(static_cast<size_t>(nc));
    for (int i = 0; i < nc; ++i) {
        const Patch& p = model.component(i).patch;
        double half = 0.5 * p.lengths(0);
        cuts[static_cast<size_t>(i)] = {-half, half};
    }
    for (int a = 0; a < nc; ++a)
        for (int b = 0; b < nc; ++b) {
            if (a == b) continue;
            const Patch& pa = model.component(a).patch;
            const Patch& pb = model.component(b).patch;
            // candidate meeting points: endpoints of b on a, or transversal crossing
            FlatIntersection fi = flat_intersection(pa, pb);
            std::vector<Eigen::VectorXd> candidates;
            if (fi.intersects && fi.dim == 0) candidates.push_back(fi.point);
            double hb = 0.5 * pb.lengths(0);
            for (double t : {-hb, hb}) {
                Eigen::VectorXd l(1);
                l(0) = t;
                candidates.push_back(pb.embed(l));
            }
            for (const auto& x : candidates) {
                if (pa.distance_to(x) > 1e-10) continue;
                auto [la, ra] = pa.to_local(x);
                if (pa.contains_local(la, 1e-10)) cuts[static_cast<size_t>(a)].push_back(la(0));
            }
        }

    double shortest = std::numeric_limits<double>::infinity();
    for (int i = 0; i < nc; ++i) {
        auto& c = cuts[static_cast<size_t>(i)];
        std::sort(c.begin(), c.end());
        c.erase(std::unique(c.begin(), c.end(),
                            [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                c.end());
        for (size_t j = 0; j + 1 < c.size(); ++j) shortest = std::min(shortest, c[j + 1] - c[j]);
    }
    if (h > shortest / 10.0)
        throw ValidationError("metric_graph_spectrum_fd: h exceeds a tenth of the shortest edge");

    // mesh every sub-edge; vertex DOFs are shared through vertex_id
    std::vector<Eigen::Triplet<double>> a_trip;
    std::vector<double> lumped;
    std::vector<int> vertex_dof;  // dof of each shared vertex
    auto ensure_vertex_dof = [&](const Eigen::VectorXd& x) {
        int vid = vertex_id(x);
        while (static_cast<int>(vertex_dof.size()) <= vid) vertex_dof.push_back(-1);
        if (vertex_dof[static_cast<size_t>(vid)] < 0) {
            vertex_dof[static_cast<size_t>(vid)] = static_cast<int>(lumped.size());
            lumped.push_back(0.0);
        }
        return vertex_dof[static_cast<size_t>(vid)];
    };

    for (int i = 0; i < nc; ++i) {
        const auto& comp = model.component(i);
        const auto& c = cuts[static_cast<size_t>(i)];
        for (size_t e = 0; e + 1 < c.size(); ++e) {
            double t0 = c[e], t1 = c[e + 1];
            double len = t1 - t0;
            int ne = std::max<int>(1, static_cast<int>(std::lround(len / h)));
            double he = len / ne;
            // dofs along this edge: shared vertex, interiors, shared vertex
            std::vector<int> dof(static_cast<size_t>(ne) + 1);
            Eigen::VectorXd l0(1), l1(1);
            l0(0) = t0;
            l1(0) = t1;
            dof.front() = ensure_vertex_dof(comp.patch.embed(l0));
            dof.back() = ensure_vertex_dof(comp.patch.embed(l1));
            for (int j = 1; j < ne; ++j) {
                dof[static_cast<size_t>(j)] = static_cast<int>(lumped.size());
                lumped.push_back(0.0);
            }
            for (int j = 0; j < ne; ++j) {
                Eigen::VectorXd mid(1);
                mid(0) = t0 + (j + 0.5) * he;
                double rho = comp.alpha * comp.density.value(comp.patch, mid);
                double w = rho * rho;
                double kstiff = factor * w / he;
                int da = dof[static_cast<size_t>(j)], db = dof[static_cast<size_t>(j) + 1];
                a_trip.emplace_back(da, da, kstiff);
                a_trip.emplace_back(db, db, kstiff);
                a_trip.emplace_back(da, db, -kstiff);
                a_trip.emplace_back(db, da, -kstiff);
                lumped[static_cast<size_t>(da)] += 0.5 * he * w;
                lumped[static_cast<size_t>(db)] += 0.5 * he * w;
            }
        }
    }

    const int ndof = static_cast<int>(lumped.size());
    if (k >= ndof) throw ValidationError("metric_graph_spectrum_fd: k too large for this grid");
    Eigen::SparseMatrix<double> A(ndof, ndof);
    A.setFromTriplets(a_trip.begin(), a_trip.end());

    // symmetrize with the lumped mass: C = M^-1/2 A M^-1/2
    Eigen::VectorXd dinv(ndof);
    for (int i = 0; i < ndof; ++i) dinv(i) = 1.0 / std::sqrt(lumped[static_cast<size_t>(i)]);
    Eigen::SparseMatrix<double> C = dinv.asDiagonal() * A * dinv.asDiagonal();

    // shift-invert: largest eigenvalues of (C + I)^-1 are the smallest of C
    Eigen::SparseMatrix<double> shifted = C;
    for (int i = 0; i < ndof; ++i) shifted.coeffRef(i, i) += 1.0;
    shifted.makeCompressed();
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(shifted);
    if (ldlt.info() != Eigen::Success)
        throw SolverError("metric_graph_spectrum_fd: factorization failed", 0.0);

    detail::LanczosOptions opts;
    opts.k = k;
    opts.tol_abs = 1e-12;
    opts.max_basis = std::min(ndof, std::max(6 * k + 30, 60));
    opts.max_cycles = 50 * k;
    opts.seed = 0x6d657472ULL;  // fixed: the reference is deterministic
    opts.largest = true;
    auto apply = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y = ldlt.solve(x); };
    detail::LanczosResult lr = detail::lanczos_extremal(ndof, apply, Eigen::MatrixXd(ndof, 0), opts);
    if (static_cast<int>(lr.values.size()) < k)
        throw SolverError("metric_graph_spectrum_fd: eigensolver failed", 0.0);

    std::vector<double> lambdas;
    for (int i = 0; i < k; ++i) lambdas.push_back(1.0 / lr.values(i) - 1.0);
    std::sort(lambdas.begin(), lambdas.end());

    ReferenceSpectrum out;
    out.kind = ReferenceSpectrum::Kind::NormalizedLimit;
    size_t i = 0;
    while (i < lambdas.size()) {
        size_t j = i + 1;
        while (j < lambdas.size() && lambdas[j] - lambdas[i] < 1e-9 * (1.0 + std::abs(lambdas[i])))
            ++j;
        out.entries.push_back({std::abs(lambdas[i]) < 1e-12 ? 0.0 : lambdas[i],
                               static_cast<int>(j - i), "coupled"});
        i = j;
    }
    return out;
}

// ---------------------------------------------------------------------------
// nonlocal energy
// ---------------------------------------------------------------------------

namespace {

struct QuadratureCloud {
    Eigen::MatrixXd ambient;              // nodes x N
    std::vector<Eigen::VectorXd> local;   // local coords
    std::vector<int> component;
    Eigen::VectorXd weight;               // alpha_i rho_i(x) * cell volume
    Eigen::VectorXd cell_half;            // half cell width per node (isotropic)
    bool budget_hit = false;
};

QuadratureCloud make_quadrature(const MixtureModel& model, double epsilon, long long budget,
                                double coarsen) {
    QuadratureCloud q;
    // per-patch target spacing; curves get finer grids whose resolution ratio
    // h/eps improves as eps shrinks so the quadrature floor vanishes with eps
    double scale = coarsen;
    auto spacing = [&](const Patch& p) {
        double h = p.dim == 1
                       ? std::min(epsilon / 8.0, std::max(epsilon / 40.0, epsilon * epsilon / 2.0))
                       : epsilon / 4.0;
        return h * scale;
    };
    auto count_nodes = [&]() {
        long long total = 0;
        for (const auto& c : model.components) {
            const Patch& p = c.patch;
            if (p.kind == Patch::Kind::Circle) {
                total += std::max<long long>(8, std::llround(p.measure() / spacing(p)));
            } else {
                long long t = 1;
                for (int j = 0; j < p.dim; ++j)
                    t *= std::max<long long>(2, std::llround(p.lengths(j) / spacing(p)));
                total += t;
            }
        }
        return total;
    };
    while (count_nodes() > budget) {
        scale *= 1.25;
        q.budget_hit = true;
    }
    for (const auto& c : model.components)
        if (spacing(c.patch) > epsilon / (c.patch.dim == 1 ? 3.0 : 2.0)) q.budget_hit = true;

    std::vector<Eigen::VectorXd> locals;
    std::vector<int> comps;
    std::vector<double> weights, halves;
    for (int ci = 0; ci < model.component_count(); ++ci) {
        const auto& comp = model.component(ci);
        const Patch& p = comp.patch;
        if (p.kind == Patch::Kind::Circle) {
            long long m = std::max<long long>(8, std::llround(p.measure() / spacing(p)));
            double cell = p.measure() / static_cast<double>(m);
            for (long long i = 0; i < m; ++i) {
                Eigen::VectorXd l(1);
                l(0) = (i + 0.5) * cell;
                locals.push_back(l);
                comps.push_back(ci);
                weights.push_back(comp.alpha * comp.density.value(p, l) * cell);
                halves.push_back(0.5 * cell);
            }
        } else {
            std::vector<long long> counts(static_cast<size_t>(p.dim));
            long long total = 1;
            for (int j = 0; j < p.dim; ++j) {
                counts[static_cast<size_t>(j)] =
                    std::max<long long>(2, std::llround(p.lengths(j) / spacing(p)));
                total *= counts[static_cast<size_t>(j)];
            }
            std::vector<long long> idx(static_cast<size_t>(p.dim), 0);
            for (long long t = 0; t < total; ++t) {
                Eigen::VectorXd l(p.dim);
                double cell = 1.0, hmax = 0.0;
                for (int j = 0; j < p.dim; ++j) {
                    double step = p.lengths(j) / static_cast<double>(counts[static_cast<size_t>(j)]);
                    l(j) = -0.5 * p.lengths(j) + (idx[static_cast<size_t>(j)] + 0.5) * step;
                    cell *= step;
                    hmax = std::max(hmax, 0.5 * step);
                }
                locals.push_back(l);
                comps.push_back(ci);
                weights.push_back(comp.alpha * comp.density.value(p, l) * cell);
                halves.push_back(hmax);
                int j = 0;
                for (; j < p.dim; ++j) {
                    if (++idx[static_cast<size_t>(j)] < counts[static_cast<size_t>(j)]) break;
                    idx[static_cast<size_t>(j)] = 0;
                }
            }
        }
    }

    const long long n = static_cast<long long>(locals.size());
    q.ambient.resize(n, model.ambient_dim);
    q.weight.resize(n);
    q.cell_half.resize(n);
    q.local = std::move(locals);
    q.component = std::move(comps);
    for (long long i = 0; i < n; ++i) {
        q.ambient.row(i) =
            model.component(q.component[static_cast<size_t>(i)])
                .patch.embed(q.local[static_cast<size_t>(i)])
                .transpose();
        q.weight(i) = weights[static_cast<size_t>(i)];
        q.cell_half(i) = halves[static_cast<size_t>(i)];
    }
    return q;
}

/// Kernel weight for a node pair. Near the support cutoff the kernel is
/// averaged exactly over the two cells (tensor Gauss-Legendre in the local
/// offsets) when both nodes live on curves; the midpoint value elsewhere.
class PairKernel {
public:
    PairKernel(const MixtureModel& model, const QuadratureCloud& q, const KernelProfile& profile,
               double eps)
        : model_(model), q_(q), profile_(profile), eps_(eps) {
        detail::gauss_legendre(4, gx_, gw_);
    }

    double operator()(long long a, long long b, double dist) const {
        double reach = q_.cell_half(a) + q_.cell_half(b);
        int da = model_.component(q_.component[static_cast<size_t>(a)]).patch.dim;
        int db = model_.component(q_.component[static_cast<size_t>(b)]).patch.dim;
        if (da != 1 || db != 1 || std::abs(dist - eps_) > reach)
            return eta_eval(profile_, dist / eps_);
        const Patch& pa = model_.component(q_.component[static_cast<size_t>(a)]).patch;
        const Patch& pb = model_.component(q_.component[static_cast<size_t>(b)]).patch;
        double acc = 0.0;
        Eigen::VectorXd la(1), lb(1);
        for (size_t i = 0; i < gx_.size(); ++i) {
            la(0) = q_.local[static_cast<size_t>(a)](0) + q_.cell_half(a) * gx_[i];
            Eigen::VectorXd xa = pa.embed(la);
            for (size_t j = 0; j < gx_.size(); ++j) {
                lb(0) = q_.local[static_cast<size_t>(b)](0) + q_.cell_half(b) * gx_[j];
                double d = (xa - pb.embed(lb)).norm();
                acc += gw_[i] * gw_[j] * eta_eval(profile_, d / eps_);
            }
        }
        return acc / 4.0;  // Gauss-Legendre weights on [-1,1] sum to 2 per axis
    }

private:
    const MixtureModel& model_;
    const QuadratureCloud& q_;
    const KernelProfile& profile_;
    double eps_;
    std::vector<double> gx_, gw_;
};

double nonlocal_on_cloud(const MixtureModel& model, const QuadratureCloud& q,
                         const KernelProfile& profile, const NodeEvaluator& u, double epsilon) {
    const long long n = q.ambient.rows();
    const double pad = 2.0 * q.cell_half.maxCoeff();
    detail::NeighborGrid grid(q.ambient, epsilon + pad);
    PairKernel kernel(model, q, profile, epsilon);

    // convolution eta_eps * mu on the same grid (self term included)
    Eigen::VectorXd conv(n);
    for (long long i = 0; i < n; ++i) {
        double s = eta_eval(profile, 0.0) * q.weight(i);
        grid.for_neighbors(i, [&](long long j) {
            double dist = (q.ambient.row(i) - q.ambient.row(j)).norm();
            s += kernel(i, j, dist) * q.weight(j);
        });
        conv(i) = s;
    }

    Eigen::VectorXd ratio(n);
    for (long long i = 0; i < n; ++i) {
        double val = u(q.component[static_cast<size_t>(i)], q.local[static_cast<size_t>(i)],
                       q.ambient.row(i).transpose(), conv(i));
        ratio(i) = val / std::sqrt(conv(i));
    }

    double acc = 0.0;
    for (long long i = 0; i < n; ++i) {
        grid.for_neighbors(i, [&](long long j) {
            if (j <= i) return;
            double dist = (q.ambient.row(i) - q.ambient.row(j)).norm();
            double d = ratio(i) - ratio(j);
            acc += kernel(i, j, dist) * d * d * q.weight(i) * q.weight(j);
        });
    }
    return 2.0 * acc / (epsilon * epsilon);
}

}  // namespace

NonlocalResult nonlocal_energy(const MixtureModel& model, const NodeEvaluator& u, double epsilon,
                               const KernelProfile& profile, long long budget) {
    if (epsilon <= 0.0 || epsilon >= 1.0)
        throw ValidationError("nonlocal_energy: epsilon must lie in (0,1)");
    int dim_sum = 0;
    for (const auto& c : model.components) dim_sum += c.patch.dim;

    NonlocalResult out;
    if (dim_sum > 4) {
        // Monte Carlo fallback: empirical estimator on a sampled cloud
        long long m = std::min<long long>(budget, 200000);
        SampleCloud cloud = sample_mixture(model, m, 0x6e6f6eULL);
        QuadratureCloud q;
        q.ambient = cloud.points;
        q.component = cloud.labels;
        q.weight = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
        q.cell_half = Eigen::VectorXd::Zero(m);
        q.local.resize(static_cast<size_t>(m));
        for (long long i = 0; i < m; ++i)
            q.local[static_cast<size_t>(i)] =
                model.component(cloud.labels[static_cast<size_t>(i)])
                    .patch.to_local(cloud.points.row(i).transpose())
                    .first;
        out.value = nonlocal_on_cloud(model, q, profile, u, epsilon);
        out.estimated_error = out.value;  // no refinement estimate available
        out.budget_warning = true;
        return out;
    }

    QuadratureCloud fine = make_quadrature(model, epsilon, budget, 1.0);
    QuadratureCloud coarse = make_quadrature(model, epsilon, budget, 2.0);
    out.value = nonlocal_on_cloud(model, fine, profile, u, epsilon);
    double coarse_value = nonlocal_on_cloud(model, coarse, profile, u, epsilon);
    out.estimated_error = std::abs(out.value - coarse_value);
    out.budget_warning = fine.budget_hit;
    return out;
}

NonlocalResult nonlocal_energy(const MixtureModel& model, const SmoothFunctionSpec& u,
                               double epsilon, const KernelProfile& profile, long long budget) {
    if (static_cast<int>(u.components.size()) != model.component_count())
        throw ValidationError("nonlocal_energy: function has wrong component count");
    NodeEvaluator eval = [&u](int comp, const Eigen::VectorXd& local, const Eigen::VectorXd&,
                              double) {
        return u.components[static_cast<size_t>(comp)].value(local);
    };
    return nonlocal_energy(model, eval, epsilon, profile, budget);
}

// ---------------------------------------------------------------------------
// limit energy
// ---------------------------------------------------------------------------

namespace {

/// Tensor Gauss-Legendre over a patch with escalating order until the value
/// settles to the relative tolerance.
double patch_integral(const Patch& patch,
                      const std::function<double(const Eigen::VectorXd&)>& f, double rel_tol) {
    auto integrate_once = [&](int order) {
        if (patch.kind == Patch::Kind::Circle) {
            // periodic trapezoid
            long long m = 16LL * order;
            double cell = patch.measure() / static_cast<double>(m);
            double s = 0.0;
            for (long long i = 0; i < m; ++i) {
                Eigen::VectorXd l(1);
                l(0) = (i + 0.5) * cell;
                s += f(l) * cell;
            }
            return s;
        }
        std::vector<double> x, w;
        detail::gauss_legendre(order, x, w);
        std::vector<int> idx(static_cast<size_t>(patch.dim), 0);
        double s = 0.0;
        while (true) {
            Eigen::VectorXd l(patch.dim);
            double ww = 1.0;
            for (int j = 0; j < patch.dim; ++j) {
                double half = 0.5 * patch.lengths(j);
                l(j) = half * x[static_cast<size_t>(idx[static_cast<size_t>(j)])];
                ww *= half * w[static_cast<size_t>(idx[static_cast<size_t>(j)])];
            }
            s += f(l) * ww;
            int j = 0;
            for (; j < patch.dim; ++j) {
                if (++idx[static_cast<size_t>(j)] < order) break;
                idx[static_cast<size_t>(j)] = 0;
            }
            if (j == patch.dim) break;
        }
        return s;
    };
    double prev = integrate_once(8);
    for (int order : {16, 32, 64, 128}) {
        double cur = integrate_once(order);
        if (std::abs(cur - prev) <= rel_tol * std::max(1e-300, std::abs(cur))) return cur;
        prev = cur;
    }
    return prev;
}

}  // namespace

double l2_mu_norm_sq(const MixtureModel& model, const SmoothFunctionSpec& u) {
    double total = 0.0;
    for (int i = 0; i < model.component_count(); ++i) {
        const auto& comp = model.component(i);
        const auto& fn = u.components.at(static_cast<size_t>(i));
        total += comp.alpha * patch_integral(
                                  comp.patch,
                                  [&](const Eigen::VectorXd& l) {
                                      double v = fn.value(l);
                                      return v * v * comp.density.value(comp.patch, l);
                                  },
                                  1e-10);
    }
    return total;
}

double limit_energy(const MixtureModel& model, const SmoothFunctionSpec& u,
                    const KernelProfile& profile) {
    if (static_cast<int>(u.components.size()) != model.component_count())
        throw ValidationError("limit_energy: function has wrong component count");

    // codimension-one trace condition: matching u/sqrt(alpha rho) at the
    // intersection whenever d1 = d2 = d12 + 1
    for (int a = 0; a < model.component_count(); ++a)
        for (int b = a + 1; b < model.component_count(); ++b) {
            const Patch& pa = model.component(a).patch;
            const Patch& pb = model.component(b).patch;
            if (pa.kind != Patch::Kind::FlatPiece || pb.kind != Patch::Kind::FlatPiece) continue;
            if (pa.dim != pb.dim) continue;
            FlatIntersection fi = flat_intersection(pa, pb);
            if (!fi.intersects || fi.dim != pa.dim - 1) continue;
            // sample the intersection and compare traces
            int samples = fi.dim == 0 ? 1 : 9;
            for (int s = 0; s < samples; ++s) {
                Eigen::VectorXd x = fi.point;
                if (fi.dim > 0)
                    x += fi.basis * Eigen::VectorXd::Constant(fi.dim,
                                                              -0.01 + 0.0025 * static_cast<double>(s));
                auto [la, ra] = pa.to_local(x);
                auto [lb, rb] = pb.to_local(x);
                if (!pa.contains_local(la, 1e-9) || !pb.contains_local(lb, 1e-9)) continue;
                double ta = u.components[static_cast<size_t>(a)].value(la) /
                            std::sqrt(model.component(a).alpha *
                                      model.component(a).density.value(pa, la));
                double tb = u.components[static_cast<size_t>(b)].value(lb) /
                            std::sqrt(model.component(b).alpha *
                                      model.component(b).density.value(pb, lb));
                if (std::abs(ta - tb) > 1e-9 * (1.0 + std::abs(ta) + std::abs(tb)))
                    return std::numeric_limits<double>::infinity();
            }
        }

    double total = 0.0;
    for (int i = 0; i < model.component_count(); ++i) {
        const auto& comp = model.component(i);
        const auto& fn = u.components.at(static_cast<size_t>(i));
        Moments mom = kernel_moments(profile, comp.patch.dim);
        double a = comp.alpha;
        auto integrand = [&](const Eigen::VectorXd& l) {
            double rho = comp.density.value(comp.patch, l);
            Eigen::VectorXd grad_rho = comp.density.gradient(comp.patch, l);
            double v = fn.value(l);
            Eigen::VectorXd grad_v = fn.gradient(l);
            // grad(u / sqrt(a rho)) = (grad u - u grad(rho)/(2 rho)) / sqrt(a rho)
            Eigen::VectorXd g = (grad_v - 0.5 * v / rho * grad_rho) / std::sqrt(a * rho);
            double w = a * rho;
            return g.squaredNorm() * w * w;
        };
        total += mom.sigma / mom.beta * patch_integral(comp.patch, integrand, 1e-9);
    }
    return total;
}

// ---------------------------------------------------------------------------
// recovery construction
// ---------------------------------------------------------------------------

double RecoveryFunction::intersection_distance(const Eigen::VectorXd& ambient) const {
    Eigen::VectorXd rel = ambient - intersection_point;
    if (intersection_basis.cols() > 0)
        rel -= intersection_basis * (intersection_basis.transpose() * rel);
    return rel.norm();
}

Eigen::VectorXd RecoveryFunction::project_to_intersection(const Eigen::VectorXd& ambient) const {
    Eigen::VectorXd rel = ambient - intersection_point;
    if (intersection_basis.cols() > 0)
        return intersection_point + intersection_basis * (intersection_basis.transpose() * rel);
    return intersection_point;
}

RecoveryFunction::Region RecoveryFunction::classify(double dist) const {
    if (dist < region_constant * epsilon) return Region::Near;
    if (dist < region_constant * std::sqrt(epsilon)) return Region::Mid;
    return Region::Far;
}

double RecoveryFunction::interp_weight(double dist) const {
    if (dist <= 0.0) return 1.0;
    double num = std::log(std::sqrt(epsilon)) - std::log(dist);
    double den = std::log(std::sqrt(epsilon)) - std::log(epsilon);
    return num / den;
}

double RecoveryFunction::ratio_value(int component, const Eigen::VectorXd& local,
                                     const Eigen::VectorXd& ambient) const {
    const auto& lo = model->component(low);
    const auto& hi = model->component(high);
    auto corrected_low = [&](const Eigen::VectorXd& l) {
        double rho = lo.density.value(lo.patch, l);
        return u1.components[static_cast<size_t>(low)].value(l) *
               std::sqrt(std::pow(epsilon, -lo.patch.dim) / (lo.alpha * beta_low * rho));
    };
    if (component == low) return corrected_low(local);

    double rho2 = hi.density.value(hi.patch, local);
    double b = u2.components[static_cast<size_t>(high)].value(local) *
               std::sqrt(std::pow(epsilon, -hi.patch.dim) / (hi.alpha * beta_high * rho2));
    double d = intersection_distance(ambient);
    double w = std::clamp(interp_weight(d), 0.0, 1.0);
    if (w == 0.0) return b;
    Eigen::VectorXd proj = project_to_intersection(ambient);
    auto [pl, pr] = lo.patch.to_local(proj);
    double a = corrected_low(pl);
    return b + w * (a - b);
}

NodeEvaluator RecoveryFunction::evaluator() const {
    const RecoveryFunction* self = this;
    return [self](int comp, const Eigen::VectorXd& local, const Eigen::VectorXd& ambient,
                  double conv) {
        return self->ratio_value(comp, local, ambient) * std::sqrt(conv);
    };
}

RecoveryFunction build_recovery(const MixtureModel& model, const SmoothFunctionSpec& u1,
                                const SmoothFunctionSpec& u2, double epsilon,
                                const KernelProfile& profile) {
    if (model.component_count() != 2)
        throw ValidationError("build_recovery: two-component models only");
    if (epsilon <= 0.0 || epsilon >= 1.0)
        throw ValidationError("build_recovery: epsilon must lie in (0,1)");

    RecoveryFunction r;
    r.model = &model;
    r.u1 = u1;
    r.u2 = u2;
    r.epsilon = epsilon;
    r.low = model.component(0).patch.dim <= model.component(1).patch.dim ? 0 : 1;
    r.high = 1 - r.low;

    const Patch& plo = model.component(r.low).patch;
    const Patch& phi = model.component(r.high).patch;
    FlatIntersection fi = flat_intersection(plo, phi);
    if (!fi.intersects) throw ValidationError("build_recovery: components do not intersect");
    int d12 = fi.dim;
    if (!(plo.dim - d12 <= 2 && 2 <= phi.dim - d12))
        throw ValidationError("build_recovery: needs d1 - d12 <= 2 <= d2 - d12");

    double theta = principal_angle(plo, phi);
    r.region_constant = 2.0 / std::sin(theta);
    r.intersection_point = fi.point;
    r.intersection_basis = fi.basis;
    r.beta_low = kernel_moments(profile, plo.dim).beta;
    r.beta_high = kernel_moments(profile, phi.dim).beta;

    // the near region (pinned to u1 o pi) must stay inside the patch
    auto [hl, hr] = phi.to_local(fi.point);
    double boundary_gap = std::numeric_limits<double>::infinity();
    for (int j = 0; j < phi.dim; ++j)
        boundary_gap = std::min(boundary_gap, 0.5 * phi.lengths(j) - std::abs(hl(j)));
    if (r.region_constant * epsilon >= boundary_gap)
        throw ValidationError(
            "build_recovery: epsilon too large, the near region overlaps the patch boundary");
    return r;
}

LogLayerResult log_layer_energy(double epsilon) {
    if (epsilon <= 0.0 || epsilon >= 1.0)
        throw ValidationError("log_layer_energy: epsilon must lie in (0,1)");
    LogLayerResult out;
    out.closed_form = 4.0 * kPi / std::abs(std::log(epsilon));

    // 2d annulus quadrature of |grad w|^2 with w the logarithmic layer:
    // |grad w| = 1 / (r |log sqrt(eps) - log eps|); geometric radial panels
    const double den = std::log(std::sqrt(epsilon)) - std::log(epsilon);
    const int panels = 64, theta_nodes = 32;
    std::vector<double> gx, gw;
    detail::gauss_legendre(8, gx, gw);
    double r0 = epsilon, r1 = std::sqrt(epsilon);
    double q = std::pow(r1 / r0, 1.0 / panels);
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        double a = r0 * std::pow(q, p), b = a * q;
        for (size_t i = 0; i < gx.size(); ++i) {
            double r = 0.5 * (a + b) + 0.5 * (b - a) * gx[i];
            double wr = 0.5 * (b - a) * gw[i];
            double grad = 1.0 / (r * den);
            for (int t = 0; t < theta_nodes; ++t)
                total += grad * grad * r * wr * (2.0 * kPi / theta_nodes);
        }
    }
    out.quadrature = total;
    return out;
}

}  // namespace unionlap
