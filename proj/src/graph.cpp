#include "unionlap/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>

#include "neighbor_grid.hpp"
#include "unionlap/errors.hpp"

namespace unionlap {

LaplacianKind LaplacianKind::unnormalized_scaled(int d2) {
    if (d2 < 1) throw ValidationError("unnormalized_scaled needs d2 >= 1");
    return {Type::UnnormalizedScaled, d2};
}

LaplacianKind LaplacianKind::from_key(const std::string& key, int d2) {
    if (key == "normalized") return normalized_sym();
    if (key == "unnormalized") return unnormalized();
    if (key == "unnormalized_scaled") return unnormalized_scaled(d2);
    throw ValidationError("unknown laplacian kind: " + key);
}

std::string LaplacianKind::key() const {
    switch (type) {
        case Type::NormalizedSym: return "normalized";
        case Type::Unnormalized: return "unnormalized";
        case Type::UnnormalizedScaled: return "unnormalized_scaled";
    }
    return "normalized";
}

namespace {

using detail::NeighborGrid;

Graph assemble(const SampleCloud& cloud, double epsilon, const KernelProfile& profile,
               const std::vector<std::vector<std::pair<long long, double>>>& rows) {
    const long long n = cloud.size();
    Graph g;
    g.n = n;
    g.epsilon = epsilon;
    g.labels = cloud.labels;
    g.cloud_seed = cloud.seed;

    std::vector<Eigen::Triplet<double>> triplets;
    long long total = n;
    for (const auto& r : rows) total += static_cast<long long>(r.size());
    triplets.reserve(static_cast<size_t>(total));
    const double self_weight = eta_eval(profile, 0.0);
    for (long long i = 0; i < n; ++i) {
        for (auto [j, w] : rows[static_cast<size_t>(i)])
            if (j < i) triplets.emplace_back(static_cast<int>(i), static_cast<int>(j), w);
        triplets.emplace_back(static_cast<int>(i), static_cast<int>(i), self_weight);
        for (auto [j, w] : rows[static_cast<size_t>(i)])
            if (j > i) triplets.emplace_back(static_cast<int>(i), static_cast<int>(j), w);
    }
    g.weights.resize(n, n);
    g.weights.setFromTriplets(triplets.begin(), triplets.end());
    g.weights.makeCompressed();

    g.deg.resize(n);
    for (long long i = 0; i < n; ++i) {
        double s = 0.0;
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(g.weights, i); it;
             ++it)
            s += it.value();
        g.deg(i) = s / static_cast<double>(n);
    }
    return g;
}

}  // namespace

Graph build_graph(const SampleCloud& cloud, double epsilon, const KernelProfile& profile) {
    if (cloud.size() == 0) throw ValidationError("build_graph: empty cloud");
    if (cloud.size() < 2) throw ValidationError("build_graph: need at least 2 points");
    if (epsilon <= 0.0) throw ValidationError("build_graph: epsilon must be > 0");

    const long long n = cloud.size();
    NeighborGrid grid(cloud.points, epsilon);
    std::vector<std::vector<std::pair<long long, double>>> rows(static_cast<size_t>(n));
    for (long long i = 0; i < n; ++i) {
        grid.for_neighbors(i, [&](long long j) {
            double dist = (cloud.points.row(i) - cloud.points.row(j)).norm();
            rows[static_cast<size_t>(i)].emplace_back(j, eta_eval(profile, dist / epsilon));
        });
    }
    return assemble(cloud, epsilon, profile, rows);
}

Graph build_graph_allpairs(const SampleCloud& cloud, double epsilon,
                           const KernelProfile& profile) {
    if (cloud.size() == 0) throw ValidationError("build_graph: empty cloud");
    if (cloud.size() < 2) throw ValidationError("build_graph: need at least 2 points");
    if (epsilon <= 0.0) throw ValidationError("build_graph: epsilon must be > 0");

    const long long n = cloud.size();
    std::vector<std::vector<std::pair<long long, double>>> rows(static_cast<size_t>(n));
    for (long long i = 0; i < n; ++i)
        for (long long j = 0; j < n; ++j) {
            if (i == j) continue;
            double dist = (cloud.points.row(i) - cloud.points.row(j)).norm();
            if (dist <= epsilon)
                rows[static_cast<size_t>(i)].emplace_back(j, eta_eval(profile, dist / epsilon));
        }
    return assemble(cloud, epsilon, profile, rows);
}

double dirichlet_normalized(const Graph& graph, const Eigen::VectorXd& u) {
    if (u.size() != graph.n) throw ValidationError("dirichlet_normalized: length(u) != n");
    const double n = static_cast<double>(graph.n);
    Eigen::VectorXd v = u.array() / graph.deg.array().sqrt();
    double acc = 0.0;
    for (long long i = 0; i < graph.n; ++i)
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(graph.weights, i); it;
             ++it) {
            double d = v(i) - v(it.col());
            acc += it.value() * d * d;
        }
    return acc / (n * n * graph.epsilon * graph.epsilon);
}

double dirichlet_unnormalized(const Graph& graph, const Eigen::VectorXd& u) {
    if (u.size() != graph.n) throw ValidationError("dirichlet_unnormalized: length(u) != n");
    const double n = static_cast<double>(graph.n);
    double acc = 0.0;
    for (long long i = 0; i < graph.n; ++i)
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(graph.weights, i); it;
             ++it) {
            double d = u(i) - u(it.col());
            acc += it.value() * d * d;
        }
    return acc / (n * n * graph.epsilon * graph.epsilon);
}

Eigen::VectorXd apply_laplacian(const Graph& graph, const LaplacianKind& kind,
                                const Eigen::VectorXd& u) {
    if (u.size() != graph.n) throw ValidationError("apply_laplacian: length(u) != n");
    const double n = static_cast<double>(graph.n);
    const double eps2 = graph.epsilon * graph.epsilon;
    Eigen::VectorXd out(graph.n);

    if (kind.type == LaplacianKind::Type::NormalizedSym) {
        // (2/eps^2) (u - n^-1 D^-1/2 W D^-1/2 u); kernel is sqrt(deg)
        Eigen::VectorXd v = u.array() / graph.deg.array().sqrt();
        for (long long i = 0; i < graph.n; ++i) {
            double s = 0.0;
            for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(graph.weights, i);
                 it; ++it)
                s += it.value() * v(it.col());
            out(i) = 2.0 / eps2 * (u(i) - s / (n * std::sqrt(graph.deg(i))));
        }
        return out;
    }

    for (long long i = 0; i < graph.n; ++i) {
        double s = 0.0;
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(graph.weights, i); it;
             ++it)
            s += it.value() * (u(i) - u(it.col()));
        out(i) = 2.0 / (n * eps2) * s;
    }
    if (kind.type == LaplacianKind::Type::UnnormalizedScaled)
        out *= std::pow(graph.epsilon, -kind.d2);
    return out;
}

double laplacian_norm_bound(const Graph& graph, const LaplacianKind& kind) {
    const double eps2 = graph.epsilon * graph.epsilon;
    if (kind.type == LaplacianKind::Type::NormalizedSym) return 4.0 / eps2;
    double bound = 4.0 / eps2 * graph.deg.maxCoeff();
    if (kind.type == LaplacianKind::Type::UnnormalizedScaled)
        bound *= std::pow(graph.epsilon, -kind.d2);
    return bound;
}

bool graph_connected(const Graph& graph) {
    if (graph.n == 0) return true;
    std::vector<char> seen(static_cast<size_t>(graph.n), 0);
    std::queue<long long> q;
    q.push(0);
    seen[0] = 1;
    long long visited = 1;
    while (!q.empty()) {
        long long i = q.front();
        q.pop();
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(graph.weights, i); it;
             ++it) {
            long long j = it.col();
            if (!seen[static_cast<size_t>(j)]) {
                seen[static_cast<size_t>(j)] = 1;
                ++visited;
                q.push(j);
            }
        }
    }
    return visited == graph.n;
}

Eigen::MatrixXd component_degrees(const Graph& graph, int component_count) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(graph.n, component_count);
    const double n = static_cast<double>(graph.n);
    for (long long i = 0; i < graph.n; ++i)
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(graph.weights, i); it;
             ++it)
            out(i, graph.labels[static_cast<size_t>(it.col())]) += it.value();
    return out / n;
}

void write_edge_list(const Graph& graph, const std::string& edges_path,
                     const std::string& degrees_path) {
    std::ofstream edges(edges_path);
    if (!edges) throw ValidationError("cannot open " + edges_path);
    edges.precision(17);
    for (long long i = 0; i < graph.n; ++i)
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(graph.weights, i); it;
             ++it)
            if (it.col() >= i) edges << i << ' ' << it.col() << ' ' << it.value() << '\n';
    std::ofstream degs(degrees_path);
    if (!degs) throw ValidationError("cannot open " + degrees_path);
    degs.precision(17);
    for (long long i = 0; i < graph.n; ++i) degs << graph.deg(i) << '\n';
}

std::vector<double> kde_sup_error(const Graph& graph, const SampleCloud& cloud,
                                  const MixtureModel& model, const KernelProfile& profile,
                                  double margin) {
    if (margin < 0.0) margin = graph.epsilon;
    const int ncomp = model.component_count();
    Eigen::MatrixXd cdeg = component_degrees(graph, ncomp);
    std::vector<double> sup(static_cast<size_t>(ncomp), 0.0);

    for (long long i = 0; i < graph.n; ++i) {
        int ci = graph.labels[static_cast<size_t>(i)];
        const auto& comp = model.component(ci);
        Eigen::VectorXd x = cloud.points.row(i).transpose();

        bool interior = true;
        for (int cj = 0; cj < ncomp && interior; ++cj)
            if (cj != ci && model.component(cj).patch.distance_to(x) <= margin) interior = false;
        if (interior && comp.patch.has_boundary) {
            auto [local, resid] = comp.patch.to_local(x);
            for (int d = 0; d < comp.patch.dim; ++d)
                if (0.5 * comp.patch.lengths(d) - std::abs(local(d)) <= margin) interior = false;
        }
        if (!interior) continue;

        auto [local, resid] = comp.patch.to_local(x);
        double rho = comp.density.value(comp.patch, local);
        double beta = kernel_moments(profile, comp.patch.dim).beta;
        double est = std::pow(graph.epsilon, -comp.patch.dim) * cdeg(i, ci);
        sup[static_cast<size_t>(ci)] =
            std::max(sup[static_cast<size_t>(ci)], std::abs(est - comp.alpha * beta * rho));
    }
    return sup;
}

DegreeScalingReport degree_scaling_report(const Graph& graph, const SampleCloud& cloud,
                                          const MixtureModel& model) {
    if (model.component_count() != 2)
        throw ValidationError("degree_scaling_report: two-component models only");
    int low = model.component(0).patch.dim <= model.component(1).patch.dim ? 0 : 1;
    int high = 1 - low;
    const int d_low = model.component(low).patch.dim;
    const int d_high = model.component(high).patch.dim;
    const Patch& low_patch = model.component(low).patch;

    DegreeScalingReport r;
    r.near_min = r.far_min = std::numeric_limits<double>::infinity();
    r.near_max = r.far_max = 0.0;
    const double eps = graph.epsilon;
    for (long long i = 0; i < graph.n; ++i) {
        Eigen::VectorXd x = cloud.points.row(i).transpose();
        if (graph.labels[static_cast<size_t>(i)] == high) {
            double dist = low_patch.distance_to(x);
            if (dist <= 0.5 * eps) {
                double v = graph.deg(i) * std::pow(eps, -d_low);
                r.near_min = std::min(r.near_min, v);
                r.near_max = std::max(r.near_max, v);
                ++r.near_count;
            }
            if (dist > eps) {
                double v = graph.deg(i) * std::pow(eps, -d_high);
                r.far_min = std::min(r.far_min, v);
                r.far_max = std::max(r.far_max, v);
                ++r.far_count;
            }
        }
    }
    return r;
}

}  // namespace unionlap
