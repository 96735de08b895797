#include "unionlap/transport.hpp"

#include <cmath>
#include <limits>

#include "unionlap/errors.hpp"

namespace unionlap {

namespace {

/// Shortest-augmenting-path assignment (Jonker-Volgenant style, O(m^3)).
/// Returns the column matched to each row.
std::vector<int> solve_assignment(const Eigen::MatrixXd& cost) {
    const int n = static_cast<int>(cost.rows());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(static_cast<size_t>(n) + 1, 0.0), v(static_cast<size_t>(n) + 1, 0.0);
    std::vector<int> p(static_cast<size_t>(n) + 1, 0), way(static_cast<size_t>(n) + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<size_t>(n) + 1, inf);
        std::vector<char> used(static_cast<size_t>(n) + 1, 0);
        do {
            used[static_cast<size_t>(j0)] = 1;
            int i0 = p[static_cast<size_t>(j0)], j1 = -1;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[static_cast<size_t>(j)]) continue;
                double cur = cost(i0 - 1, j - 1) - u[static_cast<size_t>(i0)] -
                             v[static_cast<size_t>(j)];
                if (cur < minv[static_cast<size_t>(j)]) {
                    minv[static_cast<size_t>(j)] = cur;
                    way[static_cast<size_t>(j)] = j0;
                }
                if (minv[static_cast<size_t>(j)] < delta) {
                    delta = minv[static_cast<size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[static_cast<size_t>(j)]) {
                    u[static_cast<size_t>(p[static_cast<size_t>(j)])] += delta;
                    v[static_cast<size_t>(j)] -= delta;
                } else {
                    minv[static_cast<size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[static_cast<size_t>(j0)] != 0);
        do {
            int j1 = way[static_cast<size_t>(j0)];
            p[static_cast<size_t>(j0)] = p[static_cast<size_t>(j1)];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> row_to_col(static_cast<size_t>(n), -1);
    for (int j = 1; j <= n; ++j) row_to_col[static_cast<size_t>(p[static_cast<size_t>(j)] - 1)] = j - 1;
    return row_to_col;
}

}  // namespace

TL2Result tl2_exact(const Eigen::MatrixXd& points_a, const Eigen::VectorXd& u_a,
                    const Eigen::MatrixXd& points_b, const Eigen::VectorXd& u_b) {
    const long long m = points_a.rows();
    if (m != points_b.rows() || m != u_a.size() || m != u_b.size())
        throw ValidationError("tl2_exact: atom counts must match (general plans unsupported)");
    if (m == 0) throw ValidationError("tl2_exact: empty point sets");
    if (m > 4096) throw ValidationError("tl2_exact: assignment solver bound is m <= 4096");
    if (points_a.cols() != points_b.cols())
        throw ValidationError("tl2_exact: ambient dimensions differ");

    Eigen::MatrixXd cost(m, m);
    for (long long i = 0; i < m; ++i)
        for (long long j = 0; j < m; ++j) {
            double du = u_a(i) - u_b(j);
            cost(i, j) = (points_a.row(i) - points_b.row(j)).squaredNorm() + du * du;
        }

    TL2Result r;
    r.assignment = solve_assignment(cost);
    double spatial = 0.0, value = 0.0;
    for (long long i = 0; i < m; ++i) {
        int j = r.assignment[static_cast<size_t>(i)];
        spatial += (points_a.row(i) - points_b.row(j)).squaredNorm();
        double du = u_a(i) - u_b(j);
        value += du * du;
    }
    r.spatial_cost = spatial / static_cast<double>(m);
    r.value_cost = value / static_cast<double>(m);
    r.distance = std::sqrt(r.spatial_cost + r.value_cost);
    return r;
}

Eigen::VectorXd evaluate_at_samples(const MixtureModel& model, const SampleCloud& cloud,
                                    const SmoothFunctionSpec& u) {
    if (static_cast<int>(u.components.size()) != model.component_count())
        throw ValidationError("evaluate_at_samples: function has wrong component count");
    Eigen::VectorXd out(cloud.size());
    for (long long i = 0; i < cloud.size(); ++i) {
        int c = cloud.labels[static_cast<size_t>(i)];
        auto [local, resid] = model.component(c).patch.to_local(cloud.points.row(i).transpose());
        out(i) = u.components[static_cast<size_t>(c)].value(local);
    }
    return out;
}

double tl2_proxy(const SampleCloud& cloud, const Eigen::VectorXd& u_n, const MixtureModel& model,
                 const SmoothFunctionSpec& u) {
    if (u_n.size() != cloud.size()) throw ValidationError("tl2_proxy: length(u_n) != n");
    Eigen::VectorXd ref = evaluate_at_samples(model, cloud, u);
    return std::sqrt((u_n - ref).squaredNorm() / static_cast<double>(cloud.size()));
}

Eigen::VectorXd degree_corrected_samples(const MixtureModel& model, const SampleCloud& cloud,
                                         const Graph& graph, const KernelProfile& profile,
                                         const SmoothFunctionSpec& u) {
    Eigen::VectorXd vals = evaluate_at_samples(model, cloud, u);
    std::vector<double> beta(static_cast<size_t>(model.component_count()));
    for (int c = 0; c < model.component_count(); ++c)
        beta[static_cast<size_t>(c)] = kernel_moments(profile, model.component(c).patch.dim).beta;
    for (long long i = 0; i < cloud.size(); ++i) {
        int c = cloud.labels[static_cast<size_t>(i)];
        const auto& comp = model.component(c);
        auto [local, resid] = comp.patch.to_local(cloud.points.row(i).transpose());
        double rho = comp.density.value(comp.patch, local);
        double corr = std::sqrt(std::pow(graph.epsilon, -comp.patch.dim) * graph.deg(i) /
                                (comp.alpha * beta[static_cast<size_t>(c)] * rho));
        vals(i) *= corr;
    }
    return vals;
}

Eigen::VectorXd align_sign(const Eigen::VectorXd& u, const Eigen::VectorXd& ref) {
    return u.dot(ref) >= 0.0 ? u : (-u).eval();
}

Eigen::MatrixXd procrustes_align(const Eigen::MatrixXd& cluster,
                                 const Eigen::MatrixXd& reference) {
    if (cluster.rows() != reference.rows() || cluster.cols() != reference.cols())
        throw ValidationError("procrustes_align: shapes must match");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(cluster.transpose() * reference,
                                          Eigen::ComputeThinU | Eigen::ComputeThinV);
    return cluster * (svd.matrixU() * svd.matrixV().transpose());
}

double l2_mu_n_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::abs(a.dot(b)) / (na * nb);
}

}  // namespace unionlap
