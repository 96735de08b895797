#include "unionlap/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "lanczos.hpp"
#include "unionlap/errors.hpp"

namespace unionlap {

namespace {

Eigen::VectorXd kernel_vector(const Graph& graph, const LaplacianKind& kind) {
    Eigen::VectorXd v;
    if (kind.type == LaplacianKind::Type::NormalizedSym)
        v = graph.deg.array().sqrt();
    else
        v = Eigen::VectorXd::Ones(graph.n);
    return v / v.norm();
}

void fix_sign(Eigen::MatrixXd& vectors) {
    for (int j = 0; j < vectors.cols(); ++j) {
        int idx = 0;
        double best = -1.0;
        for (long long i = 0; i < vectors.rows(); ++i) {
            double a = std::abs(vectors(i, j));
            if (a > best) {  // ties keep the first index
                best = a;
                idx = static_cast<int>(i);
            }
        }
        if (vectors(idx, j) < 0.0) vectors.col(j) = -vectors.col(j);
    }
}

}  // namespace

SpectralResult smallest_eigenpairs(const Graph& graph, const LaplacianKind& kind, int k,
                                   double tol) {
    if (k < 1) throw ValidationError("smallest_eigenpairs: k must be >= 1");
    if (k >= graph.n) throw ValidationError("smallest_eigenpairs: k must be < n");
    if (tol <= 0.0) throw ValidationError("smallest_eigenpairs: tol must be > 0");

    const long long n = graph.n;
    const double bound = laplacian_norm_bound(graph, kind);
    const double tol_abs = tol * bound;

    SpectralResult res;
    res.kind = kind;
    res.tolerance = tol_abs;
    res.connected = graph_connected(graph);
    if (!res.connected)
        std::fputs("unionlap: warning: graph is disconnected at this bandwidth\n", stderr);

    auto matvec = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
        y = apply_laplacian(graph, kind, x);
    };

    Eigen::MatrixXd vecs;  // l2-orthonormal columns
    Eigen::VectorXd vals;

    if (n <= 512) {
        Eigen::MatrixXd dense(n, n);
        Eigen::VectorXd e = Eigen::VectorXd::Zero(n), col(n);
        for (long long j = 0; j < n; ++j) {
            e(j) = 1.0;
            matvec(e, col);
            dense.col(j) = col;
            e(j) = 0.0;
        }
        dense = 0.5 * (dense + dense.transpose().eval());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
        vals = es.eigenvalues().head(k);
        vecs = es.eigenvectors().leftCols(k);
    } else {
        Eigen::VectorXd kernel = kernel_vector(graph, kind);
        detail::LanczosOptions opts;
        opts.k = k - 1;
        opts.tol_abs = 0.1 * tol_abs;  // headroom so true residuals meet tol_abs
        opts.max_basis = std::max(600, 40 * k);
        opts.max_cycles = 50 * k;
        opts.seed = derive_seed(graph.cloud_seed, 0x5eedULL + static_cast<std::uint64_t>(kind.d2) +
                                                      (kind.type == LaplacianKind::Type::NormalizedSym
                                                           ? 11u
                                                           : 13u));
        Eigen::MatrixXd deflation(n, 1);
        deflation.col(0) = kernel;

        detail::LanczosResult lr =
            detail::lanczos_extremal(n, matvec, deflation, opts);
        res.iterations = lr.iterations;
        if (!lr.converged || lr.values.size() < k - 1) {
            double worst = lr.residuals.size() > 0 ? lr.residuals.maxCoeff() : INFINITY;
            throw SolverError("eigensolver did not converge to the requested residual (worst " +
                                  std::to_string(worst) + ", threshold " +
                                  std::to_string(tol_abs) + ")",
                              worst);
        }
        vals.resize(k);
        vecs.resize(n, k);
        Eigen::VectorXd lk = apply_laplacian(graph, kind, kernel);
        vals(0) = kernel.dot(lk);
        vecs.col(0) = kernel;
        vals.tail(k - 1) = lr.values;
        vecs.rightCols(k - 1) = lr.vectors;
        // the deflated pair is already the smallest; keep ascending order
        std::vector<int> order(static_cast<size_t>(k));
        for (int i = 0; i < k; ++i) order[static_cast<size_t>(i)] = i;
        std::sort(order.begin(), order.end(), [&](int a, int b) { return vals(a) < vals(b); });
        Eigen::VectorXd sv(k);
        Eigen::MatrixXd sm(n, k);
        for (int i = 0; i < k; ++i) {
            sv(i) = vals(order[static_cast<size_t>(i)]);
            sm.col(i) = vecs.col(order[static_cast<size_t>(i)]);
        }
        vals = sv;
        vecs = sm;
    }

    // L2(mu_n) normalization and residuals on the full operator
    res.eigenvalues = vals;
    res.vectors = vecs * std::sqrt(static_cast<double>(n));
    fix_sign(res.vectors);
    res.residuals.resize(k);
    Eigen::VectorXd lu(n);
    for (int j = 0; j < k; ++j) {
        matvec(res.vectors.col(j), lu);
        res.residuals(j) = (lu - vals(j) * res.vectors.col(j)).norm() / res.vectors.col(j).norm();
        if (res.residuals(j) > tol_abs && n > 512)
            throw SolverError("residual above tolerance after convergence", res.residuals(j));
    }
    return res;
}

double separation_score(const Eigen::VectorXd& u, const std::vector<int>& labels) {
    double m0 = 0, m1 = 0;
    long long n0 = 0, n1 = 0;
    for (long long i = 0; i < u.size(); ++i)
        (labels[static_cast<size_t>(i)] == 0 ? (m0 += u(i), ++n0) : (m1 += u(i), ++n1));
    if (n0 == 0 || n1 == 0) return 0.0;
    m0 /= static_cast<double>(n0);
    m1 /= static_cast<double>(n1);
    double s0 = 0, s1 = 0;
    for (long long i = 0; i < u.size(); ++i) {
        double d = u(i) - (labels[static_cast<size_t>(i)] == 0 ? m0 : m1);
        (labels[static_cast<size_t>(i)] == 0 ? s0 : s1) += d * d;
    }
    double pooled = std::sqrt((s0 + s1) / std::max<long long>(n0 + n1 - 2, 1));
    double diff = std::abs(m0 - m1);
    if (diff == 0.0) return 0.0;
    if (pooled * 1e6 <= diff) return 1e6;
    return std::min(diff / pooled, 1e6);
}

double component_variance_fraction(const Eigen::VectorXd& u, const std::vector<int>& labels,
                                   int component) {
    double mean_all = u.mean();
    double var_all = (u.array() - mean_all).square().sum() / static_cast<double>(u.size());
    double mean_c = 0;
    long long nc = 0;
    for (long long i = 0; i < u.size(); ++i)
        if (labels[static_cast<size_t>(i)] == component) {
            mean_c += u(i);
            ++nc;
        }
    if (nc == 0 || var_all <= 0.0) return 0.0;
    mean_c /= static_cast<double>(nc);
    double var_c = 0;
    for (long long i = 0; i < u.size(); ++i)
        if (labels[static_cast<size_t>(i)] == component) {
            double d = u(i) - mean_c;
            var_c += d * d;
        }
    var_c /= static_cast<double>(nc);
    return var_c / var_all;
}

AlignmentReport align_spectra(const SpectralResult& result, const ReferenceSpectrum& reference,
                              const SampleCloud& cloud) {
    const int k = result.k();
    std::vector<double> ref = reference.expanded(k);
    if (static_cast<int>(ref.size()) < k)
        throw ValidationError("align_spectra: reference spectrum shorter than computed one");

    AlignmentReport report;
    std::vector<std::string> sources;
    {
        int left = k;
        for (const auto& e : reference.entries) {
            for (int m = 0; m < e.multiplicity && left > 0; ++m, --left)
                sources.push_back(e.source);
            if (left == 0) break;
        }
    }
    double lam3 = ref.size() >= 3 ? ref[2] : ref.back();
    if (lam3 <= 0.0) {
        lam3 = 0.0;
        for (double r : ref) lam3 = std::max(lam3, r);
        if (lam3 <= 0.0) lam3 = 1.0;
    }

    for (int i = 0; i < k; ++i) {
        AlignmentReport::Pair p;
        p.computed = result.eigenvalues(i);
        p.reference = ref[static_cast<size_t>(i)];
        p.rel_error = std::abs(p.computed - p.reference) / std::max(p.reference, lam3);
        p.source = sources[static_cast<size_t>(i)];
        report.pairs.push_back(p);
    }

    // multiplicity clusters of the reference (values closer than 1e-9)
    int start = 0;
    while (start < k) {
        int end = start + 1;
        while (end < k && std::abs(ref[static_cast<size_t>(end)] - ref[static_cast<size_t>(start)]) <
                              1e-9)
            ++end;
        AlignmentReport::Cluster c;
        c.first = start;
        c.size = end - start;
        c.reference = ref[static_cast<size_t>(start)];
        double lo = result.eigenvalues(start), hi = result.eigenvalues(end - 1);
        c.computed_spread = hi - lo;
        report.clusters.push_back(c);
        start = end;
    }

    // separation scores against the two-component split
    bool two_components = false;
    for (int lab : cloud.labels)
        if (lab == 1) two_components = true;
    if (two_components) {
        for (int j = 0; j < k; ++j)
            report.separation_scores.push_back(separation_score(result.vectors.col(j), cloud.labels));
    }
    return report;
}

}  // namespace unionlap
