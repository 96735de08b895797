#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "unionlap/random.hpp"

namespace unionlap::detail {

using MatVec = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct LanczosOptions {
    int k = 1;
    double tol_abs = 1e-8;  // residual threshold ||A v - theta v||
    int max_basis = 500;    // Krylov dimension per cycle
    int max_cycles = 50;    // restart cap; converged pairs are locked
    std::uint64_t seed = 1;
    bool largest = false;   // which end of the spectrum
};

struct LanczosResult {
    Eigen::VectorXd values;     // sorted toward the requested end
    Eigen::MatrixXd vectors;    // l2-orthonormal columns
    Eigen::VectorXd residuals;  // true residuals ||A v - theta v||
    int iterations = 0;
    bool converged = false;
};

/// Lanczos with full reorthogonalization against the basis, the supplied
/// deflation vectors and the locked converged pairs. Restart cycles lock
/// pairs whose residual meets the tolerance; once k pairs are locked an
/// extra deflated cycle verifies that no eigenvalue of the wanted end was
/// missed (a single Krylov space sees one copy of a multiple eigenvalue, so
/// twins only appear after their sibling is deflated).
inline LanczosResult lanczos_extremal(long long dim, const MatVec& apply,
                                      const Eigen::MatrixXd& deflation,
                                      const LanczosOptions& opts) {
    LanczosResult out;
    const int want = opts.k;
    const double sign = opts.largest ? -1.0 : 1.0;  // compare in "smallest" order

    Eigen::MatrixXd locked(dim, 0);
    std::vector<double> locked_vals;  // sign-adjusted (ascending = wanted order)
    Rng rng(opts.seed);

    auto project_out = [&](Eigen::VectorXd& w, const Eigen::MatrixXd& basis, int cols) {
        for (int pass = 0; pass < 2; ++pass) {
            if (deflation.cols() > 0) w.noalias() -= deflation * (deflation.transpose() * w);
            if (locked.cols() > 0) w.noalias() -= locked * (locked.transpose() * w);
            if (cols > 0)
                w.noalias() -= basis.leftCols(cols) * (basis.leftCols(cols).transpose() * w);
        }
    };

    auto random_vector = [&]() {
        Eigen::VectorXd v(dim);
        for (long long i = 0; i < dim; ++i) v(i) = rng.uniform01() - 0.5;
        return v;
    };

    auto worst_locked = [&]() {
        double w = -std::numeric_limits<double>::infinity();
        for (double v : locked_vals) w = std::max(w, v);
        return w;
    };

    auto evict_beyond_want = [&]() {
        while (static_cast<int>(locked_vals.size()) > want) {
            size_t worst = 0;
            for (size_t i = 1; i < locked_vals.size(); ++i)
                if (locked_vals[i] > locked_vals[worst]) worst = i;
            Eigen::MatrixXd next(dim, locked.cols() - 1);
            int c = 0;
            for (int j = 0; j < locked.cols(); ++j)
                if (j != static_cast<int>(worst)) next.col(c++) = locked.col(j);
            locked = std::move(next);
            locked_vals.erase(locked_vals.begin() + static_cast<long>(worst));
        }
    };

    Eigen::VectorXd start = random_vector();
    bool verified = false;
    double scale_est = 0.0;  // magnitude estimate for the verification slack

    for (int cycle = 0; cycle < opts.max_cycles; ++cycle) {
        const bool verifying = static_cast<int>(locked_vals.size()) >= want;
        if (verifying && verified) break;
        const int need = verifying ? 1 : want - static_cast<int>(locked_vals.size());
        long long free_dim = dim - deflation.cols() - locked.cols();
        if (free_dim < 1) {
            verified = true;  // nothing left in the complement
            break;
        }
        int m_cap = static_cast<int>(std::min<long long>(opts.max_basis, free_dim));

        Eigen::MatrixXd V(dim, m_cap);
        Eigen::VectorXd alpha = Eigen::VectorXd::Zero(m_cap);
        Eigen::VectorXd beta = Eigen::VectorXd::Zero(m_cap);

        Eigen::VectorXd v = start;
        project_out(v, V, 0);
        double nrm = v.norm();
        if (nrm < 1e-300) {
            v = random_vector();
            project_out(v, V, 0);
            nrm = v.norm();
            if (nrm < 1e-300) break;
        }
        V.col(0) = v / nrm;

        Eigen::VectorXd w(dim);
        int m = 0;
        for (int j = 0; j < m_cap; ++j) {
            apply(V.col(j), w);
            ++out.iterations;
            if (j > 0) w.noalias() -= beta(j - 1) * V.col(j - 1);
            alpha(j) = V.col(j).dot(w);
            w.noalias() -= alpha(j) * V.col(j);
            project_out(w, V, j + 1);
            beta(j) = w.norm();
            m = j + 1;

            if (beta(j) < 1e-13) {
                Eigen::VectorXd fresh = random_vector();
                project_out(fresh, V, j + 1);
                double fn = fresh.norm();
                if (fn < 1e-300 || j + 1 >= m_cap) break;
                V.col(j + 1) = fresh / fn;
                beta(j) = 0.0;
                continue;
            }
            if (j + 1 < m_cap) V.col(j + 1) = w / beta(j);

            if (m >= need && (m % 10 == 0 || j + 1 == m_cap)) {
                Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
                for (int i = 0; i < m; ++i) {
                    T(i, i) = alpha(i);
                    if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta(i);
                }
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
                double worst = 0.0;
                for (int i = 0; i < need; ++i) {
                    int src = opts.largest ? m - 1 - i : i;
                    worst = std::max(worst, std::abs(beta(m - 1) * es.eigenvectors()(m - 1, src)));
                }
                if (worst <= opts.tol_abs) break;
            }
        }
        if (m < 1) break;

        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < m; ++i) {
            T(i, i) = alpha(i);
            if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta(i);
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
        scale_est = std::max({scale_est, std::abs(es.eigenvalues()(0)),
                              std::abs(es.eigenvalues()(m - 1))});

        Eigen::VectorXd next_start;
        int locked_this_cycle = 0;
        for (int i = 0; i < std::min(need + 1, m); ++i) {
            int src = opts.largest ? m - 1 - i : i;
            double theta = es.eigenvalues()(src);
            double resid_est = std::abs(beta(m - 1) * es.eigenvectors()(m - 1, src));
            Eigen::VectorXd u = V.leftCols(m) * es.eigenvectors().col(src);
            double un = u.norm();
            if (un < 1e-300) continue;
            u /= un;
            bool converged_pair = resid_est <= opts.tol_abs || m >= free_dim;
            if (i < need && converged_pair) {
                if (verifying) {
                    // accept only if it undercuts the current worst pair
                    if (sign * theta < worst_locked() - 1e-10 * std::max(1.0, scale_est)) {
                        locked.conservativeResize(dim, locked.cols() + 1);
                        locked.col(locked.cols() - 1) = u;
                        locked_vals.push_back(sign * theta);
                        evict_beyond_want();
                        ++locked_this_cycle;
                    } else {
                        verified = true;
                    }
                } else {
                    locked.conservativeResize(dim, locked.cols() + 1);
                    locked.col(locked.cols() - 1) = u;
                    locked_vals.push_back(sign * theta);
                    ++locked_this_cycle;
                }
            } else if (next_start.size() == 0) {
                next_start = u;
            }
        }
        start = next_start.size() > 0 ? next_start : random_vector();
        if (locked_this_cycle == 0 && !verifying && m >= free_dim) break;
    }

    const int got = static_cast<int>(std::min<long long>(want, locked.cols()));
    out.values.resize(got);
    out.vectors.resize(dim, got);
    out.residuals.resize(got);
    std::vector<int> order(static_cast<size_t>(got));
    for (int i = 0; i < got; ++i) order[static_cast<size_t>(i)] = i;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return locked_vals[static_cast<size_t>(a)] < locked_vals[static_cast<size_t>(b)]; });
    bool all_good = got == want && verified;
    Eigen::VectorXd tmp(dim);
    for (int i = 0; i < got; ++i) {
        int src = order[static_cast<size_t>(i)];
        out.vectors.col(i) = locked.col(src);
        apply(locked.col(src), tmp);
        double theta = locked.col(src).dot(tmp);
        out.values(i) = theta;
        out.residuals(i) = (tmp - theta * locked.col(src)).norm();
        if (out.residuals(i) > 10.0 * opts.tol_abs) all_good = false;
    }
    out.converged = all_good;
    return out;
}

}  // namespace unionlap::detail
