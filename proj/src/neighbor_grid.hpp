#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <unordered_map>
#include <vector>

namespace unionlap::detail {

/// Uniform grid over the bounding box with cell size eps; enumerates exact
/// closed-ball neighbors (|x_i - x_j| <= eps, j != i) in ascending j order.
class NeighborGrid {
public:
    NeighborGrid(const Eigen::MatrixXd& points, double eps) : points_(points), eps_(eps) {
        const int dim = static_cast<int>(points.cols());
        lo_ = points.colwise().minCoeff();
        dims_.assign(static_cast<size_t>(dim), 1);
        for (int d = 0; d < dim; ++d) {
            double extent = points.col(d).maxCoeff() - lo_(d);
            dims_[static_cast<size_t>(d)] =
                std::max<long long>(1, static_cast<long long>(extent / eps) + 1);
        }
        strides_.assign(static_cast<size_t>(dim), 1);
        for (int d = 1; d < dim; ++d)
            strides_[static_cast<size_t>(d)] =
                strides_[static_cast<size_t>(d - 1)] * dims_[static_cast<size_t>(d - 1)];
        cells_.reserve(static_cast<size_t>(points.rows()));
        for (long long i = 0; i < points.rows(); ++i) cells_[cell_of(i)].push_back(i);
    }

    template <class Fn>
    void for_neighbors(long long i, Fn&& fn) const {
        const int dim = static_cast<int>(points_.cols());
        std::vector<long long> base(static_cast<size_t>(dim));
        for (int d = 0; d < dim; ++d) base[static_cast<size_t>(d)] = coord(i, d);
        scratch_.clear();
        std::vector<long long> off(static_cast<size_t>(dim), -1);
        while (true) {
            long long key = 0;
            bool valid = true;
            for (int d = 0; d < dim; ++d) {
                long long c = base[static_cast<size_t>(d)] + off[static_cast<size_t>(d)];
                if (c < 0 || c >= dims_[static_cast<size_t>(d)]) {
                    valid = false;
                    break;
                }
                key += c * strides_[static_cast<size_t>(d)];
            }
            if (valid) {
                auto it = cells_.find(key);
                if (it != cells_.end())
                    for (long long j : it->second) {
                        if (j == i) continue;
                        if ((points_.row(i) - points_.row(j)).norm() <= eps_)
                            scratch_.push_back(j);
                    }
            }
            int d = 0;
            for (; d < dim; ++d) {
                if (++off[static_cast<size_t>(d)] <= 1) break;
                off[static_cast<size_t>(d)] = -1;
            }
            if (d == dim) break;
        }
        std::sort(scratch_.begin(), scratch_.end());
        for (long long j : scratch_) fn(j);
    }

private:
    long long coord(long long i, int d) const {
        auto c = static_cast<long long>((points_(i, d) - lo_(d)) / eps_);
        return std::clamp<long long>(c, 0, dims_[static_cast<size_t>(d)] - 1);
    }
    long long cell_of(long long i) const {
        long long key = 0;
        for (int d = 0; d < static_cast<int>(points_.cols()); ++d)
            key += coord(i, d) * strides_[static_cast<size_t>(d)];
        return key;
    }

    const Eigen::MatrixXd& points_;
    double eps_;
    Eigen::VectorXd lo_;
    std::vector<long long> dims_, strides_;
    std::unordered_map<long long, std::vector<long long>> cells_;
    mutable std::vector<long long> scratch_;
};

}  // namespace unionlap::detail
