#pragma once

#include <cstdint>
#include <vector>

#include "bat/common.hpp"

namespace bat {

// Row-major matrix of indices into a source point set.
struct IndexMatrix {
    IndexMatrix() = default;
    IndexMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), v_(rows * cols, 0) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::uint32_t& at(std::size_t r, std::size_t c) { return v_[r * cols_ + c]; }
    std::uint32_t at(std::size_t r, std::size_t c) const { return v_[r * cols_ + c]; }
    std::uint32_t* data() { return v_.data(); }
    const std::uint32_t* data() const { return v_.data(); }

    std::vector<std::uint32_t> row_vec(std::size_t r) const {
        return {v_.begin() + static_cast<std::ptrdiff_t>(r * cols_),
                v_.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols_)};
    }
    std::vector<std::uint32_t> col_vec(std::size_t c) const {
        std::vector<std::uint32_t> out(rows_);
        for (std::size_t r = 0; r < rows_; ++r) out[r] = at(r, c);
        return out;
    }
    const std::vector<std::uint32_t>& flat() const { return v_; }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<std::uint32_t> v_;
};

// Greedy max-min selection of m points starting at the given index. Ties on
// the max-min distance go to the lowest index. 1 x m result.
IndexMatrix farthest_point_sampling(const PointCloud& points, std::size_t m, std::size_t start = 0);

// Per center, up to max_k in-radius point indices in ascending source order,
// underfull groups padded by repeating the first entry and empty groups
// filled with the nearest point. centers.rows() x max_k result.
IndexMatrix ball_query(const PointCloud& centers, const PointCloud& points, double radius,
                       std::size_t max_k);

// Column j holds the indices of the k smallest entries of column j of dist,
// ascending by value, ties broken by lower index. k x dist.cols() result.
IndexMatrix topk_smallest(const Mat& dist, std::size_t k);

// Exactly n points: a random subset when the cloud is large enough, else the
// whole cloud plus uniform with-replacement draws.
PointCloud random_subsample(const PointCloud& points, std::size_t n, Rng& rng);

}  // namespace bat
