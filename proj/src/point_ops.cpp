#include "bat/point_ops.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "bat/kernels.hpp"

namespace bat {

IndexMatrix farthest_point_sampling(const PointCloud& points, std::size_t m, std::size_t start) {
    const std::size_t n = points.rows();
    if (n == 0) throw EmptySetError("farthest_point_sampling: empty cloud");
    if (m > n)
        throw ArgumentError("farthest_point_sampling: m = " + std::to_string(m) + " > " +
                            std::to_string(n) + " points");
    if (start >= n) throw ArgumentError("farthest_point_sampling: start index out of range");
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    std::vector<char> taken(n, 0);
    IndexMatrix out(1, m);
    std::uint32_t cur = static_cast<std::uint32_t>(start);
    for (std::size_t i = 0; i < m; ++i) {
        out.at(0, i) = cur;
        taken[cur] = 1;
        kernels::min_sqdist_update(points, points.row3(cur), dist.data());
        if (i + 1 == m) break;
        double best = -1.0;
        std::uint32_t next = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (!taken[j] && dist[j] > best) {
                best = dist[j];
                next = static_cast<std::uint32_t>(j);
            }
        }
        cur = next;
    }
    return out;
}

IndexMatrix ball_query(const PointCloud& centers, const PointCloud& points, double radius,
                       std::size_t max_k) {
    if (!(radius > 0.0)) throw ArgumentError("ball_query: radius must be positive");
    if (max_k == 0) throw ArgumentError("ball_query: max_k must be at least 1");
    if (points.rows() == 0) throw EmptySetError("ball_query: empty point cloud");
    IndexMatrix out(centers.rows(), max_k);
    kernels::ball_query_groups(centers, points, radius, max_k, out.data());
    return out;
}

IndexMatrix topk_smallest(const Mat& dist, std::size_t k) {
    const std::size_t m1 = dist.rows(), m2 = dist.cols();
    if (k > m1)
        throw ArgumentError("topk_smallest: k = " + std::to_string(k) + " > " + std::to_string(m1) +
                            " rows");
    IndexMatrix out(k, m2);
    std::vector<std::uint32_t> idx(m1);
    for (std::size_t j = 0; j < m2; ++j) {
        std::iota(idx.begin(), idx.end(), 0u);
        std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                          [&](std::uint32_t a, std::uint32_t b) {
                              const double va = dist.at(a, j), vb = dist.at(b, j);
                              return va < vb || (va == vb && a < b);
                          });
        for (std::size_t r = 0; r < k; ++r) out.at(r, j) = idx[r];
    }
    return out;
}

PointCloud random_subsample(const PointCloud& points, std::size_t n, Rng& rng) {
    const std::size_t have = points.rows();
    if (have == 0) throw EmptySetError("random_subsample: empty cloud");
    if (have >= n) return points.gather(rng.sample_without_replacement(have, n));
    std::vector<std::uint32_t> idx(n);
    for (std::size_t i = 0; i < have; ++i) idx[i] = static_cast<std::uint32_t>(i);
    for (std::size_t i = have; i < n; ++i) idx[i] = static_cast<std::uint32_t>(rng.index(have));
    return points.gather(idx);
}

}  // namespace bat
