#include "bat/kernels.hpp"

#include <atomic>
#include <cmath>
#include <limits>

namespace bat::kernels {

namespace {
std::atomic<bool> g_parallel{true};

inline double fetch(const double* m, std::size_t rows, std::size_t cols, std::size_t r,
                    std::size_t c, bool trans) {
    (void)rows;
    return trans ? m[c * cols + r] : m[r * cols + c];
}

inline void matmul_row(const double* a, const double* b, double* c, std::size_t i, std::size_t k,
                       std::size_t n, std::size_t a_cols, std::size_t b_cols, bool trans_a,
                       bool trans_b, bool acc) {
    double* out = c + i * n;
    if (!acc)
        for (std::size_t j = 0; j < n; ++j) out[j] = 0.0;
    for (std::size_t p = 0; p < k; ++p) {
        const double av = fetch(a, 0, a_cols, i, p, trans_a);
        if (!trans_b) {
            const double* brow = b + p * b_cols;
            for (std::size_t j = 0; j < n; ++j) out[j] += av * brow[j];
        } else {
            for (std::size_t j = 0; j < n; ++j) out[j] += av * b[j * b_cols + p];
        }
    }
}

inline void pairwise_row(const Mat& a, const Mat& b, Mat& out, const double* bn,
                         std::size_t i) {
    const std::size_t d = a.cols();
    const double* ai = a.row(i);
    double an = 0.0;
    for (std::size_t c = 0; c < d; ++c) an += ai[c] * ai[c];
    double* orow = out.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
        const double* bj = b.row(j);
        double dot = 0.0;
        for (std::size_t c = 0; c < d; ++c) dot += ai[c] * bj[c];
        double sq = an + bn[j] - 2.0 * dot;
        orow[j] = sq > 0.0 ? sq : 0.0;
    }
}

inline void boxpoints_row(const Mat& points, const Mat& box_pts, Mat& out, std::size_t i) {
    const double px = points.at(i, 0), py = points.at(i, 1), pz = points.at(i, 2);
    double* orow = out.row(i);
    for (std::size_t j = 0; j < box_pts.rows(); ++j) {
        const double dx = px - box_pts.at(j, 0);
        const double dy = py - box_pts.at(j, 1);
        const double dz = pz - box_pts.at(j, 2);
        orow[j] = std::sqrt(dx * dx + dy * dy + dz * dz);
    }
}

inline void ball_query_one(const Mat& centers, const Mat& points, double radius,
                           std::size_t max_k, std::uint32_t* out, std::size_t c) {
    const double r2 = radius * radius;
    const double cx = centers.at(c, 0), cy = centers.at(c, 1), cz = centers.at(c, 2);
    std::uint32_t* grp = out + c * max_k;
    std::size_t found = 0;
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t best_idx = 0;
    for (std::size_t i = 0; i < points.rows() && found < max_k; ++i) {
        const double dx = points.at(i, 0) - cx;
        const double dy = points.at(i, 1) - cy;
        const double dz = points.at(i, 2) - cz;
        const double sq = dx * dx + dy * dy + dz * dz;
        if (sq <= r2) {
            grp[found++] = static_cast<std::uint32_t>(i);
        }
        if (sq < best) {
            best = sq;
            best_idx = static_cast<std::uint32_t>(i);
        }
    }
    if (found == 0) {
        // Continue the nearest-point scan over any tail the early exit skipped.
        for (std::size_t i = 0; i < points.rows(); ++i) {
            const double dx = points.at(i, 0) - cx;
            const double dy = points.at(i, 1) - cy;
            const double dz = points.at(i, 2) - cz;
            const double sq = dx * dx + dy * dy + dz * dz;
            if (sq < best) {
                best = sq;
                best_idx = static_cast<std::uint32_t>(i);
            }
        }
        for (std::size_t k = 0; k < max_k; ++k) grp[k] = best_idx;
    } else {
        for (std::size_t k = found; k < max_k; ++k) grp[k] = grp[0];
    }
}

}  // namespace

void set_parallel(bool on) { g_parallel.store(on, std::memory_order_relaxed); }
bool parallel_enabled() { return g_parallel.load(std::memory_order_relaxed); }

void matmul_serial(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                   std::size_t n, bool trans_a, bool trans_b, bool acc) {
    const std::size_t a_cols = trans_a ? m : k;
    const std::size_t b_cols = trans_b ? k : n;
    for (std::size_t i = 0; i < m; ++i)
        matmul_row(a, b, c, i, k, n, a_cols, b_cols, trans_a, trans_b, acc);
}

void matmul(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
            std::size_t n, bool trans_a, bool trans_b, bool acc) {
    if (!parallel_enabled()) {
        matmul_serial(a, b, c, m, k, n, trans_a, trans_b, acc);
        return;
    }
    const std::size_t a_cols = trans_a ? m : k;
    const std::size_t b_cols = trans_b ? k : n;
    const std::int64_t rows = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static) if (rows * static_cast<std::int64_t>(k * n) > 16384)
    for (std::int64_t i = 0; i < rows; ++i) {
        matmul_row(a, b, c, static_cast<std::size_t>(i), k, n, a_cols, b_cols, trans_a, trans_b, acc);
    }
}

void pairwise_sqdist_serial(const Mat& a, const Mat& b, Mat& out) {
    if (a.cols() != b.cols()) {
        throw DimensionError("pairwise_sqdist: column mismatch " + std::to_string(a.cols()) +
                             " vs " + std::to_string(b.cols()));
    }
    out = Mat(a.rows(), b.rows());
    std::vector<double> bn(b.rows(), 0.0);
    for (std::size_t j = 0; j < b.rows(); ++j) {
        const double* bj = b.row(j);
        for (std::size_t c = 0; c < b.cols(); ++c) bn[j] += bj[c] * bj[c];
    }
    for (std::size_t i = 0; i < a.rows(); ++i) pairwise_row(a, b, out, bn.data(), i);
}

void pairwise_sqdist(const Mat& a, const Mat& b, Mat& out) {
    if (!parallel_enabled()) {
        pairwise_sqdist_serial(a, b, out);
        return;
    }
    if (a.cols() != b.cols()) {
        throw DimensionError("pairwise_sqdist: column mismatch " + std::to_string(a.cols()) +
                             " vs " + std::to_string(b.cols()));
    }
    out = Mat(a.rows(), b.rows());
    std::vector<double> bn(b.rows(), 0.0);
    for (std::size_t j = 0; j < b.rows(); ++j) {
        const double* bj = b.row(j);
        for (std::size_t c = 0; c < b.cols(); ++c) bn[j] += bj[c] * bj[c];
    }
    const std::int64_t rows = static_cast<std::int64_t>(a.rows());
#pragma omp parallel for schedule(static) if (rows * static_cast<std::int64_t>(b.rows()) > 4096)
    for (std::int64_t i = 0; i < rows; ++i) {
        pairwise_row(a, b, out, bn.data(), static_cast<std::size_t>(i));
    }
}

void point_to_boxpoints_serial(const Mat& points, const Mat& box_pts, Mat& out) {
    out = Mat(points.rows(), box_pts.rows());
    for (std::size_t i = 0; i < points.rows(); ++i) boxpoints_row(points, box_pts, out, i);
}

void point_to_boxpoints(const Mat& points, const Mat& box_pts, Mat& out) {
    if (!parallel_enabled()) {
        point_to_boxpoints_serial(points, box_pts, out);
        return;
    }
    out = Mat(points.rows(), box_pts.rows());
    const std::int64_t rows = static_cast<std::int64_t>(points.rows());
#pragma omp parallel for schedule(static) if (rows > 512)
    for (std::int64_t i = 0; i < rows; ++i) {
        boxpoints_row(points, box_pts, out, static_cast<std::size_t>(i));
    }
}

void ball_query_groups_serial(const Mat& centers, const Mat& points, double radius,
                              std::size_t max_k, std::uint32_t* out) {
    for (std::size_t c = 0; c < centers.rows(); ++c) {
        ball_query_one(centers, points, radius, max_k, out, c);
    }
}

void ball_query_groups(const Mat& centers, const Mat& points, double radius, std::size_t max_k,
                       std::uint32_t* out) {
    if (!parallel_enabled()) {
        ball_query_groups_serial(centers, points, radius, max_k, out);
        return;
    }
    const std::int64_t n = static_cast<std::int64_t>(centers.rows());
#pragma omp parallel for schedule(static) if (n * static_cast<std::int64_t>(points.rows()) > 4096)
    for (std::int64_t c = 0; c < n; ++c) {
        ball_query_one(centers, points, radius, max_k, out, static_cast<std::size_t>(c));
    }
}

void min_sqdist_update_serial(const Mat& points, const Vec3& p, double* dist) {
    for (std::size_t i = 0; i < points.rows(); ++i) {
        const double dx = points.at(i, 0) - p.x;
        const double dy = points.at(i, 1) - p.y;
        const double dz = points.at(i, 2) - p.z;
        const double sq = dx * dx + dy * dy + dz * dz;
        if (sq < dist[i]) dist[i] = sq;
    }
}

void min_sqdist_update(const Mat& points, const Vec3& p, double* dist) {
    if (!parallel_enabled()) {
        min_sqdist_update_serial(points, p, dist);
        return;
    }
    const std::int64_t n = static_cast<std::int64_t>(points.rows());
#pragma omp parallel for schedule(static) if (n > 4096)
    for (std::int64_t i = 0; i < n; ++i) {
        const double dx = points.at(i, 0) - p.x;
        const double dy = points.at(i, 1) - p.y;
        const double dz = points.at(i, 2) - p.z;
        const double sq = dx * dx + dy * dy + dz * dz;
        if (sq < dist[i]) dist[i] = sq;
    }
}

}  // namespace bat::kernels
