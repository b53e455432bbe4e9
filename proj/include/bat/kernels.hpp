#pragma once

#include <cstdint>
#include <vector>

#include "bat/common.hpp"

// Data-parallel inner loops, each in two builds: an OpenMP kernel used by
// default and a serial reference used for equivalence tests and as the
// baseline in the benchmark tool. Thread partitioning never reorders the
// per-element arithmetic, so both builds produce bit-identical results.

namespace bat::kernels {

// Process-wide switch; OpenMP kernels fall back to the serial path when off.
void set_parallel(bool on);
bool parallel_enabled();

// C := A(m x k) * B(k x n), or C += ... when acc is set. trans_a/trans_b read
// the operand transposed (dims m,k,n refer to the operation, not storage).
void matmul(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
            std::size_t n, bool trans_a = false, bool trans_b = false, bool acc = false);
void matmul_serial(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                   std::size_t n, bool trans_a = false, bool trans_b = false, bool acc = false);

// out(i,j) := squared L2 distance between rows a_i and b_j, via the
// |a|^2 + |b|^2 - 2ab expansion with a clamp at zero.
void pairwise_sqdist(const Mat& a, const Mat& b, Mat& out);
void pairwise_sqdist_serial(const Mat& a, const Mat& b, Mat& out);

// out(i,j) := ||points_i - box_pts_j|| for 9 box points.
void point_to_boxpoints(const Mat& points, const Mat& box_pts, Mat& out);
void point_to_boxpoints_serial(const Mat& points, const Mat& box_pts, Mat& out);

// Per center: indices of the first max_k points within radius (ascending
// source order); underfull groups repeat the first found index; empty groups
// are filled with the nearest point's index.
void ball_query_groups(const Mat& centers, const Mat& points, double radius, std::size_t max_k,
                       std::uint32_t* out);
void ball_query_groups_serial(const Mat& centers, const Mat& points, double radius,
                              std::size_t max_k, std::uint32_t* out);

// dist[i] := min(dist[i], squared distance from points_i to p). The farthest
// point sampling inner loop.
void min_sqdist_update(const Mat& points, const Vec3& p, double* dist);
void min_sqdist_update_serial(const Mat& points, const Vec3& p, double* dist);

}  // namespace bat::kernels
