#pragma once

#include "bat/box.hpp"
#include "bat/common.hpp"

namespace bat {

// N x 9 matrix of Euclidean distances from each point to the 9 box points
// (8 corners in canonical order, then the center). Empty clouds give an
// empty (0 x 9) result.
Mat compute_boxcloud(const PointCloud& points, const Box7& b);

// N x 27 variant: row i concatenates the 9 offsets p_i - q_j expressed in the
// object frame of b. Block norms reproduce compute_boxcloud entries.
Mat compute_offset_boxcloud(const PointCloud& points, const Box7& b);

// (i,j) = L2 distance between row i of ct and row j of cs, computed via the
// |a|^2 + |b|^2 - 2ab expansion with a clamp at zero before the square root.
Mat pairwise_distance_map(const Mat& ct, const Mat& cs);

}  // namespace bat
