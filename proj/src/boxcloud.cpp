#include "bat/boxcloud.hpp"

#include <cmath>

#include "bat/kernels.hpp"

namespace bat {

Mat compute_boxcloud(const PointCloud& points, const Box7& b) {
    Mat out;
    kernels::point_to_boxpoints(points, box_points(b), out);
    if (out.rows() == 0) return Mat(0, 9);
    return out;
}

Mat compute_offset_boxcloud(const PointCloud& points, const Box7& b) {
    const PointCloud local = to_object_frame(points, b);
    // Box points in the object frame form the exact half-extent lattice.
    Mat q(9, 3);
    for (int j = 0; j < 8; ++j) {
        q.at(j, 0) = ((j & 4) ? 1.0 : -1.0) * b.w * 0.5;
        q.at(j, 1) = ((j & 2) ? 1.0 : -1.0) * b.l * 0.5;
        q.at(j, 2) = ((j & 1) ? 1.0 : -1.0) * b.h * 0.5;
    }
    Mat out(points.rows(), 27);
    for (std::size_t i = 0; i < points.rows(); ++i)
        for (int j = 0; j < 9; ++j) {
            out.at(i, 3 * j + 0) = local.at(i, 0) - q.at(j, 0);
            out.at(i, 3 * j + 1) = local.at(i, 1) - q.at(j, 1);
            out.at(i, 3 * j + 2) = local.at(i, 2) - q.at(j, 2);
        }
    return out;
}

Mat pairwise_distance_map(const Mat& ct, const Mat& cs) {
    if (ct.cols() != cs.cols())
        throw DimensionError("pairwise_distance_map: " + std::to_string(ct.cols()) + " vs " +
                             std::to_string(cs.cols()) + " columns");
    Mat out;
    kernels::pairwise_sqdist(ct, cs, out);
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = std::sqrt(out.data()[i]);
    return out;
}

}  // namespace bat
