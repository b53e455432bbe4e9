#pragma once

#include "bat/common.hpp"

namespace bat {

// Upright oriented box: center, sizes (w,l,h) and heading about the up-axis.
// Sizes must be positive; heading is normalized to (-pi, pi] at construction.
struct Box7 {
    Vec3 center;
    double w = 1.0, l = 1.0, h = 1.0;
    double heading = 0.0;

    Box7() = default;
    Box7(Vec3 c, double w_, double l_, double h_, double theta);

    double volume() const { return w * l * h; }
};

double wrap_angle(double theta);

// The 9 box points: 8 corners ordered by the sign triple of the local offset
// (sx*w/2, sy*l/2, sz*h/2) in binary order (-,-,-), (-,-,+), (-,+,-), (-,+,+),
// (+,-,-), (+,-,+), (+,+,-), (+,+,+), followed by the center. 9 x 3.
Mat box_points(const Box7& b);

// World -> object frame (subtract center, rotate by -heading) and back.
PointCloud to_object_frame(const PointCloud& points, const Box7& b);
PointCloud from_object_frame(const PointCloud& points, const Box7& b);
Vec3 to_object_frame(const Vec3& p, const Box7& b);
Vec3 from_object_frame(const Vec3& p, const Box7& b);

// Boundary-inclusive containment.
bool contains(const Box7& b, const Vec3& p);

// Same center and heading, each size grown by 2*margin (margin per side).
Box7 enlarge(const Box7& b, double margin);

// Overlap of the heading-rotated birds-eye rectangles (convex polygon
// clipping) times the vertical interval overlap, over the union volume.
double iou_3d(const Box7& a, const Box7& b);

double center_distance(const Box7& a, const Box7& b);

}  // namespace bat
