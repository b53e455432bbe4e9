#include "bat/box.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace bat {

double wrap_angle(double theta) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double t = std::fmod(theta, two_pi);
    if (t <= -std::numbers::pi) t += two_pi;
    if (t > std::numbers::pi) t -= two_pi;
    return t;
}

Box7::Box7(Vec3 c, double w_, double l_, double h_, double theta) : center(c), w(w_), l(l_), h(h_) {
    if (!(std::isfinite(w) && std::isfinite(l) && std::isfinite(h)) || w <= 0.0 || l <= 0.0 || h <= 0.0)
        throw ArgumentError("Box7: sizes must be positive, got (" + std::to_string(w) + ", " +
                            std::to_string(l) + ", " + std::to_string(h) + ")");
    if (!std::isfinite(c.x) || !std::isfinite(c.y) || !std::isfinite(c.z) || !std::isfinite(theta))
        throw ArgumentError("Box7: non-finite field");
    heading = wrap_angle(theta);
}

Mat box_points(const Box7& b) {
    const double c = std::cos(b.heading), s = std::sin(b.heading);
    Mat pts(9, 3);
    for (int j = 0; j < 8; ++j) {
        const double sx = (j & 4) ? 1.0 : -1.0;
        const double sy = (j & 2) ? 1.0 : -1.0;
        const double sz = (j & 1) ? 1.0 : -1.0;
        const double lx = sx * b.w * 0.5, ly = sy * b.l * 0.5, lz = sz * b.h * 0.5;
        pts.at(j, 0) = b.center.x + c * lx - s * ly;
        pts.at(j, 1) = b.center.y + s * lx + c * ly;
        pts.at(j, 2) = b.center.z + lz;
    }
    pts.set_row3(8, b.center);
    return pts;
}

Vec3 to_object_frame(const Vec3& p, const Box7& b) {
    const double c = std::cos(b.heading), s = std::sin(b.heading);
    const double dx = p.x - b.center.x, dy = p.y - b.center.y;
    return {c * dx + s * dy, -s * dx + c * dy, p.z - b.center.z};
}

Vec3 from_object_frame(const Vec3& p, const Box7& b) {
    const double c = std::cos(b.heading), s = std::sin(b.heading);
    return {b.center.x + c * p.x - s * p.y, b.center.y + s * p.x + c * p.y, b.center.z + p.z};
}

PointCloud to_object_frame(const PointCloud& points, const Box7& b) {
    PointCloud out(points.rows(), 3);
    for (std::size_t i = 0; i < points.rows(); ++i) out.set_row3(i, to_object_frame(points.row3(i), b));
    return out;
}

PointCloud from_object_frame(const PointCloud& points, const Box7& b) {
    PointCloud out(points.rows(), 3);
    for (std::size_t i = 0; i < points.rows(); ++i) out.set_row3(i, from_object_frame(points.row3(i), b));
    return out;
}

bool contains(const Box7& b, const Vec3& p) {
    const Vec3 q = to_object_frame(p, b);
    return std::fabs(q.x) <= b.w * 0.5 && std::fabs(q.y) <= b.l * 0.5 && std::fabs(q.z) <= b.h * 0.5;
}

Box7 enlarge(const Box7& b, double margin) {
    if (!(margin >= 0.0)) throw ArgumentError("enlarge: margin must be >= 0, got " + std::to_string(margin));
    return Box7(b.center, b.w + 2.0 * margin, b.l + 2.0 * margin, b.h + 2.0 * margin, b.heading);
}

namespace {

struct P2 {
    double x, y;
};

// Birds-eye rectangle corners, counter-clockwise.
std::vector<P2> bev_rect(const Box7& b) {
    const double c = std::cos(b.heading), s = std::sin(b.heading);
    const double hw = b.w * 0.5, hl = b.l * 0.5;
    const P2 local[4] = {{hw, hl}, {-hw, hl}, {-hw, -hl}, {hw, -hl}};
    std::vector<P2> out(4);
    for (int i = 0; i < 4; ++i)
        out[i] = {b.center.x + c * local[i].x - s * local[i].y,
                  b.center.y + s * local[i].x + c * local[i].y};
    return out;
}

double cross(const P2& o, const P2& a, const P2& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Sutherland-Hodgman: clip a convex CCW subject against one CCW clip edge.
std::vector<P2> clip_edge(const std::vector<P2>& poly, const P2& e0, const P2& e1) {
    std::vector<P2> out;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const P2& cur = poly[i];
        const P2& nxt = poly[(i + 1) % n];
        const bool cur_in = cross(e0, e1, cur) >= 0.0;
        const bool nxt_in = cross(e0, e1, nxt) >= 0.0;
        if (cur_in) out.push_back(cur);
        if (cur_in != nxt_in) {
            const double dc = cross(e0, e1, cur);
            const double dn = cross(e0, e1, nxt);
            const double t = dc / (dc - dn);
            out.push_back({cur.x + t * (nxt.x - cur.x), cur.y + t * (nxt.y - cur.y)});
        }
    }
    return out;
}

double polygon_area(const std::vector<P2>& poly) {
    if (poly.size() < 3) return 0.0;
    double a = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const P2& p = poly[i];
        const P2& q = poly[(i + 1) % poly.size()];
        a += p.x * q.y - q.x * p.y;
    }
    return std::fabs(a) * 0.5;
}

}  // namespace

double iou_3d(const Box7& a, const Box7& b) {
    std::vector<P2> poly = bev_rect(a);
    const std::vector<P2> clip = bev_rect(b);
    for (std::size_t i = 0; i < clip.size() && !poly.empty(); ++i)
        poly = clip_edge(poly, clip[i], clip[(i + 1) % clip.size()]);
    const double bev = polygon_area(poly);
    const double z_lo = std::max(a.center.z - a.h * 0.5, b.center.z - b.h * 0.5);
    const double z_hi = std::min(a.center.z + a.h * 0.5, b.center.z + b.h * 0.5);
    const double inter = bev * std::max(0.0, z_hi - z_lo);
    const double uni = a.volume() + b.volume() - inter;
    return std::clamp(inter / uni, 0.0, 1.0);
}

double center_distance(const Box7& a, const Box7& b) { return (a.center - b.center).norm(); }

}  // namespace bat
