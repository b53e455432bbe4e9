#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bat/box.hpp"

using namespace bat;

namespace {

constexpr double kPi = std::numbers::pi;

Box7 random_box(Rng& rng, double max_center = 3.0) {
    return Box7({rng.uniform(-max_center, max_center), rng.uniform(-max_center, max_center),
                 rng.uniform(-max_center, max_center)},
                rng.uniform(0.5, 3.0), rng.uniform(0.5, 3.0), rng.uniform(0.5, 3.0),
                rng.uniform(-kPi, kPi));
}

// Volume-sampling oracle: draw uniformly inside a, count hits in b.
double iou_monte_carlo(const Box7& a, const Box7& b, std::size_t samples, Rng& rng) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < samples; ++i) {
        Vec3 local{rng.uniform(-a.w / 2, a.w / 2), rng.uniform(-a.l / 2, a.l / 2),
                   rng.uniform(-a.h / 2, a.h / 2)};
        if (contains(b, from_object_frame(local, a))) ++hits;
    }
    const double inter = a.volume() * static_cast<double>(hits) / static_cast<double>(samples);
    return inter / (a.volume() + b.volume() - inter);
}

}  // namespace

TEST_SUITE("box") {

TEST_CASE("construction validates sizes and normalizes heading") {
    CHECK_THROWS_AS(Box7({0, 0, 0}, 0.0, 1, 1, 0), ArgumentError);
    CHECK_THROWS_AS(Box7({0, 0, 0}, 1, -2, 1, 0), ArgumentError);
    CHECK_THROWS_AS(Box7({0, 0, 0}, 1, 1, std::nan(""), 0), ArgumentError);
    CHECK(Box7({0, 0, 0}, 1, 1, 1, 3 * kPi / 2).heading == doctest::Approx(-kPi / 2));
    CHECK(Box7({0, 0, 0}, 1, 1, 1, kPi).heading == doctest::Approx(kPi));
    CHECK(Box7({0, 0, 0}, 1, 1, 1, -kPi).heading == doctest::Approx(kPi));
    CHECK(Box7({0, 0, 0}, 1, 1, 1, 5 * kPi).heading == doctest::Approx(kPi));
}

TEST_CASE("box_points of an axis-aligned cube") {
    Mat pts = box_points(Box7({0, 0, 0}, 2, 2, 2, 0));
    CHECK(pts.rows() == 9);
    for (int j = 0; j < 8; ++j) {
        CHECK(std::fabs(pts.at(j, 0)) == doctest::Approx(1.0));
        CHECK(std::fabs(pts.at(j, 1)) == doctest::Approx(1.0));
        CHECK(std::fabs(pts.at(j, 2)) == doctest::Approx(1.0));
    }
    CHECK(pts.at(8, 0) == 0.0);
    CHECK(pts.at(8, 1) == 0.0);
    CHECK(pts.at(8, 2) == 0.0);
}

TEST_CASE("first corner is center minus half-extents") {
    Mat pts = box_points(Box7({1, 2, 3}, 2, 4, 6, 0));
    CHECK(pts.at(0, 0) == doctest::Approx(0.0));
    CHECK(pts.at(0, 1) == doctest::Approx(0.0));
    CHECK(pts.at(0, 2) == doctest::Approx(0.0));
    // Last corner is center plus half-extents.
    CHECK(pts.at(7, 0) == doctest::Approx(2.0));
    CHECK(pts.at(7, 1) == doctest::Approx(4.0));
    CHECK(pts.at(7, 2) == doctest::Approx(6.0));
}

TEST_CASE("corner order follows the binary sign enumeration") {
    Mat pts = box_points(Box7({0, 0, 0}, 2, 4, 6, 0));
    for (int j = 0; j < 8; ++j) {
        const double sx = (j & 4) ? 1.0 : -1.0;
        const double sy = (j & 2) ? 1.0 : -1.0;
        const double sz = (j & 1) ? 1.0 : -1.0;
        CHECK(pts.at(j, 0) == doctest::Approx(sx * 1.0));
        CHECK(pts.at(j, 1) == doctest::Approx(sy * 2.0));
        CHECK(pts.at(j, 2) == doctest::Approx(sz * 3.0));
    }
}

TEST_CASE("heading pi maps a cube corner set onto itself") {
    Mat base = box_points(Box7({0, 0, 0}, 2, 2, 2, 0));
    Mat flip = box_points(Box7({0, 0, 0}, 2, 2, 2, kPi));
    for (int j = 0; j < 8; ++j) {
        bool found = false;
        for (int i = 0; i < 8; ++i) {
            if (std::fabs(base.at(j, 0) - flip.at(i, 0)) < 1e-9 &&
                std::fabs(base.at(j, 1) - flip.at(i, 1)) < 1e-9 &&
                std::fabs(base.at(j, 2) - flip.at(i, 2)) < 1e-9) {
                found = true;
                break;
            }
        }
        CHECK(found);
    }
}

TEST_CASE("object frame round trip and rigidity") {
    Rng rng(21);
    Box7 b = random_box(rng);
    PointCloud pts(5, 3);
    for (std::size_t i = 0; i < 5; ++i)
        pts.set_row3(i, {rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(-4, 4)});
    PointCloud local = to_object_frame(pts, b);
    PointCloud back = from_object_frame(local, b);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(back.at(i, 0) == doctest::Approx(pts.at(i, 0)).epsilon(1e-12));
        CHECK(back.at(i, 1) == doctest::Approx(pts.at(i, 1)).epsilon(1e-12));
        CHECK(back.at(i, 2) == doctest::Approx(pts.at(i, 2)).epsilon(1e-12));
    }
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = i + 1; j < 5; ++j) {
            double dw = (pts.row3(i) - pts.row3(j)).norm();
            double dl = (local.row3(i) - local.row3(j)).norm();
            CHECK(dw == doctest::Approx(dl).epsilon(1e-12));
        }
    Vec3 origin = to_object_frame(b.center, b);
    CHECK(origin.norm() == doctest::Approx(0.0));
}

TEST_CASE("box_points in the object frame is the half-extent lattice") {
    Rng rng(22);
    for (int trial = 0; trial < 20; ++trial) {
        Box7 b = random_box(rng);
        Mat local = to_object_frame(box_points(b), b);
        for (int j = 0; j < 8; ++j) {
            const double sx = (j & 4) ? 1.0 : -1.0;
            const double sy = (j & 2) ? 1.0 : -1.0;
            const double sz = (j & 1) ? 1.0 : -1.0;
            CHECK(std::fabs(local.at(j, 0) - sx * b.w / 2) < 1e-12);
            CHECK(std::fabs(local.at(j, 1) - sy * b.l / 2) < 1e-12);
            CHECK(std::fabs(local.at(j, 2) - sz * b.h / 2) < 1e-12);
        }
    }
}

TEST_CASE("containment is boundary inclusive") {
    Box7 b({1, 1, 1}, 2, 2, 2, 0);
    CHECK(contains(b, {1, 1, 1}));
    CHECK(contains(b, {2, 2, 2}));
    CHECK(contains(b, {0, 0, 0}));
    CHECK_FALSE(contains(b, {3, 1, 1}));
    CHECK_FALSE(contains(b, {1, 1, 2.0001}));
}

TEST_CASE("containment commutes with joint rigid motion") {
    Rng rng(23);
    for (int trial = 0; trial < 50; ++trial) {
        Box7 b = random_box(rng);
        // Points clearly inside or outside so rounding cannot flip the answer.
        Vec3 local{rng.uniform(-0.45, 0.45) * b.w, rng.uniform(-0.45, 0.45) * b.l,
                   rng.uniform(-0.45, 0.45) * b.h};
        Vec3 p_in = from_object_frame(local, b);
        Vec3 p_out = from_object_frame({b.w, b.l, b.h}, b);
        CHECK(contains(b, p_in));
        CHECK_FALSE(contains(b, p_out));
        const double dtheta = rng.uniform(-kPi, kPi);
        const Vec3 shift{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
        Box7 moved(Vec3{b.center.x * std::cos(dtheta) - b.center.y * std::sin(dtheta),
                        b.center.x * std::sin(dtheta) + b.center.y * std::cos(dtheta),
                        b.center.z} +
                       shift,
                   b.w, b.l, b.h, b.heading + dtheta);
        auto move_point = [&](const Vec3& p) {
            return Vec3{p.x * std::cos(dtheta) - p.y * std::sin(dtheta),
                        p.x * std::sin(dtheta) + p.y * std::cos(dtheta), p.z} +
                   shift;
        };
        CHECK(contains(moved, move_point(p_in)));
        CHECK_FALSE(contains(moved, move_point(p_out)));
    }
}

TEST_CASE("enlarge grows every side") {
    Box7 b({1, 2, 3}, 1, 1, 1, 0.5);
    Box7 e = enlarge(b, 2.0);
    CHECK(e.w == doctest::Approx(5.0));
    CHECK(e.l == doctest::Approx(5.0));
    CHECK(e.h == doctest::Approx(5.0));
    CHECK(e.center.x == b.center.x);
    CHECK(e.heading == b.heading);
    Box7 same = enlarge(b, 0.0);
    CHECK(same.w == b.w);
    CHECK_THROWS_AS(enlarge(b, -0.1), ArgumentError);
    // Nesting: a contained point stays contained as the margin grows.
    Rng rng(24);
    for (int t = 0; t < 20; ++t) {
        Vec3 p{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
        bool prev = contains(b, p);
        for (double m : {0.5, 1.0, 2.0, 4.0}) {
            bool now = contains(enlarge(b, m), p);
            CHECK((!prev || now));
            prev = now;
        }
    }
}

TEST_CASE("iou of identical and disjoint boxes") {
    Rng rng(25);
    for (int t = 0; t < 10; ++t) {
        Box7 b = random_box(rng);
        CHECK(iou_3d(b, b) == doctest::Approx(1.0));
    }
    Box7 a({0, 0, 0}, 1, 1, 1, 0.3);
    Box7 far({10, 0, 0}, 1, 1, 1, -0.7);
    CHECK(iou_3d(a, far) == 0.0);
    // Face-touching boxes intersect with zero volume.
    Box7 touch({1, 0, 0}, 1, 1, 1, 0);
    Box7 origin({0, 0, 0}, 1, 1, 1, 0);
    CHECK(iou_3d(origin, touch) == 0.0);
}

TEST_CASE("iou of half-overlapping unit cubes is one third") {
    Box7 a({0, 0, 0}, 1, 1, 1, 0);
    Box7 b({0.5, 0, 0}, 1, 1, 1, 0);
    CHECK(iou_3d(a, b) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("iou of a square against its 45-degree rotation") {
    Box7 a({0, 0, 0}, 1, 1, 1, 0);
    Box7 b({0, 0, 0}, 1, 1, 1, kPi / 4);
    CHECK(iou_3d(a, b) == doctest::Approx(1.0 / std::sqrt(2.0)));
}

TEST_CASE("iou matches the axis-aligned closed form at zero heading") {
    Rng rng(26);
    for (int t = 0; t < 100; ++t) {
        Box7 a({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)}, rng.uniform(0.5, 2),
               rng.uniform(0.5, 2), rng.uniform(0.5, 2), 0);
        Box7 b({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)}, rng.uniform(0.5, 2),
               rng.uniform(0.5, 2), rng.uniform(0.5, 2), 0);
        auto overlap = [](double c0, double s0, double c1, double s1) {
            return std::max(0.0, std::min(c0 + s0 / 2, c1 + s1 / 2) - std::max(c0 - s0 / 2, c1 - s1 / 2));
        };
        double inter = overlap(a.center.x, a.w, b.center.x, b.w) *
                       overlap(a.center.y, a.l, b.center.y, b.l) *
                       overlap(a.center.z, a.h, b.center.z, b.h);
        double expect = inter / (a.volume() + b.volume() - inter);
        CHECK(iou_3d(a, b) == doctest::Approx(expect).epsilon(1e-10));
    }
}

TEST_CASE("iou is symmetric and bounded") {
    Rng rng(27);
    for (int t = 0; t < 200; ++t) {
        Box7 a = random_box(rng, 1.5), b = random_box(rng, 1.5);
        double ab = iou_3d(a, b), ba = iou_3d(b, a);
        CHECK(ab == doctest::Approx(ba).epsilon(1e-9));
        CHECK(ab >= 0.0);
        CHECK(ab <= 1.0);
    }
}

TEST_CASE("iou agrees with the volume-sampling oracle") {
    Rng rng(28);
    for (int t = 0; t < 10; ++t) {
        Box7 a = random_box(rng, 1.0), b = random_box(rng, 1.0);
        Rng mc(1000 + static_cast<std::uint64_t>(t));
        double sampled = iou_monte_carlo(a, b, 1000000, mc);
        double exact = iou_3d(a, b);
        INFO("pair ", t, ": exact ", exact, " sampled ", sampled);
        CHECK(std::fabs(exact - sampled) < 0.01);
    }
}

TEST_CASE("center distance") {
    Box7 a({0, 0, 0}, 1, 1, 1, 0), b({3, 4, 0}, 2, 2, 2, 1.0);
    CHECK(center_distance(a, b) == doctest::Approx(5.0));
    CHECK(center_distance(b, a) == doctest::Approx(5.0));
    CHECK(center_distance(a, a) == 0.0);
}

}
