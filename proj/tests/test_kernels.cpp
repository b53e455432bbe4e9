#include <doctest.h>

#include <cmath>
#include <cstring>
#include <tuple>
#include <vector>

#include "bat/common.hpp"
#include "bat/kernels.hpp"

using namespace bat;

namespace {

Mat random_mat(std::size_t r, std::size_t c, Rng& rng) {
    Mat m(r, c);
    for (std::size_t i = 0; i < r * c; ++i) m.data()[i] = rng.uniform(-3.0, 3.0);
    return m;
}

bool bitwise_equal(const double* a, const double* b, std::size_t n) {
    return std::memcmp(a, b, n * sizeof(double)) == 0;
}

struct ParallelGuard {
    explicit ParallelGuard(bool on) { kernels::set_parallel(on); }
    ~ParallelGuard() { kernels::set_parallel(true); }
};

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("matmul matches serial reference bitwise") {
    Rng rng(11);
    const std::tuple<int, int, int> sizes[] = {{1, 1, 1}, {3, 4, 5}, {17, 33, 9}, {64, 64, 64}};
    for (auto [m, k, n] : sizes) {
        Mat a = random_mat(m, k, rng), b = random_mat(k, n, rng);
        std::vector<double> c_par(m * n), c_ser(m * n);
        kernels::matmul(a.data(), b.data(), c_par.data(), m, k, n);
        kernels::matmul_serial(a.data(), b.data(), c_ser.data(), m, k, n);
        CHECK(bitwise_equal(c_par.data(), c_ser.data(), c_par.size()));
    }
}

TEST_CASE("matmul transpose flags") {
    Rng rng(12);
    const std::size_t m = 5, k = 7, n = 4;
    Mat a = random_mat(m, k, rng), b = random_mat(k, n, rng);
    Mat at(k, m), bt(n, k);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < k; ++j) at.at(j, i) = a.at(i, j);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < n; ++j) bt.at(j, i) = b.at(i, j);
    std::vector<double> plain(m * n), ta(m * n), tb(m * n), tab(m * n);
    kernels::matmul(a.data(), b.data(), plain.data(), m, k, n);
    kernels::matmul(at.data(), b.data(), ta.data(), m, k, n, true, false);
    kernels::matmul(a.data(), bt.data(), tb.data(), m, k, n, false, true);
    kernels::matmul(at.data(), bt.data(), tab.data(), m, k, n, true, true);
    for (std::size_t i = 0; i < m * n; ++i) {
        CHECK(ta[i] == doctest::Approx(plain[i]));
        CHECK(tb[i] == doctest::Approx(plain[i]));
        CHECK(tab[i] == doctest::Approx(plain[i]));
    }
}

TEST_CASE("matmul accumulate flag adds onto the output") {
    Rng rng(13);
    const std::size_t m = 3, k = 4, n = 2;
    Mat a = random_mat(m, k, rng), b = random_mat(k, n, rng);
    std::vector<double> base(m * n, 0.5), once(m * n);
    kernels::matmul(a.data(), b.data(), once.data(), m, k, n);
    kernels::matmul(a.data(), b.data(), base.data(), m, k, n, false, false, true);
    for (std::size_t i = 0; i < m * n; ++i) CHECK(base[i] == doctest::Approx(0.5 + once[i]));
}

TEST_CASE("pairwise_sqdist matches serial reference bitwise and brute force") {
    Rng rng(14);
    Mat a = random_mat(50, 9, rng), b = random_mat(33, 9, rng);
    Mat par, ser;
    kernels::pairwise_sqdist(a, b, par);
    kernels::pairwise_sqdist_serial(a, b, ser);
    CHECK(par.rows() == 50);
    CHECK(par.cols() == 33);
    CHECK(bitwise_equal(par.data(), ser.data(), par.size()));
    for (std::size_t i = 0; i < a.rows(); i += 7)
        for (std::size_t j = 0; j < b.rows(); j += 5) {
            double s = 0.0;
            for (std::size_t c = 0; c < 9; ++c) {
                double d = a.at(i, c) - b.at(j, c);
                s += d * d;
            }
            CHECK(par.at(i, j) == doctest::Approx(s).epsilon(1e-12));
        }
    CHECK(par.at(0, 0) >= 0.0);
}

TEST_CASE("pairwise_sqdist clamps tiny negatives to zero") {
    Mat a(2, 3, {1e8, 1.0, 0.0, 1e8, 1.0 + 1e-9, 0.0});
    Mat out;
    kernels::pairwise_sqdist(a, a, out);
    CHECK(out.at(0, 0) == 0.0);
    CHECK(out.at(1, 1) == 0.0);
    CHECK(out.at(0, 1) >= 0.0);
    CHECK(out.at(1, 0) >= 0.0);
}

TEST_CASE("point_to_boxpoints matches serial bitwise") {
    Rng rng(15);
    Mat pts = random_mat(41, 3, rng), box = random_mat(9, 3, rng);
    Mat par, ser;
    kernels::point_to_boxpoints(pts, box, par);
    kernels::point_to_boxpoints_serial(pts, box, ser);
    CHECK(bitwise_equal(par.data(), ser.data(), par.size()));
    double dx = pts.at(3, 0) - box.at(2, 0), dy = pts.at(3, 1) - box.at(2, 1),
           dz = pts.at(3, 2) - box.at(2, 2);
    CHECK(par.at(3, 2) == doctest::Approx(std::sqrt(dx * dx + dy * dy + dz * dz)));
}

TEST_CASE("ball_query_groups matches serial bitwise") {
    Rng rng(16);
    Mat pts = random_mat(200, 3, rng), centers = random_mat(17, 3, rng);
    const std::size_t max_k = 8;
    std::vector<std::uint32_t> par(17 * max_k), ser(17 * max_k);
    kernels::ball_query_groups(centers, pts, 1.0, max_k, par.data());
    kernels::ball_query_groups_serial(centers, pts, 1.0, max_k, ser.data());
    CHECK(par == ser);
}

TEST_CASE("ball_query picks ascending in-radius indices and pads with the first") {
    Mat pts(5, 3,
            {0.0, 0.0, 0.0,
             0.1, 0.0, 0.0,
             5.0, 0.0, 0.0,
             0.0, 0.2, 0.0,
             0.0, 0.0, 9.0});
    Mat center(1, 3, {0.0, 0.0, 0.0});
    std::vector<std::uint32_t> out(4);
    kernels::ball_query_groups(center, pts, 0.5, 4, out.data());
    CHECK(out == std::vector<std::uint32_t>{0, 1, 3, 0});
}

TEST_CASE("ball_query caps at max_k in scan order") {
    Mat pts(4, 3, {0, 0, 0, 0.1, 0, 0, 0.2, 0, 0, 0.3, 0, 0});
    Mat center(1, 3, {0, 0, 0});
    std::vector<std::uint32_t> out(2);
    kernels::ball_query_groups(center, pts, 1.0, 2, out.data());
    CHECK(out == std::vector<std::uint32_t>{0, 1});
}

TEST_CASE("ball_query falls back to the nearest point when the ball is empty") {
    Mat pts(3, 3, {10, 0, 0, 4, 0, 0, 6, 0, 0});
    Mat center(1, 3, {0, 0, 0});
    std::vector<std::uint32_t> out(3);
    kernels::ball_query_groups(center, pts, 0.5, 3, out.data());
    CHECK(out == std::vector<std::uint32_t>{1, 1, 1});
}

TEST_CASE("ball_query radius boundary is inclusive") {
    Mat pts(2, 3, {1.0, 0.0, 0.0, 3.0, 0.0, 0.0});
    Mat center(1, 3, {0, 0, 0});
    std::vector<std::uint32_t> out(2);
    kernels::ball_query_groups(center, pts, 1.0, 2, out.data());
    CHECK(out == std::vector<std::uint32_t>{0, 0});
}

TEST_CASE("min_sqdist_update matches serial bitwise") {
    Rng rng(17);
    Mat pts = random_mat(300, 3, rng);
    std::vector<double> d_par(300, 1e30), d_ser(300, 1e30);
    Vec3 p{0.5, -0.25, 1.0};
    kernels::min_sqdist_update(pts, p, d_par.data());
    kernels::min_sqdist_update_serial(pts, p, d_ser.data());
    CHECK(bitwise_equal(d_par.data(), d_ser.data(), 300));
    Vec3 q = pts.row3(7) - p;
    CHECK(d_par[7] == doctest::Approx(q.dot(q)));
}

TEST_CASE("parallel switch forces the serial path") {
    ParallelGuard guard(false);
    CHECK_FALSE(kernels::parallel_enabled());
    Rng rng(18);
    Mat a = random_mat(8, 8, rng), b = random_mat(8, 8, rng);
    std::vector<double> c1(64), c2(64);
    kernels::matmul(a.data(), b.data(), c1.data(), 8, 8, 8);
    kernels::matmul_serial(a.data(), b.data(), c2.data(), 8, 8, 8);
    CHECK(bitwise_equal(c1.data(), c2.data(), 64));
}

}
