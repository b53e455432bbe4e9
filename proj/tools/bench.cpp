// Timing comparison between the serial reference kernels and their OpenMP
// counterparts, with a bitwise equality check on every result.
#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bat/common.hpp"
#include "bat/kernels.hpp"

namespace {

using Clock = std::chrono::steady_clock;

bat::Mat random_mat(std::size_t r, std::size_t c, bat::Rng& rng) {
    bat::Mat m(r, c);
    for (std::size_t i = 0; i < r * c; ++i) m.data()[i] = rng.uniform(-3.0, 3.0);
    return m;
}

template <class Fn>
double time_ms(int reps, Fn&& fn) {
    fn();  // warm up
    auto t0 = Clock::now();
    for (int i = 0; i < reps; ++i) fn();
    auto t1 = Clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void report(const std::string& name, double serial_ms, double parallel_ms, bool equal) {
    std::printf("%-28s %10.3f ms %10.3f ms %7.2fx   %s\n", name.c_str(), serial_ms, parallel_ms,
                serial_ms / parallel_ms, equal ? "bitwise-equal" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"serial vs OpenMP kernel benchmark"};
    int scale = 1;
    int reps = 5;
    app.add_option("--scale", scale, "problem size multiplier")->check(CLI::PositiveNumber);
    app.add_option("--reps", reps, "timed repetitions per kernel")->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);

    bat::Rng rng(2024);
    std::printf("%-28s %13s %13s %9s\n", "kernel", "serial", "parallel", "speedup");

    {
        const std::size_t n = 256 * static_cast<std::size_t>(scale);
        bat::Mat a = random_mat(n, n, rng), b = random_mat(n, n, rng);
        std::vector<double> cs(n * n), cp(n * n);
        double ts = time_ms(reps, [&] { bat::kernels::matmul_serial(a.data(), b.data(), cs.data(), n, n, n); });
        bat::kernels::set_parallel(true);
        double tp = time_ms(reps, [&] { bat::kernels::matmul(a.data(), b.data(), cp.data(), n, n, n); });
        report("matmul " + std::to_string(n) + "^3", ts, tp,
               std::memcmp(cs.data(), cp.data(), cs.size() * sizeof(double)) == 0);
    }
    {
        const std::size_t n = 2048 * static_cast<std::size_t>(scale), m = 512;
        bat::Mat a = random_mat(n, 9, rng), b = random_mat(m, 9, rng);
        bat::Mat outs, outp;
        double ts = time_ms(reps, [&] { bat::kernels::pairwise_sqdist_serial(a, b, outs); });
        double tp = time_ms(reps, [&] { bat::kernels::pairwise_sqdist(a, b, outp); });
        report("pairwise_sqdist " + std::to_string(n) + "x" + std::to_string(m), ts, tp,
               std::memcmp(outs.data(), outp.data(), outs.size() * sizeof(double)) == 0);
    }
    {
        const std::size_t n = 8192 * static_cast<std::size_t>(scale);
        bat::Mat pts = random_mat(n, 3, rng), box = random_mat(9, 3, rng);
        bat::Mat outs, outp;
        double ts = time_ms(reps, [&] { bat::kernels::point_to_boxpoints_serial(pts, box, outs); });
        double tp = time_ms(reps, [&] { bat::kernels::point_to_boxpoints(pts, box, outp); });
        report("point_to_boxpoints " + std::to_string(n), ts, tp,
               std::memcmp(outs.data(), outp.data(), outs.size() * sizeof(double)) == 0);
    }
    {
        const std::size_t n = 4096 * static_cast<std::size_t>(scale), c = 64, k = 16;
        bat::Mat pts = random_mat(n, 3, rng), centers = random_mat(c, 3, rng);
        std::vector<std::uint32_t> outs(c * k), outp(c * k);
        double ts = time_ms(reps, [&] {
            bat::kernels::ball_query_groups_serial(centers, pts, 1.0, k, outs.data());
        });
        double tp = time_ms(reps, [&] { bat::kernels::ball_query_groups(centers, pts, 1.0, k, outp.data()); });
        report("ball_query " + std::to_string(c) + "x" + std::to_string(n), ts, tp, outs == outp);
    }
    {
        const std::size_t n = 65536 * static_cast<std::size_t>(scale);
        bat::Mat pts = random_mat(n, 3, rng);
        std::vector<double> ds(n, 1e30), dp(n, 1e30);
        bat::Vec3 p{0.1, 0.2, 0.3};
        double ts = time_ms(reps, [&] { bat::kernels::min_sqdist_update_serial(pts, p, ds.data()); });
        double tp = time_ms(reps, [&] { bat::kernels::min_sqdist_update(pts, p, dp.data()); });
        report("min_sqdist_update " + std::to_string(n), ts, tp,
               std::memcmp(ds.data(), dp.data(), n * sizeof(double)) == 0);
    }
    return 0;
}
