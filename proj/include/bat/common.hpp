#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace bat {

// ---------------------------------------------------------------------------
// Error taxonomy. The CLI maps these onto distinct exit codes: config errors,
// data errors and numerical failures are reported separately.
// ---------------------------------------------------------------------------

struct BatError : std::runtime_error {
    explicit BatError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionError : BatError {
    explicit DimensionError(const std::string& msg) : BatError(msg) {}
};

struct ArgumentError : BatError {
    explicit ArgumentError(const std::string& msg) : BatError(msg) {}
};

struct EmptySetError : BatError {
    explicit EmptySetError(const std::string& msg) : BatError(msg) {}
};

struct FormatError : BatError {
    explicit FormatError(const std::string& msg) : BatError(msg) {}
};

struct ParseError : BatError {
    explicit ParseError(const std::string& msg) : BatError(msg) {}
};

struct ConfigError : BatError {
    explicit ConfigError(const std::string& msg) : BatError(msg) {}
};

struct NumericError : BatError {
    explicit NumericError(const std::string& msg) : BatError(msg) {}
};

// ---------------------------------------------------------------------------
// Small value types shared across modules.
// ---------------------------------------------------------------------------

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm() const;
};

// Dense row-major matrix of doubles. Used for all non-differentiable numeric
// data: point clouds (cols == 3), BoxClouds (cols == 9), distance maps.
class Mat {
public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), v_(rows * cols, 0.0) {}
    Mat(std::size_t rows, std::size_t cols, std::vector<double> values);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return v_.size(); }
    bool empty() const { return rows_ == 0; }

    double& at(std::size_t r, std::size_t c) { return v_[r * cols_ + c]; }
    double at(std::size_t r, std::size_t c) const { return v_[r * cols_ + c]; }
    double* row(std::size_t r) { return v_.data() + r * cols_; }
    const double* row(std::size_t r) const { return v_.data() + r * cols_; }
    double* data() { return v_.data(); }
    const double* data() const { return v_.data(); }

    Vec3 row3(std::size_t r) const { return {at(r, 0), at(r, 1), at(r, 2)}; }
    void set_row3(std::size_t r, const Vec3& p);

    // Rows of this matrix at the given indices, in order.
    Mat gather(const std::vector<std::uint32_t>& idx) const;
    void append_row(const double* p, std::size_t n);
    void append_row3(const Vec3& p) {
        const double q[3] = {p.x, p.y, p.z};
        append_row(q, 3);
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> v_;
};

using PointCloud = Mat;  // N x 3, meters

std::string shape_str(const std::vector<std::size_t>& shape);

// ---------------------------------------------------------------------------
// Deterministic pseudo-random generator (xoshiro256++ seeded via splitmix64).
// Every stochastic component draws from an instance of this type so runs are
// reproducible from a single integer seed, independent of platform libm
// distribution internals.
// ---------------------------------------------------------------------------

class Rng {
public:
    explicit Rng(std::uint64_t seed);
    // Independent substream, e.g. per (frame, object) in the scene generator.
    Rng(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64();
    // Uniform in [0, 1).
    double uniform();
    // Uniform in [lo, hi).
    double uniform(double lo, double hi);
    // Uniform integer in [0, n). n must be > 0.
    std::size_t index(std::size_t n);

    // Partial Fisher-Yates: the first k entries of a shuffled 0..n-1.
    std::vector<std::uint32_t> sample_without_replacement(std::size_t n, std::size_t k);

private:
    std::uint64_t s_[4];
};

}  // namespace bat
