#include "bat/common.hpp"

#include <cmath>

namespace bat {

double Vec3::norm() const { return std::sqrt(x * x + y * y + z * z); }

Mat::Mat(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), v_(std::move(values)) {
    if (v_.size() != rows_ * cols_) {
        throw DimensionError("Mat: " + std::to_string(v_.size()) + " values for " +
                             std::to_string(rows_) + "x" + std::to_string(cols_));
    }
}

void Mat::set_row3(std::size_t r, const Vec3& p) {
    at(r, 0) = p.x;
    at(r, 1) = p.y;
    at(r, 2) = p.z;
}

Mat Mat::gather(const std::vector<std::uint32_t>& idx) const {
    Mat out(idx.size(), cols_);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const double* src = row(idx[i]);
        double* dst = out.row(i);
        for (std::size_t c = 0; c < cols_; ++c) dst[c] = src[c];
    }
    return out;
}

void Mat::append_row(const double* p, std::size_t n) {
    if (rows_ == 0 && cols_ == 0) cols_ = n;
    if (n != cols_) {
        throw DimensionError("Mat::append_row: got " + std::to_string(n) + " values, want " +
                             std::to_string(cols_));
    }
    v_.insert(v_.end(), p, p + n);
    ++rows_;
}

std::string shape_str(const std::vector<std::size_t>& shape) {
    std::string s = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + ")";
}

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& s : s_) s = splitmix64(x);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t x = seed;
    std::uint64_t a = splitmix64(x);
    x ^= stream * 0xda942042e4dd58b5ULL;
    for (auto& s : s_) s = splitmix64(x);
    s_[0] ^= a;
}

std::uint64_t Rng::next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::size_t Rng::index(std::size_t n) {
    if (n == 0) throw ArgumentError("Rng::index: n must be positive");
#ifdef __SIZEOF_INT128__
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
#else
    return static_cast<std::size_t>(next_u64() % n);
#endif
}

std::vector<std::uint32_t> Rng::sample_without_replacement(std::size_t n, std::size_t k) {
    if (k > n) throw ArgumentError("sample_without_replacement: k > n");
    std::vector<std::uint32_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<std::uint32_t>(i);
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + index(n - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

}  // namespace bat
