#include "bat/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "bat/common.hpp"

namespace bat {

namespace {

constexpr char kMagic[8] = {'B', 'A', 'T', 'C', 'K', 'P', 'T', '1'};

void put_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) {
    uint64_t bits = std::bit_cast<uint64_t>(v);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

struct Reader {
    std::string buf;
    size_t pos = 0;

    void need(size_t n) const {
        if (pos + n > buf.size())
            throw FormatError("checkpoint truncated at byte " + std::to_string(pos));
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<uint32_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
        pos += 4;
        return v;
    }
    double f64() {
        need(8);
        uint64_t bits = 0;
        for (int i = 0; i < 8; ++i)
            bits |= static_cast<uint64_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
        pos += 8;
        return std::bit_cast<double>(bits);
    }
    std::string bytes(size_t n) {
        need(n);
        std::string s = buf.substr(pos, n);
        pos += n;
        return s;
    }
};

}  // namespace

void save_checkpoint(const std::string& path, const std::vector<NamedTensor>& params) {
    std::string out;
    out.append(kMagic, sizeof(kMagic));
    put_u32(out, static_cast<uint32_t>(params.size()));
    for (const auto& p : params) {
        put_u32(out, static_cast<uint32_t>(p.name.size()));
        out.append(p.name);
        const auto& shape = p.value.shape();
        put_u32(out, static_cast<uint32_t>(shape.size()));
        for (size_t d : shape) put_u32(out, static_cast<uint32_t>(d));
        for (size_t i = 0; i < p.value.size(); ++i) put_f64(out, p.value.data()[i]);
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw FormatError("cannot open checkpoint for writing: " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw FormatError("write failed for checkpoint: " + path);
}

std::vector<NamedTensor> load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw FormatError("cannot open checkpoint: " + path);
    Reader r;
    r.buf.assign(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());

    std::string magic = r.bytes(sizeof(kMagic));
    if (std::memcmp(magic.data(), kMagic, sizeof(kMagic)) != 0)
        throw FormatError("bad checkpoint magic in " + path);

    uint32_t count = r.u32();
    std::vector<NamedTensor> params;
    params.reserve(count);
    for (uint32_t i = 0; i < count; ++i) {
        uint32_t name_len = r.u32();
        std::string name = r.bytes(name_len);
        uint32_t rank = r.u32();
        std::vector<size_t> shape(rank);
        size_t numel = 1;
        for (uint32_t d = 0; d < rank; ++d) {
            shape[d] = r.u32();
            numel *= shape[d];
        }
        std::vector<double> values(numel);
        for (size_t j = 0; j < numel; ++j) values[j] = r.f64();
        params.push_back({std::move(name), Tensor(shape, std::move(values))});
    }
    if (r.pos != r.buf.size())
        throw FormatError("trailing bytes after checkpoint payload in " + path);
    return params;
}

}  // namespace bat
