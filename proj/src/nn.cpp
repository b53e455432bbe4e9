#include "bat/nn.hpp"

#include <cmath>
#include <cstring>
#include <map>

namespace bat {

Linear::Linear(std::size_t in, std::size_t out, Rng& rng) {
    if (in == 0 || out == 0) throw ArgumentError("linear layer needs nonzero widths");
    double bound = 1.0 / std::sqrt(static_cast<double>(in));
    std::vector<double> wv(in * out);
    for (double& v : wv) v = rng.uniform(-bound, bound);
    std::vector<double> bv(out);
    for (double& v : bv) v = rng.uniform(-bound, bound);
    w = Tensor({in, out}, std::move(wv));
    b = Tensor({out}, std::move(bv));
}

Tensor Linear::apply(const Tensor& x, Tape* tape) const {
    Tensor wt = tape ? tape->watch(w) : w;
    Tensor bt = tape ? tape->watch(b) : b;
    return broadcast_add_bias(matmul(x, wt), bt);
}

Mlp::Mlp(const std::vector<std::size_t>& widths, bool relu_last_, Rng& rng)
    : relu_last(relu_last_) {
    if (widths.size() < 2) throw ArgumentError("mlp needs at least input and output widths");
    for (std::size_t i = 0; i + 1 < widths.size(); ++i)
        layers.emplace_back(widths[i], widths[i + 1], rng);
}

Tensor Mlp::apply(const Tensor& x, Tape* tape) const {
    Tensor h = x;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        h = layers[i].apply(h, tape);
        if (i + 1 < layers.size() || relu_last) h = relu(h);
    }
    return h;
}

void Mlp::collect(const std::string& prefix, std::vector<NamedTensor>& out) {
    for (std::size_t i = 0; i < layers.size(); ++i) {
        out.push_back({prefix + ".w" + std::to_string(i), layers[i].w});
        out.push_back({prefix + ".b" + std::to_string(i), layers[i].b});
    }
}

void assign_params(std::vector<NamedTensor>& dst, const std::vector<NamedTensor>& src) {
    std::map<std::string, const Tensor*> by_name;
    for (const auto& p : src) by_name[p.name] = &p.value;
    for (auto& d : dst) {
        auto it = by_name.find(d.name);
        if (it == by_name.end()) throw FormatError("checkpoint is missing parameter " + d.name);
        const Tensor& s = *it->second;
        if (s.shape() != d.value.shape())
            throw FormatError("parameter " + d.name + " has shape " + shape_str(s.shape()) +
                              ", expected " + shape_str(d.value.shape()));
        std::memcpy(d.value.data(), s.data(), s.size() * sizeof(double));
    }
}

}  // namespace bat
